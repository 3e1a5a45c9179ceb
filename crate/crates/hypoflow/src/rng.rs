//! Deterministic, splittable pseudo-random streams.
//!
//! All "random state" generation in experiments goes through
//! [`Xoshiro256pp`], the xoshiro256++ generator of Blackman and Vigna,
//! seeded through SplitMix64. Both algorithms are fully determined by their
//! public constants, so any implementation language reproduces identical
//! streams from the same 64-bit seed. Independent substreams are obtained
//! with [`Xoshiro256pp::split`], which applies the generator's `jump`
//! polynomial (2^128 steps).

/// SplitMix64 step, used only for seeding.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// xoshiro256++ generator.
#[derive(Clone, Debug)]
pub struct Xoshiro256pp {
    s: [u64; 4],
}

const JUMP: [u64; 4] = [
    0x180e_c6d3_3cfd_0aba,
    0xd5a6_1266_f0c9_392c,
    0xa958_9759_90e0_741d,
    0x39ab_dc45_29b1_661c,
];

impl Xoshiro256pp {
    /// Seed the full 256-bit state from a 64-bit seed via SplitMix64.
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[-1, 1)`.
    pub fn next_symmetric(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    /// Standard normal variate (Box-Muller; consumes two uniforms).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Advance this stream by 2^128 steps and return the pre-jump state as
    /// an independent substream.
    pub fn split(&mut self) -> Self {
        let child = self.clone();
        let mut s = [0u64; 4];
        for jw in JUMP {
            for b in 0..64 {
                if (jw >> b) & 1 == 1 {
                    for (acc, st) in s.iter_mut().zip(self.s.iter()) {
                        *acc ^= st;
                    }
                }
                self.next_u64();
            }
        }
        self.s = s;
        child
    }
}
