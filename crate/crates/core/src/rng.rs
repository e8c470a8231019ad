//! Counter-based random number streams.
//!
//! Every random draw in a run is addressed by `(seed, step, particle)` plus a
//! block counter, so the value of any increment is independent of evaluation
//! order and worker count. The generator is Philox4x32-10, a standard
//! counter-based PRNG for reproducible Monte Carlo.

const PHILOX_M0: u64 = 0xD251_1F53;
const PHILOX_M1: u64 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// One Philox4x32-10 block: 128 bits of counter -> 128 bits of output.
#[inline]
fn philox4x32(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for _ in 0..10 {
        let p0 = PHILOX_M0 * ctr[0] as u64;
        let p1 = PHILOX_M1 * ctr[2] as u64;
        ctr = [
            (p1 >> 32) as u32 ^ ctr[1] ^ key[0],
            p1 as u32,
            (p0 >> 32) as u32 ^ ctr[3] ^ key[1],
            p0 as u32,
        ];
        key[0] = key[0].wrapping_add(PHILOX_W0);
        key[1] = key[1].wrapping_add(PHILOX_W1);
    }
    ctr
}

/// Stream domains keep different uses of the same (step, particle) key apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Euler-Maruyama noise increments.
    Noise = 0,
    /// Initial-condition sampling (uniforms for rejection sampling).
    Init = 1,
    /// Free-standing draws in tests and diagnostics.
    Aux = 2,
}

/// A deterministic stream of random words keyed by (seed, step, particle).
///
/// Each key owns 2^32 blocks of 128 bits, consumed lazily; the same key always
/// replays the same sequence regardless of what other keys were drawn from.
pub struct CounterStream {
    key: [u32; 2],
    prefix: [u32; 2], // (particle, step)
    tag: u32,
    block: u32,
    buf: [u64; 2],
    used: usize,
}

impl CounterStream {
    pub fn new(seed: u64, domain: StreamDomain, step: u32, particle: u32) -> Self {
        CounterStream {
            key: [seed as u32, (seed >> 32) as u32],
            prefix: [particle, step],
            tag: domain as u32,
            block: 0,
            buf: [0; 2],
            used: 2,
        }
    }

    #[inline]
    fn refill(&mut self) {
        let out = philox4x32(
            [self.block, self.prefix[0], self.prefix[1], self.tag],
            self.key,
        );
        self.block = self.block.wrapping_add(1);
        self.buf = [
            (out[0] as u64) << 32 | out[1] as u64,
            (out[2] as u64) << 32 | out[3] as u64,
        ];
        self.used = 0;
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.used == 2 {
            self.refill();
        }
        let w = self.buf[self.used];
        self.used += 1;
        w
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    #[inline]
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fill `out` with standard normal deviates via Box-Muller pairs.
    ///
    /// Consumption is fixed: ceil(len/2) uniform pairs, so streams with the
    /// same key replay identically whatever the caller interleaves.
    pub fn standard_normals(&mut self, out: &mut [f64]) {
        let mut i = 0;
        while i < out.len() {
            let u1 = self.uniform_open();
            let u2 = self.uniform();
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            out[i] = r * theta.cos();
            if i + 1 < out.len() {
                out[i + 1] = r * theta.sin();
            }
            i += 2;
        }
    }
}

/// Reproducible Gaussian increment for one (seed, step, particle) triple.
pub fn normal_increment(seed: u64, step: u32, particle: u32, out: &mut [f64]) {
    let mut s = CounterStream::new(seed, StreamDomain::Noise, step, particle);
    s.standard_normals(out);
}
