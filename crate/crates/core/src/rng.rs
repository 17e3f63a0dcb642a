//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, replicate, machine, round,
//! step, draw_index)`. Nothing is carried between streams, so machines can be
//! simulated in any order (or concurrently) and still produce the same bits.
//!
//! Mixing uses the SplitMix64 finalizer. Gaussians use the cosine branch of
//! Box-Muller on two consecutive uniforms; the sine branch is discarded so each
//! normal deviate depends on exactly two counter positions.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Coordinates that identify one independent stream under a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StreamKey {
    pub replicate: u64,
    pub machine: u64,
    pub round: u64,
    pub step: u64,
}

impl StreamKey {
    pub fn new(replicate: u64, machine: u64, round: u64, step: u64) -> Self {
        Self {
            replicate,
            machine,
            round,
            step,
        }
    }
}

/// Machine id reserved for the per-round participant sampler.
pub const SAMPLER_MACHINE: u64 = u64::MAX;
/// Machine id reserved for data-assignment shuffles.
pub const DATA_MACHINE: u64 = u64::MAX - 1;

#[derive(Debug, Clone)]
pub struct RngStream {
    base: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, key: StreamKey) -> Self {
        let mut h = mix64(master_seed ^ 0x243f_6a88_85a3_08d3);
        for (salt, part) in [
            (0x1319_8a2e_0370_7344u64, key.replicate),
            (0xa409_3822_299f_31d0, key.machine),
            (0x082e_fa98_ec4e_6c89, key.round),
            (0x4528_21e6_38d0_1377, key.step),
        ] {
            h = mix64(h ^ mix64(part.wrapping_add(salt)));
        }
        Self { base: h, counter: 0 }
    }

    /// Draw at an absolute position, without touching the cursor.
    #[inline]
    pub fn draw_at(&self, index: u64) -> u64 {
        mix64(self.base ^ mix64(index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(GOLDEN_GAMMA)))
    }

    /// Number of raw draws consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.draw_at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `0..n` by rejection (unbiased).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Fisher-Yates prefix: `k` distinct indices from `0..n`, sorted ascending.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}
