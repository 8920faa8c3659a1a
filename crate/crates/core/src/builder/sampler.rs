use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `i` in base `p`.
fn radical_inverse(mut i: u64, p: u32) -> f64 {
    let p64 = p as u64;
    let inv = 1.0 / p as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % p64) as f64 * f;
        i /= p64;
        f *= inv;
    }
    r
}

/// Halton points in `[0, 1)^dim` with a random Cranley–Patterson rotation
/// drawn from `seed`. The `i`-th point depends only on `(seed, dim, i)`.
#[derive(Clone, Debug)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension {dim} too large");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            shift: (0..dim).map(|_| rng.random::<f64>()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn point(&self, i: u64) -> Vec<f64> {
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(s, p)| (radical_inverse(i + 1, p) + s).fract())
            .collect()
    }
}

/// Margin kept from each boundary of a sampling box, as a fraction of its
/// width.
pub const SAMPLE_MARGIN: f64 = 0.05;

/// Sampling design for bundle charts: base point in `[−half, half]^d`, `τ` in
/// the working interval and a fiber angle in `[0, 2π)`.
#[derive(Clone, Debug)]
pub struct ChartSampler {
    halton: Halton,
    base_dim: usize,
    half_width: f64,
    tau_range: (f64, f64),
}

/// Coordinates of a sample before conversion to a chart point.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub index: u64,
    pub base: Vec<f64>,
    pub tau: f64,
    pub theta: f64,
}

impl ChartSampler {
    pub fn new(base_dim: usize, half_width: f64, tau_range: (f64, f64), seed: u64) -> Self {
        Self {
            halton: Halton::new(base_dim + 2, seed),
            base_dim,
            half_width,
            tau_range,
        }
    }

    pub fn sample(&self, index: u64) -> SampleSpec {
        let p = self.halton.point(index);
        let inner = 1.0 - 2.0 * SAMPLE_MARGIN;
        let lerp = |lo: f64, hi: f64, t: f64| lo + (hi - lo) * (SAMPLE_MARGIN + inner * t);
        let base = p[..self.base_dim]
            .iter()
            .map(|&t| lerp(-self.half_width, self.half_width, t))
            .collect();
        let tau = lerp(self.tau_range.0, self.tau_range.1, p[self.base_dim]);
        let theta = 2.0 * std::f64::consts::PI * p[self.base_dim + 1];
        SampleSpec {
            index,
            base,
            tau,
            theta,
        }
    }
}
