//! Seeded uniform randomness and the discrete distributions built on it.
//!
//! All randomness in the crate flows through [`RandomStream`]. The generator
//! is ChaCha8 (`rand_chacha`), seeded with [`rand::SeedableRng::seed_from_u64`];
//! both are value-stable across platforms, so a seed pins every output.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::{Error, Result};

/// Largest gap a geometric draw may return.
pub const MAX_GAP: u64 = i64::MAX as u64;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!("{value} is not a probability")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// SplitMix64 output function, used to derive child seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded, deterministic stream of random variates.
///
/// A stream is single-owner. Independent work gets its own stream through
/// [`RandomStream::child`].
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
    geometric_draws: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            geometric_draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives the `index`-th child stream.
    ///
    /// The child seed is `splitmix64(seed + (index + 1) * 0x9e3779b97f4a7c15)`
    /// (wrapping). It depends only on the parent seed and the index, never on
    /// how far the parent has advanced.
    pub fn child(&self, index: u64) -> RandomStream {
        let mixed = self
            .seed
            .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        RandomStream::new(splitmix64(mixed))
    }

    /// Number of geometric variates drawn from this stream so far.
    pub fn geometric_draws(&self) -> u64 {
        self.geometric_draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn uniform_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `[lo, hi]`, free of modulo bias.
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return Err(Error::Range(format!("empty range [{lo}, {hi}]")));
        }
        Ok(self.rng.random_range(lo..=hi))
    }

    /// Uniform integer in `[0, n)`; `n` must be positive.
    pub(crate) fn uniform_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.rng.random_range(0..n)
    }

    /// Uniform integer in `[0, n)` over the full 128-bit range.
    pub fn uniform_below_u128(&mut self, n: u128) -> Result<u128> {
        if n == 0 {
            return Err(Error::Range("empty range [0, 0)".into()));
        }
        Ok(self.rng.random_range(0..n))
    }

    /// Number of Bernoulli(`p`) trials up to and including the first success.
    ///
    /// Inverse CDF on a single uniform: `floor(ln(1-u) / ln(1-p)) + 1`.
    pub fn sample_geometric(&mut self, p: Probability) -> Result<u64> {
        let p = p.value();
        if p <= 0.0 {
            return Err(Error::Domain(
                "geometric gap needs p > 0; the expected gap is infinite".into(),
            ));
        }
        self.geometric_draws += 1;
        if p >= 1.0 {
            return Ok(1);
        }
        geometric_from_uniform(self.uniform_unit(), p)
    }

    /// Exact Binomial(`trials`, `p`) variate.
    pub fn sample_binomial(&mut self, trials: u64, p: Probability) -> u64 {
        let p = p.value();
        if trials == 0 || p == 0.0 {
            return 0;
        }
        if p == 1.0 {
            return trials;
        }
        // p is in (0, 1) here, which is all Binomial::new checks.
        Binomial::new(trials, p)
            .expect("binomial parameters validated")
            .sample(&mut self.rng)
    }

    /// Index `i` with probability `weights[i] / Σ weights`.
    pub fn sample_discrete(&mut self, weights: &[f64]) -> Result<usize> {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut total = 0.0;
        for &w in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!(
                    "weight {w} is not a finite nonnegative value"
                )));
            }
            total += w;
            cumulative.push(total);
        }
        if total <= 0.0 {
            return Err(Error::Domain("weights are empty or all zero".into()));
        }
        Ok(pick_cumulative(&cumulative, self.uniform_unit() * total))
    }
}

/// First index whose cumulative weight exceeds `target`, skipping
/// zero-weight categories.
fn pick_cumulative(cumulative: &[f64], target: f64) -> usize {
    let idx = cumulative.partition_point(|&c| c <= target);
    // Rounding can put target at or past the final sum.
    idx.min(cumulative.len() - 1)
}

/// Evaluates the geometric inverse CDF at `u ∈ [0, 1)` for `p ∈ (0, 1)`.
pub fn geometric_from_uniform(u: f64, p: f64) -> Result<u64> {
    let gap = ((-u).ln_1p() / (-p).ln_1p()).floor() + 1.0;
    if gap.is_nan() || gap >= MAX_GAP as f64 {
        return Err(Error::Overflow(format!(
            "geometric gap for p = {p:e} exceeds 2^63 - 1"
        )));
    }
    Ok(gap as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RandomStream::new(0xdead_beef);
        let mut b = RandomStream::new(0xdead_beef);
        for _ in 0..100 {
            assert_eq!(a.uniform_unit(), b.uniform_unit());
        }
        assert_ne!(
            RandomStream::new(1).uniform_unit(),
            RandomStream::new(2).uniform_unit()
        );
    }

    #[test]
    fn children_depend_on_seed_and_index_only() {
        let mut parent = RandomStream::new(42);
        let before = parent.child(3).next_u64();
        parent.next_u64();
        assert_eq!(parent.child(3).next_u64(), before);
        assert_ne!(parent.child(4).next_u64(), before);
    }

    #[test]
    fn uniform_unit_mean_and_range() {
        let mut s = RandomStream::new(11);
        let n = 1_000_000;
        let (mut sum, mut lo, mut hi) = (0.0, f64::MAX, f64::MIN);
        for _ in 0..n {
            let u = s.uniform_unit();
            sum += u;
            lo = lo.min(u);
            hi = hi.max(u);
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.002);
        assert!(lo >= 0.0 && hi < 1.0);
    }

    #[test]
    fn uniform_int_contract() {
        let mut s = RandomStream::new(5);
        assert_eq!(s.uniform_int(5, 5).unwrap(), 5);
        assert!(matches!(s.uniform_int(3, 2), Err(Error::Range(_))));

        let draws = 100_000;
        let mut counts = [0u32; 4];
        for _ in 0..draws {
            counts[s.uniform_int(0, 3).unwrap() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.006);
        }

        let mut counts = [0u32; 3];
        for _ in 0..draws {
            counts[s.uniform_int(0, 2).unwrap() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.007);
        }
    }

    #[test]
    fn geometric_inverse_cdf_by_hand() {
        // floor(ln 0.3 / ln 0.5) + 1 = floor(1.737) + 1
        assert_eq!(geometric_from_uniform(0.7, 0.5).unwrap(), 2);
        assert_eq!(geometric_from_uniform(0.0, 0.5).unwrap(), 1);
    }

    #[test]
    fn geometric_edge_cases() {
        let mut s = RandomStream::new(9);
        for _ in 0..100 {
            assert_eq!(s.sample_geometric(Probability::ONE).unwrap(), 1);
        }
        assert_eq!(s.geometric_draws(), 100);
        assert!(matches!(
            s.sample_geometric(Probability::ZERO),
            Err(Error::Domain(_))
        ));
        assert_eq!(s.geometric_draws(), 100);
        assert!(matches!(
            geometric_from_uniform(0.999_999, 1e-300),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn geometric_mean_at_half() {
        let mut s = RandomStream::new(21);
        let p = Probability::new(0.5).unwrap();
        let n = 1_000_000;
        let sum: u64 = (0..n).map(|_| s.sample_geometric(p).unwrap()).sum();
        assert!((sum as f64 / n as f64 - 2.0).abs() < 0.006);
    }

    #[test]
    fn geometric_matches_cdf_in_ks_distance() {
        for (seed, p) in [(1u64, 0.1), (2, 0.5), (3, 0.9)] {
            let mut s = RandomStream::new(seed);
            let prob = Probability::new(p).unwrap();
            let n = 1_000_000usize;
            let mut hist = vec![0u64; 512];
            for _ in 0..n {
                let g = s.sample_geometric(prob).unwrap() as usize;
                hist[g.min(511)] += 1;
            }
            let mut cum = 0u64;
            let mut ks: f64 = 0.0;
            for (k, &h) in hist.iter().enumerate().skip(1).take(400) {
                cum += h;
                let cdf = 1.0 - (1.0 - p).powi(k as i32);
                ks = ks.max((cum as f64 / n as f64 - cdf).abs());
            }
            assert!(ks < 0.005, "p = {p}: KS = {ks}");
        }
    }

    #[test]
    fn binomial_edge_cases_and_moments() {
        let mut s = RandomStream::new(77);
        assert_eq!(s.sample_binomial(0, Probability::new(0.3).unwrap()), 0);
        assert_eq!(s.sample_binomial(100, Probability::ONE), 100);

        let p = Probability::new(0.25).unwrap();
        let draws = 10_000;
        let sum: u64 = (0..draws).map(|_| s.sample_binomial(10_000, p)).sum();
        assert!((sum as f64 / draws as f64 - 2500.0).abs() < 1.75);

        // n = 30: trials n^2 = 900, variance within 10% of n^2 p (1 - p).
        let xs: Vec<f64> = (0..draws)
            .map(|_| s.sample_binomial(900, p) as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let expected = 900.0 * 0.25 * 0.75;
        assert!((var / expected - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn discrete_contract() {
        let mut s = RandomStream::new(8);
        for _ in 0..1000 {
            assert_eq!(s.sample_discrete(&[1.0]).unwrap(), 0);
            assert_eq!(s.sample_discrete(&[0.0, 5.0, 0.0]).unwrap(), 1);
        }
        assert!(s.sample_discrete(&[]).is_err());
        assert!(s.sample_discrete(&[0.0, 0.0]).is_err());
        assert!(s.sample_discrete(&[1.0, -1.0]).is_err());

        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| s.sample_discrete(&[1.0, 3.0]).unwrap() == 1)
            .count();
        assert!((ones as f64 / draws as f64 - 0.75).abs() < 0.0055);
    }

    #[test]
    fn probability_validation() {
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.1).is_err());
        assert!(Probability::try_from(f64::NAN).is_err());
        assert_eq!(Probability::new(0.25).unwrap().complement().value(), 0.75);
    }
}
