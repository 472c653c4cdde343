//! Statistical verification battery.
//!
//! Each [`Suite`] checks one family of samplers or combinatorial routines
//! against an independent oracle: brute-force enumeration, a dense
//! probability matrix, or a closed-form expectation. Sampling checks use a
//! 4σ per-cell tolerance, `|f - p| <= 4 √(p (1 - p) / S)`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::block::{
    chung_lu_grass_report, chung_lu_matrix, sbm_ball, sbm_grass, BlockSpec, DegreeSequence,
    EndpointList,
};
use crate::combinat::{
    count_regions, morton_decode, morton_encode, ndseq_to_counter, num_multiset_permutations,
    regions, unrank_multiset, MultisetCounter, NdSequence,
};
use crate::er::{ball_drop_er, ball_drop_er_complement, coin_flip_er, fixed_edge_er, grass_hop_er};
use crate::kronecker::{
    backward_map, coin_flip_kron, grass_hop_kron_report, kronecker_power_dense, map_mult_to_kron,
    multtable, vectorize, Initiator,
};
use crate::stats::{
    binomial_pmf, chi_square, chi_square_sf, empirical_frequency, expected_ball_drop_ratio,
    expected_ball_drops_exact, pool_bins, FrequencyMatrix,
};
use crate::{EdgeList, Error, Execution, Probability, ProbabilityMatrix, RandomStream, Result};

/// Tolerance, in standard errors, for every frequency check.
pub const SIGMAS: f64 = 4.0;
/// Minimum p-value for distribution-level chi-square checks.
pub const MIN_P_VALUE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One `key=value` record per check.
    pub fn records(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "suite={} check={:?} status={} detail={:?}",
                    self.suite.name(),
                    c.name,
                    if c.passed { "pass" } else { "fail" },
                    c.detail
                )
            })
            .collect()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "[{tag}] {} / {}: {}",
                self.suite.name(),
                c.name,
                c.detail
            )?;
        }
        write!(
            f,
            "{} {} in {:.2?} ({} checks)",
            self.suite.name(),
            if self.passed() { "passed" } else { "FAILED" },
            self.elapsed,
            self.checks.len()
        )
    }
}

/// Knobs shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides each sampling suite's default sample (or trial) count.
    pub samples: Option<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0x5eed,
            samples: None,
        }
    }
}

impl VerifyConfig {
    fn samples_or(&self, default: u64) -> u64 {
        self.samples.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    RegionCount,
    KronEquivalence,
    MortonRoundtrip,
    Unrank,
    ErMarginals,
    CouponCollector,
    KronMarginals,
    ChungLu,
    Sbm,
    FixedEdge,
    ChiSquare,
    Performance,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::RegionCount,
        Suite::KronEquivalence,
        Suite::MortonRoundtrip,
        Suite::Unrank,
        Suite::ErMarginals,
        Suite::CouponCollector,
        Suite::KronMarginals,
        Suite::ChungLu,
        Suite::Sbm,
        Suite::FixedEdge,
        Suite::ChiSquare,
        Suite::Performance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::RegionCount => "region-count",
            Suite::KronEquivalence => "kron-equivalence",
            Suite::MortonRoundtrip => "morton-roundtrip",
            Suite::Unrank => "unrank",
            Suite::ErMarginals => "er-marginals",
            Suite::CouponCollector => "coupon-collector",
            Suite::KronMarginals => "kron-marginals",
            Suite::ChungLu => "chung-lu",
            Suite::Sbm => "sbm",
            Suite::FixedEdge => "fixed-edge",
            Suite::ChiSquare => "chi-square",
            Suite::Performance => "performance",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn run(self, config: &VerifyConfig) -> Result<SuiteReport> {
        let start = Instant::now();
        let mut report = SuiteReport::new(self);
        match self {
            Suite::RegionCount => region_count(&mut report)?,
            Suite::KronEquivalence => kron_equivalence(&mut report)?,
            Suite::MortonRoundtrip => morton_roundtrip(&mut report)?,
            Suite::Unrank => unrank(&mut report)?,
            Suite::ErMarginals => er_marginals(&mut report, config)?,
            Suite::CouponCollector => coupon_collector(&mut report, config)?,
            Suite::KronMarginals => kron_marginals(&mut report, config)?,
            Suite::ChungLu => chung_lu(&mut report, config)?,
            Suite::Sbm => sbm(&mut report, config)?,
            Suite::FixedEdge => fixed_edge(&mut report, config)?,
            Suite::ChiSquare => chi_square_fixture(&mut report)?,
            Suite::Performance => performance(&mut report)?,
        }
        report.elapsed = start.elapsed();
        Ok(report)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Brute-force reference implementations.
pub mod oracle {
    use std::collections::BTreeSet;

    /// Every length-`k` sequence over `[0, m)`, lexicographic.
    pub fn all_sequences(m: usize, k: usize) -> Vec<Vec<usize>> {
        let total = m.pow(k as u32);
        (0..total)
            .map(|mut x| {
                let mut s = vec![0; k];
                for d in s.iter_mut().rev() {
                    *d = x % m;
                    x /= m;
                }
                s
            })
            .collect()
    }

    pub fn nondecreasing(m: usize, k: usize) -> Vec<Vec<usize>> {
        all_sequences(m, k)
            .into_iter()
            .filter(|s| s.windows(2).all(|w| w[0] <= w[1]))
            .collect()
    }

    /// Sorted distinct permutations, by filtering all index orderings.
    pub fn distinct_permutations(items: &[usize]) -> Vec<Vec<usize>> {
        let k = items.len();
        all_sequences(k, k)
            .into_iter()
            .filter(|order| order.iter().collect::<BTreeSet<_>>().len() == k)
            .map(|order| order.iter().map(|&i| items[i]).collect())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// All `m`-subsets of the undirected pairs of `n` nodes.
    pub fn all_graphs(n: u64, m: usize) -> Vec<Vec<(u64, u64)>> {
        let pairs: Vec<(u64, u64)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        all_sequences(pairs.len(), m)
            .into_iter()
            .filter(|s| s.windows(2).all(|w| w[0] < w[1]))
            .map(|s| s.into_iter().map(|i| pairs[i]).collect())
            .collect()
    }

    /// `P(a, x)` from its power series, summed for `terms` terms:
    /// `x^a e^-x Σ x^n / Γ(a + n + 1)`.
    pub fn lower_gamma_series(a: f64, x: f64, terms: usize) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let mut term = (a * x.ln() - x - ln_gamma(a + 1.0)).exp();
        let mut sum = 0.0;
        for n in 0..terms {
            sum += term;
            term *= x / (a + n as f64 + 1.0);
            if term == 0.0 {
                break;
            }
        }
        sum
    }
}

fn timed_check(report: &mut SuiteReport, start: Instant, limit: Duration) {
    let elapsed = start.elapsed();
    report.check(
        format!("runtime under {limit:?}"),
        elapsed < limit,
        format!("{elapsed:.2?}"),
    );
}

fn region_count(report: &mut SuiteReport) -> Result<()> {
    let start = Instant::now();
    let listed = [
        [0, 0, 0],
        [0, 0, 1],
        [0, 0, 2],
        [0, 0, 3],
        [0, 1, 1],
        [0, 1, 2],
        [0, 1, 3],
        [0, 2, 2],
        [0, 2, 3],
        [0, 3, 3],
        [1, 1, 1],
        [1, 1, 2],
        [1, 1, 3],
        [1, 2, 2],
        [1, 2, 3],
        [1, 3, 3],
        [2, 2, 2],
        [2, 2, 3],
        [2, 3, 3],
        [3, 3, 3],
    ];
    let got: Vec<Vec<usize>> = regions(4, 3)?.iter().map(NdSequence::indices).collect();
    let same = got.len() == listed.len() && got.iter().zip(&listed).all(|(g, l)| g == l);
    report.check(
        "regions(4,3) is the listed 20",
        same,
        format!("{} sequences", got.len()),
    );

    let c47 = count_regions(4, 7)?;
    report.check("count_regions(4,7) = 120", c47 == 120, format!("{c47}"));

    let mut mismatches = Vec::new();
    for m in 1..=9 {
        for k in 1..=5 {
            let brute = oracle::nondecreasing(m, k);
            let enumerated: Vec<Vec<usize>> =
                regions(m, k)?.iter().map(NdSequence::indices).collect();
            if count_regions(m, k)? != brute.len() as u128 || enumerated != brute {
                mismatches.push((m, k));
            }
        }
    }
    report.check(
        "count and enumeration match brute force for m <= 9, k <= 5",
        mismatches.is_empty(),
        format!("{} mismatches {mismatches:?}", mismatches.len()),
    );

    // Region-count growth versus (e + 1)^k once k >= e (n^2 - 1), n = 2.
    let e = std::f64::consts::E;
    let threshold = (e * 3.0).ceil() as usize;
    let bad: Vec<usize> = (threshold..=30)
        .filter(|&k| count_regions(4, k).map_or(true, |c| c as f64 > (e + 1.0).powi(k as i32)))
        .collect();
    report.check(
        "count_regions(4, k) <= (e+1)^k for 9 <= k <= 30",
        bad.is_empty(),
        format!("violations at k = {bad:?}"),
    );
    timed_check(report, start, Duration::from_secs(1));
    Ok(())
}

/// Initiators with distinct entries so that every cell value identifies its
/// multiset of factors.
fn distinct_initiator(n: usize) -> Result<Initiator> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.9 - 0.31 * (i * n + j) as f64 / (n * n) as f64 - 0.013 * i as f64)
                .collect()
        })
        .collect();
    Initiator::from_rows(&rows)
}

fn kron_equivalence(report: &mut SuiteReport) -> Result<()> {
    let start = Instant::now();
    let a = map_mult_to_kron(&[1, 3], 2)?;
    report.check(
        "map_mult_to_kron([1,3], 2) = (3,1)",
        a == (3, 1),
        format!("{a:?}"),
    );
    let b = map_mult_to_kron(&[4, 0, 7], 3)?;
    report.check(
        "map_mult_to_kron([4,0,7], 3) = (10,11)",
        b == (10, 11),
        format!("{b:?}"),
    );

    for n in 2..=3usize {
        for k in 2..=3u32 {
            let init = distinct_initiator(n)?;
            let v = vectorize(&init);
            let dense = kronecker_power_dense(&init, k)?;
            let side = dense.rows();
            let mut hit = vec![0u32; side * side];
            let mut worst: f64 = 0.0;
            let mut backward_disagree = 0;
            for mind in oracle::all_sequences(n * n, k as usize) {
                let (r, c) = map_mult_to_kron(&mind, n)?;
                if backward_map(&mind, n)? != (r, c) {
                    backward_disagree += 1;
                }
                hit[r as usize * side + c as usize] += 1;
                let want = dense.get(r as usize, c as usize);
                let got = multtable(&mind, &v)?;
                worst = worst.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
            }
            report.check(
                format!("n={n} k={k}: values agree"),
                worst <= 1e-12,
                format!("max relative error {worst:e}"),
            );
            report.check(
                format!("n={n} k={k}: bijection onto {side}x{side} cells"),
                hit.iter().all(|&h| h == 1),
                format!("{} cells hit once", hit.iter().filter(|&&h| h == 1).count()),
            );
            report.check(
                format!("n={n} k={k}: backward map agrees"),
                backward_disagree == 0,
                format!("{backward_disagree} disagreements"),
            );
        }
    }
    timed_check(report, start, Duration::from_secs(5));
    Ok(())
}

fn morton_roundtrip(report: &mut SuiteReport) -> Result<()> {
    let start = Instant::now();
    let d = morton_decode(7, 2)?;
    report.check("decode(7, 2) = (3,1)", d == (3, 1), format!("{d:?}"));
    let e = morton_encode(1, 2, 2, 2)?;
    report.check("encode(1, 2) = 9", e == 9, format!("{e}"));
    for n in 2..=4u64 {
        let mut failures = 0u64;
        let mut total = 0u64;
        for k in 1..=4u32 {
            let side = (n as u128).pow(k);
            for index in 0..side * side {
                total += 1;
                let (r, c) = morton_decode(index, n)?;
                if r >= side || c >= side || morton_encode(r, c, n, k)? != index {
                    failures += 1;
                }
            }
        }
        report.check(
            format!("base {n}: encode . decode = id for k <= 4"),
            failures == 0,
            format!("{total} indices, {failures} failures"),
        );
    }
    timed_check(report, start, Duration::from_secs(1));
    Ok(())
}

fn unrank(report: &mut SuiteReport) -> Result<()> {
    let start = Instant::now();
    let s = NdSequence::new(vec![0, 1, 1, 3])?;
    let first: Vec<Vec<i64>> = (0..3)
        .map(|r| unrank_multiset(&s, r))
        .collect::<Result<_>>()?;
    report.check(
        "unrank([0,1,1,3], 0..3)",
        first == vec![vec![0, 1, 1, 3], vec![0, 1, 3, 1], vec![0, 3, 1, 1]],
        format!("{first:?}"),
    );
    let p = unrank_multiset(&NdSequence::new(vec![0, 1, 2, 2])?, 4)?;
    report.check(
        "unrank([0,1,2,2], 4) = [1,2,0,2]",
        p == vec![1, 2, 0, 2],
        format!("{p:?}"),
    );
    let c = num_multiset_permutations(&MultisetCounter::from_counts([(0, 1), (1, 1), (2, 2)])?)?;
    report.check(
        "permutations of {0:1,1:1,2:2} = 12",
        c == 12,
        format!("{c}"),
    );

    let mut checked = 0;
    let mut failures = Vec::new();
    for k in 1..=6 {
        for seq in oracle::nondecreasing(4, k) {
            checked += 1;
            let expected = oracle::distinct_permutations(&seq);
            let nd = NdSequence::new(seq.iter().map(|&x| x as i64).collect())?;
            let total = num_multiset_permutations(&ndseq_to_counter(&nd))?;
            let got: Vec<Vec<usize>> = (0..total as u64)
                .map(|r| {
                    unrank_multiset(&nd, r).map(|p| p.into_iter().map(|x| x as usize).collect())
                })
                .collect::<Result<_>>()?;
            let overshoot = matches!(unrank_multiset(&nd, total as u64), Err(Error::Range(_)));
            if got != expected || !overshoot {
                failures.push(nd.to_string());
            }
        }
    }
    report.check(
        "unranking enumerates brute-force permutations, k <= 6, 4 symbols",
        failures.is_empty(),
        format!("{checked} multisets, failures {failures:?}"),
    );
    timed_check(report, start, Duration::from_secs(5));
    Ok(())
}

fn sigma_detail(f: &FrequencyMatrix, expected: &ProbabilityMatrix) -> Result<(bool, String)> {
    let bad = f.deviations(expected, SIGMAS)?;
    let max = f.max_sigma(expected)?;
    Ok((
        bad.is_empty(),
        format!(
            "{} samples, max deviation {max:.2} sigma, {} cells outside",
            f.samples(),
            bad.len()
        ),
    ))
}

/// Chi-square of the per-sample edge-count histogram against
/// Binomial(cells, p), pooling bins to an expected count of at least 5.
fn edge_count_fit(f: &FrequencyMatrix, cells: u64, p: f64) -> Result<(bool, String)> {
    let samples = f.samples() as f64;
    let expected: Vec<f64> = (0..=cells)
        .map(|m| samples * binomial_pmf(cells, m, p))
        .collect();
    let (obs, exp) = pool_bins(f.edge_count_histogram(), &expected, 5.0);
    let fit = chi_square(&obs, &exp)?;
    Ok((
        fit.p_value > MIN_P_VALUE,
        format!(
            "chi2 = {:.2}, dof = {}, p = {:.4}",
            fit.statistic, fit.dof, fit.p_value
        ),
    ))
}

fn er_marginals(report: &mut SuiteReport, config: &VerifyConfig) -> Result<()> {
    let samples = config.samples_or(20_000);
    let n = 8u64;
    type Sampler = fn(u64, Probability, &mut RandomStream) -> Result<EdgeList>;
    let methods: [(&str, Sampler, &[f64]); 4] = [
        ("grass-hop", grass_hop_er, &[0.25, 0.9]),
        (
            "ball-drop",
            |n, p, s| Ok(ball_drop_er(n, p, s)?.edges),
            &[0.25, 0.9],
        ),
        (
            "complement ball-drop",
            |n, p, s| Ok(ball_drop_er_complement(n, p, s)?.edges),
            &[0.9],
        ),
        (
            "coin-flip",
            |n, p, s| Ok(coin_flip_er(n, p, s)),
            &[0.25, 0.9],
        ),
    ];
    for (m, (name, sampler, ps)) in methods.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            let prob = Probability::new(p)?;
            let base = RandomStream::new(config.seed).child((m * 10 + j) as u64);
            let f = empirical_frequency(n as usize, n as usize, samples, &base, |s| {
                sampler(n, prob, s)
            })?;
            let expected = ProbabilityMatrix::constant(n as usize, n as usize, p)?;
            let (ok, detail) = sigma_detail(&f, &expected)?;
            report.check(format!("{name} n=8 p={p}: per-cell 4 sigma"), ok, detail);
            let (ok, detail) = edge_count_fit(&f, n * n, p)?;
            report.check(
                format!("{name} n=8 p={p}: edge count ~ Binomial(64, p)"),
                ok,
                detail,
            );
        }
    }
    Ok(())
}

fn coupon_collector(report: &mut SuiteReport, config: &VerifyConfig) -> Result<()> {
    let trials = config.samples_or(200);
    let n = 1000u64;
    let cells = n * n;
    for (idx, &p) in [0.001, 0.01, 0.1].iter().enumerate() {
        let prob = Probability::new(p)?;
        let mut stream = RandomStream::new(config.seed).child(100 + idx as u64);
        let (mut draws, mut edges) = (0u64, 0u64);
        let mut exact_sum = 0.0;
        for _ in 0..trials {
            let r = ball_drop_er(n, prob, &mut stream)?;
            draws += r.draws;
            edges += r.edges.len() as u64;
            exact_sum += expected_ball_drops_exact(cells, r.edges.len() as u64)?;
        }
        let mean = draws as f64 / trials as f64;
        let analytic = cells as f64 * -(-p).ln_1p();
        let rel = (mean / analytic - 1.0).abs();
        report.check(
            format!("p={p}: mean draws within 5% of n^2 ln(1/(1-p))"),
            rel <= 0.05,
            format!("mean {mean:.1}, analytic {analytic:.1}, rel {rel:.4}"),
        );
        let exact_mean = exact_sum / trials as f64;
        let rel_exact = (mean / exact_mean - 1.0).abs();
        report.check(
            format!("p={p}: mean draws within 5% of harmonic-sum expectation"),
            rel_exact <= 0.05,
            format!("mean {mean:.1}, exact {exact_mean:.1}, rel {rel_exact:.4}"),
        );
        let ratio = draws as f64 / edges as f64;
        let predicted = expected_ball_drop_ratio(p)?;
        report.check(
            format!("p={p}: draws per edge > 1"),
            ratio > 1.0 && predicted > 1.0,
            format!("observed {ratio:.5}, predicted {predicted:.5}"),
        );
    }
    let grid = [1e-3, 1e-2, 0.1, 0.5];
    let ratios: Vec<f64> = grid
        .iter()
        .map(|&p| expected_ball_drop_ratio(p))
        .collect::<Result<_>>()?;
    let increasing = ratios.windows(2).all(|w| w[0] < w[1]);
    let limit = expected_ball_drop_ratio(1e-9)?;
    report.check(
        "ratio > 1 on the grid and tends to 1 as p -> 0",
        ratios.iter().all(|&r| r > 1.0) && increasing && (limit - 1.0).abs() < 1e-8,
        format!("{ratios:?}, ratio(1e-9) = {limit}"),
    );
    Ok(())
}

/// Two-sample comparison of per-cell hit counts with equal sample sizes:
/// `Σ (a - b)² / (2 S p̂ (1 - p̂))`, approximately χ² with one degree of
/// freedom per informative cell.
fn two_sample_cells(a: &FrequencyMatrix, b: &FrequencyMatrix) -> Result<(f64, usize, f64)> {
    let s = a.samples() as f64;
    let mut stat = 0.0;
    let mut dof = 0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let (x, y) = (a.count(i, j) as f64, b.count(i, j) as f64);
            let pooled = (x + y) / (2.0 * s);
            if pooled > 0.0 && pooled < 1.0 {
                stat += (x - y).powi(2) / (2.0 * s * pooled * (1.0 - pooled));
                dof += 1;
            }
        }
    }
    let p = if dof == 0 {
        1.0
    } else {
        chi_square_sf(stat, dof)?
    };
    Ok((stat, dof, p))
}

fn kron_marginals(report: &mut SuiteReport, config: &VerifyConfig) -> Result<()> {
    let samples = config.samples_or(20_000);
    let init = Initiator::from_rows(&[vec![0.99, 0.5], vec![0.5, 0.2]])?;
    let dense = kronecker_power_dense(&init, 3)?;
    let bad_draws = AtomicU64::new(0);
    let base = RandomStream::new(config.seed).child(200);
    let f = empirical_frequency(8, 8, samples, &base, |s| {
        let r = grass_hop_kron_report(&init, 3, s, Execution::Sequential)?;
        if r.geometric_draws != r.edges.len() as u64 + r.regions {
            bad_draws.fetch_add(1, Ordering::Relaxed);
        }
        Ok(r.edges)
    })?;
    let (ok, detail) = sigma_detail(&f, &dense)?;
    report.check("K=[[0.99,0.5],[0.5,0.2]] k=3: per-cell 4 sigma", ok, detail);
    let bad = bad_draws.load(Ordering::Relaxed);
    report.check(
        "geometric draws = edges + regions on every run",
        bad == 0,
        format!("{bad} of {samples} runs disagree"),
    );

    let k2 = empirical_frequency(4, 4, samples, &base.child(1), |s| {
        Ok(grass_hop_kron_report(&init, 2, s, Execution::Sequential)?.edges)
    })?;
    let coin = empirical_frequency(4, 4, samples, &base.child(2), |s| {
        coin_flip_kron(&init, 2, s)
    })?;
    let (stat, dof, p) = two_sample_cells(&k2, &coin)?;
    report.check(
        "k=2: grass-hop agrees with coin-flip oracle",
        p > MIN_P_VALUE,
        format!("chi2 = {stat:.2}, dof = {dof}, p = {p:.4}"),
    );
    Ok(())
}

fn chung_lu(report: &mut SuiteReport, config: &VerifyConfig) -> Result<()> {
    let samples = config.samples_or(20_000);
    let d = DegreeSequence::new(vec![4, 3, 2, 2, 2, 1, 1, 1]);
    let probs = chung_lu_matrix(&d)?;
    let bad_blocks = AtomicU64::new(0);
    let base = RandomStream::new(config.seed).child(300);
    let f = empirical_frequency(8, 8, samples, &base, |s| {
        let r = chung_lu_grass_report(&d, s, Execution::Sequential)?;
        if r.blocks_visited != 16 {
            bad_blocks.fetch_add(1, Ordering::Relaxed);
        }
        Ok(r.edges)
    })?;
    let (ok, detail) = sigma_detail(&f, &probs)?;
    report.check("d=(4,3,2,2,2,1,1,1): per-cell 4 sigma", ok, detail);
    report.check(
        "corner cell (0,0) present in every sample",
        f.count(0, 0) == f.samples(),
        format!("{} of {}", f.count(0, 0), f.samples()),
    );
    let bad = bad_blocks.load(Ordering::Relaxed);
    report.check(
        "t^2 = 16 blocks visited",
        bad == 0,
        format!("{bad} runs differ"),
    );

    let means = f.mean_out_degrees();
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for (i, &mean) in means.iter().enumerate() {
        let var: f64 = (0..8)
            .map(|j| probs.get(i, j) * (1.0 - probs.get(i, j)))
            .sum();
        let tol = SIGMAS * (var / samples as f64).sqrt();
        let dev = (mean - d.degrees()[i] as f64).abs();
        if dev > tol {
            outside += 1;
        }
        if tol > 0.0 {
            worst = worst.max(dev / tol * SIGMAS);
        }
    }
    report.check(
        "mean out-degrees within 4 sigma of d",
        outside == 0,
        format!(
            "means {:?}, max {worst:.2} sigma",
            means
                .iter()
                .map(|m| (m * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        ),
    );

    let list = EndpointList::new(&DegreeSequence::new(vec![2, 1, 1]));
    let mut s = base.child(1);
    let draws = 100_000;
    let zeros = (0..draws).filter(|_| list.draw(&mut s) == 0).count();
    let freq = zeros as f64 / draws as f64;
    let tol = SIGMAS * (0.25f64 / draws as f64).sqrt();
    report.check(
        "ball-drop endpoint 0 of d=(2,1,1) drawn with frequency 1/2",
        (freq - 0.5).abs() <= tol,
        format!("{freq:.4} +- {tol:.4}"),
    );
    Ok(())
}

fn sbm(report: &mut SuiteReport, config: &VerifyConfig) -> Result<()> {
    let samples = config.samples_or(20_000);
    let spec = BlockSpec::planted(vec![3, 5], Probability::new(0.7)?, Probability::new(0.1)?)?;
    let marginal = spec.marginal_matrix()?;
    let base = RandomStream::new(config.seed).child(400);
    type Sampler<'a> = Box<dyn Fn(&mut RandomStream) -> Result<EdgeList> + Sync + 'a>;
    let runs: [(&str, Sampler); 2] = [
        ("grass-hop", Box::new(|s| sbm_grass(&spec, s))),
        ("ball-drop", Box::new(|s| Ok(sbm_ball(&spec, s)?.edges))),
    ];
    for (idx, (name, sampler)) in runs.iter().enumerate() {
        let f = empirical_frequency(8, 8, samples, &base.child(idx as u64), sampler)?;
        let (ok, detail) = sigma_detail(&f, &marginal)?;
        report.check(
            format!("{name} sizes=(3,5) p=0.7 q=0.1: per-cell 4 sigma"),
            ok,
            detail,
        );

        // Mean edges per block against n_r n_s Q_rs.
        let offsets = spec.offsets();
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let (nr, nc) = (spec.sizes()[r] as usize, spec.sizes()[c] as usize);
                let q = spec.q().get(r, c);
                let mean: f64 = (0..nr)
                    .flat_map(|i| (0..nc).map(move |j| (i, j)))
                    .map(|(i, j)| f.frequency(offsets[r] as usize + i, offsets[c] as usize + j))
                    .sum();
                let expect = (nr * nc) as f64 * q;
                let se = ((nr * nc) as f64 * q * (1.0 - q) / samples as f64).sqrt();
                worst = worst.max((mean - expect).abs() / se);
            }
        }
        report.check(
            format!("{name}: per-block mean edge counts within 4 sigma"),
            worst <= SIGMAS,
            format!("max {worst:.2} sigma"),
        );
    }
    Ok(())
}

fn fixed_edge(report: &mut SuiteReport, config: &VerifyConfig) -> Result<()> {
    let samples = config.samples_or(30_000);
    let graphs = oracle::all_graphs(4, 2);
    let mut counts = vec![0u64; graphs.len()];
    let mut wrong_size = 0;
    let mut unknown = 0;
    let mut stream = RandomStream::new(config.seed).child(500);
    for _ in 0..samples {
        let mut g = fixed_edge_er(4, 2, &mut stream)?;
        if g.len() != 2 {
            wrong_size += 1;
        }
        g.sort();
        match graphs.iter().position(|h| h.as_slice() == g.edges()) {
            Some(i) => counts[i] += 1,
            None => unknown += 1,
        }
    }
    report.check(
        "every sample has exactly 2 edges from the 15 graphs",
        wrong_size == 0 && unknown == 0 && graphs.len() == 15,
        format!(
            "{} graphs enumerated, {wrong_size} wrong size, {unknown} unrecognized",
            graphs.len()
        ),
    );
    let p = 1.0 / 15.0;
    let tol = SIGMAS * (p * (1.0 - p) / samples as f64).sqrt();
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    let worst = freqs.iter().map(|f| (f - p).abs()).fold(0.0, f64::max);
    report.check(
        "each graph has frequency 1/15 within 4 sigma",
        worst <= tol,
        format!("max |f - 1/15| = {worst:.5}, tolerance {tol:.5}"),
    );
    Ok(())
}

fn chi_square_fixture(report: &mut SuiteReport) -> Result<()> {
    let r = chi_square(&[30, 32, 33, 31, 29, 25], &[30.0; 6])?;
    report.check(
        "dice statistic = 4/3",
        (r.statistic - 4.0 / 3.0).abs() < 1e-12,
        format!("{:.6}", r.statistic),
    );
    report.check(
        "dice p-value = 0.931 +- 0.001",
        (r.p_value - 0.931).abs() <= 0.001,
        format!("{:.6}", r.p_value),
    );
    let points = [
        (0.5, 0.1),
        (1.0, 1.0),
        (2.5, 3.0),
        (5.0, 2.0),
        (10.0, 12.0),
        (0.5, 10.0),
        (3.0, 0.5),
        (7.0, 7.0),
        (1.5, 20.0),
        (20.0, 15.0),
    ];
    let mut worst: f64 = 0.0;
    for (a, x) in points {
        let reference = 1.0 - oracle::lower_gamma_series(a, x, 1_000_000);
        let got = chi_square_sf(2.0 * x, (2.0 * a) as usize)?;
        worst = worst.max((got - reference).abs());
    }
    report.check(
        "upper incomplete gamma matches series reference at 10 points",
        worst <= 1e-8,
        format!("max abs error {worst:e}"),
    );
    Ok(())
}

fn time_min<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<Duration> {
    let mut best = Duration::MAX;
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(f()?);
        best = best.min(start.elapsed());
    }
    Ok(best)
}

fn performance(report: &mut SuiteReport) -> Result<()> {
    let m = 1e5;
    let mut stream = RandomStream::new(600);
    let mut times = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        let p = Probability::new(m / (n as f64 * n as f64))?;
        let t = time_min(7, || grass_hop_er(n, p, &mut stream))?;
        times.push((n, t));
    }
    let fastest = times.iter().map(|t| t.1).min().unwrap();
    let slowest = times.iter().map(|t| t.1).max().unwrap();
    let spread = slowest.as_secs_f64() / fastest.as_secs_f64();
    report.check(
        "grass-hop time at m = 1e5 within 3x across n = 1e3, 1e4, 1e5",
        spread <= 3.0,
        format!("{times:?}, spread {spread:.2}x"),
    );

    let n = 10_000u64;
    let p = Probability::new(m / (n as f64 * n as f64))?;
    let grass = times[1].1;
    let coin = time_min(1, || Ok(coin_flip_er(n, p, &mut stream)))?;
    let speedup = coin.as_secs_f64() / grass.as_secs_f64();
    report.check(
        "coin-flip at n = 1e4 at least 10x slower than grass-hop",
        speedup >= 10.0,
        format!("coin {coin:.2?}, grass {grass:.2?}, {speedup:.1}x"),
    );
    Ok(())
}

/// Runs every suite in order.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|s| s.run(config)).collect()
}
