//! Goodness-of-fit tests, coupon-collector expectations and empirical
//! frequency estimation.

use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

use crate::{EdgeList, Error, ProbabilityMatrix, RandomStream, Result};

/// Pearson chi-square statistic with its upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// `P[X > x]` for `X ~ χ²(dof)`: the regularized upper incomplete gamma
/// `Q(dof / 2, x / 2)`.
pub fn chi_square_sf(statistic: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::Domain(
            "chi-square needs at least one degree of freedom".into(),
        ));
    }
    if statistic.is_nan() || statistic < 0.0 {
        return Err(Error::Domain(format!(
            "invalid chi-square statistic {statistic}"
        )));
    }
    if statistic == 0.0 {
        return Ok(1.0);
    }
    if statistic.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(dof as f64 / 2.0, statistic / 2.0))
}

/// `Σ (O - E)² / E` over categories, with `categories - 1` degrees of
/// freedom.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() {
        return Err(Error::Shape(format!(
            "{} observed vs {} expected categories",
            observed.len(),
            expected.len()
        )));
    }
    if observed.len() < 2 {
        return Err(Error::Domain(
            "chi-square needs at least two categories".into(),
        ));
    }
    if let Some(e) = expected.iter().find(|&&e| e.is_nan() || e <= 0.0) {
        return Err(Error::Domain(format!(
            "expected count {e} must be positive"
        )));
    }
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof)?,
    })
}

/// Merges adjacent categories, left to right, until every pooled expected
/// count reaches `min_expected`. A short remainder joins the last bin.
pub fn pool_bins(observed: &[u64], expected: &[f64], min_expected: f64) -> (Vec<u64>, Vec<f64>) {
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc) = (0u64, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= min_expected {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(o), Some(e)) => {
                *o += o_acc;
                *e += e_acc;
            }
            _ => {
                obs.push(o_acc);
                exp.push(e_acc);
            }
        }
    }
    (obs, exp)
}

/// Binomial(n, p) probability mass at `k`, via log-gamma.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return (k == 0) as u8 as f64;
    }
    if p == 1.0 {
        return (k == n) as u8 as f64;
    }
    let (n, k) = (n as f64, k as f64);
    let ln_choose = ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
    (ln_choose + k * p.ln() + (n - k) * (-p).ln_1p()).exp()
}

/// Expected drops per distinct edge when ball-dropping at density `p`:
/// `ln(1 / (1 - p)) / p`, tending to 1 as `p → 0`.
pub fn expected_ball_drop_ratio(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        if p == 0.0 {
            return Ok(1.0);
        }
        return Err(Error::Domain(format!(
            "ratio defined for 0 < p < 1, got {p}"
        )));
    }
    if p < 1e-12 {
        return Ok(1.0 + p / 2.0 + p * p / 3.0);
    }
    Ok(-(-p).ln_1p() / p)
}

/// Expected uniform draws to collect `m` distinct cells out of `cells`:
/// `cells · (H_cells - H_{cells - m})`, summed term by term.
pub fn expected_ball_drops_exact(cells: u64, m: u64) -> Result<f64> {
    if m > cells {
        return Err(Error::Domain(format!(
            "cannot collect {m} of {cells} cells"
        )));
    }
    // Smallest terms first.
    let tail: f64 = ((cells - m + 1)..=cells)
        .rev()
        .map(|i| 1.0 / i as f64)
        .sum();
    Ok(cells as f64 * tail)
}

/// Per-cell hit counts over repeated samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    samples: u64,
    /// `edge_counts[m]` is the number of samples with exactly `m` edges.
    edge_counts: Vec<u64>,
}

/// A cell whose frequency strayed outside its tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellDeviation {
    pub row: usize,
    pub col: usize,
    pub frequency: f64,
    pub expected: f64,
    /// Distance from `expected` in standard errors; infinite when the
    /// expected probability is 0 or 1 and the frequency disagrees.
    pub sigmas: f64,
}

impl FrequencyMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        FrequencyMatrix {
            rows,
            cols,
            counts: vec![0; rows * cols],
            samples: 0,
            edge_counts: vec![0; rows * cols + 1],
        }
    }

    pub fn record(&mut self, edges: &EdgeList) -> Result<()> {
        if edges.num_rows() != self.rows as u64 || edges.num_cols() != self.cols as u64 {
            return Err(Error::Shape(format!(
                "sample is {}x{}, tally is {}x{}",
                edges.num_rows(),
                edges.num_cols(),
                self.rows,
                self.cols
            )));
        }
        for &(i, j) in edges {
            self.counts[i as usize * self.cols + j as usize] += 1;
        }
        self.edge_counts[edges.len()] += 1;
        self.samples += 1;
        Ok(())
    }

    fn merge(mut self, other: FrequencyMatrix) -> FrequencyMatrix {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        for (a, b) in self.edge_counts.iter_mut().zip(other.edge_counts) {
            *a += b;
        }
        self.samples += other.samples;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn frequency(&self, row: usize, col: usize) -> f64 {
        self.count(row, col) as f64 / self.samples as f64
    }

    /// Histogram of edges per sample.
    pub fn edge_count_histogram(&self) -> &[u64] {
        &self.edge_counts
    }

    /// Mean number of edges leaving each row node.
    pub fn mean_out_degrees(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.frequency(i, j)).sum())
            .collect()
    }

    /// Cells whose frequency is more than `sigmas` standard errors
    /// `√(p (1 - p) / samples)` away from `expected`.
    pub fn deviations(
        &self,
        expected: &ProbabilityMatrix,
        sigmas: f64,
    ) -> Result<Vec<CellDeviation>> {
        if expected.rows() != self.rows || expected.cols() != self.cols {
            return Err(Error::Shape(
                "expected matrix does not match the tally".into(),
            ));
        }
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let p = expected.get(i, j);
                let f = self.frequency(i, j);
                let se = (p * (1.0 - p) / self.samples as f64).sqrt();
                let z = if se > 0.0 {
                    (f - p).abs() / se
                } else if f == p {
                    0.0
                } else {
                    f64::INFINITY
                };
                if z > sigmas {
                    out.push(CellDeviation {
                        row: i,
                        col: j,
                        frequency: f,
                        expected: p,
                        sigmas: z,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Largest deviation over all cells, in standard errors.
    pub fn max_sigma(&self, expected: &ProbabilityMatrix) -> Result<f64> {
        Ok(self
            .deviations(expected, -1.0)?
            .iter()
            .map(|d| d.sigmas)
            .fold(0.0, f64::max))
    }
}

/// Runs `sampler` `samples` times and tallies per-cell hits.
///
/// Sample `i` receives child stream `i` of `base`; batches run on the rayon
/// pool, and the tally is independent of scheduling.
pub fn empirical_frequency<F>(
    rows: usize,
    cols: usize,
    samples: u64,
    base: &RandomStream,
    sampler: F,
) -> Result<FrequencyMatrix>
where
    F: Fn(&mut RandomStream) -> Result<EdgeList> + Sync,
{
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    const BATCH: u64 = 256;
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut tally = FrequencyMatrix::new(rows, cols);
            for i in b * BATCH..((b + 1) * BATCH).min(samples) {
                let edges = sampler(&mut base.child(i))?;
                tally.record(&edges)?;
            }
            Ok(tally)
        })
        .try_reduce(|| FrequencyMatrix::new(rows, cols), |a, b| Ok(a.merge(b)))
}
