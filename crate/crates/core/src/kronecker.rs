//! Stochastic Kronecker graphs by region-wise grass-hopping.
//!
//! The `k`-th Kronecker power of an `n × n` initiator has only
//! `C(k + n² - 1, k)` distinct probabilities. Reshaping it as a
//! `k`-dimensional multiplication table of `v = vec(K)`, each distinct value
//! occupies the permutations of one non-decreasing index sequence (a
//! *region*). The sampler enumerates regions, grass-hops over the ranks of
//! each region's permutations, unranks every hit, and maps the multi-index
//! to a Kronecker row and column with a base-`n` Morton decode.

use crate::combinat::{
    self, count_regions, morton_decode, multiindex_to_linear, ndseq_to_counter,
    num_multiset_permutations, regions_iter, MultisetUnranker, NdSequence,
};
use crate::er::{coin_flip_matrix, hop};
use crate::{EdgeList, Error, Execution, Probability, ProbabilityMatrix, RandomStream, Result};

/// Largest Kronecker power supported: region sizes are multinomials of `k`
/// and `34!` is the largest factorial below `2^128`.
pub const MAX_POWER: u32 = 34;

/// Largest side length [`kronecker_power_dense`] will materialize.
pub const MAX_DENSE_SIDE: usize = 1 << 12;

/// Largest region size the 64-bit grass-hop can traverse.
const MAX_REGION_SIZE: u128 = i64::MAX as u128;

/// A square initiator matrix `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Initiator {
    entries: ProbabilityMatrix,
}

impl Initiator {
    pub fn new(entries: ProbabilityMatrix) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(Error::Shape(format!(
                "initiator must be square and nonempty, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        Ok(Initiator { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ProbabilityMatrix::from_rows(rows)?)
    }

    /// Side length `n`.
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &ProbabilityMatrix {
        &self.entries
    }
}

/// Column-major flattening: `v[i + j n] = K[i][j]`.
pub fn vectorize(k: &Initiator) -> Vec<f64> {
    let n = k.n();
    (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| k.entries.get(i, j))
        .collect()
}

/// Multiplication-table entry: `v[r_0] v[r_1] ⋯`, multiplied left to right.
pub fn multtable(r: &[usize], v: &[f64]) -> Result<f64> {
    let mut prod = 1.0;
    for &idx in r {
        prod *= *v.get(idx).ok_or_else(|| {
            Error::Range(format!("index {idx} outside vector of length {}", v.len()))
        })?;
    }
    Ok(prod)
}

/// Hits of one grass-hopping pass through a region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub region: NdSequence,
    /// Probability shared by every cell of the region.
    pub prob: f64,
    /// Number of cells: the distinct permutations of `region`.
    pub size: u128,
    /// Multi-indices landed on, in increasing rank order.
    pub hits: Vec<Vec<usize>>,
    pub geometric_draws: u64,
}

fn region_size(r: &NdSequence) -> Result<u128> {
    let size = num_multiset_permutations(&ndseq_to_counter(r))?;
    if size > MAX_REGION_SIZE {
        return Err(Error::Capacity(format!(
            "region {r} has {size} cells, beyond the 2^63 - 1 grass-hop range"
        )));
    }
    Ok(size)
}

/// Grass-hops region `r` with gaps from `next_gap`.
pub fn grass_hop_region_with_gaps(
    r: &NdSequence,
    v: &[f64],
    next_gap: impl FnMut() -> Result<u64>,
) -> Result<RegionSample> {
    let prob = multtable(&r.indices(), v)?;
    let size = region_size(r)?;
    let mut unranker = MultisetUnranker::new(r)?;
    let mut perm = Vec::with_capacity(r.len());
    let mut hits = Vec::new();
    let geometric_draws = hop(size as u64, next_gap, |rank| {
        unranker.unrank_into(rank, &mut perm)?;
        hits.push(perm.iter().map(|&x| x as usize).collect());
        Ok(())
    })?;
    Ok(RegionSample {
        region: r.clone(),
        prob,
        size,
        hits,
        geometric_draws,
    })
}

/// Grass-hops region `r` of the multiplication table of `v`.
///
/// Every cell of the region is hit independently with the region's common
/// probability. A zero-probability region returns no hits and draws nothing.
pub fn grass_hop_region(
    r: &NdSequence,
    v: &[f64],
    stream: &mut RandomStream,
) -> Result<RegionSample> {
    let prob = multtable(&r.indices(), v)?;
    if prob == 0.0 {
        return Ok(RegionSample {
            region: r.clone(),
            prob,
            size: region_size(r)?,
            hits: Vec::new(),
            geometric_draws: 0,
        });
    }
    let p = Probability::new(prob)?;
    grass_hop_region_with_gaps(r, v, || stream.sample_geometric(p))
}

fn to_coordinate(x: u128) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::Capacity(format!("coordinate {x} exceeds 64 bits")))
}

fn check_digits(mind: &[usize], n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "initiator side must be at least 2, got {n}"
        )));
    }
    if let Some(&d) = mind.iter().find(|&&d| d >= n * n) {
        return Err(Error::Range(format!(
            "multi-index entry {d} outside [0, {})",
            n * n
        )));
    }
    Ok(())
}

/// Kronecker `(row, col)` of a multiplication-table multi-index: the base-`n`
/// Morton decode of its base-`n²` linear index.
pub fn map_mult_to_kron(mind: &[usize], n: usize) -> Result<(u64, u64)> {
    check_digits(mind, n)?;
    let linear = multiindex_to_linear(mind, (n * n) as u64)?;
    let (row, col) = morton_decode(linear, n as u64)?;
    Ok((to_coordinate(row)?, to_coordinate(col)?))
}

/// Same map as [`map_mult_to_kron`], built digit by digit: entry `r` at
/// depth `i` contributes `r mod n` to the row and `r / n` to the column at
/// place value `n^(k-1-i)`.
pub fn backward_map(mind: &[usize], n: usize) -> Result<(u64, u64)> {
    check_digits(mind, n)?;
    let overflow = || Error::Capacity(format!("{n}^{} exceeds 64 bits", mind.len()));
    let (mut row, mut col) = (0u64, 0u64);
    let n = n as u64;
    for &r in mind {
        let r = r as u64;
        row = row
            .checked_mul(n)
            .and_then(|x| x.checked_add(r % n))
            .ok_or_else(overflow)?;
        col = col
            .checked_mul(n)
            .and_then(|x| x.checked_add(r / n))
            .ok_or_else(overflow)?;
    }
    Ok((row, col))
}

/// Side length `n^k`, if it fits in 64 bits.
fn kron_side(n: usize, k: u32) -> Result<u64> {
    (n as u64)
        .checked_pow(k)
        .ok_or_else(|| Error::Capacity(format!("{n}^{k} nodes exceed 64-bit indexing")))
}

/// Dense `K^⊗k`, for oracles. Side length capped at [`MAX_DENSE_SIDE`].
pub fn kronecker_power_dense(k: &Initiator, power: u32) -> Result<ProbabilityMatrix> {
    if power == 0 {
        return Err(Error::Domain("Kronecker power must be at least 1".into()));
    }
    let side = kron_side(k.n(), power)?;
    if side > MAX_DENSE_SIDE as u64 {
        return Err(Error::Capacity(format!(
            "dense Kronecker power with side {side} exceeds {MAX_DENSE_SIDE}"
        )));
    }
    let mut out = k.entries.clone();
    for _ in 1..power {
        out = out.kron(&k.entries);
    }
    Ok(out)
}

/// Coin-flips every cell of the dense `K^⊗k`.
pub fn coin_flip_kron(k: &Initiator, power: u32, stream: &mut RandomStream) -> Result<EdgeList> {
    Ok(coin_flip_matrix(&kronecker_power_dense(k, power)?, stream))
}

/// Cells hit by one region, its geometric draws, and whether it was sampled.
type RegionCells = (Vec<(u64, u64)>, u64, bool);

/// Output of [`grass_hop_kron_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KronReport {
    pub edges: EdgeList,
    /// Regions enumerated.
    pub regions: u64,
    /// Regions with nonzero probability, each of which was grass-hopped.
    pub sampled_regions: u64,
    pub geometric_draws: u64,
}

fn check_power(k: &Initiator, power: u32) -> Result<u64> {
    if power == 0 || power > MAX_POWER {
        return Err(Error::Domain(format!(
            "Kronecker power must be in [1, {MAX_POWER}], got {power}"
        )));
    }
    if k.n() < 2 {
        return Err(Error::Domain(
            "grass-hopping needs an initiator side of at least 2".into(),
        ));
    }
    kron_side(k.n(), power)
}

/// Samples `K^⊗k` by grass-hopping every region of the multiplication table.
///
/// Region `i` (in lexicographic order) draws from child stream `i` of a base
/// stream seeded by one draw from `stream`, so sequential and parallel
/// execution return identical edge lists. Edges are grouped by region, in
/// region order.
pub fn grass_hop_kron_report(
    k: &Initiator,
    power: u32,
    stream: &mut RandomStream,
    execution: Execution,
) -> Result<KronReport> {
    let side = check_power(k, power)?;
    let n = k.n();
    let v = vectorize(k);
    let base = RandomStream::new(stream.next_u64());
    let sample = |idx: usize, r: &NdSequence| -> Result<RegionCells> {
        let region = grass_hop_region(r, &v, &mut base.child(idx as u64))?;
        let cells = region
            .hits
            .iter()
            .map(|mind| backward_map(mind, n))
            .collect::<Result<Vec<_>>>()?;
        Ok((cells, region.geometric_draws, region.prob > 0.0))
    };

    let pieces = match execution {
        Execution::Sequential => regions_iter(n * n, power as usize)?
            .enumerate()
            .map(|(i, r)| sample(i, &r))
            .collect::<Result<Vec<_>>>()?,
        Execution::Parallel { .. } => {
            let count = count_regions(n * n, power as usize)?;
            if count > (1 << 26) {
                return Err(Error::Capacity(format!(
                    "{count} regions are too many to schedule in parallel"
                )));
            }
            let all = combinat::regions(n * n, power as usize)?;
            execution.map_ordered(&all, sample)?
        }
    };

    let mut edges = EdgeList::new(side, side);
    edges.reserve(pieces.iter().map(|p| p.0.len()).sum());
    let mut report = KronReport {
        edges: EdgeList::new(side, side),
        regions: pieces.len() as u64,
        sampled_regions: 0,
        geometric_draws: 0,
    };
    for (cells, draws, sampled) in pieces {
        for cell in cells {
            edges.push_unchecked(cell);
        }
        report.geometric_draws += draws;
        report.sampled_regions += sampled as u64;
    }
    report.edges = edges;
    Ok(report)
}

pub fn grass_hop_kron(k: &Initiator, power: u32, stream: &mut RandomStream) -> Result<EdgeList> {
    Ok(grass_hop_kron_report(k, power, stream, Execution::Sequential)?.edges)
}
