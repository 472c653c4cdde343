//! Chung-Lu and stochastic block models.
//!
//! Both models have block-constant probabilities once nodes are grouped, so
//! each block is an independent Erdős–Rényi rectangle. The grass-hopping
//! samplers hop through every block; the ball-dropping samplers drop balls
//! into blocks chosen by weight.

use crate::er::{grass_hop_er_rect, BallDropReport};
use crate::{EdgeList, Error, Execution, Probability, ProbabilityMatrix, RandomStream, Result};

/// Expected degree of every node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DegreeSequence(Vec<u64>);

impl DegreeSequence {
    pub fn new(degrees: Vec<u64>) -> Self {
        DegreeSequence(degrees)
    }

    pub fn degrees(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Checks that `d_i d_j / Σd <= 1` for every pair, i.e. that
    /// `max(d)^2 <= Σd`.
    pub fn validate(&self) -> Result<()> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Model(
                "degree sequence must have a positive sum".into(),
            ));
        }
        let max = *self.0.iter().max().expect("nonempty when total > 0");
        if (max as u128) * (max as u128) > total as u128 {
            return Err(Error::Model(format!(
                "max degree {max} squared exceeds degree sum {total}; probabilities would exceed 1"
            )));
        }
        Ok(())
    }
}

impl From<Vec<u64>> for DegreeSequence {
    fn from(d: Vec<u64>) -> Self {
        DegreeSequence(d)
    }
}

/// `P_ij = d_i d_j / Σd`.
pub fn chung_lu_probability(d: &DegreeSequence, i: usize, j: usize) -> Result<Probability> {
    let total = d.total();
    if total == 0 {
        return Err(Error::Model(
            "degree sequence must have a positive sum".into(),
        ));
    }
    let (di, dj) = (d.0[i] as f64, d.0[j] as f64);
    Probability::new(di * dj / total as f64)
        .map_err(|_| Error::Model(format!("P[{i}][{j}] = {di} * {dj} / {total} exceeds 1")))
}

/// Dense Chung-Lu probability matrix.
pub fn chung_lu_matrix(d: &DegreeSequence) -> Result<ProbabilityMatrix> {
    d.validate()?;
    let n = d.len();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(chung_lu_probability(d, i, j)?.value());
        }
    }
    ProbabilityMatrix::new(n, n, data)
}

/// Block sizes and the block-to-block probability matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    sizes: Vec<u64>,
    q: ProbabilityMatrix,
}

impl BlockSpec {
    pub fn new(sizes: Vec<u64>, q: ProbabilityMatrix) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Model("at least one block is required".into()));
        }
        if let Some(b) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Model(format!("block {b} is empty")));
        }
        if q.rows() != sizes.len() || q.cols() != sizes.len() {
            return Err(Error::Shape(format!(
                "{} blocks but a {}x{} probability matrix",
                sizes.len(),
                q.rows(),
                q.cols()
            )));
        }
        sizes
            .iter()
            .try_fold(0u64, |acc, &s| acc.checked_add(s))
            .ok_or_else(|| Error::Capacity("total node count exceeds 64 bits".into()))?;
        Ok(BlockSpec { sizes, q })
    }

    /// Two-level model: `within` on diagonal blocks, `between` elsewhere.
    pub fn planted(sizes: Vec<u64>, within: Probability, between: Probability) -> Result<Self> {
        let k = sizes.len();
        let data = (0..k * k)
            .map(|c| {
                if c / k == c % k {
                    within.value()
                } else {
                    between.value()
                }
            })
            .collect();
        Self::new(sizes, ProbabilityMatrix::new(k, k, data)?)
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn q(&self) -> &ProbabilityMatrix {
        &self.q
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_nodes(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// First node of every block.
    pub fn offsets(&self) -> Vec<u64> {
        let mut acc = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let start = acc;
                acc += s;
                start
            })
            .collect()
    }

    /// Block containing each node.
    pub fn block_of_nodes(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s as usize))
            .collect()
    }

    /// Dense per-node probability matrix. Small models only.
    pub fn marginal_matrix(&self) -> Result<ProbabilityMatrix> {
        let block = self.block_of_nodes();
        let n = block.len();
        let data = (0..n * n)
            .map(|c| self.q.get(block[c / n], block[c % n]))
            .collect();
        ProbabilityMatrix::new(n, n, data)
    }

    /// `(row block, col block)` for every block pair, row-major.
    fn block_pairs(&self) -> Vec<(usize, usize)> {
        let k = self.num_blocks();
        (0..k).flat_map(|r| (0..k).map(move |s| (r, s))).collect()
    }
}

/// Output of a block-by-block grass-hop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockReport {
    pub edges: EdgeList,
    pub blocks_visited: usize,
    pub geometric_draws: u64,
}

/// Grass-hops every `(r, s)` block with probability `Q[r][s]`.
///
/// Block `b` (row-major over block pairs) samples from child stream `b` of a
/// base stream seeded by one draw from `stream`.
pub fn sbm_grass_report(
    spec: &BlockSpec,
    stream: &mut RandomStream,
    execution: Execution,
) -> Result<BlockReport> {
    let base = RandomStream::new(stream.next_u64());
    let offsets = spec.offsets();
    let pairs = spec.block_pairs();
    let pieces = execution.map_ordered(&pairs, |b, &(r, s)| {
        let mut child = base.child(b as u64);
        let p = Probability::new(spec.q.get(r, s))?;
        let block = grass_hop_er_rect(spec.sizes[r], spec.sizes[s], p, &mut child)?;
        Ok((block, child.geometric_draws()))
    })?;
    let n = spec.num_nodes();
    let mut edges = EdgeList::new(n, n);
    edges.reserve(pieces.iter().map(|(e, _)| e.len()).sum());
    let mut geometric_draws = 0;
    for (&(r, s), (block, draws)) in pairs.iter().zip(&pieces) {
        for &(i, j) in block {
            edges.push_unchecked((offsets[r] + i, offsets[s] + j));
        }
        geometric_draws += draws;
    }
    Ok(BlockReport {
        edges,
        blocks_visited: pairs.len(),
        geometric_draws,
    })
}

pub fn sbm_grass(spec: &BlockSpec, stream: &mut RandomStream) -> Result<EdgeList> {
    Ok(sbm_grass_report(spec, stream, Execution::Sequential)?.edges)
}

/// Ball-drops a block model.
///
/// Every block draws its edge count from Binomial(n_r n_s, Q[r][s]) up
/// front. Each drop then picks an unfinished block with weight
/// `n_r n_s Q[r][s]`, a uniform cell inside it, and rejects repeats.
pub fn sbm_ball(spec: &BlockSpec, stream: &mut RandomStream) -> Result<BallDropReport> {
    let pairs = spec.block_pairs();
    let cells: Vec<u64> = pairs
        .iter()
        .map(|&(r, s)| spec.sizes[r] * spec.sizes[s])
        .collect();
    let mut targets = Vec::with_capacity(pairs.len());
    for (&(r, s), &c) in pairs.iter().zip(&cells) {
        targets.push(stream.sample_binomial(c, Probability::new(spec.q.get(r, s))?));
    }
    let mut weights: Vec<f64> = pairs
        .iter()
        .zip(&cells)
        .zip(&targets)
        .map(|((&(r, s), &c), &t)| {
            if t > 0 {
                c as f64 * spec.q.get(r, s)
            } else {
                0.0
            }
        })
        .collect();

    let mut taken: Vec<std::collections::HashSet<u64>> = targets
        .iter()
        .map(|&t| std::collections::HashSet::with_capacity(t as usize))
        .collect();
    let offsets = spec.offsets();
    let n = spec.num_nodes();
    let mut edges = EdgeList::new(n, n);
    edges.reserve(targets.iter().sum::<u64>() as usize);
    let mut remaining: u64 = targets.iter().sum();
    let mut draws = 0;
    while remaining > 0 {
        let b = stream.sample_discrete(&weights)?;
        let (r, s) = pairs[b];
        let (rows, cols) = (spec.sizes[r], spec.sizes[s]);
        let i = stream.uniform_below(rows);
        let j = stream.uniform_below(cols);
        draws += 1;
        if taken[b].insert(i * cols + j) {
            edges.push_unchecked((offsets[r] + i, offsets[s] + j));
            remaining -= 1;
            if taken[b].len() as u64 == targets[b] {
                weights[b] = 0.0;
            }
        }
    }
    Ok(BallDropReport {
        duplicates: draws - edges.len() as u64,
        edges,
        draws,
        complemented: false,
    })
}

/// Nodes grouped by equal degree, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeGroups {
    /// `order[k]` is the original index of the node at sorted position `k`.
    pub order: Vec<u64>,
    /// Distinct degrees, ascending.
    pub degrees: Vec<u64>,
    pub sizes: Vec<u64>,
}

/// Stable ascending sort of nodes by degree, then run-length grouping.
pub fn group_degrees(d: &DegreeSequence) -> DegreeGroups {
    let mut order: Vec<u64> = (0..d.len() as u64).collect();
    order.sort_by_key(|&i| d.0[i as usize]);
    let mut degrees: Vec<u64> = Vec::new();
    let mut sizes: Vec<u64> = Vec::new();
    for &i in &order {
        let deg = d.0[i as usize];
        if degrees.last() == Some(&deg) {
            *sizes.last_mut().unwrap() += 1;
        } else {
            degrees.push(deg);
            sizes.push(1);
        }
    }
    DegreeGroups {
        order,
        degrees,
        sizes,
    }
}

/// Block model over degree groups with `Q[a][b] = d_a d_b / Σd`.
///
/// Node `k` of the block model is original node `order[k]` of the
/// returned groups.
pub fn chung_lu_as_sbm(d: &DegreeSequence) -> Result<(BlockSpec, DegreeGroups)> {
    d.validate()?;
    let groups = group_degrees(d);
    let total = d.total() as f64;
    let t = groups.degrees.len();
    let data = (0..t * t)
        .map(|c| groups.degrees[c / t] as f64 * groups.degrees[c % t] as f64 / total)
        .collect();
    let spec = BlockSpec::new(groups.sizes.clone(), ProbabilityMatrix::new(t, t, data)?)?;
    Ok((spec, groups))
}

/// Grass-hops a Chung-Lu graph through its `t²` degree-group blocks and
/// maps sorted positions back to the original node labels.
pub fn chung_lu_grass_report(
    d: &DegreeSequence,
    stream: &mut RandomStream,
    execution: Execution,
) -> Result<BlockReport> {
    let (spec, groups) = chung_lu_as_sbm(d)?;
    let sorted = sbm_grass_report(&spec, stream, execution)?;
    let n = d.len() as u64;
    let mut edges = EdgeList::new(n, n);
    edges.reserve(sorted.edges.len());
    for &(i, j) in &sorted.edges {
        edges.push_unchecked((groups.order[i as usize], groups.order[j as usize]));
    }
    Ok(BlockReport { edges, ..sorted })
}

pub fn chung_lu_grass(d: &DegreeSequence, stream: &mut RandomStream) -> Result<EdgeList> {
    Ok(chung_lu_grass_report(d, stream, Execution::Sequential)?.edges)
}

/// Endpoint sampler for Chung-Lu ball-dropping: node `i` is drawn with
/// probability `d_i / Σd` from a list where it appears `d_i` times.
#[derive(Debug, Clone)]
pub struct EndpointList {
    entries: Vec<u64>,
}

impl EndpointList {
    pub fn new(d: &DegreeSequence) -> Self {
        let mut entries = Vec::with_capacity(d.total() as usize);
        for (i, &deg) in d.0.iter().enumerate() {
            entries.extend(std::iter::repeat_n(i as u64, deg as usize));
        }
        EndpointList { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn draw(&self, stream: &mut RandomStream) -> u64 {
        self.entries[stream.uniform_below(self.entries.len() as u64) as usize]
    }
}

/// Ball-drops `Σd` distinct edges, drawing both endpoints of every ball
/// from an [`EndpointList`], so cell `(i, j)` is hit with probability
/// proportional to `d_i d_j`.
///
/// Heavily skewed degrees can make the rejection loop slow to finish, since
/// the last few edges must avoid every cell already taken.
pub fn chung_lu_ball(d: &DegreeSequence, stream: &mut RandomStream) -> Result<BallDropReport> {
    if d.total() == 0 {
        return Err(Error::Model(
            "degree sequence must have a positive sum".into(),
        ));
    }
    let endpoints = EndpointList::new(d);
    let target = endpoints.len() as u64;
    let support = d.0.iter().filter(|&&x| x > 0).count() as u64;
    if support * support < target {
        return Err(Error::Capacity(format!(
            "{target} distinct edges cannot fit among {support}^2 reachable cells"
        )));
    }
    let n = d.len() as u64;
    let mut taken = std::collections::HashSet::with_capacity(target as usize);
    let mut edges = EdgeList::new(n, n);
    edges.reserve(target as usize);
    let mut draws = 0;
    while (edges.len() as u64) < target {
        let src = endpoints.draw(stream);
        let dst = endpoints.draw(stream);
        draws += 1;
        if taken.insert(src * n + dst) {
            edges.push_unchecked((src, dst));
        }
    }
    Ok(BallDropReport {
        duplicates: draws - edges.len() as u64,
        edges,
        draws,
        complemented: false,
    })
}
