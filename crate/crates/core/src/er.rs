//! Erdős–Rényi samplers.
//!
//! Cells of an `n × n` (or `rows × cols`) matrix are linearized row-major:
//! index `e` is cell `(e / cols, e % cols)`.

use std::collections::HashSet;

use crate::combinat::{binomial, unrank_combination};
use crate::{EdgeList, Error, Probability, ProbabilityMatrix, RandomStream, Result};

/// Outcome of a ball-dropping run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallDropReport {
    pub edges: EdgeList,
    /// Uniform cells drawn, including rejected repeats.
    pub draws: u64,
    /// Drops rejected because the cell was already taken.
    pub duplicates: u64,
    /// True when the drops picked non-edges and `edges` is their complement.
    pub complemented: bool,
}

impl BallDropReport {
    /// Number of distinct cells the drops landed on; `draws - duplicates`.
    pub fn distinct_drops(&self) -> u64 {
        if self.complemented {
            self.edges.num_rows() * self.edges.num_cols() - self.edges.len() as u64
        } else {
            self.edges.len() as u64
        }
    }
}

fn cell_count(rows: u64, cols: u64) -> Result<u64> {
    rows.checked_mul(cols)
        .ok_or_else(|| Error::Capacity(format!("{rows}x{cols} cells exceed 64-bit indexing")))
}

/// Flips one coin per cell of an `n × n` matrix.
pub fn coin_flip_er(n: u64, p: Probability, stream: &mut RandomStream) -> EdgeList {
    let p = p.value();
    let mut edges = EdgeList::new(n, n);
    // Column-major visiting order.
    for j in 0..n {
        for i in 0..n {
            if stream.uniform_unit() < p {
                edges.push_unchecked((i, j));
            }
        }
    }
    edges
}

/// Flips one coin per cell with that cell's probability.
pub fn coin_flip_matrix(probs: &ProbabilityMatrix, stream: &mut RandomStream) -> EdgeList {
    let mut edges = EdgeList::new(probs.rows() as u64, probs.cols() as u64);
    for j in 0..probs.cols() {
        for i in 0..probs.rows() {
            if stream.uniform_unit() < probs.get(i, j) {
                edges.push_unchecked((i as u64, j as u64));
            }
        }
    }
    edges
}

/// Drops `target` distinct uniform cells into a `rows × cols` block,
/// rejecting repeats. Edge order is the order cells were first hit.
pub(crate) fn drop_distinct(
    rows: u64,
    cols: u64,
    target: u64,
    stream: &mut RandomStream,
) -> Result<BallDropReport> {
    let cells = cell_count(rows, cols)?;
    if target > cells {
        return Err(Error::Capacity(format!(
            "cannot place {target} distinct edges in {cells} cells"
        )));
    }
    let mut taken = HashSet::with_capacity(target as usize);
    let mut edges = EdgeList::new(rows, cols);
    edges.reserve(target as usize);
    let mut draws = 0;
    while (edges.len() as u64) < target {
        let src = stream.uniform_below(rows);
        let dst = stream.uniform_below(cols);
        draws += 1;
        if taken.insert(src * cols + dst) {
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

/// Ball-drops an Erdős–Rényi graph: the edge count is drawn from
/// Binomial(n², p), then uniform cells are dropped until that many distinct
/// cells are hit.
///
/// Efficient for `p <= 0.5`; see [`ball_drop_er_complement`] above that.
pub fn ball_drop_er(n: u64, p: Probability, stream: &mut RandomStream) -> Result<BallDropReport> {
    let cells = cell_count(n, n)?;
    let target = stream.sample_binomial(cells, p);
    drop_distinct(n, n, target, stream)
}

/// Ball-drops the *missing* edges with probability `1 - p` and returns the
/// complement. `p` must exceed 0.5.
pub fn ball_drop_er_complement(
    n: u64,
    p: Probability,
    stream: &mut RandomStream,
) -> Result<BallDropReport> {
    if p.value() <= 0.5 {
        return Err(Error::Domain(format!(
            "complement ball-drop needs p > 0.5, got {}",
            p.value()
        )));
    }
    let missing = ball_drop_er(n, p.complement(), stream)?;
    let absent: HashSet<(u64, u64)> = missing.edges.iter().copied().collect();
    let mut edges = EdgeList::new(n, n);
    edges.reserve((n * n) as usize - absent.len());
    for i in 0..n {
        for j in 0..n {
            if !absent.contains(&(i, j)) {
                edges.push_unchecked((i, j));
            }
        }
    }
    Ok(BallDropReport {
        edges,
        draws: missing.draws,
        duplicates: missing.duplicates,
        complemented: true,
    })
}

/// Visits the successes of `total` Bernoulli trials whose gaps come from
/// `next_gap`. Returns the number of gaps drawn: one per success plus the
/// final gap that overshoots.
pub(crate) fn hop(
    total: u64,
    mut next_gap: impl FnMut() -> Result<u64>,
    mut visit: impl FnMut(u64) -> Result<()>,
) -> Result<u64> {
    let mut draws = 0;
    let mut at: Option<u64> = None;
    loop {
        let gap = next_gap()?;
        draws += 1;
        if gap == 0 {
            return Err(Error::Domain("gaps must be at least 1".into()));
        }
        let landing = match at {
            None => gap - 1,
            Some(pos) => match pos.checked_add(gap) {
                Some(x) => x,
                None => break,
            },
        };
        if landing >= total {
            break;
        }
        visit(landing)?;
        at = Some(landing);
    }
    Ok(draws)
}

/// Grass-hops a `rows × cols` block using externally supplied gaps.
///
/// Returns the edges and the number of gaps consumed.
pub fn grass_hop_rect_with_gaps(
    rows: u64,
    cols: u64,
    next_gap: impl FnMut() -> Result<u64>,
) -> Result<(EdgeList, u64)> {
    let total = cell_count(rows, cols)?;
    let mut edges = EdgeList::new(rows, cols);
    let draws = hop(total, next_gap, |e| {
        edges.push_unchecked((e / cols, e % cols));
        Ok(())
    })?;
    Ok((edges, draws))
}

/// Grass-hops a `rows × cols` Erdős–Rényi block with geometric gaps.
///
/// Work is proportional to the edges produced, not to `rows * cols`.
pub fn grass_hop_er_rect(
    rows: u64,
    cols: u64,
    p: Probability,
    stream: &mut RandomStream,
) -> Result<EdgeList> {
    if p.value() == 0.0 {
        cell_count(rows, cols)?;
        return Ok(EdgeList::new(rows, cols));
    }
    let (edges, _) = grass_hop_rect_with_gaps(rows, cols, || stream.sample_geometric(p))?;
    Ok(edges)
}

pub fn grass_hop_er(n: u64, p: Probability, stream: &mut RandomStream) -> Result<EdgeList> {
    grass_hop_er_rect(n, n, p, stream)
}

/// Uniform graph with exactly `m` undirected edges on `n` nodes.
///
/// A uniform rank over all `C(C(n,2), m)` edge sets is unranked to `m`
/// increasing pair indices; each pair index is unranked to `(src, dst)` with
/// `src < dst`.
pub fn fixed_edge_er(n: u64, m: u64, stream: &mut RandomStream) -> Result<EdgeList> {
    let pairs = binomial(n as u128, 2)?;
    if m as u128 > pairs {
        return Err(Error::Capacity(format!(
            "{m} edges requested but {n} nodes have only {pairs} pairs"
        )));
    }
    let pairs = u64::try_from(pairs)
        .map_err(|_| Error::Capacity(format!("{n} nodes have more than 2^64 pairs")))?;
    let graphs = binomial(pairs as u128, m as u128)
        .map_err(|_| Error::Capacity(format!("C({pairs}, {m}) exceeds 128 bits")))?;
    let rank = stream.uniform_below_u128(graphs)?;
    let mut edges = EdgeList::new(n, n);
    edges.reserve(m as usize);
    for pair in unrank_combination(rank, pairs, m)? {
        let ends = unrank_combination(pair as u128, n, 2)?;
        edges.push_unchecked((ends[0], ends[1]));
    }
    Ok(edges)
}

/// Keeps the strict upper triangle and mirrors it, giving a symmetric
/// graph with no self-loops.
pub fn symmetrize(edges: &EdgeList) -> Result<EdgeList> {
    if !edges.is_square() {
        return Err(Error::Shape(format!(
            "cannot symmetrize a {}x{} node space",
            edges.num_rows(),
            edges.num_cols()
        )));
    }
    let mut out = EdgeList::new(edges.num_rows(), edges.num_cols());
    for &(s, d) in edges {
        if s < d {
            out.push_unchecked((s, d));
            out.push_unchecked((d, s));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(p: f64) -> Probability {
        Probability::new(p).unwrap()
    }

    #[test]
    fn coin_flip_extremes() {
        let mut s = RandomStream::new(1);
        assert!(coin_flip_er(6, Probability::ZERO, &mut s).is_empty());
        assert_eq!(coin_flip_er(6, Probability::ONE, &mut s).len(), 36);
        let zeros = ProbabilityMatrix::constant(3, 4, 0.0).unwrap();
        assert!(coin_flip_matrix(&zeros, &mut s).is_empty());
        let ones = ProbabilityMatrix::constant(3, 4, 1.0).unwrap();
        assert_eq!(coin_flip_matrix(&ones, &mut s).len(), 12);
    }

    #[test]
    fn coin_flip_visits_column_major() {
        let mut s = RandomStream::new(1);
        let e = coin_flip_er(2, Probability::ONE, &mut s);
        assert_eq!(e.edges(), &[(0, 0), (1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn ball_drop_bookkeeping() {
        let mut s = RandomStream::new(3);
        let r = ball_drop_er(10, Probability::ZERO, &mut s).unwrap();
        assert!(r.edges.is_empty());
        assert_eq!(r.draws, 0);
        for _ in 0..50 {
            let r = ball_drop_er(10, prob(0.3), &mut s).unwrap();
            assert_eq!(r.draws, r.edges.len() as u64 + r.duplicates);
            assert!(EdgeList::from_edges(10, 10, r.edges.edges().to_vec()).is_ok());
        }
    }

    #[test]
    fn complement_identity() {
        let mut s = RandomStream::new(4);
        assert_eq!(
            ball_drop_er_complement(5, Probability::ONE, &mut s)
                .unwrap()
                .edges
                .len(),
            25
        );
        for _ in 0..20 {
            let r = ball_drop_er_complement(3, prob(0.75), &mut s).unwrap();
            assert!(r.complemented);
            assert_eq!(r.draws, r.distinct_drops() + r.duplicates);
            assert_eq!(r.edges.len() as u64 + r.distinct_drops(), 9);
        }
        assert!(ball_drop_er_complement(3, prob(0.5), &mut s).is_err());
    }

    #[test]
    fn grass_hop_by_hand() {
        let mut gaps = [2u64, 4, 3, 100].into_iter();
        let (edges, draws) = grass_hop_rect_with_gaps(3, 3, || Ok(gaps.next().unwrap())).unwrap();
        assert_eq!(edges.edges(), &[(0, 1), (1, 2), (2, 2)]);
        // Three hits, then the overshooting gap.
        assert_eq!(draws, 4);

        let mut gaps = [1u64, 0].into_iter();
        assert!(grass_hop_rect_with_gaps(3, 3, || Ok(gaps.next().unwrap())).is_err());
    }

    #[test]
    fn grass_hop_extremes() {
        let mut s = RandomStream::new(5);
        assert!(grass_hop_er(50, Probability::ZERO, &mut s)
            .unwrap()
            .is_empty());
        assert_eq!(s.geometric_draws(), 0);
        let full = grass_hop_er_rect(3, 7, Probability::ONE, &mut s).unwrap();
        assert_eq!(full.len(), 21);
        let expected: Vec<(u64, u64)> = (0..3).flat_map(|i| (0..7).map(move |j| (i, j))).collect();
        assert_eq!(full.edges(), expected.as_slice());
    }

    #[test]
    fn grass_hop_draws_edges_plus_one() {
        let mut s = RandomStream::new(6);
        for _ in 0..5 {
            let before = s.geometric_draws();
            let e = grass_hop_er(1000, prob(0.004), &mut s).unwrap();
            assert_eq!(s.geometric_draws() - before, e.len() as u64 + 1);
        }
    }

    #[test]
    fn grass_hop_handles_huge_gaps_without_overflow() {
        let mut s = RandomStream::new(7);
        let e = grass_hop_er(1 << 31, prob(1e-17), &mut s).unwrap();
        assert!(e.len() < 10_000);
        assert!(grass_hop_er(1 << 33, prob(0.1), &mut s).is_err());
    }

    #[test]
    fn fixed_edge_contract() {
        let mut s = RandomStream::new(8);
        assert!(fixed_edge_er(4, 0, &mut s).unwrap().is_empty());
        let mut all = fixed_edge_er(4, 6, &mut s).unwrap();
        all.sort();
        assert_eq!(
            all.edges(),
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
        assert!(matches!(
            fixed_edge_er(4, 7, &mut s),
            Err(Error::Capacity(_))
        ));
        // C(435, 15) needs more than 64 bits.
        for _ in 0..100 {
            let e = fixed_edge_er(30, 15, &mut s).unwrap();
            assert_eq!(e.len(), 15);
            assert!(e.iter().all(|&(a, b)| a < b));
            assert!(EdgeList::from_edges(30, 30, e.into_edges()).is_ok());
        }
        assert!(matches!(
            fixed_edge_er(30, 40, &mut s),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn symmetrize_cases() {
        let e = EdgeList::from_edges(3, 3, vec![(0, 1), (1, 0), (2, 2)]).unwrap();
        assert_eq!(symmetrize(&e).unwrap().edges(), &[(0, 1), (1, 0)]);
        assert!(symmetrize(&EdgeList::new(4, 4)).unwrap().is_empty());
        assert!(matches!(
            symmetrize(&EdgeList::new(2, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn symmetrize_matches_dense_triangle_oracle() {
        let mut s = RandomStream::new(9);
        for _ in 0..50 {
            let a = grass_hop_er(8, prob(0.25), &mut s).unwrap();
            let dense = a.to_dense();
            let sym = symmetrize(&a).unwrap().to_dense();
            for i in 0..8 {
                for j in 0..8 {
                    let upper = |r: usize, c: usize| r < c && dense[r * 8 + c];
                    assert_eq!(sym[i * 8 + j], upper(i, j) || upper(j, i));
                }
            }
        }
    }
}
