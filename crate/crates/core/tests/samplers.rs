use std::collections::HashSet;

use graphgen::block::{chung_lu_ball, sbm_grass_report, BlockSpec, DegreeSequence};
use graphgen::combinat::{regions, NdSequence};
use graphgen::er::{
    ball_drop_er, ball_drop_er_complement, coin_flip_er, fixed_edge_er, grass_hop_er,
    grass_hop_er_rect, symmetrize,
};
use graphgen::kronecker::{
    grass_hop_kron_report, grass_hop_region, kronecker_power_dense, map_mult_to_kron, vectorize,
    Initiator,
};
use graphgen::stats::empirical_frequency;
use graphgen::{EdgeList, Execution, Probability, ProbabilityMatrix, RandomStream, Result};

fn prob(p: f64) -> Probability {
    Probability::new(p).unwrap()
}

fn well_formed(e: &EdgeList) {
    EdgeList::from_edges(e.num_rows(), e.num_cols(), e.edges().to_vec())
        .expect("edges in range and distinct");
}

#[test]
fn samplers_never_emit_duplicates_or_out_of_range() {
    let mut s = RandomStream::new(11);
    let spec = BlockSpec::new(
        vec![4, 1, 7],
        ProbabilityMatrix::from_rows(&[
            vec![0.9, 0.1, 0.3],
            vec![0.0, 1.0, 0.5],
            vec![0.2, 0.6, 0.05],
        ])
        .unwrap(),
    )
    .unwrap();
    let init = Initiator::from_rows(&[
        vec![0.9, 0.6, 0.1],
        vec![0.3, 0.8, 0.0],
        vec![1.0, 0.4, 0.2],
    ])
    .unwrap();
    for _ in 0..50 {
        well_formed(&coin_flip_er(20, prob(0.3), &mut s));
        well_formed(&ball_drop_er(20, prob(0.3), &mut s).unwrap().edges);
        well_formed(
            &ball_drop_er_complement(20, prob(0.8), &mut s)
                .unwrap()
                .edges,
        );
        well_formed(&grass_hop_er(20, prob(0.3), &mut s).unwrap());
        well_formed(&grass_hop_er_rect(7, 31, prob(0.4), &mut s).unwrap());
        well_formed(&fixed_edge_er(20, 20, &mut s).unwrap());
        well_formed(
            &sbm_grass_report(&spec, &mut s, Execution::Sequential)
                .unwrap()
                .edges,
        );
        well_formed(&graphgen::block::sbm_ball(&spec, &mut s).unwrap().edges);
        well_formed(
            &chung_lu_ball(&DegreeSequence::new(vec![5, 1, 1, 2, 2, 1]), &mut s)
                .unwrap()
                .edges,
        );
        well_formed(
            &grass_hop_kron_report(&init, 3, &mut s, Execution::Sequential)
                .unwrap()
                .edges,
        );
    }
}

#[test]
fn ball_drop_accounting() {
    let mut s = RandomStream::new(12);
    for _ in 0..200 {
        let r = ball_drop_er(30, prob(0.2), &mut s).unwrap();
        assert_eq!(r.draws, r.edges.len() as u64 + r.duplicates);
        let c = ball_drop_er_complement(30, prob(0.85), &mut s).unwrap();
        assert!(c.complemented);
        assert_eq!(c.draws, c.distinct_drops() + c.duplicates);
        assert_eq!(c.edges.len() as u64 + c.distinct_drops(), 900);
    }
}

/// Drops `Binomial(n², p)` balls and keeps whatever distinct cells they
/// land on. Collisions shrink the graph, so the edge count falls short of
/// the target on average.
fn ignore_duplicates_ball_drop(n: u64, p: Probability, s: &mut RandomStream) -> Result<EdgeList> {
    let m = s.sample_binomial(n * n, p);
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for _ in 0..m {
        let cell = s.uniform_below_u128((n * n) as u128)? as u64;
        if seen.insert(cell) {
            edges.push((cell / n, cell % n));
        }
    }
    EdgeList::from_edges(n, n, edges)
}

#[test]
fn ignoring_duplicates_is_detectably_biased() {
    let (n, p, samples) = (8u64, 0.25, 20_000u64);
    let base = RandomStream::new(13);
    let expected = ProbabilityMatrix::constant(8, 8, p).unwrap();
    let biased = empirical_frequency(8, 8, samples, &base, |s| {
        ignore_duplicates_ball_drop(n, prob(p), s)
    })
    .unwrap();
    let fair = empirical_frequency(8, 8, samples, &base.child(1), |s| {
        Ok(ball_drop_er(n, prob(p), s)?.edges)
    })
    .unwrap();
    assert!(fair.deviations(&expected, 4.0).unwrap().is_empty());
    // Each cell is hit with probability about 1 - e^{-p} < p.
    let flagged = biased.deviations(&expected, 4.0).unwrap();
    assert!(
        flagged.len() > 32,
        "only {} biased cells flagged",
        flagged.len()
    );
    assert!(flagged.iter().all(|d| d.frequency < d.expected));
}

#[test]
fn grass_hop_uses_one_draw_per_edge_plus_one() {
    let mut s = RandomStream::new(14);
    for &(n, p) in &[
        (1u64, 0.5),
        (50, 0.01),
        (200, 0.2),
        (1000, 0.0001),
        (30, 1.0),
    ] {
        let before = s.geometric_draws();
        let e = grass_hop_er(n, prob(p), &mut s).unwrap();
        assert_eq!(
            s.geometric_draws() - before,
            e.len() as u64 + 1,
            "n={n} p={p}"
        );
    }
    assert_eq!(grass_hop_er(30, prob(1.0), &mut s).unwrap().len(), 900);
}

#[test]
fn rectangular_grass_hop_marginals() {
    let base = RandomStream::new(15);
    let f = empirical_frequency(8, 8, 20_000, &base, |s| {
        let e = grass_hop_er_rect(8, 8, prob(0.25), s)?;
        Ok(e)
    })
    .unwrap();
    assert!(f
        .deviations(&ProbabilityMatrix::constant(8, 8, 0.25).unwrap(), 4.0)
        .unwrap()
        .is_empty());
    let wide = empirical_frequency(3, 11, 20_000, &base.child(1), |s| {
        grass_hop_er_rect(3, 11, prob(0.6), s)
    })
    .unwrap();
    assert!(wide
        .deviations(&ProbabilityMatrix::constant(3, 11, 0.6).unwrap(), 4.0)
        .unwrap()
        .is_empty());
}

#[test]
fn symmetrize_matches_dense_upper_triangle_oracle() {
    let mut s = RandomStream::new(16);
    for _ in 0..100 {
        let a = grass_hop_er(8, prob(0.25), &mut s).unwrap();
        let dense = a.to_dense();
        let sym = symmetrize(&a).unwrap().to_dense();
        for i in 0..8 {
            for j in 0..8 {
                let t = |r: usize, c: usize| r < c && dense[r * 8 + c];
                assert_eq!(sym[i * 8 + j], t(i, j) || t(j, i));
            }
        }
    }
}

#[test]
fn single_region_hit_frequency() {
    let init = Initiator::from_rows(&[vec![0.99, 0.5], vec![0.5, 0.2]]).unwrap();
    let v = vectorize(&init);
    let region = NdSequence::new(vec![0, 0, 1]).unwrap();
    let mut s = RandomStream::new(17);
    let samples = 20_000;
    let mut counts = [0u32; 3];
    for _ in 0..samples {
        let r = grass_hop_region(&region, &v, &mut s).unwrap();
        assert_eq!(r.size, 3);
        for hit in &r.hits {
            let idx = match hit.as_slice() {
                [0, 0, 1] => 0,
                [0, 1, 0] => 1,
                [1, 0, 0] => 2,
                other => panic!("{other:?} is not a permutation of the region"),
            };
            counts[idx] += 1;
        }
    }
    let p = 0.99f64 * 0.99 * 0.5;
    let tol = 4.0 * (p * (1.0 - p) / samples as f64).sqrt();
    for c in counts {
        assert!((c as f64 / samples as f64 - p).abs() < tol, "{counts:?}");
    }
}

#[test]
fn regions_partition_the_multiplication_table() {
    let init = Initiator::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
    let v = vectorize(&init);
    let mut s = RandomStream::new(18);
    let mut cells = HashSet::new();
    let mut total = 0u128;
    for r in regions(9, 3).unwrap() {
        let sample = grass_hop_region(&r, &v, &mut s).unwrap();
        total += sample.size;
        assert_eq!(sample.hits.len() as u128, sample.size);
        for hit in sample.hits {
            assert!(cells.insert(map_mult_to_kron(&hit, 3).unwrap()));
        }
    }
    assert_eq!(total, 729);
    assert_eq!(cells.len(), 729);
}

#[test]
fn kronecker_three_by_three_marginals() {
    let init = Initiator::from_rows(&[
        vec![0.9, 0.6, 0.1],
        vec![0.3, 0.8, 0.0],
        vec![1.0, 0.4, 0.2],
    ])
    .unwrap();
    let dense = kronecker_power_dense(&init, 2).unwrap();
    let base = RandomStream::new(19);
    let f = empirical_frequency(9, 9, 20_000, &base, |s| {
        Ok(grass_hop_kron_report(&init, 2, s, Execution::Sequential)?.edges)
    })
    .unwrap();
    assert!(
        f.deviations(&dense, 4.0).unwrap().is_empty(),
        "max {}",
        f.max_sigma(&dense).unwrap()
    );
}

#[test]
fn parallel_kronecker_matches_sequential_at_scale() {
    let init = Initiator::from_rows(&[vec![0.99, 0.5], vec![0.5, 0.2]]).unwrap();
    let seq = grass_hop_kron_report(&init, 14, &mut RandomStream::new(20), Execution::Sequential)
        .unwrap();
    let par = grass_hop_kron_report(
        &init,
        14,
        &mut RandomStream::new(20),
        Execution::Parallel { threads: 4 },
    )
    .unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.regions, 680);
    assert!(seq.edges.len() > 1000);
}
