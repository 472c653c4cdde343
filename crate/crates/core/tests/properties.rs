use std::collections::BTreeSet;

use graphgen::block::{chung_lu_as_sbm, group_degrees, DegreeSequence};
use graphgen::combinat::{
    binomial, count_regions, morton_decode, morton_encode, multiindex_to_linear, ndseq_to_counter,
    next_region, num_multiset_permutations, regions_iter, unrank_combination, unrank_multiset,
    NdSequence,
};
use graphgen::er::{grass_hop_er_rect, grass_hop_rect_with_gaps, symmetrize};
use graphgen::io::{read_matrix_market, read_tsv, write_edges, EdgeFileFormat};
use graphgen::kronecker::{backward_map, map_mult_to_kron};
use graphgen::{EdgeList, Probability, RandomStream};
use proptest::prelude::*;

fn sorted_seq(max: i64, len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0..max, 1..=len).prop_map(|mut v| {
        v.sort();
        v
    })
}

fn edge_list() -> impl Strategy<Value = EdgeList> {
    (1u64..40, 1u64..40)
        .prop_flat_map(|(r, c)| {
            (
                Just(r),
                Just(c),
                prop::collection::btree_set((0..r, 0..c), 0..60),
            )
        })
        .prop_map(|(r, c, set)| EdgeList::from_edges(r, c, set.into_iter().collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn next_region_moves_forward(values in sorted_seq(6, 6)) {
        let cur = NdSequence::new(values.clone()).unwrap();
        let next = next_region(&cur, 6).unwrap();
        if !next.is_sentinel() {
            prop_assert!(next.values() > cur.values());
            prop_assert!(next.values().windows(2).all(|w| w[0] <= w[1]));
        } else {
            prop_assert!(values.iter().all(|&v| v == 5));
        }
    }

    #[test]
    fn region_iterator_length_matches_count(m in 1usize..7, k in 1usize..6) {
        let n = regions_iter(m, k).unwrap().count() as u128;
        prop_assert_eq!(n, count_regions(m, k).unwrap());
    }

    #[test]
    fn unrank_multiset_is_a_sorted_bijection(values in sorted_seq(4, 6)) {
        let seq = NdSequence::new(values.clone()).unwrap();
        let total = num_multiset_permutations(&ndseq_to_counter(&seq)).unwrap() as u64;
        let perms: Vec<Vec<i64>> = (0..total).map(|r| unrank_multiset(&seq, r).unwrap()).collect();
        prop_assert!(perms.windows(2).all(|w| w[0] < w[1]));
        for p in &perms {
            let mut s = p.clone();
            s.sort();
            prop_assert_eq!(&s, &values);
        }
        prop_assert!(unrank_multiset(&seq, total).is_err());
    }

    #[test]
    fn unrank_combination_is_lexicographic(max_val in 1u64..12, len_frac in 0.0f64..1.0) {
        let length = ((max_val as f64) * len_frac) as u64;
        let total = binomial(max_val as u128, length as u128).unwrap();
        let combos: Vec<Vec<u64>> =
            (0..total).map(|r| unrank_combination(r, max_val, length).unwrap()).collect();
        prop_assert!(combos.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(combos.iter().all(|c| c.len() == length as usize
            && c.windows(2).all(|w| w[0] < w[1])
            && c.iter().all(|&x| x < max_val)));
        prop_assert!(unrank_combination(total, max_val, length).is_err());
    }

    #[test]
    fn morton_round_trip(n in 2u64..8, k in 1u32..12, seed in any::<u64>()) {
        let side = (n as u128).pow(k);
        let index = (seed as u128) % (side * side);
        let (r, c) = morton_decode(index, n).unwrap();
        prop_assert!(r < side && c < side);
        prop_assert_eq!(morton_encode(r, c, n, k).unwrap(), index);
    }

    #[test]
    fn forward_and_backward_maps_agree(n in 2usize..5, mind in prop::collection::vec(0usize..25, 1..8)) {
        let mind: Vec<usize> = mind.into_iter().map(|x| x % (n * n)).collect();
        let f = map_mult_to_kron(&mind, n).unwrap();
        prop_assert_eq!(f, backward_map(&mind, n).unwrap());
        let linear = multiindex_to_linear(&mind, (n * n) as u64).unwrap();
        let (r, c) = morton_decode(linear, n as u64).unwrap();
        prop_assert_eq!((r as u64, c as u64), f);
    }

    #[test]
    fn tsv_round_trip(edges in edge_list()) {
        let mut buf = Vec::new();
        write_edges(&edges, EdgeFileFormat::Tsv, &mut buf).unwrap();
        let back = read_tsv(std::str::from_utf8(&buf).unwrap(), edges.num_rows(), edges.num_cols()).unwrap();
        prop_assert_eq!(back, edges);
    }

    #[test]
    fn matrix_market_round_trip(edges in edge_list()) {
        let mut buf = Vec::new();
        write_edges(&edges, EdgeFileFormat::MatrixMarket, &mut buf).unwrap();
        let back = read_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back, edges);
    }

    #[test]
    fn symmetrize_is_symmetric_and_loop_free(edges in edge_list()) {
        let square = EdgeList::from_edges(
            40, 40, edges.into_edges());
        let square = square.unwrap();
        let sym = symmetrize(&square).unwrap();
        let set: BTreeSet<(u64, u64)> = sym.iter().copied().collect();
        prop_assert_eq!(set.len(), sym.len());
        prop_assert!(sym.iter().all(|&(a, b)| a != b && set.contains(&(b, a))));
        let upper = square.iter().filter(|&&(a, b)| a < b).count();
        prop_assert_eq!(sym.len(), 2 * upper);
    }

    #[test]
    fn grass_hop_gaps_land_on_prefix_sums(
        rows in 1u64..10, cols in 1u64..10, gaps in prop::collection::vec(1u64..12, 1..30)
    ) {
        let mut it = gaps.iter().copied().chain(std::iter::repeat(1_000));
        let (e, draws) = grass_hop_rect_with_gaps(rows, cols, || Ok(it.next().unwrap())).unwrap();
        let mut pos: i64 = -1;
        let mut expected = Vec::new();
        for g in gaps.iter().copied().chain(std::iter::repeat(1_000)) {
            pos += g as i64;
            if pos >= (rows * cols) as i64 { break; }
            expected.push((pos as u64 / cols, pos as u64 % cols));
        }
        prop_assert_eq!(e.edges(), expected.as_slice());
        prop_assert_eq!(draws, expected.len() as u64 + 1);
    }

    #[test]
    fn grass_hop_rect_draws_edges_plus_one(rows in 1u64..200, cols in 1u64..200, p in 0.001f64..1.0, seed in any::<u64>()) {
        let mut s = RandomStream::new(seed);
        let e = grass_hop_er_rect(rows, cols, Probability::new(p).unwrap(), &mut s).unwrap();
        prop_assert_eq!(s.geometric_draws(), e.len() as u64 + 1);
        prop_assert!(e.edges().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degree_groups_partition_nodes(d in prop::collection::vec(0u64..6, 1..30)) {
        let g = group_degrees(&DegreeSequence::new(d.clone()));
        let mut order = g.order.clone();
        order.sort();
        prop_assert_eq!(order, (0..d.len() as u64).collect::<Vec<_>>());
        prop_assert_eq!(g.sizes.iter().sum::<u64>(), d.len() as u64);
        prop_assert!(g.degrees.windows(2).all(|w| w[0] < w[1]));
        let sorted: Vec<u64> = g.order.iter().map(|&i| d[i as usize]).collect();
        prop_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn chung_lu_blocks_reproduce_probabilities(d in prop::collection::vec(1u64..4, 9..30)) {
        let seq = DegreeSequence::new(d.clone());
        let (spec, groups) = chung_lu_as_sbm(&seq).unwrap();
        let marginal = spec.marginal_matrix().unwrap();
        let total: u64 = d.iter().sum();
        for a in 0..d.len() {
            for b in 0..d.len() {
                let (i, j) = (groups.order[a] as usize, groups.order[b] as usize);
                let want = (d[i] * d[j]) as f64 / total as f64;
                prop_assert!((marginal.get(a, b) - want).abs() < 1e-12);
            }
        }
    }
}
