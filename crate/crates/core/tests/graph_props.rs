//! Property tests for graph construction, batching, and serialization.

mod common;

use common::*;
use prosograph::graph::{
    build_chinese_graph, build_english_graph, graph_to_dot, merge_graphs, parse_conllu,
    serialize_conllu, EdgeType, Language, SyntacticGraph,
};
use prosograph::{Rng, Tensor};
use proptest::prelude::*;

fn english_pair(n: usize, seed: u64) -> (SyntacticGraph, usize) {
    let mut rng = Rng::new(seed);
    let tree = random_tree(n, Language::English, &mut rng);
    let boundary = random_english_boundary(n, 3, &mut rng);
    (build_english_graph(&tree, &boundary).unwrap(), n)
}

proptest! {
    #[test]
    fn english_edges_match_bruteforce_enumeration(n in 1usize..25, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let tree = random_tree(n, Language::English, &mut rng);
        let boundary = random_english_boundary(n, 3, &mut rng);
        let g = build_english_graph(&tree, &boundary).unwrap();
        prop_assert_eq!(g.num_nodes(), n + 2);
        prop_assert_eq!(g.edges().len(), 2 * (n - 1) + 4);
        let expected = expected_english_edges(&tree);
        prop_assert!(same_edge_set(&edge_triples(&g), &expected));
        prop_assert!(g.validate().is_ok());
    }

    #[test]
    fn chinese_edges_match_bruteforce_enumeration(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let tree = random_tree(n, Language::Chinese, &mut rng);
        let boundary = random_chinese_boundary(n, 3, 2, &mut rng);
        let g = build_chinese_graph(&tree, &boundary).unwrap();
        let chars_per_word = boundary.chars_per_word().unwrap();
        let total_chars: usize = chars_per_word.iter().sum();
        let intra: usize = chars_per_word.iter().map(|k| k - 1).sum();
        prop_assert_eq!(g.num_nodes(), total_chars + 2);
        prop_assert_eq!(g.edges().len(), 2 * (n - 1) + 2 * intra + 4);
        let expected = expected_chinese_edges(&tree, &chars_per_word);
        prop_assert!(same_edge_set(&edge_triples(&g), &expected));
        prop_assert!(g.validate().is_ok());
    }

    #[test]
    fn built_graphs_are_connected(n in 1usize..20, seed in any::<u64>()) {
        let (g, _) = english_pair(n, seed);
        prop_assert!(is_connected(g.num_nodes(), &edge_triples(&g)));
    }

    #[test]
    fn sentinel_degree_is_two(n in 1usize..20, seed in any::<u64>()) {
        let (g, _) = english_pair(n, seed);
        let eos = g.num_nodes() - 1;
        for node in [0, eos] {
            let out_deg = g.edges().iter().filter(|e| e.src == node).count();
            let in_deg = g.edges().iter().filter(|e| e.dst == node).count();
            prop_assert_eq!((out_deg, in_deg), (1, 1));
        }
    }

    #[test]
    fn merge_then_split_is_identity(sizes in prop::collection::vec(1usize..8, 1..6), seed in any::<u64>()) {
        let graphs: Vec<SyntacticGraph> = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| english_pair(n, seed.wrapping_add(i as u64)).0)
            .collect();
        let batch = merge_graphs(&graphs).unwrap();
        batch.validate().unwrap();
        prop_assert_eq!(batch.split_graphs(), graphs.clone());
        let total_edges: usize = graphs.iter().map(|g| g.edges().len()).sum();
        prop_assert_eq!(batch.merged().edges().len(), total_edges);
    }

    #[test]
    fn split_concat_matrix_round_trip(sizes in prop::collection::vec(1usize..6, 1..5), seed in any::<u64>()) {
        let graphs: Vec<SyntacticGraph> = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| english_pair(n, seed.wrapping_add(i as u64)).0)
            .collect();
        let batch = merge_graphs(&graphs).unwrap();
        let mut rng = Rng::new(seed);
        let mat = Tensor::uniform(&[batch.total_nodes(), 3], 1.0, &mut rng);
        let parts = batch.split_node_matrix(&mat).unwrap();
        let refs: Vec<&Tensor> = parts.iter().collect();
        let back = prosograph::num::ops::concat_rows(&refs).unwrap();
        prop_assert_eq!(back, mat);
    }

    #[test]
    fn graph_json_round_trip_bit_identical(n in 1usize..15, seed in any::<u64>()) {
        let (g, _) = english_pair(n, seed);
        let s1 = serde_json::to_string(&g).unwrap();
        let back: SyntacticGraph = serde_json::from_str(&s1).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), s1);
    }

    #[test]
    fn conllu_round_trip(n in 1usize..15, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let tree = random_tree(n, Language::English, &mut rng);
        let text = serialize_conllu(std::slice::from_ref(&tree));
        let parsed = parse_conllu(&text, Language::English).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(&parsed[0], &tree);
        prop_assert_eq!(serialize_conllu(&parsed), text);
    }

    #[test]
    fn dot_output_parses_under_grammar(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        // alternate language per seed for variety
        let dot = if seed % 2 == 0 {
            let tree = random_tree(n, Language::English, &mut rng);
            let boundary = random_english_boundary(n, 2, &mut rng);
            graph_to_dot(&build_english_graph(&tree, &boundary).unwrap())
        } else {
            let tree = random_tree(n, Language::Chinese, &mut rng);
            let boundary = random_chinese_boundary(n, 3, 2, &mut rng);
            graph_to_dot(&build_chinese_graph(&tree, &boundary).unwrap())
        };
        prop_assert!(check_dot_grammar(&dot).is_ok(), "invalid DOT:\n{}", dot);
    }
}

#[test]
fn determinism_identical_inputs_identical_bytes() {
    let mut rng = Rng::new(99);
    let tree = random_tree(9, Language::English, &mut rng);
    let boundary = random_english_boundary(9, 3, &mut Rng::new(100));
    let g1 = build_english_graph(&tree, &boundary).unwrap();
    let g2 = build_english_graph(&tree, &boundary).unwrap();
    assert_eq!(
        serde_json::to_string(&g1).unwrap(),
        serde_json::to_string(&g2).unwrap()
    );
    assert_eq!(graph_to_dot(&g1), graph_to_dot(&g2));
}

#[test]
fn reverse_pairing_is_a_bijection() {
    // stronger than the validator: forward and reverse counts split evenly
    for seed in 0..50u64 {
        let mut rng = Rng::new(seed);
        let tree = random_tree(1 + (seed as usize % 10), Language::Chinese, &mut rng);
        let boundary = random_chinese_boundary(tree.len(), 3, 2, &mut rng);
        let g = build_chinese_graph(&tree, &boundary).unwrap();
        let fwd: Vec<_> = g.edges().iter().filter(|e| e.etype.is_forward()).collect();
        let rev: Vec<_> = g.edges().iter().filter(|e| !e.etype.is_forward()).collect();
        assert_eq!(fwd.len(), rev.len());
        for e in fwd {
            assert!(g
                .edges()
                .iter()
                .any(|r| r.src == e.dst && r.dst == e.src && r.etype == e.etype.reversed()));
        }
    }
}

/// A seven-word sentence fixture in CoNLL-U form, as an external parser
/// would emit it.
pub const SEVEN_WORD_CONLLU: &str = "\
1\tThe\t_\t_\t_\t_\t3\t_\t_\t_
2\tearliest\t_\t_\t_\t_\t3\t_\t_\t_
3\tbook\t_\t_\t_\t_\t0\t_\t_\t_
4\tprinted\t_\t_\t_\t_\t3\t_\t_\t_
5\twith\t_\t_\t_\t_\t7\t_\t_\t_
6\tmovable\t_\t_\t_\t_\t7\t_\t_\t_
7\ttypes\t_\t_\t_\t_\t4\t_\t_\t_
";

#[test]
fn seven_word_sentence_builds_9_nodes_16_edges() {
    let trees = parse_conllu(SEVEN_WORD_CONLLU, Language::English).unwrap();
    assert_eq!(trees.len(), 1);
    assert_eq!(trees[0].len(), 7);
    let boundary = random_english_boundary(7, 3, &mut Rng::new(7));
    let g = build_english_graph(&trees[0], &boundary).unwrap();
    assert_eq!(g.num_nodes(), 9);
    assert_eq!(g.edges().len(), 16);
    g.validate().unwrap();
    assert!(same_edge_set(
        &edge_triples(&g),
        &expected_english_edges(&trees[0])
    ));
    // round-trip through the canonical serializer
    let canon = serialize_conllu(&trees);
    let reparsed = parse_conllu(&canon, Language::English).unwrap();
    assert_eq!(reparsed, trees);
}

#[test]
fn english_graphs_use_only_dependency_edge_types() {
    for seed in 0..20u64 {
        let (g, _) = english_pair(1 + (seed as usize % 8), seed);
        assert!(g
            .edge_types_present()
            .iter()
            .all(|t| matches!(t, EdgeType::DepForward | EdgeType::DepReverse)));
    }
}

#[test]
fn dot_grammar_checker_rejects_malformed_text() {
    assert!(check_dot_grammar("graph g { a -- b }").is_err());
    assert!(check_dot_grammar("digraph { a -> }").is_err());
    assert!(check_dot_grammar("digraph { a -> b [x=] }").is_err());
    assert!(check_dot_grammar("digraph g { n0 [label=\"BOS\"]; n0 -> n1; }").is_ok());
}
