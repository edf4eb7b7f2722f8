//! Breadth-first component labeling as an independent oracle for the
//! disjoint-set statistics, over randomly sampled mutant neighborhoods.

use std::collections::{BTreeSet, VecDeque};

use mutent::graphlab::{build_graph, ComponentStats, MutationGraph, IMPL_NODE};
use mutent::mutagen::{Mutant, Mutation, Span};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bfs_stats(graph: &MutationGraph) -> ComponentStats {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut sizes = Vec::new();
    let mut impl_component = None;
    for start in graph.nodes() {
        if seen.contains(start.as_str()) {
            continue;
        }
        seen.insert(start);
        let mut queue = VecDeque::from([start.as_str()]);
        let mut size = 0usize;
        let mut has_impl = false;
        while let Some(node) = queue.pop_front() {
            size += 1;
            has_impl |= node == IMPL_NODE;
            for next in graph.neighbors(node).unwrap() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        if has_impl {
            impl_component = Some(size);
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentStats {
        component_count: sizes.len(),
        largest_component_size: sizes.first().copied().unwrap_or(0),
        component_sizes: sizes,
        impl_component,
    }
}

fn random_mutants(rng: &mut ChaCha8Rng, count: usize) -> Vec<Mutant> {
    // overlapping pool of edits so higher-order mutants share structure
    let pool: Vec<Mutation> = (0..12)
        .map(|i| Mutation {
            operator_name: "op".into(),
            unit_path: "u".into(),
            span: Span {
                start: i * 4,
                end: i * 4 + 2,
            },
            original_fragment: "xx".into(),
            replacement_fragment: format!("r{i}"),
        })
        .collect();
    let mut mutants = Vec::new();
    let mut seen = BTreeSet::new();
    while mutants.len() < count {
        let order = rng.random_range(1..=3usize);
        let mut picks = BTreeSet::new();
        while picks.len() < order {
            picks.insert(rng.random_range(0..pool.len()));
        }
        let mutant =
            Mutant::from_mutations(picks.iter().map(|&i| pool[i].clone()).collect());
        if seen.insert(mutant.id.clone()) {
            mutants.push(mutant);
        }
    }
    mutants
}

#[test]
fn thirty_node_subgraphs_match_bfs_labeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for round in 0..25 {
        let mutants = random_mutants(&mut rng, 30);
        let graph = build_graph(&mutants, round % 2 == 0).unwrap();
        assert_eq!(graph.component_stats(), bfs_stats(&graph), "round {round}");

        let survivors: BTreeSet<String> = mutants
            .iter()
            .filter(|_| rng.random::<f64>() < 0.5)
            .map(|m| m.id.clone())
            .collect();
        let sub = graph.induced_subgraph(&survivors).unwrap();
        assert_eq!(sub.component_stats(), bfs_stats(&sub), "round {round} sub");
        let stats = sub.component_stats();
        assert_eq!(
            stats.component_sizes.iter().sum::<usize>(),
            sub.node_count()
        );
        assert!(stats.component_count <= sub.node_count());
    }
}

#[test]
fn deleting_a_node_changes_component_count_by_at_most_its_isolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mutants = random_mutants(&mut rng, 20);
    let graph = build_graph(&mutants, true).unwrap();
    let full: BTreeSet<String> = graph.nodes().iter().cloned().collect();
    let base = graph.component_stats().component_count;
    for victim in graph.nodes() {
        if victim == IMPL_NODE {
            continue;
        }
        let mut kept = full.clone();
        kept.remove(victim);
        kept.remove(IMPL_NODE); // induced keeps impl implicitly
        let sub = graph.induced_subgraph(&kept).unwrap();
        let count = sub.component_stats().component_count;
        // removing one node never lowers the count by more than 1
        assert!(count + 1 >= base, "removing {victim}: {base} -> {count}");
    }
}

#[test]
fn edge_list_export_is_parseable_and_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mutants = random_mutants(&mut rng, 15);
    let graph = build_graph(&mutants, true).unwrap();
    let text = graph.to_edge_list();
    let mut edges = 0usize;
    let mut isolated = 0usize;
    for line in text.lines() {
        match line.split_whitespace().count() {
            2 => edges += 1,
            1 => isolated += 1,
            n => panic!("bad edge-list line ({n} fields): {line}"),
        }
    }
    assert_eq!(edges, graph.edge_count());
    let _ = isolated;
    // every node appears somewhere: in an edge line or as an isolated line
    let touched: BTreeSet<&str> = text.lines().flat_map(str::split_whitespace).collect();
    assert_eq!(touched.len(), graph.node_count());
    for node in graph.nodes() {
        assert!(touched.contains(node.as_str()));
    }
}
