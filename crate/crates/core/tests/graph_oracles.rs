//! Traversals on random DAGs against closure and shortest-path oracles.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;

use macrotrace::{AuthorId, EdgeKind, InheritanceEdge, InheritanceGraph, MacroKey, Month, Node};
use proptest::prelude::*;

const UNREACHED: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Shape {
    n: usize,
    sources: usize,
    edges: Vec<(usize, usize, u8, u8, u8)>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (2usize..=12)
        .prop_flat_map(|n| (Just(n), 1..=n.min(3)))
        .prop_flat_map(|(n, sources)| {
            let slots: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(_, j)| j >= sources)
                .collect();
            let len = slots.len();
            (
                Just(n),
                Just(sources),
                Just(slots),
                proptest::collection::vec((any::<bool>(), 0u8..4, 0u8..4, 0u8..3), len),
            )
        })
        .prop_map(|(n, sources, slots, picks)| Shape {
            n,
            sources,
            edges: slots
                .into_iter()
                .zip(picks)
                .filter(|(_, p)| p.0)
                .map(|((i, j), (_, d, p, a))| (i, j, d, p, a))
                .collect(),
        })
}

fn month(i: u8) -> Month {
    Month::new(2000, 1 + i).unwrap()
}

fn build(s: &Shape) -> InheritanceGraph {
    let nodes = (0..s.n)
        .map(|i| {
            if i < s.sources {
                Node::Source {
                    paper: format!("s{i}"),
                    date: month(0),
                    members: vec![AuthorId::new(&format!("m{i}")).unwrap()],
                }
            } else {
                Node::Author {
                    author: AuthorId::new(&format!("a{i}")).unwrap(),
                    first_paper: format!("p{i}"),
                    date: month(1),
                }
            }
        })
        .collect();
    let edges = s
        .edges
        .iter()
        .map(|&(i, j, d, p, a)| InheritanceEdge {
            src: i,
            dst: j,
            via_paper: format!("p{p}"),
            date: month(d),
            src_author: AuthorId::new(&format!("t{a}")).unwrap(),
            kind: EdgeKind::Terminal,
        })
        .collect();
    InheritanceGraph::from_parts(MacroKey::new("random dag"), nodes, edges).unwrap()
}

/// All-pairs shortest path lengths by Floyd–Warshall.
fn distances(s: &Shape) -> Vec<Vec<usize>> {
    let mut d = vec![vec![UNREACHED; s.n]; s.n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(i, j, ..) in &s.edges {
        d[i][j] = 1;
    }
    for k in 0..s.n {
        for i in 0..s.n {
            for j in 0..s.n {
                if d[i][k] != UNREACHED && d[k][j] != UNREACHED {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reachable_set_matches_transitive_closure(s in shape()) {
        let g = build(&s);
        let d = distances(&s);
        for start in 0..s.n {
            let expected: BTreeSet<usize> = (s.sources..s.n)
                .filter(|&j| j != start && d[start][j] != UNREACHED)
                .collect();
            prop_assert_eq!(g.reachable_set(start).unwrap(), expected);
        }
    }

    #[test]
    fn bfs_depths_are_shortest_paths(s in shape()) {
        let g = build(&s);
        let d = distances(&s);
        for root in 0..s.n {
            let tree = g.bfs_tree(root).unwrap();
            for v in 0..s.n {
                let expected = (d[root][v] != UNREACHED).then_some(d[root][v]);
                prop_assert_eq!(tree.depth(v), expected);
            }
        }
    }

    #[test]
    fn bfs_parent_is_smallest_minimum_depth_edge(s in shape()) {
        let g = build(&s);
        let d = distances(&s);
        let root = 0;
        let tree = g.bfs_tree(root).unwrap();
        for v in 1..s.n {
            let dv = d[root][v];
            let expected = if dv == UNREACHED || dv == 0 {
                None
            } else {
                g.edges()
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.dst == v && d[root][e.src] == dv - 1)
                    .min_by_key(|(_, e)| (e.date, e.via_paper.clone(), e.src_author.clone(), e.src))
                    .map(|(i, _)| i)
            };
            prop_assert_eq!(tree.parent_edge(v), expected);
        }
    }

    #[test]
    fn seed_has_largest_reach_with_earliest_tie(s in shape()) {
        let g = build(&s);
        let d = distances(&s);
        let reach = |i: usize| (s.sources..s.n).filter(|&j| j != i && d[i][j] != UNREACHED).count();
        let best = (0..s.sources).map(reach).max().unwrap();
        // all sources share a date, so ties fall to the smaller paper id
        let expected = (0..s.sources)
            .filter(|&i| reach(i) == best)
            .min_by_key(|&i| format!("s{i}"))
            .unwrap();
        prop_assert_eq!(g.find_seed().unwrap(), expected);
    }

    #[test]
    fn topological_order_respects_edges(s in shape()) {
        let g = build(&s);
        let order = g.topological_order().expect("forward edges only");
        let mut at = vec![0; s.n];
        for (i, &v) in order.iter().enumerate() {
            at[v] = i;
        }
        for &(i, j, ..) in &s.edges {
            prop_assert!(at[i] < at[j]);
        }
    }
}
