mod support;

use csembed::expansion::{edge_length, expand, expand_all};
use csembed::graph::{Graph, NodeId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{all_connected, brute_nearest, random_connected_unweighted, unit_graph};

fn check_against_oracle(g: &Graph) -> usize {
    let n = g.node_count();
    let mut checked = 0;
    for source in 0..n {
        let ag = g.augment(NodeId(source), 1.0);
        for e in 1..=n {
            let ne = expand(&ag, e);
            let want = brute_nearest(g, source, 1.0, e);
            let mut got: Vec<usize> = ne.members.iter().map(|v| v.index()).collect();
            let mut want_ids: Vec<usize> = want.iter().map(|&(v, _)| v).collect();
            // order must agree too, since both use (distance, id)
            assert_eq!(got, want_ids, "graph {:?} source {source} e {e}", g.edges().collect::<Vec<_>>());
            for (d, (_, w)) in ne.distance.iter().zip(&want) {
                assert!((d - w).abs() <= 1e-12, "distance {d} vs {w}");
            }
            got.sort();
            want_ids.sort();
            assert_eq!(got, want_ids);
            checked += 1;
        }
    }
    checked
}

#[test]
fn matches_brute_force_on_small_graphs() {
    let mut graphs = 0;
    for n in 2..=5 {
        for edges in all_connected(n) {
            check_against_oracle(&unit_graph(n, &edges));
            graphs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [6, 7] {
        for _ in 0..150 {
            let edges = random_connected_unweighted(&mut rng, n);
            check_against_oracle(&unit_graph(n, &edges));
            graphs += 1;
        }
    }
    assert!(graphs >= 500, "{graphs} graphs");
}

#[test]
fn example_distances() {
    // u=0 with neighbors 1, 2, 3; node 1 also reaches 4 and 5
    let g = Graph::from_edges(6, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 4, 1.0), (1, 5, 1.0)]);
    let ne = expand(&g.augment(NodeId(0), 1.0), 6);
    let d = |v: usize| ne.distance[ne.members.iter().position(|&m| m == NodeId(v)).unwrap()];
    assert!((d(1) - 9f64.log10()).abs() < 1e-12);
    assert!((d(1) - 0.954).abs() < 0.01);
    assert!((d(4) - (9f64.log10() + 36f64.log10())).abs() < 1e-12);
    assert!((d(4) - 2.510).abs() < 0.01);
    assert_eq!(&ne.members[..4], &[NodeId(0), NodeId(1), NodeId(2), NodeId(3)]);
}

#[test]
fn two_hop_chain() {
    let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
    let ne = expand(&g.augment(NodeId(0), 1.0), 3);
    assert_eq!(ne.members, vec![NodeId(0), NodeId(1), NodeId(2)]);
    assert_eq!(ne.distance[1], 0.0);
    assert!((ne.distance[2] - 16f64.log10()).abs() < 1e-12);
}

#[test]
fn monotone_prefix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let g = csembed::synthetic::random_connected(&mut rng, 25, 0.15, Some((0.1, 5.0)));
        for source in [0, 7, 24] {
            let ag = g.augment(NodeId(source), 1.0);
            let full = expand(&ag, 25);
            for e in 1..25 {
                let part = expand(&ag, e);
                assert_eq!(part.members[..], full.members[..e]);
                assert_eq!(part.distance[..], full.distance[..e]);
            }
        }
    }
}

#[test]
fn distances_non_decreasing_and_source_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let g = csembed::synthetic::random_connected(&mut rng, 30, 0.1, Some((0.1, 5.0)));
        let ne = expand(&g.augment(NodeId(3), 0.5), 20);
        assert_eq!(ne.members[0], NodeId(3));
        assert_eq!(ne.distance[0], 0.0);
        assert!(ne.distance.windows(2).all(|w| w[0] <= w[1]));
        assert!(ne.members.iter().all(|v| v.index() < g.node_count()));
    }
}

#[test]
fn high_degree_hops_are_longer() {
    // s=1 gains neighbors while C(1, 2) stays 1
    let mut last = -1.0;
    for extra in 0..6 {
        let mut edges = vec![(0, 1, 1.0), (1, 2, 1.0)];
        edges.extend((0..extra).map(|k| (1, 3 + k, 1.0)));
        let g = Graph::from_edges(3 + extra, &edges);
        let len = edge_length(&g.augment(NodeId(0), 1.0), NodeId(1), NodeId(2)).unwrap();
        assert!(len > last, "{len} after {last}");
        last = len;
    }
}

#[test]
fn components_bound_membership() {
    let g = Graph::from_edges(5, &[(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
    let all = expand_all(&g, 1.0, 5, 2).unwrap();
    assert_eq!(all[0].len(), 2);
    assert_eq!(all[4].len(), 3);
}

#[test]
fn thread_count_does_not_change_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g = csembed::synthetic::random_connected(&mut rng, 60, 0.08, None);
    let one = expand_all(&g, 1.0, 15, 1).unwrap();
    let many = expand_all(&g, 1.0, 15, 8).unwrap();
    assert_eq!(one, many);
}
