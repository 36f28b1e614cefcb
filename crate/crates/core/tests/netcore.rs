use netcox::netcore::{hub_report, pair_distance_snapshot};
use netcox::{DynamicNetwork, Error, Pair};
use proptest::prelude::*;

fn net_from(n: usize, pairs: &[(usize, usize)]) -> DynamicNetwork {
    DynamicNetwork::static_network(n, false, 1.0, pairs.iter().map(|&(i, j)| Pair::new(i, j))).unwrap()
}

#[test]
fn half_open_activity() {
    let mut net = DynamicNetwork::new(3, false, 2.0).unwrap();
    net.add_interval(Pair::new(0, 1), 0.0, 1.0).unwrap();
    assert!(net.edge_active(Pair::new(0, 1), 0.5).unwrap());
    assert!(net.edge_active(Pair::new(1, 0), 0.5).unwrap());
    assert!(!net.edge_active(Pair::new(0, 1), 1.0).unwrap());
    assert!(!net.edge_active(Pair::new(1, 2), 0.5).unwrap());
}

#[test]
fn loops_and_unknown_vertices_are_domain_errors() {
    let net = net_from(3, &[(0, 1)]);
    assert!(matches!(net.edge_active(Pair::new(1, 1), 0.5), Err(Error::Domain(_))));
    assert!(matches!(net.edge_active(Pair::new(0, 7), 0.5), Err(Error::Domain(_))));
}

#[test]
fn path_graph_distances() {
    let net = net_from(4, &[(0, 1), (1, 2), (2, 3)]);
    let s = pair_distance_snapshot(&net, 0.5).unwrap();
    assert_eq!(s.dist(Pair::new(0, 1), Pair::new(1, 2)), Some(1));
    assert_eq!(s.dist(Pair::new(0, 1), Pair::new(0, 1)), Some(0));
    assert_eq!(s.dist(Pair::new(0, 1), Pair::new(2, 3)), Some(2));
    assert_eq!(s.dist_to_set(Pair::new(0, 1), &[Pair::new(2, 3), Pair::new(1, 2)]), Some(1));
}

#[test]
fn separate_components_are_infinitely_far() {
    let net = net_from(4, &[(0, 1), (2, 3)]);
    let s = pair_distance_snapshot(&net, 0.5).unwrap();
    assert_eq!(s.dist(Pair::new(0, 1), Pair::new(2, 3)), None);
}

#[test]
fn inactive_pairs_are_infinitely_far() {
    let mut net = DynamicNetwork::new(3, false, 1.0).unwrap();
    net.add_interval(Pair::new(0, 1), 0.0, 1.0).unwrap();
    net.add_interval(Pair::new(1, 2), 0.0, 0.4).unwrap();
    let s = pair_distance_snapshot(&net, 0.5).unwrap();
    assert_eq!(s.dist(Pair::new(0, 1), Pair::new(1, 2)), None);
}

#[test]
fn isolated_edge_is_not_a_hub() {
    let net = net_from(4, &[(0, 1)]);
    let r = hub_report(&net, &[Pair::new(0, 1)], 1, 2, (0.0, 1.0)).unwrap();
    assert_eq!(r.per_pair[&Pair::new(0, 1)], 1);
    assert!(!r.hub_flags[&Pair::new(0, 1)]);
    assert_eq!(r.hub_count, 0);
}

#[test]
fn star_centre_edge_is_a_hub() {
    let net = net_from(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
    let r = hub_report(&net, &[Pair::new(0, 1)], 2, 5, (0.0, 1.0)).unwrap();
    assert_eq!(r.per_pair[&Pair::new(0, 1)], 5);
    assert!(r.hub_flags[&Pair::new(0, 1)]);
    assert_eq!(r.hub_count, 1);
}

#[test]
fn inactive_network_has_zero_counts() {
    let net = DynamicNetwork::new(4, false, 1.0).unwrap();
    let r = hub_report(&net, &[Pair::new(0, 1), Pair::new(2, 3)], 2, 1, (0.0, 1.0)).unwrap();
    assert!(r.per_pair.values().all(|&c| c == 0));
    assert_eq!(r.max_count, 0);
}

#[test]
fn empty_hub_set_gives_empty_report() {
    let net = net_from(3, &[(0, 1)]);
    let r = hub_report(&net, &[], 1, 1, (0.0, 1.0)).unwrap();
    assert!(r.per_pair.is_empty());
    assert_eq!(r.hub_count, 0);
}

/// All-pairs line-graph distances by Floyd-Warshall, independent of the BFS.
fn floyd(pairs: &[Pair]) -> Vec<Vec<Option<u32>>> {
    let m = pairs.len();
    let mut d = vec![vec![None; m]; m];
    for a in 0..m {
        for b in 0..m {
            if a == b {
                d[a][b] = Some(0);
            } else if pairs[a].shares_vertex(&pairs[b]) {
                d[a][b] = Some(1);
            }
        }
    }
    for k in 0..m {
        for a in 0..m {
            for b in 0..m {
                if let (Some(x), Some(y)) = (d[a][k], d[k][b]) {
                    if d[a][b].is_none_or(|z| x + y < z) {
                        d[a][b] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

fn edge_set(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (3..=max_n).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n), 1..(2 * n))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn snapshot_matches_floyd_oracle((n, raw) in edge_set(10)) {
        let pairs: Vec<(usize, usize)> = raw.into_iter().filter(|(i, j)| i != j).collect();
        prop_assume!(!pairs.is_empty());
        let net = net_from(n, &pairs);
        let s = pair_distance_snapshot(&net, 0.5).unwrap();
        let active = s.pairs().to_vec();
        let oracle = floyd(&active);
        for a in 0..active.len() {
            for b in 0..active.len() {
                prop_assert_eq!(s.dist(active[a], active[b]), oracle[a][b]);
            }
        }
    }

    #[test]
    fn triangle_inequality((n, raw) in edge_set(12)) {
        let pairs: Vec<(usize, usize)> = raw.into_iter().filter(|(i, j)| i != j).collect();
        prop_assume!(!pairs.is_empty());
        let s = pair_distance_snapshot(&net_from(n, &pairs), 0.5).unwrap();
        let p = s.pairs().to_vec();
        for &u in &p {
            for &v in &p {
                prop_assert_eq!(s.dist(u, v), s.dist(v, u));
                for &w in &p {
                    if let (Some(uw), Some(uv), Some(vw)) = (s.dist(u, w), s.dist(u, v), s.dist(v, w)) {
                        prop_assert!(uw <= uv + vw);
                    }
                }
            }
        }
    }

    #[test]
    fn hub_counts_monotone(
        (n, raw) in edge_set(10),
        starts in proptest::collection::vec(0.0f64..0.9, 20),
        a in 0.0f64..0.5,
        len in 0.0f64..0.3,
        extra in 0.0f64..0.2,
    ) {
        let mut net = DynamicNetwork::new(n, false, 1.0).unwrap();
        for (k, (i, j)) in raw.into_iter().filter(|(i, j)| i != j).enumerate() {
            let s = starts[k % starts.len()];
            let _ = net.add_interval(Pair::new(i, j), s, (s + 0.3).min(1.0));
        }
        let set: Vec<Pair> = net.pairs().collect();
        prop_assume!(!set.is_empty());
        let b = a + len;
        let mut last = 0;
        for m in 1..5 {
            let r = hub_report(&net, &set, m, 1, (a, b)).unwrap();
            prop_assert!(r.max_count >= last);
            prop_assert_eq!(r.max_count, r.per_pair.values().copied().max().unwrap_or(0));
            prop_assert_eq!(r.hub_count, r.hub_flags.values().filter(|&&f| f).count());
            last = r.max_count;
        }
        let short = hub_report(&net, &set, 2, 1, (a, b)).unwrap();
        let long = hub_report(&net, &set, 2, 1, (a, b + extra)).unwrap();
        prop_assert!(long.max_count >= short.max_count);
    }
}
