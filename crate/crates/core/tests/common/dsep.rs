//! Path-enumeration oracles for d-separation and the two adjustment criteria,
//! with the exhaustive and random sweeps shared by the oracle suite and the
//! acceptance run. Mismatches panic with the offending graph.

use causal_bounds::CausalDiagram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ordered_dags, random_dag, Dag};

pub fn to_diagram(d: &Dag) -> CausalDiagram {
    let names: Vec<String> = (0..d.n).map(|i| format!("v{i}")).collect();
    let nodes: Vec<(&str, usize)> = names.iter().map(|s| (s.as_str(), 2)).collect();
    let edges: Vec<(&str, &str)> = d.edges().into_iter().map(|(p, c)| (names[p].as_str(), names[c].as_str())).collect();
    CausalDiagram::new(&nodes, &edges).unwrap()
}

pub fn mask_of(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

pub fn subsets(items: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u32..(1 << items.len()))
        .map(move |mask| (0..items.len()).filter(|k| mask >> k & 1 == 1).map(|k| items[k]).collect())
}

/// Some simple path between a node of `a` and a node of `b` is active given `c`.
pub fn connected(d: &Dag, desc: &[Vec<bool>], a: &[usize], b: &[usize], c: &[usize]) -> bool {
    let given = mask_of(d.n, c);
    a.iter().any(|&s| b.iter().any(|&t| d.paths(s, t).iter().any(|p| d.path_active(desc, p, &given))))
}

fn into_start(d: &Dag, path: &[usize]) -> bool {
    path.len() >= 2 && d.parents[path[0]].contains(&path[1])
}

fn directed(d: &Dag, path: &[usize]) -> bool {
    path.windows(2).all(|w| d.parents[w[1]].contains(&w[0]))
}

pub fn backdoor(d: &Dag, desc: &[Vec<bool>], z: &[usize], x: usize, y: usize) -> bool {
    if z.iter().any(|&v| desc[x][v]) {
        return false;
    }
    let given = mask_of(d.n, z);
    !d.paths(x, y).iter().any(|p| into_start(d, p) && d.path_active(desc, p, &given))
}

pub fn frontdoor(d: &Dag, desc: &[Vec<bool>], z: &[usize], x: usize, y: usize) -> bool {
    let in_z = mask_of(d.n, z);
    if d.paths(x, y).iter().any(|p| directed(d, p) && !p.iter().any(|&v| in_z[v])) {
        return false;
    }
    let none = vec![false; d.n];
    for &v in z {
        if d.paths(x, v).iter().any(|p| into_start(d, p) && d.path_active(desc, p, &none)) {
            return false;
        }
    }
    // Paths from the set z start at a member and touch z nowhere else.
    let given_x = mask_of(d.n, &[x]);
    !z.iter().any(|&v| {
        d.paths(v, y)
            .iter()
            .any(|p| into_start(d, p) && !p[1..].iter().any(|&u| in_z[u]) && d.path_active(desc, p, &given_x))
    })
}

/// Every ordered DAG on up to `max_n` nodes, every pair and every
/// conditioning subset of the rest. Returns the number of queries.
pub fn sweep_pairwise(max_n: usize) -> usize {
    let mut queries = 0usize;
    for n in 1..=max_n {
        for dag in ordered_dags(n) {
            let g = to_diagram(&dag);
            let desc = dag.descendant_matrix();
            for a in 0..n {
                for b in a + 1..n {
                    let paths = dag.paths(a, b);
                    let rest: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
                    for c in subsets(&rest) {
                        let m = mask_of(n, &c);
                        let expected = !paths.iter().any(|p| dag.path_active(&desc, p, &m));
                        assert_eq!(g.d_separated_idx(&[a], &[b], &c), expected, "{dag:?} a={a} b={b} c={c:?}");
                        assert_eq!(g.d_separated_idx(&[b], &[a], &c), expected);
                        queries += 1;
                    }
                }
            }
        }
    }
    queries
}

/// Both criteria for every ordered pair and candidate set on DAGs up to `max_n` nodes.
pub fn sweep_criteria(max_n: usize) -> usize {
    let mut queries = 0usize;
    for n in 2..=max_n {
        for dag in ordered_dags(n) {
            let g = to_diagram(&dag);
            let desc = dag.descendant_matrix();
            for x in 0..n {
                for y in (0..n).filter(|&y| y != x) {
                    let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                    for z in subsets(&rest) {
                        assert_eq!(
                            g.satisfies_backdoor_idx(&z, x, y),
                            backdoor(&dag, &desc, &z, x, y),
                            "back-door {dag:?} x={x} y={y} z={z:?}"
                        );
                        assert_eq!(
                            g.satisfies_frontdoor_idx(&z, x, y),
                            frontdoor(&dag, &desc, &z, x, y),
                            "front-door {dag:?} x={x} y={y} z={z:?}"
                        );
                        queries += 1;
                    }
                }
            }
        }
    }
    queries
}

/// Random 8-node DAGs: 20 set-valued separation queries and one criteria check each.
pub fn sweep_random(count: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let p = rng.random_range(0.15..0.5);
        let dag = random_dag(&mut rng, 8, p);
        let g = to_diagram(&dag);
        let desc = dag.descendant_matrix();
        for _ in 0..20 {
            // Random disjoint A, B, C with A and B non-empty.
            let role: Vec<u8> = (0..8).map(|_| rng.random_range(0..4)).collect();
            let pick = |r: u8| (0..8).filter(|&v| role[v] == r).collect::<Vec<usize>>();
            let (a, b, c) = (pick(0), pick(1), pick(2));
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let expected = !connected(&dag, &desc, &a, &b, &c);
            assert_eq!(g.d_separated_idx(&a, &b, &c), expected, "{dag:?} {a:?} {b:?} {c:?}");
        }
        let x = rng.random_range(0..8);
        let y = (x + rng.random_range(1..8)) % 8;
        let z: Vec<usize> = (0..8).filter(|&v| v != x && v != y && rng.random::<bool>()).collect();
        assert_eq!(g.satisfies_backdoor_idx(&z, x, y), backdoor(&dag, &desc, &z, x, y));
        assert_eq!(g.satisfies_frontdoor_idx(&z, x, y), frontdoor(&dag, &desc, &z, x, y));
    }
}
