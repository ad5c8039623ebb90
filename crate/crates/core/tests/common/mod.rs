//! Oracles shared by the integration tests. Effects, consistent joints and
//! d-separation are recomputed here from first principles; the submodules hold
//! the sweeps that compare the code under test with them.
#![allow(dead_code)]

pub mod dsep;
pub mod optim;
pub mod soundness;
pub mod worked;

use causal_bounds::JointTable;
use rand::seq::SliceRandom;
use rand::Rng;

/// A random distribution row of length `n` (normalized uniforms).
pub fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Binary back-door instance drawn from U -> W, {U, W} -> X, {U, W, X} -> Y.
pub struct BackdoorCase {
    /// P(x, y, w, u), index ((x * 2 + y) * 2 + w) * 2 + u.
    pub joint: Vec<f64>,
    pub pxyw: JointTable,
    pub pu: JointTable,
    /// P(y_0 | do(x_0)).
    pub truth: f64,
}

pub fn backdoor_case<R: Rng>(rng: &mut R) -> BackdoorCase {
    let pu = random_row(rng, 2);
    let pw: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
    let px: Vec<Vec<f64>> = (0..4).map(|_| random_row(rng, 2)).collect();
    let py: Vec<Vec<f64>> = (0..8).map(|_| random_row(rng, 2)).collect();
    let mut joint = vec![0.0; 16];
    for x in 0..2 {
        for y in 0..2 {
            for w in 0..2 {
                for u in 0..2 {
                    joint[((x * 2 + y) * 2 + w) * 2 + u] =
                        pu[u] * pw[u][w] * px[u * 2 + w][x] * py[(u * 2 + w) * 2 + x][y];
                }
            }
        }
    }
    let truth =
        (0..2).flat_map(|w| (0..2).map(move |u| (w, u))).map(|(w, u)| pu[u] * pw[u][w] * py[(u * 2 + w) * 2][0]).sum();
    let (pxyw, pu_t) = margins(&joint, 8, 2);
    BackdoorCase {
        joint,
        pxyw: JointTable::new(vec!["X", "Y", "W"], vec![2, 2, 2], pxyw).unwrap(),
        pu: JointTable::new(vec!["U"], vec![2], pu_t).unwrap(),
        truth,
    }
}

/// Binary front-door instance: L -> X, L -> Y, X -> W, X -> U, W -> Y, U -> Y with L hidden.
pub struct FrontdoorCase {
    pub pxyw: JointTable,
    pub pu: JointTable,
    pub truth: f64,
}

pub fn frontdoor_case<R: Rng>(rng: &mut R) -> FrontdoorCase {
    let pl = random_row(rng, 2);
    let px: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
    let pw: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
    let pu: Vec<Vec<f64>> = (0..2).map(|_| random_row(rng, 2)).collect();
    let py: Vec<Vec<f64>> = (0..8).map(|_| random_row(rng, 2)).collect();
    let mut joint = vec![0.0; 16];
    let mut truth = 0.0;
    for l in 0..2 {
        for w in 0..2 {
            for u in 0..2 {
                truth += pl[l] * pw[0][w] * pu[0][u] * py[(l * 2 + w) * 2 + u][0];
                for x in 0..2 {
                    for y in 0..2 {
                        joint[((x * 2 + y) * 2 + w) * 2 + u] +=
                            pl[l] * px[l][x] * pw[x][w] * pu[x][u] * py[(l * 2 + w) * 2 + u][y];
                    }
                }
            }
        }
    }
    let (pxyw, pu_t) = margins(&joint, 8, 2);
    FrontdoorCase {
        pxyw: JointTable::new(vec!["X", "Y", "W"], vec![2, 2, 2], pxyw).unwrap(),
        pu: JointTable::new(vec!["U"], vec![2], pu_t).unwrap(),
        truth,
    }
}

/// Row and column sums of a `rows x cols` row-major matrix.
pub fn margins(m: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let r = (0..rows).map(|i| m[i * cols..(i + 1) * cols].iter().sum()).collect();
    let c = (0..cols).map(|j| (0..rows).map(|i| m[i * cols + j]).sum()).collect();
    (r, c)
}

/// North-west-corner transport plan after shuffling rows and columns: a
/// vertex of the polytope of joints with the given margins.
pub fn nw_corner<R: Rng>(rng: &mut R, rows: &[f64], cols: &[f64]) -> Vec<f64> {
    let mut ri: Vec<usize> = (0..rows.len()).collect();
    let mut ci: Vec<usize> = (0..cols.len()).collect();
    ri.shuffle(rng);
    ci.shuffle(rng);
    let mut supply: Vec<f64> = rows.to_vec();
    let mut demand: Vec<f64> = cols.to_vec();
    let mut plan = vec![0.0; rows.len() * cols.len()];
    let (mut a, mut b) = (0, 0);
    while a < ri.len() && b < ci.len() {
        let (r, c) = (ri[a], ci[b]);
        let t = supply[r].min(demand[c]);
        plan[r * cols.len() + c] += t;
        supply[r] -= t;
        demand[c] -= t;
        if supply[r] <= demand[c] {
            a += 1;
        } else {
            b += 1;
        }
    }
    plan
}

/// A random joint with the given margins: a random convex combination of up
/// to four random vertices, nudged toward the product plan so every cell is positive.
pub fn consistent_joint<R: Rng>(rng: &mut R, rows: &[f64], cols: &[f64]) -> Vec<f64> {
    let k = rng.random_range(1..=4);
    let weights: Vec<f64> = {
        let e: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    };
    let mut plan = vec![0.0; rows.len() * cols.len()];
    for w in weights {
        for (p, v) in plan.iter_mut().zip(nw_corner(rng, rows, cols)) {
            *p += w * v;
        }
    }
    let eps = 1e-6;
    for (i, r) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            let p = &mut plan[i * cols.len() + j];
            *p = (1.0 - eps) * *p + eps * r * c;
        }
    }
    plan
}

/// P(y_0 | do(x_0)) by back-door adjustment over (W, U) in a binary joint
/// indexed ((x * 2 + y) * 2 + w) * 2 + u.
pub fn backdoor_effect(j: &[f64]) -> f64 {
    let at = |x: usize, y: usize, w: usize, u: usize| j[((x * 2 + y) * 2 + w) * 2 + u];
    let mut total = 0.0;
    for w in 0..2 {
        for u in 0..2 {
            let pwu: f64 = (0..2).flat_map(|x| (0..2).map(move |y| (x, y))).map(|(x, y)| at(x, y, w, u)).sum();
            let pxwu = at(0, 0, w, u) + at(0, 1, w, u);
            if pxwu > 0.0 {
                total += at(0, 0, w, u) * pwu / pxwu;
            }
        }
    }
    total
}

/// P(y_0 | do(x_0)) by front-door adjustment over (W, U), same layout.
pub fn frontdoor_effect(j: &[f64]) -> f64 {
    let at = |x: usize, y: usize, w: usize, u: usize| j[((x * 2 + y) * 2 + w) * 2 + u];
    let px = |x: usize| -> f64 { (0..8).map(|r| at(x, r / 4, (r / 2) % 2, r % 2)).sum() };
    let mut total = 0.0;
    for w in 0..2 {
        for u in 0..2 {
            let pxwu = |x: usize| at(x, 0, w, u) + at(x, 1, w, u);
            let mut inner = 0.0;
            for xp in 0..2 {
                if pxwu(xp) > 0.0 {
                    inner += at(xp, 0, w, u) / pxwu(xp) * px(xp);
                }
            }
            total += pxwu(0) / px(0) * inner;
        }
    }
    total
}

/// A DAG as parent lists over nodes 0..n.
#[derive(Clone, Debug)]
pub struct Dag {
    pub n: usize,
    pub parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|c| self.parents[c].iter().map(move |&p| (p, c))).collect()
    }

    /// `desc[v][d]`: d is v or a descendant of v.
    pub fn descendant_matrix(&self) -> Vec<Vec<bool>> {
        let mut desc = vec![vec![false; self.n]; self.n];
        for v in 0..self.n {
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                if std::mem::replace(&mut desc[v][u], true) {
                    continue;
                }
                for c in 0..self.n {
                    if self.parents[c].contains(&u) {
                        stack.push(c);
                    }
                }
            }
        }
        desc
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.parents[a].contains(&b) || self.parents[b].contains(&a)
    }

    /// Every simple path from `a` to `b` in the skeleton.
    pub fn paths(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        fn go(g: &Dag, path: &mut Vec<usize>, b: usize, out: &mut Vec<Vec<usize>>) {
            let last = *path.last().unwrap();
            if last == b {
                out.push(path.clone());
                return;
            }
            for next in 0..g.n {
                if !path.contains(&next) && g.adjacent(last, next) {
                    path.push(next);
                    go(g, path, b, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut vec![a], b, &mut out);
        out
    }

    /// Whether a path is active given `given`: colliders must have a
    /// descendant in `given`, every other interior node must lie outside it.
    pub fn path_active(&self, desc: &[Vec<bool>], path: &[usize], given: &[bool]) -> bool {
        for i in 1..path.len().saturating_sub(1) {
            let (prev, v, next) = (path[i - 1], path[i], path[i + 1]);
            let collider = self.parents[v].contains(&prev) && self.parents[v].contains(&next);
            if collider {
                if !(0..self.n).any(|d| given[d] && desc[v][d]) {
                    return false;
                }
            } else if given[v] {
                return false;
            }
        }
        true
    }
}

/// Every DAG on `n` nodes whose edges respect the order 0 < 1 < ... < n-1.
/// Any DAG is a relabelling of one of these.
pub fn ordered_dags(n: usize) -> impl Iterator<Item = Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    (0u64..(1u64 << pairs.len())).map(move |mask| {
        let mut parents = vec![Vec::new(); n];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                parents[j].push(i);
            }
        }
        Dag { n, parents }
    })
}

/// A random DAG on `n` nodes: a random order with each forward edge kept with probability `p`.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parents = vec![Vec::new(); n];
    for j in 0..n {
        for i in 0..j {
            if rng.random::<f64>() < p {
                parents[order[j]].push(order[i]);
            }
        }
    }
    Dag { n, parents }
}

/// Sum of the joint over every cell matching `event`, decoding row-major indices by hand.
pub fn prob(j: &JointTable, event: &[(&str, usize)]) -> f64 {
    let pos: Vec<(usize, usize)> =
        event.iter().map(|&(n, s)| (j.scope().iter().position(|v| v == n).expect("variable in scope"), s)).collect();
    let states = j.states();
    let mut total = 0.0;
    for (idx, &v) in j.probs().iter().enumerate() {
        let mut rest = idx;
        let mut assign = vec![0; states.len()];
        for k in (0..states.len()).rev() {
            assign[k] = rest % states[k];
            rest /= states[k];
        }
        if pos.iter().all(|&(k, s)| assign[k] == s) {
            total += v;
        }
    }
    total
}

pub fn cond(j: &JointTable, event: &[(&str, usize)], given: &[(&str, usize)]) -> f64 {
    let both: Vec<(&str, usize)> = event.iter().chain(given).copied().collect();
    prob(j, &both) / prob(j, given)
}

/// sum over configurations c of `vars` of P(y0 | x0, c) P(c).
pub fn backdoor_oracle(j: &JointTable, vars: &[&str]) -> f64 {
    let sizes: Vec<usize> = vars.iter().map(|v| j.states()[j.scope().iter().position(|n| n == v).unwrap()]).collect();
    let total: usize = sizes.iter().product();
    let mut sum = 0.0;
    for c in 0..total {
        let mut rest = c;
        let mut given: Vec<(&str, usize)> = Vec::new();
        for (k, v) in vars.iter().enumerate().rev() {
            given.push((v, rest % sizes[k]));
            rest /= sizes[k];
        }
        let pc = prob(j, &given);
        if pc == 0.0 {
            continue;
        }
        let mut gx = given.clone();
        gx.push(("X", 0));
        sum += cond(j, &[("Y", 0)], &gx) * pc;
    }
    sum
}

/// P(y_0 | do(x_0)) by adjusting for W alone in a (X, Y, W) table with binary X, Y.
pub fn adjust_w(pxyw: &[f64], ws: usize) -> f64 {
    let at = |x: usize, y: usize, w: usize| pxyw[(x * 2 + y) * ws + w];
    (0..ws)
        .map(|w| {
            let pw: f64 = (0..4).map(|c| at(c / 2, c % 2, w)).sum();
            at(0, 0, w) * pw / (at(0, 0, w) + at(0, 1, w))
        })
        .sum()
}

/// Front-door formula over W alone, same layout.
pub fn frontdoor_w(pxyw: &[f64], ws: usize) -> f64 {
    let at = |x: usize, y: usize, w: usize| pxyw[(x * 2 + y) * ws + w];
    let pxw = |x: usize, w: usize| at(x, 0, w) + at(x, 1, w);
    let px = |x: usize| (0..ws).map(|w| pxw(x, w)).sum::<f64>();
    (0..ws).map(|w| pxw(0, w) / px(0) * (0..2).map(|xp| at(xp, 0, w) / pxw(xp, w) * px(xp)).sum::<f64>()).sum()
}

/// Contents of a file under the workspace `fixtures/` directory.
pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}
