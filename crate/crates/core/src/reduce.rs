//! Equivalent tuples: replace a many-state adjustment variable Z by two factor
//! variables W (observed) and U (known only through its prior), with Z's states
//! in bijection with the pairs (w, u). The causal effect of X on Y is unchanged,
//! and the partially observed problem over (X, Y, W) and U can then be bounded.

use serde::{Deserialize, Serialize};

use crate::diagram::CausalDiagram;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tables::{
    adjust_backdoor, adjust_frontdoor, cpts_from_joint, joint_from_cpts, next_assignment, required_sample_size,
    strides, Cpt, JointTable, SAMPLES_PER_STATE,
};

/// How the pair (w_j, u_k) is numbered among Z's states (all 0-based here).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorOrder {
    /// z = j * q + k: W is the slow index.
    #[default]
    WMajor,
    /// z = k * p + j: U is the slow index.
    UMajor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateMapping {
    pub z_name: String,
    pub w_name: String,
    pub u_name: String,
    /// States of Z.
    pub m: usize,
    /// States of W.
    pub p: usize,
    /// States of U.
    pub q: usize,
    /// True when p * q > m; the extra pairs are virtual and carry no probability.
    pub padded: bool,
    #[serde(default)]
    pub order: FactorOrder,
}

impl StateMapping {
    pub fn new(z_name: &str, m: usize, p: usize, order: FactorOrder) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroStates(z_name.to_string()));
        }
        if p == 0 || p > m {
            return Err(Error::InvalidArgument(format!("p = {p} must lie in 1..={m}")));
        }
        let q = m.div_ceil(p);
        Ok(Self {
            z_name: z_name.to_string(),
            w_name: "W".into(),
            u_name: "U".into(),
            m,
            p,
            q,
            padded: p * q != m,
            order,
        })
    }

    pub fn with_names(mut self, w: &str, u: &str) -> Self {
        self.w_name = w.to_string();
        self.u_name = u.to_string();
        self
    }

    /// Position of the pair (j, k) in the padded range 0..p*q.
    pub fn pair_index(&self, j: usize, k: usize) -> usize {
        match self.order {
            FactorOrder::WMajor => j * self.q + k,
            FactorOrder::UMajor => k * self.p + j,
        }
    }

    /// The Z state of (w_j, u_k), or `None` for a virtual pair.
    pub fn z_of(&self, j: usize, k: usize) -> Option<usize> {
        let z = self.pair_index(j, k);
        (z < self.m).then_some(z)
    }

    /// The (w, u) pair of a Z state.
    pub fn pair_of(&self, z: usize) -> (usize, usize) {
        match self.order {
            FactorOrder::WMajor => (z / self.q, z % self.q),
            FactorOrder::UMajor => (z % self.p, z / self.p),
        }
    }

    /// Z states covered by w_j.
    pub fn states_of_w(&self, j: usize) -> Vec<usize> {
        (0..self.q).filter_map(|k| self.z_of(j, k)).collect()
    }

    /// Z states covered by u_k.
    pub fn states_of_u(&self, k: usize) -> Vec<usize> {
        (0..self.p).filter_map(|j| self.z_of(j, k)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mapping serializes")
    }
}

/// Which criterion the adjustment set satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Backdoor,
    Frontdoor,
}

impl Criterion {
    /// The criterion `q` satisfies relative to (x, y), preferring back-door.
    pub fn detect<S: AsRef<str>>(g: &CausalDiagram, q: &[S], x: &str, y: &str) -> Result<Option<Criterion>> {
        if g.satisfies_backdoor(q, x, y)? {
            Ok(Some(Criterion::Backdoor))
        } else if g.satisfies_frontdoor(q, x, y)? {
            Ok(Some(Criterion::Frontdoor))
        } else {
            Ok(None)
        }
    }

    /// Adjustment-formula effect P(y | do(x)) over `q` in `joint`.
    pub fn effect<T: Scalar, S: AsRef<str>>(
        self,
        joint: &JointTable<T>,
        x: (&str, usize),
        y: (&str, usize),
        q: &[S],
    ) -> Result<T> {
        match self {
            Criterion::Backdoor => adjust_backdoor(joint, x, y, q),
            Criterion::Frontdoor => adjust_frontdoor(joint, x, y, q),
        }
    }
}

/// Observational data in either accepted form.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations<T> {
    Joint(JointTable<T>),
    Cpts(Vec<Cpt<T>>),
}

impl<T: Scalar> Observations<T> {
    /// Full joint over the nodes of `g`, in `g`'s declaration order.
    pub fn joint(&self, g: &CausalDiagram) -> Result<JointTable<T>> {
        match self {
            Observations::Cpts(c) => joint_from_cpts(g, c),
            Observations::Joint(j) => {
                let names: Vec<&str> = g.nodes().iter().map(|n| n.name.as_str()).collect();
                let j = j.reorder(&names)?;
                for (k, n) in g.nodes().iter().enumerate() {
                    if j.states()[k] != n.states {
                        return Err(Error::ShapeMismatch(format!(
                            "`{}` has {} states in the diagram but {} in the table",
                            n.name,
                            n.states,
                            j.states()[k]
                        )));
                    }
                }
                Ok(j)
            }
        }
    }
}

/// Options for [`make_equivalent_tuple`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReduceOptions {
    pub order: FactorOrder,
    pub w_name: String,
    pub u_name: String,
    /// Adjustment set containing Z; defaults to `{Z}`.
    pub adjustment: Option<Vec<String>>,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self { order: FactorOrder::WMajor, w_name: "W".into(), u_name: "U".into(), adjustment: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentTuple<T> {
    pub g_prime: CausalDiagram,
    pub mapping: StateMapping,
    pub criterion: Criterion,
    pub x: String,
    pub y: String,
    /// Adjustment set in the new diagram: the old set with Z replaced by W and U.
    pub adjustment: Vec<String>,
    /// Adjustment variables known only through their prior.
    pub unobserved: Vec<String>,
    /// Full joint over the nodes of `g_prime`, in declaration order.
    pub joint: JointTable<T>,
    /// P(X, Y, observed part of the adjustment set).
    pub pxyw: JointTable<T>,
    /// Prior over the unobserved part.
    pub pu: JointTable<T>,
}

impl<T: Scalar> EquivalentTuple<T> {
    pub fn cpts(&self) -> Result<Vec<Cpt<T>>> {
        cpts_from_joint(&self.g_prime, &self.joint)
    }

    /// Applies the transformation again to another variable of the adjustment set.
    pub fn reduce_further(&self, z: &str, p: usize, opts: &ReduceOptions) -> Result<EquivalentTuple<T>> {
        let opts = ReduceOptions { adjustment: Some(self.adjustment.clone()), ..opts.clone() };
        transform(&self.g_prime, &self.joint, &self.x, &self.y, z, p, &opts, &self.unobserved)
    }
}

/// Builds the equivalent tuple for Z with `p` states of W.
///
/// The adjustment set (by default `{Z}`) must satisfy the back-door or the
/// front-door criterion relative to (x, y) in `g`.
pub fn make_equivalent_tuple<T: Scalar>(
    g: &CausalDiagram,
    data: &Observations<T>,
    x: &str,
    y: &str,
    z: &str,
    p: usize,
    opts: &ReduceOptions,
) -> Result<EquivalentTuple<T>> {
    let joint = data.joint(g)?;
    transform(g, &joint, x, y, z, p, opts, &[])
}

/// Transforms each listed variable in turn; W and U names get a 1-based suffix.
pub fn make_equivalent_tuple_multi<T: Scalar>(
    g: &CausalDiagram,
    data: &Observations<T>,
    x: &str,
    y: &str,
    factors: &[(&str, usize)],
    order: FactorOrder,
) -> Result<Vec<EquivalentTuple<T>>> {
    let adjustment: Vec<String> = factors.iter().map(|(z, _)| z.to_string()).collect();
    let mut out: Vec<EquivalentTuple<T>> = Vec::with_capacity(factors.len());
    for (i, &(z, p)) in factors.iter().enumerate() {
        let opts = ReduceOptions {
            order,
            w_name: format!("W{}", i + 1),
            u_name: format!("U{}", i + 1),
            adjustment: Some(adjustment.clone()),
        };
        let next = match out.last() {
            None => make_equivalent_tuple(g, data, x, y, z, p, &opts)?,
            Some(prev) => prev.reduce_further(z, p, &opts)?,
        };
        out.push(next);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn transform<T: Scalar>(
    g: &CausalDiagram,
    joint: &JointTable<T>,
    x: &str,
    y: &str,
    z: &str,
    p: usize,
    opts: &ReduceOptions,
    unobserved_before: &[String],
) -> Result<EquivalentTuple<T>> {
    let zi = g.index_of(z)?;
    g.index_of(x)?;
    g.index_of(y)?;
    let q_set: Vec<String> = opts.adjustment.clone().unwrap_or_else(|| vec![z.to_string()]);
    if !q_set.iter().any(|n| n == z) {
        return Err(Error::InvalidArgument(format!("adjustment set must contain `{z}`")));
    }
    let criterion = Criterion::detect(g, &q_set, x, y)?.ok_or_else(|| {
        Error::Criterion(format!(
            "{{{}}} satisfies neither the back-door nor the front-door criterion",
            q_set.join(", ")
        ))
    })?;
    for name in [&opts.w_name, &opts.u_name] {
        if g.index_of(name).is_ok() {
            return Err(Error::DuplicateNode(name.clone()));
        }
    }
    if opts.w_name == opts.u_name {
        return Err(Error::DuplicateNode(opts.w_name.clone()));
    }
    let mapping = StateMapping::new(z, g.states(zi), p, opts.order)?.with_names(&opts.w_name, &opts.u_name);
    let (w, u) = (opts.w_name.as_str(), opts.u_name.as_str());

    // New diagram: Z's slot holds U then W.
    let mut nodes: Vec<(&str, usize)> = Vec::with_capacity(g.len() + 1);
    for n in g.nodes() {
        if n.name == z {
            nodes.push((u, mapping.q));
            nodes.push((w, mapping.p));
        } else {
            nodes.push((n.name.as_str(), n.states));
        }
    }
    let mut edges: Vec<(&str, &str)> = Vec::new();
    for (a, b) in g.edges() {
        let (a, b) = (g.name(a), g.name(b));
        if b == z {
            edges.push((a, u));
            edges.push((a, w));
        } else if a == z {
            edges.push((u, b));
            edges.push((w, b));
        } else {
            edges.push((a, b));
        }
    }
    edges.push((u, w));
    let g_prime = CausalDiagram::new(&nodes, &edges)?;

    let adjustment: Vec<String> =
        q_set.iter().flat_map(|n| if n == z { vec![w.to_string(), u.to_string()] } else { vec![n.clone()] }).collect();
    if Criterion::detect(&g_prime, &adjustment, x, y)? != Some(criterion) {
        return Err(Error::Criterion(format!("the transformed set no longer satisfies the {criterion:?} criterion")));
    }

    let joint_prime = expand_joint(g, joint, zi, &g_prime, &mapping)?;
    let mut unobserved = unobserved_before.to_vec();
    unobserved.push(u.to_string());
    let mut observed: Vec<String> = vec![x.to_string(), y.to_string()];
    observed.extend(adjustment.iter().filter(|n| !unobserved.contains(n)).cloned());
    let pxyw = joint_prime.marginal(&observed)?;
    let pu = joint_prime.marginal(&unobserved)?;

    Ok(EquivalentTuple {
        g_prime,
        mapping,
        criterion,
        x: x.to_string(),
        y: y.to_string(),
        adjustment,
        unobserved,
        joint: joint_prime,
        pxyw,
        pu,
    })
}

/// P'(..., u_k, w_j, ...) = P(..., z, ...) for the z paired with (w_j, u_k); 0 for virtual pairs.
fn expand_joint<T: Scalar>(
    g: &CausalDiagram,
    joint: &JointTable<T>,
    zi: usize,
    g_prime: &CausalDiagram,
    mapping: &StateMapping,
) -> Result<JointTable<T>> {
    let states: Vec<usize> = g_prime.nodes().iter().map(|n| n.states).collect();
    let old_strides = strides(joint.states());
    let cells: usize = states.iter().product();
    let mut probs = Vec::with_capacity(cells);
    let mut assign = vec![0; states.len()];
    loop {
        // Prime positions: [..zi) unchanged, zi = U, zi + 1 = W, then shifted by one.
        let (k, j) = (assign[zi], assign[zi + 1]);
        let prob = match mapping.z_of(j, k) {
            None => T::zero(),
            Some(zs) => {
                let mut idx = 0;
                for v in 0..g.len() {
                    let s = match v.cmp(&zi) {
                        std::cmp::Ordering::Less => assign[v],
                        std::cmp::Ordering::Equal => zs,
                        std::cmp::Ordering::Greater => assign[v + 1],
                    };
                    idx += s * old_strides[v];
                }
                joint.probs()[idx]
            }
        };
        probs.push(prob);
        if !next_assignment(&mut assign, &states) {
            break;
        }
    }
    let names: Vec<String> = g_prime.nodes().iter().map(|n| n.name.clone()).collect();
    JointTable::new(names, states, probs)
}

/// P(rest, W) and P(U) from a joint containing Z, by direct index arithmetic.
/// The W table keeps the joint's other variables in order, with W last.
pub fn project_observables<T: Scalar>(
    joint: &JointTable<T>,
    mapping: &StateMapping,
) -> Result<(JointTable<T>, JointTable<T>)> {
    let zpos = joint
        .position(&mapping.z_name)
        .map_err(|_| Error::ShapeMismatch(format!("table has no variable `{}`", mapping.z_name)))?;
    if joint.states()[zpos] != mapping.m {
        return Err(Error::ShapeMismatch(format!(
            "`{}` has {} states, the mapping expects {}",
            mapping.z_name,
            joint.states()[zpos],
            mapping.m
        )));
    }
    let mut names: Vec<String> = joint.scope().iter().filter(|n| **n != mapping.z_name).cloned().collect();
    let rest = joint.marginal(&names)?;
    let rest_cells = rest.len();
    // Move Z to the last position so that cell = rest_index * m + z.
    names.push(mapping.z_name.clone());
    let ordered = joint.reorder(&names)?;
    let m = mapping.m;
    let mut w_probs = vec![T::zero(); rest_cells * mapping.p];
    let mut u_probs = vec![T::zero(); mapping.q];
    for r in 0..rest_cells {
        for z in 0..m {
            let v = ordered.probs()[r * m + z];
            let (j, k) = mapping.pair_of(z);
            w_probs[r * mapping.p + j] = w_probs[r * mapping.p + j] + v;
            u_probs[k] = u_probs[k] + v;
        }
    }
    names.pop();
    let mut w_states: Vec<usize> = rest.states().to_vec();
    names.push(mapping.w_name.clone());
    w_states.push(mapping.p);
    Ok((
        JointTable::new(names, w_states, w_probs)?,
        JointTable::new(vec![mapping.u_name.clone()], vec![mapping.q], u_probs)?,
    ))
}

/// Outcome of comparing the effect before and after the transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub original: f64,
    pub transformed: f64,
    pub difference: f64,
    pub passed: bool,
}

/// Exact evaluation is limited to joints of at most this many cells.
pub const MAX_EXACT_CELLS: usize = 4096;

/// Evaluates the adjustment formula on both sides; passes when they agree within 1e-12.
/// `x` and `y` are 0-based target states.
pub fn verify_equivalence<T: Scalar>(
    g: &CausalDiagram,
    data: &Observations<T>,
    tuple: &EquivalentTuple<T>,
    x: usize,
    y: usize,
    original_adjustment: &[String],
) -> Result<EquivalenceReport> {
    let cells = g.nodes().iter().map(|n| n.states).product::<usize>().max(tuple.joint.len());
    if cells > MAX_EXACT_CELLS {
        return Err(Error::Scale { cells, limit: MAX_EXACT_CELLS });
    }
    let joint = data.joint(g)?;
    let xv = (tuple.x.as_str(), x);
    let yv = (tuple.y.as_str(), y);
    let original = tuple.criterion.effect(&joint, xv, yv, original_adjustment)?.as_f64();
    let transformed = tuple.criterion.effect(&tuple.joint, xv, yv, &tuple.adjustment)?.as_f64();
    let difference = (original - transformed).abs();
    Ok(EquivalenceReport { original, transformed, difference, passed: difference <= 1e-12 })
}

/// Largest p whose observable tables can each be estimated from `samples`
/// records with 30 records per cell: max(|X||Y|p, q) * 30 <= samples.
pub fn suggest_p(m: usize, xy_cells: usize, samples: usize) -> Option<usize> {
    (1..=m)
        .rev()
        .find(|&p| required_sample_size(&[vec![xy_cells, p], vec![m.div_ceil(p)]], SAMPLES_PER_STATE) <= samples)
}
