use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Open01};
use serde::{Deserialize, Serialize};

use super::joint::{next_assignment, JointTable};
use crate::diagram::CausalDiagram;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// P(child | parents). `table[k]` is the distribution of the child for the
/// k-th parent configuration, enumerated row-major in `parents` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt<T> {
    #[serde(rename = "node")]
    pub child: String,
    pub parents: Vec<String>,
    #[serde(bound(deserialize = "T: Scalar"))]
    pub table: Vec<Vec<T>>,
}

/// A full set of CPTs, `{"cpts":[{"node":"X","parents":["Z"],"table":[[0.1,0.9],...]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptSet<T> {
    #[serde(bound(deserialize = "T: Scalar"))]
    pub cpts: Vec<Cpt<T>>,
}

impl<T: Scalar> CptSet<T> {
    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cpts serialize")
    }

    pub fn get(&self, node: &str) -> Option<&Cpt<T>> {
        self.cpts.iter().find(|c| c.child == node)
    }
}

impl<T: Scalar> Cpt<T> {
    pub fn new(child: impl Into<String>, parents: Vec<String>, table: Vec<Vec<T>>) -> Result<Self> {
        let cpt = Self { child: child.into(), parents, table };
        cpt.validate_rows()?;
        Ok(cpt)
    }

    fn validate_rows(&self) -> Result<()> {
        let tol = T::structural_tol();
        for (k, row) in self.table.iter().enumerate() {
            if row.iter().any(|p| !(*p >= -tol && *p <= T::one() + tol)) {
                return Err(Error::InvalidTable(format!("{}: row {k} has an entry outside [0,1]", self.child)));
            }
            let s: T = row.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::InvalidTable(format!("{}: row {k} sums to {s}", self.child)));
            }
        }
        Ok(())
    }

    /// Checks the CPT against the diagram: parent set, row count and row width.
    pub fn validate(&self, g: &CausalDiagram) -> Result<()> {
        let child = g.index_of(&self.child)?;
        let mut declared: Vec<usize> = g.parents(child).to_vec();
        let mut mine = g.indices_of(&self.parents)?;
        declared.sort_unstable();
        mine.sort_unstable();
        if declared != mine {
            return Err(Error::ShapeMismatch(format!("{}: parents differ from the diagram", self.child)));
        }
        let rows: usize = self.parents.iter().map(|p| g.states_of(p)).product::<Result<usize>>()?;
        if self.table.len() != rows {
            return Err(Error::ShapeMismatch(format!(
                "{}: expected {rows} rows, got {}",
                self.child,
                self.table.len()
            )));
        }
        let width = g.states(child);
        if let Some(r) = self.table.iter().position(|r| r.len() != width) {
            return Err(Error::ShapeMismatch(format!("{}: row {r} does not have {width} entries", self.child)));
        }
        self.validate_rows()
    }

    /// Reads P(child = state | parents = config) with 0-based states.
    pub fn prob(&self, g: &CausalDiagram, parent_states: &[usize], state: usize) -> Result<T> {
        let mut row = 0;
        for (p, &s) in self.parents.iter().zip(parent_states) {
            row = row * g.states_of(p)? + s;
        }
        Ok(self.table[row][state])
    }
}

/// Positive-valued sampling distribution used to draw unnormalized CPT rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sampler {
    /// Uniform on (0, 1).
    #[default]
    Uniform,
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Uniform => Open01.sample(rng),
            Sampler::Exponential { rate } => Exp::new(rate).expect("rate > 0").sample(rng),
            Sampler::Gamma { shape, scale } => Gamma::new(shape, scale).expect("shape, scale > 0").sample(rng),
        }
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            Sampler::Uniform => Ok(()),
            Sampler::Exponential { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            Sampler::Gamma { shape, scale } if shape > 0.0 && scale > 0.0 => Ok(()),
            other => Err(Error::InvalidArgument(format!("sampler parameters out of range: {other:?}"))),
        }
    }
}

/// One normalized row: draw `states` values and divide by their sum.
pub fn sample_row<T: Scalar, R: Rng + ?Sized>(sampler: &Sampler, states: usize, rng: &mut R) -> Vec<T> {
    let draws: Vec<f64> = (0..states).map(|_| sampler.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|a| T::lit(a / sum)).collect()
}

/// Random CPTs for every node of `g`, in declaration order.
pub fn generate_cpts<T: Scalar>(g: &CausalDiagram, sampler: &Sampler, seed: u64) -> Result<Vec<Cpt<T>>> {
    sampler.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(generate_cpts_with(g, sampler, &mut rng))
}

pub fn generate_cpts_with<T: Scalar, R: Rng + ?Sized>(
    g: &CausalDiagram,
    sampler: &Sampler,
    rng: &mut R,
) -> Vec<Cpt<T>> {
    (0..g.len())
        .map(|v| {
            let rows = g.cardinality(g.parents(v));
            let table = (0..rows).map(|_| sample_row(sampler, g.states(v), rng)).collect();
            Cpt {
                child: g.name(v).to_string(),
                parents: g.parents(v).iter().map(|&p| g.name(p).to_string()).collect(),
                table,
            }
        })
        .collect()
}

/// Joint distribution over all nodes of `g` (declaration order) from one CPT per node.
pub fn joint_from_cpts<T: Scalar>(g: &CausalDiagram, cpts: &[Cpt<T>]) -> Result<JointTable<T>> {
    let n = g.len();
    // For each node: its CPT and the diagram indices of that CPT's parent order.
    let mut per_node: Vec<(&Cpt<T>, Vec<usize>)> = Vec::with_capacity(n);
    for v in 0..n {
        let cpt = cpts.iter().find(|c| c.child == g.name(v)).ok_or_else(|| Error::MissingCpt(g.name(v).to_string()))?;
        cpt.validate(g)?;
        per_node.push((cpt, g.indices_of(&cpt.parents)?));
    }
    let states: Vec<usize> = g.nodes().iter().map(|n| n.states).collect();
    let cells: usize = states.iter().product();
    let mut probs = Vec::with_capacity(cells);
    let mut assign = vec![0; n];
    loop {
        let mut p = T::one();
        for (v, (cpt, parents)) in per_node.iter().enumerate() {
            let mut row = 0;
            for &q in parents {
                row = row * states[q] + assign[q];
            }
            p = p * cpt.table[row][assign[v]];
            if p == T::zero() {
                break;
            }
        }
        probs.push(p);
        if !next_assignment(&mut assign, &states) {
            break;
        }
    }
    let names: Vec<String> = g.nodes().iter().map(|n| n.name.clone()).collect();
    JointTable::new(names, states, probs)
}

/// CPT of `node` given `parents`, read off a joint table. Parent configurations
/// with zero mass get a uniform row.
pub fn cpt_from_joint<T: Scalar>(joint: &JointTable<T>, node: &str, parents: &[String]) -> Result<Cpt<T>> {
    let mut names: Vec<&str> = parents.iter().map(String::as_str).collect();
    names.push(node);
    let m = joint.marginal(&names)?;
    let width = joint.states_of(node)?;
    let rows = m.len() / width;
    let table = (0..rows)
        .map(|r| {
            let row = &m.probs()[r * width..(r + 1) * width];
            let mass: T = row.iter().copied().sum();
            if mass > T::zero() {
                row.iter().map(|&p| p / mass).collect()
            } else {
                vec![T::one() / T::from_usize(width).expect("width fits"); width]
            }
        })
        .collect();
    Ok(Cpt { child: node.to_string(), parents: parents.to_vec(), table })
}

/// CPTs for every node of `g` read off a joint over (a superset of) its nodes.
pub fn cpts_from_joint<T: Scalar>(g: &CausalDiagram, joint: &JointTable<T>) -> Result<Vec<Cpt<T>>> {
    (0..g.len())
        .map(|v| {
            let parents: Vec<String> = g.parents(v).iter().map(|&p| g.name(p).to_string()).collect();
            cpt_from_joint(joint, g.name(v), &parents)
        })
        .collect()
}
