use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A distribution over the Cartesian product of the states of `scope`,
/// flattened row-major (the last variable varies fastest).
///
/// States are 0-based in the API. In JSON only the positional `probs` array
/// carries states, and documentation refers to the first state as state 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint<T>", bound(deserialize = "T: Scalar"))]
pub struct JointTable<T> {
    scope: Vec<String>,
    states: Vec<usize>,
    probs: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct RawJoint<T> {
    scope: Vec<String>,
    states: Vec<usize>,
    probs: Vec<T>,
}

impl<T: Scalar> TryFrom<RawJoint<T>> for JointTable<T> {
    type Error = Error;

    fn try_from(raw: RawJoint<T>) -> Result<Self> {
        JointTable::new(raw.scope, raw.states, raw.probs)
    }
}

/// Strides for a row-major layout.
pub(crate) fn strides(states: &[usize]) -> Vec<usize> {
    let mut s = vec![1; states.len()];
    for i in (0..states.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * states[i + 1];
    }
    s
}

/// Advances a mixed-radix counter; returns false after the last assignment.
pub(crate) fn next_assignment(assign: &mut [usize], states: &[usize]) -> bool {
    for i in (0..assign.len()).rev() {
        assign[i] += 1;
        if assign[i] < states[i] {
            return true;
        }
        assign[i] = 0;
    }
    false
}

impl<T: Scalar> JointTable<T> {
    pub fn new<S: Into<String>>(scope: Vec<S>, states: Vec<usize>, probs: Vec<T>) -> Result<Self> {
        let t = Self::new_unnormalized(scope, states, probs)?;
        let total: T = t.probs.iter().copied().sum();
        if (total - T::one()).abs() > T::structural_tol() * T::lit(16.0) {
            return Err(Error::InvalidTable(format!("total mass {total} != 1")));
        }
        Ok(t)
    }

    /// Like [`JointTable::new`] but without the unit-mass check; entries must still be nonnegative.
    pub fn new_unnormalized<S: Into<String>>(scope: Vec<S>, states: Vec<usize>, probs: Vec<T>) -> Result<Self> {
        let scope: Vec<String> = scope.into_iter().map(Into::into).collect();
        if scope.len() != states.len() {
            return Err(Error::ShapeMismatch(format!("{} names but {} state counts", scope.len(), states.len())));
        }
        for (i, name) in scope.iter().enumerate() {
            if scope[..i].contains(name) {
                return Err(Error::DuplicateNode(name.clone()));
            }
            if states[i] == 0 {
                return Err(Error::ZeroStates(name.clone()));
            }
        }
        let cells: usize = states.iter().product();
        if probs.len() != cells {
            return Err(Error::ShapeMismatch(format!("expected {cells} cells, got {}", probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= T::zero()) || !p.is_finite()) {
            return Err(Error::InvalidTable(format!("entry {p} is not a probability")));
        }
        Ok(Self { scope, states, probs })
    }

    /// Uniform distribution over the given scope.
    pub fn uniform<S: Into<String>>(scope: Vec<S>, states: Vec<usize>) -> Result<Self> {
        let cells: usize = states.iter().product();
        let p = T::one() / T::from_usize(cells).expect("cell count fits");
        Self::new(scope, states, vec![p; cells])
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<T> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> T {
        self.probs.iter().copied().sum()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.scope.iter().position(|s| s == name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn states_of(&self, name: &str) -> Result<usize> {
        Ok(self.states[self.position(name)?])
    }

    /// Flat index of a full assignment (0-based states, scope order).
    pub fn flat_index(&self, assign: &[usize]) -> usize {
        assign.iter().zip(strides(&self.states)).map(|(a, s)| a * s).sum()
    }

    pub fn get(&self, assign: &[usize]) -> T {
        self.probs[self.flat_index(assign)]
    }

    fn check_state(&self, name: &str, state: usize) -> Result<usize> {
        let pos = self.position(name)?;
        if state >= self.states[pos] {
            return Err(Error::StateOutOfRange { node: name.to_string(), state, states: self.states[pos] });
        }
        Ok(pos)
    }

    /// Probability of a partial assignment (0-based states).
    pub fn prob(&self, event: &[(&str, usize)]) -> Result<T> {
        let fixed: Vec<(usize, usize)> =
            event.iter().map(|&(n, s)| self.check_state(n, s).map(|p| (p, s))).collect::<Result<_>>()?;
        let mut assign = vec![0; self.scope.len()];
        let mut total = T::zero();
        let mut k = 0;
        loop {
            if fixed.iter().all(|&(p, s)| assign[p] == s) {
                total = total + self.probs[k];
            }
            k += 1;
            if !next_assignment(&mut assign, &self.states) {
                break;
            }
        }
        Ok(total)
    }

    /// Marginal over `keep`, in the order given by `keep`.
    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<JointTable<T>> {
        let pos: Vec<usize> = keep.iter().map(|n| self.position(n.as_ref())).collect::<Result<_>>()?;
        for (i, p) in pos.iter().enumerate() {
            if pos[..i].contains(p) {
                return Err(Error::Overlap(self.scope[*p].clone()));
            }
        }
        let out_states: Vec<usize> = pos.iter().map(|&p| self.states[p]).collect();
        let out_strides = strides(&out_states);
        let mut out = vec![T::zero(); out_states.iter().product()];
        let mut assign = vec![0; self.scope.len()];
        let mut k = 0;
        loop {
            let j: usize = pos.iter().zip(&out_strides).map(|(&p, s)| assign[p] * s).sum();
            out[j] = out[j] + self.probs[k];
            k += 1;
            if !next_assignment(&mut assign, &self.states) {
                break;
            }
        }
        Ok(JointTable { scope: pos.iter().map(|&p| self.scope[p].clone()).collect(), states: out_states, probs: out })
    }

    /// P(keep | condition). With an empty condition this is the marginal over `keep`.
    pub fn query_marginal<S: AsRef<str>>(&self, keep: &[S], condition: &[(&str, usize)]) -> Result<JointTable<T>> {
        for &(n, s) in condition {
            self.check_state(n, s)?;
            if keep.iter().any(|k| k.as_ref() == n) {
                return Err(Error::Overlap(n.to_string()));
            }
        }
        if condition.is_empty() {
            return self.marginal(keep);
        }
        let mut names: Vec<&str> = keep.iter().map(|k| k.as_ref()).collect();
        names.extend(condition.iter().map(|&(n, _)| n));
        let joint = self.marginal(&names)?;
        let k = keep.len();
        let keep_cells: usize = joint.states[..k].iter().product();
        let cond_strides = strides(&joint.states[k..]);
        let offset: usize = condition.iter().zip(&cond_strides).map(|(&(_, s), st)| s * st).sum();
        let cond_cells: usize = joint.states[k..].iter().product();
        let mut probs: Vec<T> = (0..keep_cells).map(|i| joint.probs[i * cond_cells + offset]).collect();
        let mass: T = probs.iter().copied().sum();
        if mass <= T::zero() {
            return Err(Error::ZeroCondition);
        }
        for p in &mut probs {
            *p = *p / mass;
        }
        Ok(JointTable { scope: joint.scope[..k].to_vec(), states: joint.states[..k].to_vec(), probs })
    }

    /// Reorders the scope; `order` must be a permutation of the current scope.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<JointTable<T>> {
        if order.len() != self.scope.len() {
            return Err(Error::ShapeMismatch("reorder needs a permutation of the scope".into()));
        }
        self.marginal(order)
    }

    /// Casts the entries to another scalar type.
    pub fn cast<U: Scalar>(&self) -> JointTable<U> {
        JointTable {
            scope: self.scope.clone(),
            states: self.states.clone(),
            probs: self.probs.iter().map(|p| U::lit(p.as_f64())).collect(),
        }
    }
}
