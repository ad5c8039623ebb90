use serde::{Deserialize, Serialize};

use super::joint::JointTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A probability interval `[lb, ub]` with `0 <= lb <= ub <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lb: T,
    pub ub: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lb: T, ub: T) -> Result<Self> {
        if !(lb >= T::zero() && lb <= ub && ub <= T::one()) {
            return Err(Error::InvalidMass(format!("[{lb}, {ub}] is not a probability interval")));
        }
        Ok(Self { lb, ub })
    }

    /// Clamps both endpoints into [0, 1]; the order of the endpoints is kept as given.
    pub fn clamped(lb: T, ub: T) -> Self {
        let c = |v: T| v.max(T::zero()).min(T::one());
        Self { lb: c(lb), ub: c(ub) }
    }

    pub fn midpoint(&self) -> T {
        (self.lb + self.ub) / T::lit(2.0)
    }

    pub fn width(&self) -> T {
        self.ub - self.lb
    }

    pub fn contains(&self, v: T, slack: T) -> bool {
        v >= self.lb - slack && v <= self.ub + slack
    }
}

/// A node name together with a 0-based state.
pub type Event<'a> = (&'a str, usize);

/// Marginal over (X, Y, Z...) plus the row-major layout of Z's configurations.
struct Layout<T> {
    table: JointTable<T>,
    xs: usize,
    ys: usize,
    zcells: usize,
}

impl<T: Scalar> Layout<T> {
    fn new<S: AsRef<str>>(j: &JointTable<T>, x: Event, y: Event, z: &[S]) -> Result<Self> {
        let mut names: Vec<&str> = vec![x.0, y.0];
        names.extend(z.iter().map(|s| s.as_ref()));
        let table = j.marginal(&names)?;
        let (xs, ys) = (table.states()[0], table.states()[1]);
        if x.1 >= xs {
            return Err(Error::StateOutOfRange { node: x.0.into(), state: x.1, states: xs });
        }
        if y.1 >= ys {
            return Err(Error::StateOutOfRange { node: y.0.into(), state: y.1, states: ys });
        }
        let zcells = table.len() / (xs * ys);
        Ok(Self { table, xs, ys, zcells })
    }

    fn cell(&self, x: usize, y: usize, z: usize) -> T {
        self.table.probs()[(x * self.ys + y) * self.zcells + z]
    }

    /// P(x, z) summed over Y.
    fn pxz(&self, x: usize, z: usize) -> T {
        (0..self.ys).map(|y| self.cell(x, y, z)).sum()
    }

    fn pz(&self, z: usize) -> T {
        (0..self.xs).map(|x| self.pxz(x, z)).sum()
    }

    fn px(&self, x: usize) -> T {
        (0..self.zcells).map(|z| self.pxz(x, z)).sum()
    }
}

/// Back-door adjustment: sum over z of P(y | x, z) P(z).
///
/// Configurations with P(z) = 0 contribute nothing. A configuration with
/// P(z) > 0 but P(x, z) = 0 is a positivity violation.
pub fn adjust_backdoor<T: Scalar, S: AsRef<str>>(j: &JointTable<T>, x: Event, y: Event, z: &[S]) -> Result<T> {
    let l = Layout::new(j, x, y, z)?;
    let mut total = T::zero();
    for zi in 0..l.zcells {
        let pz = l.pz(zi);
        if pz <= T::zero() {
            continue;
        }
        let pxz = l.pxz(x.1, zi);
        if pxz <= T::zero() {
            return Err(Error::Positivity(format!("P({}, z) = 0 at z configuration {zi} with P(z) > 0", x.0)));
        }
        total = total + l.cell(x.1, y.1, zi) * pz / pxz;
    }
    Ok(total.min(T::one()))
}

/// Front-door adjustment: sum over z of P(z | x) sum over x' of P(y | x', z) P(x').
///
/// Only configurations with P(z | x) > 0 are visited. Inside the inner sum,
/// treatment values with P(x', z) = 0 carry no information about P(y | x', z);
/// they are dropped and the remaining P(x') weights renormalized.
pub fn adjust_frontdoor<T: Scalar, S: AsRef<str>>(j: &JointTable<T>, x: Event, y: Event, z: &[S]) -> Result<T> {
    let l = Layout::new(j, x, y, z)?;
    let px_target = l.px(x.1);
    if px_target <= T::zero() {
        return Err(Error::Positivity(format!("P({} = {}) = 0", x.0, x.1 + 1)));
    }
    let px: Vec<T> = (0..l.xs).map(|xi| l.px(xi)).collect();
    let mut total = T::zero();
    for zi in 0..l.zcells {
        let pxz = l.pxz(x.1, zi);
        if pxz <= T::zero() {
            continue;
        }
        let mut inner = T::zero();
        let mut weight = T::zero();
        for (xp, &pxp) in px.iter().enumerate() {
            let d = l.pxz(xp, zi);
            if d > T::zero() {
                inner = inner + l.cell(xp, y.1, zi) / d * pxp;
                weight = weight + pxp;
            }
        }
        total = total + pxz / px_target * inner / weight;
    }
    Ok(total.min(T::one()))
}

/// Tian-Pearl bounds P(x,y) <= P(y|do(x)) <= 1 - P(x,y').
pub fn tian_pearl_bounds<T: Scalar>(pxy: T, pxy_prime: T) -> Result<Interval<T>> {
    let tol = T::structural_tol();
    if !(pxy >= T::zero() && pxy_prime >= T::zero()) || pxy + pxy_prime > T::one() + tol {
        return Err(Error::InvalidMass(format!("P(x,y) = {pxy}, P(x,y') = {pxy_prime}")));
    }
    let ub = (T::one() - pxy_prime).max(pxy);
    Interval::new(pxy, ub)
}

/// Tian-Pearl bounds read from a table containing X and Y. P(x,y') is the mass of
/// X = x with Y different from y.
pub fn tian_pearl_from_table<T: Scalar>(j: &JointTable<T>, x: Event, y: Event) -> Result<Interval<T>> {
    let pxy = j.prob(&[x, y])?;
    let px = j.prob(&[x])?;
    tian_pearl_bounds(pxy, (px - pxy).max(T::zero()))
}

/// Samples needed to estimate every observable table with `per_state` samples per cell.
pub fn required_sample_size(state_counts_per_table: &[Vec<usize>], per_state: usize) -> usize {
    state_counts_per_table.iter().map(|t| t.iter().product::<usize>()).max().unwrap_or(0) * per_state
}

pub const SAMPLES_PER_STATE: usize = 30;
