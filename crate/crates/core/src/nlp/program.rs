use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `coef * prod(x[num]) / prod(x[den])`. An empty `den` means a plain monomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTerm<T> {
    pub coef: T,
    pub num: Vec<usize>,
    pub den: Vec<usize>,
}

impl<T: Scalar> RatioTerm<T> {
    pub fn new(coef: T, num: Vec<usize>, den: Vec<usize>) -> Self {
        Self { coef, num, den }
    }

    /// Term value with the denominator floored by `delta`. When both the
    /// numerator and the denominator products are at most `delta` the term is 0.
    pub fn value(&self, x: &[T], delta: T) -> T {
        let num: T = self.num.iter().fold(T::one(), |acc, &i| acc * x[i]);
        if self.den.is_empty() {
            return self.coef * num;
        }
        let den: T = self.den.iter().fold(T::one(), |acc, &i| acc * x[i]);
        if num.abs() <= delta && den.abs() <= delta {
            return T::zero();
        }
        self.coef * num / (den + delta)
    }

    /// Adds the gradient of this term into `grad`.
    pub fn accumulate_gradient(&self, x: &[T], delta: T, grad: &mut [T]) {
        let prod_except = |idx: &[usize], skip: usize| -> T {
            idx.iter().enumerate().filter(|&(k, _)| k != skip).fold(T::one(), |acc, (_, &i)| acc * x[i])
        };
        let num: T = self.num.iter().fold(T::one(), |acc, &i| acc * x[i]);
        if self.den.is_empty() {
            for (k, &i) in self.num.iter().enumerate() {
                grad[i] = grad[i] + self.coef * prod_except(&self.num, k);
            }
            return;
        }
        let den: T = self.den.iter().fold(T::one(), |acc, &i| acc * x[i]);
        if num.abs() <= delta && den.abs() <= delta {
            // Flat region: only the numerator slope is kept so a maximizer can leave it.
            let d = den.max(T::zero()) + delta;
            for (k, &i) in self.num.iter().enumerate() {
                grad[i] = grad[i] + self.coef * prod_except(&self.num, k) / d;
            }
            return;
        }
        let d = den + delta;
        for (k, &i) in self.num.iter().enumerate() {
            grad[i] = grad[i] + self.coef * prod_except(&self.num, k) / d;
        }
        let scale = self.coef * num / (d * d);
        for (k, &i) in self.den.iter().enumerate() {
            grad[i] = grad[i] - scale * prod_except(&self.den, k);
        }
    }
}

/// Sparse linear row `sum(coef * x[i])` compared against `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Scalar> LinearConstraint<T> {
    pub fn new(coeffs: Vec<(usize, T)>, rhs: T) -> Self {
        Self { coeffs, rhs }
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &(i, c)| acc + c * x[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

/// Sum-of-ratios objective over a polytope given by linear equalities,
/// inequalities (`coeffs . x <= rhs`) and a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalProgram<T> {
    var_count: usize,
    terms: Vec<RatioTerm<T>>,
    eq: Vec<LinearConstraint<T>>,
    ineq: Vec<LinearConstraint<T>>,
    lo: Vec<T>,
    hi: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility<T> {
    pub feasible: bool,
    pub max_violation: T,
}

impl<T: Scalar> FractionalProgram<T> {
    /// Program over `var_count` probability variables, each boxed in [0, 1].
    pub fn new(var_count: usize) -> Self {
        Self {
            var_count,
            terms: Vec::new(),
            eq: Vec::new(),
            ineq: Vec::new(),
            lo: vec![T::zero(); var_count],
            hi: vec![T::one(); var_count],
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.var_count {
            return Err(Error::InvalidArgument(format!("variable {i} out of range ({} variables)", self.var_count)));
        }
        Ok(())
    }

    pub fn add_term(&mut self, term: RatioTerm<T>) -> Result<()> {
        for &i in term.num.iter().chain(&term.den) {
            self.check_index(i)?;
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, T)>, rhs: T) -> Result<()> {
        for &(i, _) in &coeffs {
            self.check_index(i)?;
        }
        self.eq.push(LinearConstraint::new(coeffs, rhs));
        Ok(())
    }

    /// Adds `coeffs . x <= rhs`.
    pub fn add_le(&mut self, coeffs: Vec<(usize, T)>, rhs: T) -> Result<()> {
        for &(i, _) in &coeffs {
            self.check_index(i)?;
        }
        self.ineq.push(LinearConstraint::new(coeffs, rhs));
        Ok(())
    }

    /// Sets the box of variable `i`. Probability variables must stay inside [0, 1].
    pub fn set_bounds(&mut self, i: usize, lo: T, hi: T) -> Result<()> {
        self.check_index(i)?;
        let tol = T::structural_tol();
        if !(lo <= hi + tol) || lo < -tol || hi > T::one() + tol {
            return Err(Error::InvalidArgument(format!("bounds [{lo}, {hi}] on variable {i}")));
        }
        let lo = lo.max(T::zero()).min(T::one());
        self.lo[i] = lo;
        self.hi[i] = hi.min(T::one()).max(lo);
        Ok(())
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn terms(&self) -> &[RatioTerm<T>] {
        &self.terms
    }

    pub fn eq_constraints(&self) -> &[LinearConstraint<T>] {
        &self.eq
    }

    pub fn ineq_constraints(&self) -> &[LinearConstraint<T>] {
        &self.ineq
    }

    pub fn lower(&self) -> &[T] {
        &self.lo
    }

    pub fn upper(&self) -> &[T] {
        &self.hi
    }

    pub fn objective(&self, x: &[T], delta: T) -> T {
        self.terms.iter().map(|t| t.value(x, delta)).sum()
    }

    pub fn gradient(&self, x: &[T], delta: T) -> Vec<T> {
        let mut g = vec![T::zero(); self.var_count];
        for t in &self.terms {
            t.accumulate_gradient(x, delta, &mut g);
        }
        g
    }

    /// Largest violation over equalities, inequalities and the box.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for c in &self.eq {
            worst = worst.max((c.eval(x) - c.rhs).abs());
        }
        for c in &self.ineq {
            worst = worst.max(c.eval(x) - c.rhs);
        }
        for i in 0..self.var_count {
            worst = worst.max(self.lo[i] - x[i]).max(x[i] - self.hi[i]);
        }
        worst
    }

    pub fn check_feasibility(&self, x: &[T], tol: T) -> Feasibility<T> {
        assert_eq!(x.len(), self.var_count, "point has the wrong dimension");
        let max_violation = self.max_violation(x);
        Feasibility { feasible: max_violation <= tol, max_violation }
    }

    /// Groups of variables that share no constraint and no objective term.
    /// Each group can be optimized independently.
    pub fn independent_blocks(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.var_count).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut link = |vars: &mut dyn Iterator<Item = usize>| {
            if let Some(first) = vars.next() {
                let r = find(&mut parent, first);
                for v in vars {
                    let s = find(&mut parent, v);
                    if s != r {
                        let (lo, hi) = if s < r { (s, r) } else { (r, s) };
                        parent[hi] = lo;
                    }
                }
            }
        };
        for t in &self.terms {
            link(&mut t.num.iter().chain(&t.den).copied());
        }
        for c in self.eq.iter().chain(&self.ineq) {
            link(&mut c.coeffs.iter().map(|&(i, _)| i));
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.var_count];
        for v in 0..self.var_count {
            let r = find(&mut parent, v);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(v);
        }
        groups
    }

    /// Sub-program over `vars` (which must be a union of independent blocks),
    /// with variables renumbered in the given order.
    pub fn restrict(&self, vars: &[usize]) -> FractionalProgram<T> {
        let mut local = vec![usize::MAX; self.var_count];
        for (k, &v) in vars.iter().enumerate() {
            local[v] = k;
        }
        let inside = |idx: &[usize]| idx.iter().all(|&i| local[i] != usize::MAX);
        let remap = |c: &LinearConstraint<T>| LinearConstraint {
            coeffs: c.coeffs.iter().map(|&(i, a)| (local[i], a)).collect(),
            rhs: c.rhs,
        };
        let in_row = |c: &&LinearConstraint<T>| c.coeffs.first().is_some_and(|&(i, _)| local[i] != usize::MAX);
        FractionalProgram {
            var_count: vars.len(),
            terms: self
                .terms
                .iter()
                .filter(|t| !t.num.is_empty() || !t.den.is_empty())
                .filter(|t| inside(&t.num) && inside(&t.den))
                .map(|t| RatioTerm {
                    coef: t.coef,
                    num: t.num.iter().map(|&i| local[i]).collect(),
                    den: t.den.iter().map(|&i| local[i]).collect(),
                })
                .collect(),
            eq: self.eq.iter().filter(in_row).map(remap).collect(),
            ineq: self.ineq.iter().filter(in_row).map(remap).collect(),
            lo: vars.iter().map(|&v| self.lo[v]).collect(),
            hi: vars.iter().map(|&v| self.hi[v]).collect(),
        }
    }

    /// Sum of terms that reference no variable.
    pub fn constant_part(&self) -> T {
        self.terms.iter().filter(|t| t.num.is_empty() && t.den.is_empty()).map(|t| t.coef).sum()
    }
}
