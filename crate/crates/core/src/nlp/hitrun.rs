//! Hit-and-run walk inside the feasible polytope, used to spread restarts.

use rand::Rng;
use rand_distr::StandardNormal;

use super::program::FractionalProgram;
use crate::scalar::Scalar;

/// Orthonormal basis of the span of the equality rows plus the unit vectors of
/// pinned variables. Directions are projected onto its orthogonal complement.
pub(crate) struct NullSpace<T> {
    basis: Vec<Vec<T>>,
}

impl<T: Scalar> NullSpace<T> {
    pub fn new(p: &FractionalProgram<T>) -> Self {
        let n = p.var_count();
        let mut basis: Vec<Vec<T>> = Vec::new();
        let mut push = |mut v: Vec<T>| {
            for b in &basis {
                let c = dot(b, &v);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = *vi - c * bi;
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > T::lit(1e-10) {
                v.iter_mut().for_each(|x| *x = *x / norm);
                basis.push(v);
            }
        };
        for i in 0..n {
            if p.upper()[i] - p.lower()[i] <= T::epsilon() {
                let mut e = vec![T::zero(); n];
                e[i] = T::one();
                push(e);
            }
        }
        for c in p.eq_constraints() {
            let mut v = vec![T::zero(); n];
            for &(i, a) in &c.coeffs {
                v[i] = v[i] + a;
            }
            push(v);
        }
        Self { basis }
    }

    fn project(&self, v: &mut [T]) {
        // Twice for numerical orthogonality.
        for _ in 0..2 {
            for b in &self.basis {
                let c = dot(b, v);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = *vi - c * bi;
                }
            }
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Runs `steps` hit-and-run moves from the feasible point `x`, in place.
pub(crate) fn walk<T: Scalar, R: Rng>(
    p: &FractionalProgram<T>,
    null: &NullSpace<T>,
    x: &mut [T],
    steps: usize,
    rng: &mut R,
) {
    let n = x.len();
    let mut dir = vec![T::zero(); n];
    for _ in 0..steps {
        for d in dir.iter_mut() {
            *d = T::lit(rng.sample::<f64, _>(StandardNormal));
        }
        null.project(&mut dir);
        let norm = dot(&dir, &dir).sqrt();
        if norm <= T::lit(1e-12) {
            return;
        }
        dir.iter_mut().for_each(|d| *d = *d / norm);

        let (mut tmin, mut tmax) = (T::neg_infinity(), T::infinity());
        let mut limit = |rate: T, slack: T| {
            // Need rate * t <= slack.
            if rate.abs() <= T::lit(1e-14) {
                return;
            }
            let t = slack.max(T::zero()) / rate;
            if rate > T::zero() {
                tmax = tmax.min(t);
            } else {
                tmin = tmin.max(t);
            }
        };
        for c in p.ineq_constraints() {
            let rate = c.coeffs.iter().fold(T::zero(), |acc, &(i, a)| acc + a * dir[i]);
            limit(rate, c.rhs - c.eval(x));
        }
        for i in 0..n {
            limit(dir[i], p.upper()[i] - x[i]);
            limit(-dir[i], x[i] - p.lower()[i]);
        }
        if !(tmin.is_finite() && tmax.is_finite()) || tmax <= tmin {
            continue;
        }
        let u: f64 = rng.random();
        let t = tmin + (tmax - tmin) * T::lit(u);
        for i in 0..n {
            x[i] = (x[i] + t * dir[i]).max(p.lower()[i]).min(p.upper()[i]);
        }
    }
}
