//! Dense strictly convex QP solver (Goldfarb-Idnani dual active set).
//!
//! Solves `min 1/2 x'Gx + a'x` subject to `n_i'x = b_i` (equalities) and
//! `n_i'x >= b_i` (inequalities). G must be symmetric positive definite.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum QpError {
    NotPositiveDefinite,
    Infeasible,
    IterationLimit,
}

/// Sparse constraint row `coeffs . x >= rhs`, or `=` for an equality.
#[derive(Debug, Clone)]
pub(crate) struct Row<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rhs: T,
    pub equality: bool,
}

impl<T: Scalar> Row<T> {
    pub fn eval(&self, x: &[T]) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &(i, a)| acc + a * x[i])
    }
}

#[derive(Debug, Clone)]
pub(crate) struct QpSolution<T> {
    pub x: Vec<T>,
}

/// Lower Cholesky factor of a row-major symmetric matrix.
fn cholesky<T: Scalar>(g: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// J = L^{-T}, stored row-major (column k of J is `j[.. * n + k]`).
fn inverse_transpose_lower<T: Scalar>(l: &[T], n: usize) -> Vec<T> {
    // Solve L Y = I column by column, then J = Y^T.
    let mut jm = vec![T::zero(); n * n];
    for c in 0..n {
        let mut y = vec![T::zero(); n];
        for i in c..n {
            let mut s = if i == c { T::one() } else { T::zero() };
            for k in c..i {
                s = s - l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        // Column c of L^{-1} is y; row c of J is that column.
        for i in 0..n {
            jm[c * n + i] = y[i];
        }
    }
    jm
}

fn hypot<T: Scalar>(a: T, b: T) -> T {
    a.hypot(b)
}

pub(crate) fn solve_qp<T: Scalar>(g: &[T], a: &[T], rows: &[Row<T>], tol: T) -> Result<QpSolution<T>, QpError> {
    let n = a.len();
    let l = cholesky(g, n).ok_or(QpError::NotPositiveDefinite)?;
    let mut jm = inverse_transpose_lower(&l, n);
    let jcol = |jm: &[T], k: usize, i: usize| jm[i * n + k];

    // Unconstrained minimizer x = -J J' a.
    let mut x = vec![T::zero(); n];
    {
        let mut jta = vec![T::zero(); n];
        for k in 0..n {
            jta[k] = (0..n).fold(T::zero(), |acc, i| acc + jcol(&jm, k, i) * a[i]);
        }
        for i in 0..n {
            x[i] = -(0..n).fold(T::zero(), |acc, k| acc + jcol(&jm, k, i) * jta[k]);
        }
    }

    let m = rows.len();
    let mut sign = vec![T::one(); m];
    let mut active: Vec<usize> = Vec::with_capacity(n);
    let mut u: Vec<T> = Vec::with_capacity(n);
    let mut r = vec![T::zero(); n * n];
    let mut is_active = vec![false; m];
    let mut skipped = vec![false; m];
    let eps = T::epsilon() * T::lit(1e3);

    let slack = |x: &[T], i: usize, sign: &[T]| sign[i] * (rows[i].eval(x) - rows[i].rhs);

    let max_iter = 10 * (n + m) + 100;
    let mut iter = 0;
    let mut eq_cursor = 0;
    loop {
        iter += 1;
        if iter > max_iter {
            return Err(QpError::IterationLimit);
        }
        // Pick the constraint to add.
        let mut pick: Option<(usize, T)> = None;
        while eq_cursor < m && pick.is_none() {
            let i = eq_cursor;
            eq_cursor += 1;
            if !rows[i].equality {
                continue;
            }
            let s = rows[i].eval(&x) - rows[i].rhs;
            if s > T::zero() {
                sign[i] = -T::one();
            }
            pick = Some((i, -s.abs()));
        }
        if pick.is_none() {
            for i in 0..m {
                if rows[i].equality || is_active[i] || skipped[i] {
                    continue;
                }
                let scale = T::one() + rows[i].rhs.abs();
                let s = slack(&x, i, &sign);
                if s < -tol * scale && pick.is_none_or(|(_, best)| s < best) {
                    pick = Some((i, s));
                }
            }
        }
        let Some((p, _)) = pick else {
            return Ok(QpSolution { x });
        };
        let np: Vec<(usize, T)> = rows[p].coeffs.iter().map(|&(i, v)| (i, v * sign[p])).collect();
        let np_dot = |v: &[T]| np.iter().fold(T::zero(), |acc, &(i, a)| acc + a * v[i]);
        let mut up = T::zero();

        // Step loop for constraint p.
        loop {
            iter += 1;
            if iter > max_iter {
                return Err(QpError::IterationLimit);
            }
            let q = active.len();
            let s_p = np_dot(&x) - rows[p].rhs * sign[p];
            // d = J' n_p
            let d: Vec<T> =
                (0..n).map(|k| np.iter().fold(T::zero(), |acc, &(i, a)| acc + jcol(&jm, k, i) * a)).collect();
            // z = J2 d2
            let mut z = vec![T::zero(); n];
            for k in q..n {
                if d[k] != T::zero() {
                    for i in 0..n {
                        z[i] = z[i] + jcol(&jm, k, i) * d[k];
                    }
                }
            }
            // rv = R^{-1} d1
            let mut rv = vec![T::zero(); q];
            for i in (0..q).rev() {
                let mut s = d[i];
                for k in i + 1..q {
                    s = s - r[i * n + k] * rv[k];
                }
                rv[i] = s / r[i * n + i];
            }
            // n_p lies in the span of the active normals when the part of J'n_p
            // outside the active block is negligible; relative, so G's scale cancels.
            let ztn = np_dot(&z);
            let dd = d.iter().fold(T::zero(), |acc, &v| acc + v * v);
            let z_zero = ztn <= eps * dd;

            let mut t1 = T::infinity();
            let mut drop_at = usize::MAX;
            for (k, &c) in active.iter().enumerate() {
                if rows[c].equality || rv[k] <= T::zero() {
                    continue;
                }
                let ratio = u[k] / rv[k];
                if ratio < t1 {
                    t1 = ratio;
                    drop_at = k;
                }
            }
            let t2 = if z_zero { T::infinity() } else { -s_p / ztn };
            let t = t1.min(t2);

            if !t.is_finite() {
                if rows[p].equality && s_p.abs() <= tol * (T::one() + rows[p].rhs.abs()) {
                    // Redundant equality.
                    skipped[p] = true;
                    break;
                }
                return Err(QpError::Infeasible);
            }
            if z_zero {
                for k in 0..q {
                    u[k] = u[k] - t * rv[k];
                }
                up = up + t;
                drop_constraint(&mut active, &mut u, &mut is_active, &mut r, &mut jm, n, drop_at);
                continue;
            }
            for i in 0..n {
                x[i] = x[i] + t * z[i];
            }
            for k in 0..q {
                u[k] = u[k] - t * rv[k];
            }
            up = up + t;
            if t2 <= t1 {
                add_constraint(&mut jm, &mut r, n, q, d);
                active.push(p);
                u.push(up);
                is_active[p] = true;
                break;
            }
            drop_constraint(&mut active, &mut u, &mut is_active, &mut r, &mut jm, n, drop_at);
        }
    }
}

fn add_constraint<T: Scalar>(jm: &mut [T], r: &mut [T], n: usize, q: usize, mut d: Vec<T>) {
    for j in (q + 1..n).rev() {
        if d[j] == T::zero() {
            continue;
        }
        let h = hypot(d[j - 1], d[j]);
        let (c, s) = (d[j - 1] / h, d[j] / h);
        d[j - 1] = h;
        d[j] = T::zero();
        for i in 0..n {
            let a = jm[i * n + j - 1];
            let b = jm[i * n + j];
            jm[i * n + j - 1] = c * a + s * b;
            jm[i * n + j] = -s * a + c * b;
        }
    }
    for i in 0..=q {
        r[i * n + q] = d[i];
    }
}

fn drop_constraint<T: Scalar>(
    active: &mut Vec<usize>,
    u: &mut Vec<T>,
    is_active: &mut [bool],
    r: &mut [T],
    jm: &mut [T],
    n: usize,
    at: usize,
) {
    let q = active.len();
    is_active[active[at]] = false;
    active.remove(at);
    u.remove(at);
    // Shift columns of R left past `at`.
    for col in at..q - 1 {
        for i in 0..q {
            r[i * n + col] = r[i * n + col + 1];
        }
    }
    for i in 0..q {
        r[i * n + q - 1] = T::zero();
    }
    // Restore triangularity with rotations on rows (k, k+1).
    for k in at..q - 1 {
        let a = r[k * n + k];
        let b = r[(k + 1) * n + k];
        if b == T::zero() {
            continue;
        }
        let h = hypot(a, b);
        let (c, s) = (a / h, b / h);
        for col in k..q - 1 {
            let ra = r[k * n + col];
            let rb = r[(k + 1) * n + col];
            r[k * n + col] = c * ra + s * rb;
            r[(k + 1) * n + col] = -s * ra + c * rb;
        }
        for i in 0..n {
            let ja = jm[i * n + k];
            let jb = jm[i * n + k + 1];
            jm[i * n + k] = c * ja + s * jb;
            jm[i * n + k + 1] = -s * ja + c * jb;
        }
    }
}
