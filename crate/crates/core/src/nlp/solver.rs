//! Multi-start feasible SQP for sum-of-ratios programs.
//!
//! Every iterate satisfies the linear constraints, so the merit function of
//! the line search reduces to the objective itself. Steps come from a QP with
//! a damped BFGS model; when that model misbehaves the Hessian is reset to a
//! scaled identity, which turns the step into a projected-gradient step.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hitrun::{walk, NullSpace};
use super::program::{Direction, FractionalProgram};
use super::qp::{solve_qp, Row};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct SolverConfig<T> {
    /// Random feasible starts per independent block, on top of the seeds.
    pub restarts: usize,
    pub max_iterations: usize,
    pub constraint_tol: T,
    pub step_tol: T,
    pub denominator_floor: T,
    pub rng_seed: u64,
    /// Run starts on the rayon pool. Results do not depend on this flag.
    pub parallel: bool,
    /// Hit-and-run moves applied to each random start.
    pub walk_steps: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iterations: 200,
            // Single precision cannot resolve the f64 tolerances; widen to ~100 ulps.
            constraint_tol: T::lit(1e-8).max(T::epsilon() * T::lit(100.0)),
            step_tol: T::lit(1e-9).max(T::epsilon() * T::lit(10.0)),
            denominator_floor: T::lit(1e-12),
            rng_seed: 0,
            parallel: true,
            walk_steps: 20,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        for (name, v) in [
            ("constraint_tol", self.constraint_tol),
            ("step_tol", self.step_tol),
            ("denominator_floor", self.denominator_floor),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Solution<T> {
    pub point: Vec<T>,
    pub value: T,
    pub feasible: bool,
    pub kkt_residual: T,
    /// Random restarts run per block (seeds are not counted).
    pub restarts_used: usize,
    /// Total SQP iterations over all starts and blocks.
    pub iterations: usize,
}

/// Best local optimum over the seeds and `cfg.restarts` random feasible starts.
pub fn solve<T: Scalar>(
    p: &FractionalProgram<T>,
    direction: Direction,
    seeds: &[Vec<T>],
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>> {
    cfg.validate()?;
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let n = p.var_count();
    for s in seeds {
        if s.len() != n {
            return Err(Error::ShapeMismatch(format!("seed has {} entries, program has {n} variables", s.len())));
        }
        let outside =
            (0..n).any(|i| s[i] < p.lower()[i] - cfg.constraint_tol || s[i] > p.upper()[i] + cfg.constraint_tol);
        if outside || s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("seed violates the box bounds".into()));
        }
    }

    let mut point = vec![T::zero(); n];
    let mut iterations = 0;
    let mut all_failed = true;
    for (b, vars) in p.independent_blocks().iter().enumerate() {
        let sub = p.restrict(vars);
        let local_seeds: Vec<Vec<T>> = seeds.iter().map(|s| vars.iter().map(|&v| s[v]).collect()).collect();
        let block = solve_block(&sub, direction, &local_seeds, cfg, b as u64)?;
        iterations += block.iterations;
        all_failed &= block.failed;
        for (k, &v) in vars.iter().enumerate() {
            point[v] = block.x[k];
        }
    }
    for i in 0..n {
        point[i] = point[i].max(p.lower()[i]).min(p.upper()[i]);
    }
    let value = p.objective(&point, cfg.denominator_floor);
    let feasibility = p.check_feasibility(&point, cfg.constraint_tol);
    if all_failed && n > 0 {
        return Err(Error::Nonconvergence);
    }
    Ok(Solution {
        kkt_residual: kkt_residual(p, &point, direction, cfg),
        point,
        value,
        feasible: feasibility.feasible,
        restarts_used: cfg.restarts,
        iterations,
    })
}

/// Infinity norm of `P(x - g / max(1, |g|)) - x`, the projected-gradient step
/// at `x` (with `g` the gradient of the minimized function). Zero at a KKT point.
pub fn kkt_residual<T: Scalar>(p: &FractionalProgram<T>, x: &[T], direction: Direction, cfg: &SolverConfig<T>) -> T {
    let sign = sign_of(direction);
    let mut g: Vec<T> = p.gradient(x, cfg.denominator_floor).into_iter().map(|v| v * sign).collect();
    let scale = g.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    g.iter_mut().for_each(|v| *v = *v / scale);
    let rows = constraint_rows(p);
    let shifted = shift_rows(&rows, x);
    match solve_qp(&identity(p.var_count()), &g, &shifted, qp_tol::<T>()) {
        Ok(d) => d.x.iter().fold(T::zero(), |acc, v| acc.max(v.abs())),
        Err(_) => T::infinity(),
    }
}

fn sign_of<T: Scalar>(direction: Direction) -> T {
    match direction {
        Direction::Min => T::one(),
        Direction::Max => -T::one(),
    }
}

fn qp_tol<T: Scalar>() -> T {
    T::epsilon() * T::lit(64.0)
}

fn identity<T: Scalar>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

/// All constraints of `p` as `coeffs . x >= rhs` (or `=`) rows.
fn constraint_rows<T: Scalar>(p: &FractionalProgram<T>) -> Vec<Row<T>> {
    let mut rows = Vec::new();
    for c in p.eq_constraints() {
        rows.push(Row { coeffs: c.coeffs.clone(), rhs: c.rhs, equality: true });
    }
    for c in p.ineq_constraints() {
        rows.push(Row { coeffs: c.coeffs.iter().map(|&(i, a)| (i, -a)).collect(), rhs: -c.rhs, equality: false });
    }
    for i in 0..p.var_count() {
        if p.upper()[i] - p.lower()[i] <= T::epsilon() {
            rows.push(Row { coeffs: vec![(i, T::one())], rhs: p.lower()[i], equality: true });
            continue;
        }
        rows.push(Row { coeffs: vec![(i, T::one())], rhs: p.lower()[i], equality: false });
        rows.push(Row { coeffs: vec![(i, -T::one())], rhs: -p.upper()[i], equality: false });
    }
    rows
}

/// Largest violation of `rows` at `d`.
fn step_violation<T: Scalar>(rows: &[Row<T>], d: &[T]) -> T {
    rows.iter().fold(T::zero(), |acc, r| {
        let e = r.eval(d) - r.rhs;
        acc.max(if r.equality { e.abs() } else { (-e).max(T::zero()) })
    })
}

/// Rows in terms of a step `d` from `x`.
fn shift_rows<T: Scalar>(rows: &[Row<T>], x: &[T]) -> Vec<Row<T>> {
    rows.iter().map(|r| Row { coeffs: r.coeffs.clone(), rhs: r.rhs - r.eval(x), equality: r.equality }).collect()
}

/// Euclidean projection of `x0` onto the feasible polytope.
fn project<T: Scalar>(p: &FractionalProgram<T>, rows: &[Row<T>], x0: &[T], tol: T) -> Result<Vec<T>> {
    let a: Vec<T> = x0.iter().map(|&v| -v).collect();
    let mut x = match solve_qp(&identity(p.var_count()), &a, rows, qp_tol::<T>()) {
        Ok(s) => s.x,
        Err(_) => return Err(Error::Infeasible(f64::INFINITY)),
    };
    for i in 0..x.len() {
        x[i] = x[i].max(p.lower()[i]).min(p.upper()[i]);
    }
    let violation = p.max_violation(&x);
    if violation > tol {
        return Err(Error::Infeasible(violation.as_f64()));
    }
    Ok(x)
}

struct BlockResult<T> {
    x: Vec<T>,
    iterations: usize,
    failed: bool,
}

struct LocalResult<T> {
    x: Vec<T>,
    f: T,
    iterations: usize,
    failed: bool,
}

/// Deterministic stream for random start `r` of block `b`.
fn start_rng(seed: u64, block: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block.wrapping_mul(1 << 20).wrapping_add(r));
    rng
}

fn solve_block<T: Scalar>(
    p: &FractionalProgram<T>,
    direction: Direction,
    seeds: &[Vec<T>],
    cfg: &SolverConfig<T>,
    block: u64,
) -> Result<BlockResult<T>> {
    let rows = constraint_rows(p);
    let first = project(p, &rows, &seeds[0], cfg.constraint_tol)?;
    if p.terms().is_empty() {
        return Ok(BlockResult { x: first, iterations: 0, failed: false });
    }
    let null = NullSpace::new(p);
    let sign = sign_of::<T>(direction);

    let seed_starts = seeds.len();
    let run = |k: usize| -> Option<LocalResult<T>> {
        let x0 = if k == 0 {
            first.clone()
        } else if k < seed_starts {
            project(p, &rows, &seeds[k], cfg.constraint_tol).ok()?
        } else {
            let r = k - seed_starts;
            let mut rng = start_rng(cfg.rng_seed, block, r as u64);
            // Even starts: a uniform box point, projected and mixed by a walk.
            // Odd starts: a far point in a random direction, projected, which
            // lands near a random vertex where extreme optima tend to sit.
            let corner = r % 2 == 1;
            let raw: Vec<T> = (0..p.var_count())
                .map(|i| {
                    let u: f64 = if corner { 0.5 + 1e3 * rng.sample::<f64, _>(StandardNormal) } else { rng.random() };
                    p.lower()[i] + (p.upper()[i] - p.lower()[i]) * T::lit(u)
                })
                .collect();
            let mut x = project(p, &rows, &raw, cfg.constraint_tol).ok()?;
            if !corner {
                walk(p, &null, &mut x, cfg.walk_steps, &mut rng);
            }
            x
        };
        Some(local_sqp(p, &rows, x0, sign, cfg))
    };
    let total = seed_starts + cfg.restarts;
    let results: Vec<Option<LocalResult<T>>> =
        if cfg.parallel { (0..total).into_par_iter().map(run).collect() } else { (0..total).map(run).collect() };

    let iterations = results.iter().flatten().map(|r| r.iterations).sum();
    let failed = results.iter().flatten().all(|r| r.failed);
    let best = results
        .into_iter()
        .flatten()
        .filter(|r| r.f.is_finite() && p.max_violation(&r.x) <= cfg.constraint_tol)
        .min_by(|a, b| compare(a.f, &a.x, b.f, &b.x))
        .map(|r| r.x)
        .unwrap_or(first);
    Ok(BlockResult { x: best, iterations, failed })
}

/// Orders by value, then lexicographically by point.
fn compare<T: Scalar>(fa: T, xa: &[T], fb: T, xb: &[T]) -> Ordering {
    fa.partial_cmp(&fb).unwrap_or(Ordering::Equal).then_with(|| {
        xa.iter()
            .zip(xb)
            .map(|(a, b)| a.partial_cmp(b).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// Feasible SQP from a feasible `x`, minimizing `sign * objective`.
fn local_sqp<T: Scalar>(
    p: &FractionalProgram<T>,
    rows: &[Row<T>],
    mut x: Vec<T>,
    sign: T,
    cfg: &SolverConfig<T>,
) -> LocalResult<T> {
    let n = x.len();
    let delta = cfg.denominator_floor;
    let eval = |x: &[T]| sign * p.objective(x, delta);
    let grad = |x: &[T]| -> Vec<T> { p.gradient(x, delta).into_iter().map(|v| v * sign).collect() };
    let width = (0..n).fold(T::lit(1e-12), |acc, i| acc.max(p.upper()[i] - p.lower()[i]));

    let mut f = eval(&x);
    let mut g = grad(&x);
    let fresh = |g: &[T]| {
        let scale = g.iter().fold(T::lit(1e-8), |acc, v| acc.max(v.abs())) / width;
        let mut b = identity::<T>(n);
        b.iter_mut().for_each(|v| *v = *v * scale);
        b
    };
    let mut hess = fresh(&g);
    let mut is_fresh = true;
    let mut iterations = 0;
    let mut failed = false;
    let mut stalls = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            failed = true;
            break;
        }
        let shifted = shift_rows(rows, &x);
        let d = match solve_qp(&hess, &g, &shifted, qp_tol::<T>()) {
            Ok(s) => s.x,
            Err(_) if !is_fresh => {
                hess = fresh(&g);
                is_fresh = true;
                continue;
            }
            Err(_) => {
                failed = iterations == 1;
                break;
            }
        };
        // An ill-conditioned Hessian can leave the QP step slightly outside
        // the polytope; repair it by projecting x + d back.
        let mut d = d;
        if step_violation(&shifted, &d) > cfg.constraint_tol * T::lit(1e-2) {
            let target: Vec<T> = (0..n).map(|i| x[i] + d[i]).collect();
            match project(p, rows, &target, cfg.constraint_tol) {
                Ok(xp) => d = (0..n).map(|i| xp[i] - x[i]).collect(),
                Err(_) => {
                    failed = iterations == 1;
                    break;
                }
            }
        }
        let step_norm = d.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if step_norm <= cfg.step_tol {
            break;
        }
        let slope = d.iter().zip(&g).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        if !(slope < T::zero()) {
            if is_fresh {
                break;
            }
            hess = fresh(&g);
            is_fresh = true;
            continue;
        }

        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<T> = (0..n).map(|i| (x[i] + alpha * d[i]).max(p.lower()[i]).min(p.upper()[i])).collect();
            let ft = eval(&trial);
            if ft <= f + T::lit(1e-4) * alpha * slope && p.max_violation(&trial) <= cfg.constraint_tol {
                accepted = Some((trial, ft));
                break;
            }
            alpha = alpha * T::lit(0.5);
        }
        let Some((x_new, f_new)) = accepted else {
            if is_fresh {
                failed = iterations == 1;
                break;
            }
            hess = fresh(&g);
            is_fresh = true;
            continue;
        };

        let g_new = grad(&x_new);
        let s: Vec<T> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<T> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let moved = s.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let improvement = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if moved <= cfg.step_tol {
            break;
        }
        if improvement <= T::epsilon() * T::lit(16.0) * (T::one() + f.abs()) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        if damped_bfgs(&mut hess, &s, &y) {
            is_fresh = false;
        } else {
            hess = fresh(&g);
            is_fresh = true;
        }
    }
    LocalResult { x, f, iterations, failed }
}

/// Powell-damped BFGS update of the row-major matrix `b`. Returns false when
/// the update is numerically unusable.
fn damped_bfgs<T: Scalar>(b: &mut [T], s: &[T], y: &[T]) -> bool {
    let n = s.len();
    let bs: Vec<T> = (0..n).map(|i| (0..n).fold(T::zero(), |acc, j| acc + b[i * n + j] * s[j])).collect();
    let sbs = s.iter().zip(&bs).fold(T::zero(), |acc, (&a, &c)| acc + a * c);
    let sy = s.iter().zip(y).fold(T::zero(), |acc, (&a, &c)| acc + a * c);
    if !(sbs > T::zero()) || !sbs.is_finite() || !sy.is_finite() {
        return false;
    }
    let theta = if sy >= T::lit(0.2) * sbs { T::one() } else { T::lit(0.8) * sbs / (sbs - sy) };
    let r: Vec<T> = (0..n).map(|i| theta * y[i] + (T::one() - theta) * bs[i]).collect();
    let sr = s.iter().zip(&r).fold(T::zero(), |acc, (&a, &c)| acc + a * c);
    if !(sr > T::zero()) || !sr.is_finite() {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = b[i * n + j] + r[i] * r[j] / sr - bs[i] * bs[j] / sbs;
        }
    }
    b.iter().all(|v| v.is_finite())
}
