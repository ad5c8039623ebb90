//! Bounds on P(y | do(x)) when the adjustment set splits into an observed part
//! W and a part U known only through its prior P(U).
//!
//! Instances read X, Y and W positionally from the observed table: the first
//! scope variable is the treatment, the second the outcome, and every later
//! variable belongs to W (their configurations are flattened row-major). The
//! prior may likewise span several variables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::diagram::CausalDiagram;
use crate::error::{Error, Result};
use crate::nlp::{solve, Direction, FractionalProgram, RatioTerm, Solution, SolverConfig};
use crate::scalar::Scalar;
use crate::tables::{Interval, JointTable};

#[derive(Debug, Clone, PartialEq)]
pub struct BackdoorInstance<T> {
    pub pxyw: JointTable<T>,
    pub pu: Option<JointTable<T>>,
    /// 0-based (x, y) states.
    pub target: (usize, usize),
    /// Number of U states; equals the prior's size when one is given.
    pub u_states: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontdoorInstance<T> {
    pub pxyw: JointTable<T>,
    pub pu: Option<JointTable<T>>,
    pub px: JointTable<T>,
    pub target: (usize, usize),
    pub u_states: usize,
}

/// Observed quantities shared by both criteria, flattened to plain arrays.
#[derive(Debug, Clone)]
struct Observed<T> {
    xs: usize,
    ws: usize,
    us: usize,
    /// P(x', y, w) for every x' (target y), indexed `[x' * ws + w]`.
    pxyw: Vec<T>,
    /// P(x', w), indexed `[x' * ws + w]`.
    pxw: Vec<T>,
    pw: Vec<T>,
    px: Vec<T>,
    pu: Option<Vec<T>>,
    x: usize,
}

impl<T: Scalar> Observed<T> {
    fn new(pxyw: &JointTable<T>, pu: Option<&JointTable<T>>, target: (usize, usize)) -> Result<Self> {
        let states = pxyw.states();
        if states.len() < 3 {
            return Err(Error::ShapeMismatch("the observed table needs X, Y and at least one W variable".into()));
        }
        check_mass(pxyw)?;
        let (xs, ys) = (states[0], states[1]);
        let ws: usize = states[2..].iter().product();
        let (x, y) = target;
        if x >= xs {
            return Err(Error::StateOutOfRange { node: pxyw.scope()[0].clone(), state: x, states: xs });
        }
        if y >= ys {
            return Err(Error::StateOutOfRange { node: pxyw.scope()[1].clone(), state: y, states: ys });
        }
        let p = pxyw.probs();
        let cell = |xi: usize, yi: usize, w: usize| p[(xi * ys + yi) * ws + w];
        let mut out = Self {
            xs,
            ws,
            us: 1,
            pxyw: vec![T::zero(); xs * ws],
            pxw: vec![T::zero(); xs * ws],
            pw: vec![T::zero(); ws],
            px: vec![T::zero(); xs],
            pu: None,
            x,
        };
        for xi in 0..xs {
            for w in 0..ws {
                out.pxyw[xi * ws + w] = cell(xi, y, w);
                let m: T = (0..ys).map(|yi| cell(xi, yi, w)).sum();
                out.pxw[xi * ws + w] = m;
                out.pw[w] = out.pw[w] + m;
                out.px[xi] = out.px[xi] + m;
            }
        }
        if let Some(pu) = pu {
            check_mass(pu)?;
            if pu.scope().iter().any(|n| pxyw.scope().contains(n)) {
                return Err(Error::Overlap("P(U) shares a variable with P(X,Y,W)".into()));
            }
            out.us = pu.len();
            out.pu = Some(pu.probs().to_vec());
        }
        Ok(out)
    }

    fn with_states(mut self, us: usize) -> Self {
        if self.pu.is_none() {
            self.us = us;
        }
        self
    }

    /// Fréchet box for a joint cell with marginal `p` and prior cell `u`.
    fn frechet(&self, p: T, u: usize) -> (T, T) {
        match &self.pu {
            Some(pu) => ((p + pu[u] - T::one()).max(T::zero()), p.min(pu[u])),
            None => (T::zero(), p),
        }
    }
}

fn check_u_states<T: Scalar>(pu: Option<&JointTable<T>>, n: usize) -> Result<()> {
    if n == 0 || pu.is_some_and(|t| t.len() != n) {
        return Err(Error::InvalidArgument(format!("{n} U states do not match the prior")));
    }
    Ok(())
}

fn check_mass<T: Scalar>(t: &JointTable<T>) -> Result<()> {
    let total = t.total();
    if (total - T::one()).abs() > T::structural_tol() * T::lit(16.0) {
        return Err(Error::InvalidMass(format!("table sums to {total}")));
    }
    Ok(())
}

/// Number of U states assumed when no prior is given, unless set with `with_u_states`.
pub const DEFAULT_UNOBSERVED_STATES: usize = 2;

impl<T: Scalar> BackdoorInstance<T> {
    pub fn new(pxyw: JointTable<T>, pu: Option<JointTable<T>>, target: (usize, usize)) -> Result<Self> {
        let u_states = pu.as_ref().map_or(DEFAULT_UNOBSERVED_STATES, |t| t.len());
        let inst = Self { pxyw, pu, target, u_states };
        inst.observed()?;
        Ok(inst)
    }

    /// Sets the number of U states of a prior-free instance.
    pub fn with_u_states(mut self, n: usize) -> Result<Self> {
        check_u_states(self.pu.as_ref(), n)?;
        self.u_states = n;
        Ok(self)
    }

    fn observed(&self) -> Result<Observed<T>> {
        Observed::new(&self.pxyw, self.pu.as_ref(), self.target)
    }

    pub fn u_states(&self) -> usize {
        self.u_states
    }
}

impl<T: Scalar> FrontdoorInstance<T> {
    pub fn new(
        pxyw: JointTable<T>,
        pu: Option<JointTable<T>>,
        px: JointTable<T>,
        target: (usize, usize),
    ) -> Result<Self> {
        let u_states = pu.as_ref().map_or(DEFAULT_UNOBSERVED_STATES, |t| t.len());
        let inst = Self { pxyw, pu, px, target, u_states };
        inst.observed()?;
        Ok(inst)
    }

    pub fn with_u_states(mut self, n: usize) -> Result<Self> {
        check_u_states(self.pu.as_ref(), n)?;
        self.u_states = n;
        Ok(self)
    }

    /// Builds the instance with P(X) read off the observed table.
    pub fn from_observed(pxyw: JointTable<T>, pu: Option<JointTable<T>>, target: (usize, usize)) -> Result<Self> {
        let x = pxyw.scope()[0].clone();
        let px = pxyw.marginal(&[x])?;
        Self::new(pxyw, pu, px, target)
    }

    fn observed(&self) -> Result<Observed<T>> {
        let o = Observed::new(&self.pxyw, self.pu.as_ref(), self.target)?;
        if self.px.len() != o.xs {
            return Err(Error::ShapeMismatch(format!("P(X) has {} cells, X has {} states", self.px.len(), o.xs)));
        }
        for (a, b) in self.px.probs().iter().zip(&o.px) {
            if (*a - *b).abs() > T::lit(1e-9).max(T::structural_tol()) {
                return Err(Error::InvalidTable(format!("P(X) entry {a} disagrees with the observed marginal {b}")));
            }
        }
        if o.px[o.x] <= T::zero() {
            return Err(Error::Positivity("P(x) = 0".into()));
        }
        for w in 0..o.ws {
            if o.pw[w] > T::zero() && o.pxw[o.x * o.ws + w] <= T::zero() {
                return Err(Error::Positivity(format!("P(x, w) = 0 at W configuration {} while P(w) > 0", w + 1)));
            }
        }
        Ok(o)
    }

    pub fn u_states(&self) -> usize {
        self.u_states
    }
}

/// Either kind of instance; most operations are defined for both.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance<T> {
    Backdoor(BackdoorInstance<T>),
    Frontdoor(FrontdoorInstance<T>),
}

impl<T: Scalar> From<BackdoorInstance<T>> for Instance<T> {
    fn from(i: BackdoorInstance<T>) -> Self {
        Instance::Backdoor(i)
    }
}

impl<T: Scalar> From<FrontdoorInstance<T>> for Instance<T> {
    fn from(i: FrontdoorInstance<T>) -> Self {
        Instance::Frontdoor(i)
    }
}

impl<T: Scalar> Instance<T> {
    fn observed(&self) -> Result<Observed<T>> {
        match self {
            Instance::Backdoor(i) => Ok(i.observed()?.with_states(i.u_states())),
            Instance::Frontdoor(i) => Ok(i.observed()?.with_states(i.u_states())),
        }
    }

    pub fn pxyw(&self) -> &JointTable<T> {
        match self {
            Instance::Backdoor(i) => &i.pxyw,
            Instance::Frontdoor(i) => &i.pxyw,
        }
    }

    pub fn pu(&self) -> Option<&JointTable<T>> {
        match self {
            Instance::Backdoor(i) => i.pu.as_ref(),
            Instance::Frontdoor(i) => i.pu.as_ref(),
        }
    }

    pub fn target(&self) -> (usize, usize) {
        match self {
            Instance::Backdoor(i) => i.target,
            Instance::Frontdoor(i) => i.target,
        }
    }

    pub fn u_states(&self) -> usize {
        match self {
            Instance::Backdoor(i) => i.u_states(),
            Instance::Frontdoor(i) => i.u_states(),
        }
    }

    /// Copy of the instance without the prior (keeping the number of U states).
    pub fn without_prior(&self) -> Instance<T> {
        match self {
            Instance::Backdoor(i) => Instance::Backdoor(BackdoorInstance { pu: None, ..i.clone() }),
            Instance::Frontdoor(i) => Instance::Frontdoor(FrontdoorInstance { pu: None, ..i.clone() }),
        }
    }
}

/// Index of a back-door variable: block 0 = a, 1 = b, 2 = c; W-major, U-minor.
pub fn backdoor_index(block: usize, w: usize, u: usize, ws: usize, us: usize) -> usize {
    block * ws * us + w * us + u
}

/// Index of a front-door variable: block 0 = a, 1 = b; then X, W, U with U fastest.
pub fn frontdoor_index(block: usize, x: usize, w: usize, u: usize, xs: usize, ws: usize, us: usize) -> usize {
    block * xs * ws * us + (x * ws + w) * us + u
}

/// Builds the program with `us` unobserved states; the min and max programs are identical
/// apart from the direction, so a single program is returned.
fn backdoor_program<T: Scalar>(o: &Observed<T>) -> Result<FractionalProgram<T>> {
    let (ws, us) = (o.ws, o.us);
    let idx = |b, w, u| backdoor_index(b, w, u, ws, us);
    let mut p = FractionalProgram::new(3 * ws * us);
    let x = o.x;
    let marg = [o.pxyw[x * ws..(x + 1) * ws].to_vec(), o.pw.clone(), o.pxw[x * ws..(x + 1) * ws].to_vec()];
    for w in 0..ws {
        for (b, m) in marg.iter().enumerate() {
            p.add_eq((0..us).map(|u| (idx(b, w, u), T::one())).collect(), m[w])?;
        }
        for u in 0..us {
            p.add_term(RatioTerm::new(T::one(), vec![idx(0, w, u), idx(1, w, u)], vec![idx(2, w, u)]))?;
            // c <= b and a <= c.
            p.add_le(vec![(idx(2, w, u), T::one()), (idx(1, w, u), -T::one())], T::zero())?;
            p.add_le(vec![(idx(0, w, u), T::one()), (idx(2, w, u), -T::one())], T::zero())?;
            for (b, m) in marg.iter().enumerate() {
                let (lo, hi) = o.frechet(m[w], u);
                p.set_bounds(idx(b, w, u), lo, hi.max(lo))?;
            }
        }
    }
    Ok(p)
}

fn frontdoor_program<T: Scalar>(o: &Observed<T>) -> Result<FractionalProgram<T>> {
    let (xs, ws, us) = (o.xs, o.ws, o.us);
    let idx = |b, x, w, u| frontdoor_index(b, x, w, u, xs, ws, us);
    let mut p = FractionalProgram::new(2 * xs * ws * us);
    let px_target = o.px[o.x];
    for xi in 0..xs {
        for w in 0..ws {
            let k = xi * ws + w;
            p.add_eq((0..us).map(|u| (idx(0, xi, w, u), T::one())).collect(), o.pxyw[k])?;
            p.add_eq((0..us).map(|u| (idx(1, xi, w, u), T::one())).collect(), o.pxw[k])?;
            for u in 0..us {
                p.add_le(vec![(idx(0, xi, w, u), T::one()), (idx(1, xi, w, u), -T::one())], T::zero())?;
                let (lo, hi) = o.frechet(o.pxyw[k], u);
                p.set_bounds(idx(0, xi, w, u), lo, hi.max(lo))?;
                let (lo, hi) = o.frechet(o.pxw[k], u);
                p.set_bounds(idx(1, xi, w, u), lo, hi.max(lo))?;
            }
        }
    }
    for w in 0..ws {
        for u in 0..us {
            for xp in 0..xs {
                let coef = o.px[xp] / px_target;
                let term = if xp == o.x {
                    // b_x * a_x / b_x collapses to a_x.
                    RatioTerm::new(coef, vec![idx(0, xp, w, u)], vec![])
                } else {
                    RatioTerm::new(coef, vec![idx(1, o.x, w, u), idx(0, xp, w, u)], vec![idx(1, xp, w, u)])
                };
                p.add_term(term)?;
            }
        }
    }
    Ok(p)
}

/// The back-door program as a (min, max) pair sharing one feasible set.
pub fn build_backdoor_program<T: Scalar>(
    inst: &BackdoorInstance<T>,
) -> Result<(FractionalProgram<T>, FractionalProgram<T>)> {
    let p = backdoor_program(&inst.observed()?.with_states(inst.u_states()))?;
    Ok((p.clone(), p))
}

/// The front-door program as a (min, max) pair sharing one feasible set.
pub fn build_frontdoor_program<T: Scalar>(
    inst: &FrontdoorInstance<T>,
) -> Result<(FractionalProgram<T>, FractionalProgram<T>)> {
    let p = frontdoor_program(&inst.observed()?.with_states(inst.u_states()))?;
    Ok((p.clone(), p))
}

pub fn build_program<T: Scalar>(inst: &Instance<T>) -> Result<FractionalProgram<T>> {
    let o = inst.observed()?;
    match inst {
        Instance::Backdoor(_) => backdoor_program(&o),
        Instance::Frontdoor(_) => frontdoor_program(&o),
    }
}

/// Product-form feasible point a = P(x,y,w)P(u), b = P(w)P(u), ... built from the prior.
pub fn independence_seed<T: Scalar>(inst: &Instance<T>) -> Result<Vec<T>> {
    let o = inst.observed()?;
    let pu = o.pu.clone().ok_or(Error::MissingPrior)?;
    Ok(split_seed(inst, &o, &pu))
}

/// Heuristic feasible point without a prior: each marginal split evenly over U.
pub fn proportional_seed<T: Scalar>(inst: &Instance<T>) -> Result<Vec<T>> {
    let o = inst.observed()?;
    let share = T::one() / T::from_usize(o.us).expect("state count fits");
    Ok(split_seed(inst, &o, &vec![share; o.us]))
}

fn split_seed<T: Scalar>(inst: &Instance<T>, o: &Observed<T>, weights: &[T]) -> Vec<T> {
    let (xs, ws, us) = (o.xs, o.ws, o.us);
    match inst {
        Instance::Backdoor(_) => {
            let mut v = vec![T::zero(); 3 * ws * us];
            for w in 0..ws {
                for u in 0..us {
                    v[backdoor_index(0, w, u, ws, us)] = o.pxyw[o.x * ws + w] * weights[u];
                    v[backdoor_index(1, w, u, ws, us)] = o.pw[w] * weights[u];
                    v[backdoor_index(2, w, u, ws, us)] = o.pxw[o.x * ws + w] * weights[u];
                }
            }
            v
        }
        Instance::Frontdoor(_) => {
            let mut v = vec![T::zero(); 2 * xs * ws * us];
            for xi in 0..xs {
                for w in 0..ws {
                    for u in 0..us {
                        v[frontdoor_index(0, xi, w, u, xs, ws, us)] = o.pxyw[xi * ws + w] * weights[u];
                        v[frontdoor_index(1, xi, w, u, xs, ws, us)] = o.pxw[xi * ws + w] * weights[u];
                    }
                }
            }
            v
        }
    }
}

/// Random program points induced by full joints P(X,Y,W,U) whose marginals
/// match the observed table and the prior (a uniform-random prior is drawn
/// when none is given). Each joint is a transport plan between the observed
/// cells and the U states, balanced by iterative proportional fitting.
pub fn consistent_joint_seeds<T: Scalar, R: Rng + ?Sized>(
    inst: &Instance<T>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<T>>> {
    let o = inst.observed()?;
    let cells = inst.pxyw().probs();
    let states = inst.pxyw().states();
    let (xs, ys) = (states[0], states[1]);
    let ws = o.ws;
    let us = o.us;
    let (_, y) = inst.target();
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma");
    let mut seeds = Vec::with_capacity(count);
    for _ in 0..count {
        let pu: Vec<f64> = match &o.pu {
            Some(pu) => pu.iter().map(|v| v.as_f64()).collect(),
            None => {
                let g: Vec<f64> = (0..us).map(|_| gamma.sample(rng)).collect();
                let s: f64 = g.iter().sum();
                g.into_iter().map(|v| v / s).collect()
            }
        };
        let rows: Vec<f64> = cells.iter().map(|v| v.as_f64()).collect();
        let plan = transport_plan(&rows, &pu, rng, &gamma);
        // plan[cell * us + u] with cell = (x, y, w) row-major.
        let joint = |xi: usize, yi: usize, w: usize, u: usize| T::lit(plan[((xi * ys + yi) * ws + w) * us + u]);
        let seed = match inst {
            Instance::Backdoor(_) => {
                let mut v = vec![T::zero(); 3 * ws * us];
                for w in 0..ws {
                    for u in 0..us {
                        let pxwu: T = (0..ys).map(|yi| joint(o.x, yi, w, u)).sum();
                        let pwu: T = (0..xs)
                            .flat_map(|xi| (0..ys).map(move |yi| (xi, yi)))
                            .map(|(xi, yi)| joint(xi, yi, w, u))
                            .sum();
                        v[backdoor_index(0, w, u, ws, us)] = joint(o.x, y, w, u);
                        v[backdoor_index(1, w, u, ws, us)] = pwu;
                        v[backdoor_index(2, w, u, ws, us)] = pxwu;
                    }
                }
                v
            }
            Instance::Frontdoor(_) => {
                let mut v = vec![T::zero(); 2 * xs * ws * us];
                for xi in 0..xs {
                    for w in 0..ws {
                        for u in 0..us {
                            v[frontdoor_index(0, xi, w, u, xs, ws, us)] = joint(xi, y, w, u);
                            v[frontdoor_index(1, xi, w, u, xs, ws, us)] = (0..ys).map(|yi| joint(xi, yi, w, u)).sum();
                        }
                    }
                }
                v
            }
        };
        seeds.push(seed);
    }
    Ok(seeds)
}

/// Random nonnegative matrix with the given row and column sums.
fn transport_plan<R: Rng + ?Sized>(rows: &[f64], cols: &[f64], rng: &mut R, gamma: &Gamma<f64>) -> Vec<f64> {
    let (n, m) = (rows.len(), cols.len());
    let mut t: Vec<f64> = (0..n * m).map(|_| gamma.sample(rng) + 1e-12).collect();
    for _ in 0..500 {
        for i in 0..n {
            let s: f64 = t[i * m..(i + 1) * m].iter().sum();
            let f = if s > 0.0 { rows[i] / s } else { 0.0 };
            t[i * m..(i + 1) * m].iter_mut().for_each(|v| *v *= f);
        }
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let s: f64 = (0..n).map(|i| t[i * m + j]).sum();
            worst = worst.max((s - cols[j]).abs());
            let f = if s > 0.0 { cols[j] / s } else { 0.0 };
            (0..n).for_each(|i| t[i * m + j] *= f);
        }
        if worst < 1e-15 {
            break;
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsResult<T> {
    pub interval: Interval<T>,
    pub midpoint: T,
    pub min_solution: Solution<T>,
    pub max_solution: Solution<T>,
    pub seed_value: T,
}

#[derive(Serialize, Deserialize)]
struct BoundsReport {
    lb: f64,
    ub: f64,
    midpoint: f64,
    seed_value: f64,
    restarts_used: usize,
}

impl<T: Scalar> BoundsResult<T> {
    pub fn lb(&self) -> T {
        self.interval.lb
    }

    pub fn ub(&self) -> T {
        self.interval.ub
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BoundsReport {
            lb: self.interval.lb.as_f64(),
            ub: self.interval.ub.as_f64(),
            midpoint: self.midpoint.as_f64(),
            seed_value: self.seed_value.as_f64(),
            restarts_used: self.min_solution.restarts_used,
        })
        .expect("report serializes")
    }
}

/// Consistent-joint seeds added to every solve, next to the independence seed.
pub const JOINT_SEEDS: usize = 4;

/// Solves both directions and returns the interval clamped to [0, 1].
///
/// With `extra_independence`, the diagram must d-separate the W variables from
/// the U variables given nothing; the program then also fixes P(w, u) = P(w)P(u).
pub fn compute_bounds<T: Scalar>(
    inst: &Instance<T>,
    cfg: &SolverConfig<T>,
    extra_independence: Option<&CausalDiagram>,
) -> Result<BoundsResult<T>> {
    let o = inst.observed()?;
    let mut program = build_program(inst)?;
    if let Some(g) = extra_independence {
        let pu = o.pu.as_ref().ok_or(Error::MissingPrior)?;
        let w_names = &inst.pxyw().scope()[2..];
        let u_names = inst.pu().expect("prior checked").scope();
        if !g.d_separated(w_names, u_names, &[] as &[String])? {
            return Err(Error::Criterion("W and U are not d-separated, so P(W,U) = P(W)P(U) cannot be assumed".into()));
        }
        add_independence(&mut program, inst, &o, pu)?;
    }

    let seed = match independence_seed(inst) {
        Ok(s) => s,
        Err(Error::MissingPrior) => proportional_seed(inst)?,
        Err(e) => return Err(e),
    };
    let mut seeds = vec![seed.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x9e37_79b9_7f4a_7c15);
    if extra_independence.is_none() {
        seeds.extend(consistent_joint_seeds(inst, JOINT_SEEDS, &mut rng)?);
    }
    let seed_value = program.objective(&seed, cfg.denominator_floor).max(T::zero()).min(T::one());

    let min_solution = solve(&program, Direction::Min, &seeds, cfg)?;
    let max_solution = solve(&program, Direction::Max, &seeds, cfg)?;
    let lb = min_solution.value.min(seed_value).max(T::zero()).min(T::one());
    let ub = max_solution.value.max(seed_value).max(T::zero()).min(T::one());
    let interval = Interval::clamped(lb, ub);
    Ok(BoundsResult { midpoint: interval.midpoint(), interval, min_solution, max_solution, seed_value })
}

fn add_independence<T: Scalar>(
    p: &mut FractionalProgram<T>,
    inst: &Instance<T>,
    o: &Observed<T>,
    pu: &[T],
) -> Result<()> {
    let (xs, ws, us) = (o.xs, o.ws, o.us);
    for w in 0..ws {
        for u in 0..us {
            let target = o.pw[w] * pu[u];
            match inst {
                Instance::Backdoor(_) => p.add_eq(vec![(backdoor_index(1, w, u, ws, us), T::one())], target)?,
                Instance::Frontdoor(_) => {
                    p.add_eq((0..xs).map(|xi| (frontdoor_index(1, xi, w, u, xs, ws, us), T::one())).collect(), target)?
                }
            }
        }
    }
    Ok(())
}

/// Intersection of several bounds on the same effect: largest lower bound, smallest upper bound.
pub fn ensemble_bounds<T: Scalar>(results: &[BoundsResult<T>]) -> Result<Interval<T>> {
    let intervals: Vec<Interval<T>> = results.iter().map(|r| r.interval).collect();
    ensemble_intervals(&intervals)
}

pub fn ensemble_intervals<T: Scalar>(intervals: &[Interval<T>]) -> Result<Interval<T>> {
    let first = intervals.first().ok_or_else(|| Error::InvalidArgument("no bounds to combine".into()))?;
    let lb = intervals.iter().fold(first.lb, |acc, i| acc.max(i.lb));
    let ub = intervals.iter().fold(first.ub, |acc, i| acc.min(i.ub));
    if lb > ub {
        return Err(Error::EmptyIntersection { lb: lb.as_f64(), ub: ub.as_f64() });
    }
    Interval::new(lb, ub)
}
