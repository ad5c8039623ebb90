//! Shared optimizer checks: finite-difference gradients, grid oracles on
//! low-dimensional feasible sets, determinism and seed dominance. Mismatches panic.

use causal_bounds::bounds::{
    build_program, compute_bounds, consistent_joint_seeds, independence_seed, BackdoorInstance, FrontdoorInstance,
    Instance,
};
use causal_bounds::nlp::{solve, Direction, FractionalProgram, RatioTerm, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{backdoor_case, frontdoor_case};

const DELTA: f64 = 1e-12;

pub fn serial() -> SolverConfig<f64> {
    SolverConfig { parallel: false, ..SolverConfig::default() }
}

/// Random sum of ratios over `n` variables whose denominators are drawn from `dens`.
pub fn random_terms<R: Rng>(rng: &mut R, p: &mut FractionalProgram<f64>, n: usize, dens: &[usize]) {
    for _ in 0..rng.random_range(2..=4) {
        let coef = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let num: Vec<usize> = (0..rng.random_range(1..=2)).map(|_| rng.random_range(0..n)).collect();
        let den = if rng.random::<f64>() < 0.8 { vec![dens[rng.random_range(0..dens.len())]] } else { vec![] };
        p.add_term(RatioTerm::new(coef, num, den)).unwrap();
    }
}

pub fn fd_gradient(p: &FractionalProgram<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * x[i].abs().max(1e-2);
            y[i] = x[i] + h;
            let up = p.objective(&y, DELTA);
            y[i] = x[i] - h;
            let down = p.objective(&y, DELTA);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest componentwise gap relative to the largest gradient component.
pub fn gradient_error(p: &FractionalProgram<f64>, x: &[f64]) -> f64 {
    let g = p.gradient(x, DELTA);
    let fd = fd_gradient(p, x);
    let scale = fd.iter().fold(1e-12_f64, |m, v| m.max(v.abs()));
    g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

pub fn interior_point<R: Rng>(rng: &mut R, p: &FractionalProgram<f64>) -> Vec<f64> {
    (0..p.var_count())
        .map(|i| {
            let (lo, hi) = (p.lower()[i], p.upper()[i]);
            lo + (hi - lo) * rng.random_range(0.05..0.95)
        })
        .collect()
}

pub fn check_family(name: &str, programs: &[FractionalProgram<f64>], rng: &mut ChaCha8Rng) {
    for k in 0..100 {
        let p = &programs[k % programs.len()];
        let x = interior_point(rng, p);
        let err = gradient_error(p, &x);
        assert!(err <= 1e-5, "{name} point {k}: relative gradient error {err:e}");
    }
}

/// Ten back-door programs from random binary instances.
pub fn backdoor_programs(seed: u64) -> Vec<FractionalProgram<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..10)
        .map(|_| {
            let c = backdoor_case(&mut rng);
            build_program(&BackdoorInstance::new(c.pxyw, Some(c.pu), (0, 0)).unwrap().into()).unwrap()
        })
        .collect()
}

/// Ten front-door programs from random binary instances.
pub fn frontdoor_programs(seed: u64) -> Vec<FractionalProgram<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..10)
        .map(|_| {
            let c = frontdoor_case(&mut rng);
            build_program(&FrontdoorInstance::from_observed(c.pxyw, Some(c.pu), (0, 0)).unwrap().into()).unwrap()
        })
        .collect()
}

/// Twenty unconstrained sums of ratios over six variables.
pub fn generic_programs(seed: u64) -> Vec<FractionalProgram<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20)
        .map(|_| {
            let mut p = FractionalProgram::new(6);
            random_terms(&mut rng, &mut p, 6, &[0, 1, 2, 3, 4, 5]);
            p
        })
        .collect()
}

/// A program whose feasible set is the image of [0,1]^d under an affine map:
/// variables 0..d are the free parameters, the rest are pinned to
/// `a_i + sum_k b_ik t_k` by equalities.
pub struct Affine {
    program: FractionalProgram<f64>,
    a: Vec<f64>,
    b: Vec<Vec<f64>>,
}

impl Affine {
    pub fn random<R: Rng>(rng: &mut R, d: usize, extra: usize) -> Self {
        let n = d + extra;
        let mut program = FractionalProgram::new(n);
        let spread = 0.3 / d as f64;
        let a: Vec<f64> = (0..extra).map(|_| rng.random_range(0.4..0.6)).collect();
        let b: Vec<Vec<f64>> =
            (0..extra).map(|_| (0..d).map(|_| rng.random_range(-spread..spread)).collect()).collect();
        for i in 0..extra {
            let mut row: Vec<(usize, f64)> = vec![(d + i, 1.0)];
            row.extend((0..d).map(|k| (k, -b[i][k])));
            program.add_eq(row, a[i]).unwrap();
        }
        let dens: Vec<usize> = (d..n).collect();
        random_terms(rng, &mut program, n, &dens);
        Self { program, a, b }
    }

    pub fn point(&self, t: &[f64]) -> Vec<f64> {
        let mut x = t.to_vec();
        x.extend(self.a.iter().zip(&self.b).map(|(a, row)| a + row.iter().zip(t).map(|(b, t)| b * t).sum::<f64>()));
        x
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        self.program.objective(&self.point(t), DELTA)
    }
}

/// Best value over a 1-D grid of step 1e-6.
pub fn grid_1d(f: &Affine, sign: f64) -> f64 {
    (0..=1_000_000).map(|i| sign * f.value(&[i as f64 * 1e-6])).fold(f64::INFINITY, f64::min) * sign
}

/// Best value over [0,1]^2: a 1e-3 grid, then repeated zooms around the best few cells.
pub fn grid_2d(f: &Affine, sign: f64) -> f64 {
    let n = 1000;
    let mut cells: Vec<(f64, f64, f64)> = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            let t = [i as f64 / n as f64, j as f64 / n as f64];
            cells.push((sign * f.value(&t), t[0], t[1]));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = cells[0].0;
    for &(_, t0, t1) in cells.iter().take(10) {
        let (mut c0, mut c1, mut h) = (t0, t1, 1.0 / n as f64);
        for _ in 0..8 {
            let mut local = (f64::INFINITY, c0, c1);
            for i in -10..=10 {
                for j in -10..=10 {
                    let t = [(c0 + i as f64 * h / 5.0).clamp(0.0, 1.0), (c1 + j as f64 * h / 5.0).clamp(0.0, 1.0)];
                    let v = sign * f.value(&t);
                    if v < local.0 {
                        local = (v, t[0], t[1]);
                    }
                }
            }
            (c0, c1, h) = (local.1, local.2, h / 5.0);
            best = best.min(local.0);
        }
    }
    sign * best
}

pub fn check_against_grid(d: usize, cases: usize, seed: u64, grid: fn(&Affine, f64) -> f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let f = Affine::random(&mut rng, d, 3);
        let seeds = vec![f.point(&vec![0.5; d])];
        for (dir, sign) in [(Direction::Min, 1.0), (Direction::Max, -1.0)] {
            let s = solve(&f.program, dir, &seeds, &serial()).unwrap();
            let oracle = grid(&f, sign);
            assert!(s.feasible, "case {case} {dir:?}: infeasible");
            assert!((s.value - oracle).abs() <= 1e-6, "case {case} {dir:?}: solver {} grid {oracle}", s.value);
        }
    }
}

/// Programs of both families, each with the independence seed and three consistent-joint seeds.
pub fn programs_with_seeds(rng: &mut ChaCha8Rng) -> Vec<(FractionalProgram<f64>, Vec<Vec<f64>>)> {
    let mut out = Vec::new();
    for _ in 0..5 {
        let c = backdoor_case(rng);
        let b: Instance<f64> = BackdoorInstance::new(c.pxyw, Some(c.pu), (0, 0)).unwrap().into();
        let c = frontdoor_case(rng);
        let f: Instance<f64> = FrontdoorInstance::from_observed(c.pxyw, Some(c.pu), (0, 0)).unwrap().into();
        for inst in [b, f] {
            let mut seeds = vec![independence_seed(&inst).unwrap()];
            seeds.extend(consistent_joint_seeds(&inst, 3, rng).unwrap());
            out.push((build_program(&inst).unwrap(), seeds));
        }
    }
    out
}

/// Parallel and serial solves return identical solutions, and so does a repeat.
pub fn check_determinism(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let par = SolverConfig { parallel: true, rng_seed: 5, ..SolverConfig::default() };
    let ser = SolverConfig { parallel: false, ..par.clone() };
    for (p, seeds) in programs_with_seeds(&mut rng) {
        for dir in [Direction::Min, Direction::Max] {
            let a = solve(&p, dir, &seeds, &par).unwrap();
            let b = solve(&p, dir, &seeds, &ser).unwrap();
            let c = solve(&p, dir, &seeds, &ser).unwrap();
            assert_eq!(a, b);
            assert_eq!(b, c);
        }
    }
    let c = backdoor_case(&mut rng);
    let inst: Instance<f64> = BackdoorInstance::new(c.pxyw, Some(c.pu), (0, 0)).unwrap().into();
    assert_eq!(compute_bounds(&inst, &par, None).unwrap(), compute_bounds(&inst, &ser, None).unwrap());
}
