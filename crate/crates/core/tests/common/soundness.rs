//! Consistent-joint sweeps: every joint that reproduces the observed tables
//! must yield an effect inside the computed interval.

use causal_bounds::bounds::{compute_bounds, BackdoorInstance, FrontdoorInstance, Instance};
use causal_bounds::SolverConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{backdoor_case, backdoor_effect, consistent_joint, frontdoor_case, frontdoor_effect};

pub const DRAWS: usize = 10_000;
pub const SLACK: f64 = 1e-6;

fn config() -> SolverConfig {
    SolverConfig { parallel: false, ..SolverConfig::default() }
}

/// Largest excursion of a sampled effect outside [lb, ub] (0 when all inside).
fn worst_excursion(
    lb: f64,
    ub: f64,
    rows: &[f64],
    cols: &[f64],
    effect: fn(&[f64]) -> f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..DRAWS {
        let j = consistent_joint(rng, rows, cols);
        let e = effect(&j);
        worst = worst.max(lb - e).max(e - ub);
    }
    worst
}

/// Runs `cases` back-door instances; panics on the first one that a sampled
/// joint escapes. Returns the largest excursion seen.
pub fn backdoor_sweep(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut overall: f64 = 0.0;
    for case_id in 0..cases {
        let case = backdoor_case(&mut rng);
        let inst: Instance<f64> =
            BackdoorInstance::new(case.pxyw.clone(), Some(case.pu.clone()), (0, 0)).unwrap().into();
        let r = compute_bounds(&inst, &config(), None).unwrap();
        assert!(r.lb() <= case.truth + SLACK && case.truth <= r.ub() + SLACK, "case {case_id}: truth outside");
        let worst = worst_excursion(r.lb(), r.ub(), case.pxyw.probs(), case.pu.probs(), backdoor_effect, &mut rng);
        assert!(
            worst <= SLACK,
            "back-door case {case_id}: a consistent joint lies {worst:e} outside [{}, {}]",
            r.lb(),
            r.ub()
        );
        overall = overall.max(worst);
    }
    overall
}

/// Front-door counterpart of [`backdoor_sweep`].
pub fn frontdoor_sweep(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut overall: f64 = 0.0;
    for case_id in 0..cases {
        let case = frontdoor_case(&mut rng);
        let inst: Instance<f64> =
            FrontdoorInstance::from_observed(case.pxyw.clone(), Some(case.pu.clone()), (0, 0)).unwrap().into();
        let r = compute_bounds(&inst, &config(), None).unwrap();
        assert!(r.lb() <= case.truth + SLACK && case.truth <= r.ub() + SLACK, "case {case_id}: truth outside");
        let worst = worst_excursion(r.lb(), r.ub(), case.pxyw.probs(), case.pu.probs(), frontdoor_effect, &mut rng);
        assert!(
            worst <= SLACK,
            "front-door case {case_id}: a consistent joint lies {worst:e} outside [{}, {}]",
            r.lb(),
            r.ub()
        );
        overall = overall.max(worst);
    }
    overall
}
