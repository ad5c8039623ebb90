//! Checks shared between the unit tests and the acceptance run: the four-state
//! worked example, collapse under a one-state prior and the study sample sizes.

use causal_bounds::bounds::{compute_bounds, BackdoorInstance, FrontdoorInstance, Instance};
use causal_bounds::reduce::{make_equivalent_tuple, verify_equivalence, FactorOrder, Observations, ReduceOptions};
use causal_bounds::tables::{required_sample_size, CptSet, SAMPLES_PER_STATE};
use causal_bounds::{CausalDiagram, JointTable, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{adjust_w, backdoor_oracle, cond, fixture, frontdoor_w, prob, random_row};

/// Factors the four-state Z of the worked example with p = 2 (u-major) and
/// compares every entry of the resulting binary tables. Returns the effect.
pub fn check_four_state_example() -> f64 {
    let g = CausalDiagram::from_json(&fixture("four_state/model.json")).unwrap();
    let cpts: CptSet<f64> = CptSet::from_json(&fixture("four_state/cpts.json")).unwrap();
    let data = Observations::Cpts(cpts.cpts);
    let opts = ReduceOptions { order: FactorOrder::UMajor, ..Default::default() };
    let t = make_equivalent_tuple(&g, &data, "X", "Y", "Z", 2, &opts).unwrap();
    let j = &t.joint;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    // State 0 is the unprimed value (u, w, x, y); state 1 the primed one.
    assert!(close(prob(j, &[("U", 0)]), 0.5));
    assert!(close(cond(j, &[("W", 0)], &[("U", 0)]), 0.6));
    assert!(close(cond(j, &[("W", 0)], &[("U", 1)]), 0.4));
    for ((u, w), px) in [((0, 0), 0.1), ((0, 1), 0.4), ((1, 0), 0.5), ((1, 1), 0.7)] {
        assert!(close(cond(j, &[("X", 0)], &[("U", u), ("W", w)]), px), "P(x|{u},{w})");
    }
    let py = [
        ((0, 0, 0), 0.2),
        ((1, 0, 0), 0.3),
        ((0, 0, 1), 0.7),
        ((1, 0, 1), 0.1),
        ((0, 1, 0), 0.6),
        ((1, 1, 0), 0.5),
        ((0, 1, 1), 0.5),
        ((1, 1, 1), 0.4),
    ];
    for ((x, u, w), p) in py {
        assert!(close(cond(j, &[("Y", 0)], &[("X", x), ("U", u), ("W", w)]), p), "P(y|{x},{u},{w})");
    }
    let original = backdoor_oracle(&data.joint(&g).unwrap(), &["Z"]);
    let transformed = backdoor_oracle(j, &["W", "U"]);
    assert!(close(original, 0.47) && close(transformed, 0.47), "{original} {transformed}");
    let report = verify_equivalence(&g, &data, &t, 0, 0, &["Z".to_string()]).unwrap();
    assert!(report.passed && report.difference <= 1e-12);
    let edges: Vec<(&str, &str)> = t.g_prime.edges().map(|(a, b)| (t.g_prime.name(a), t.g_prime.name(b))).collect();
    for e in [("U", "W"), ("U", "X"), ("W", "X"), ("U", "Y"), ("W", "Y"), ("X", "Y")] {
        assert!(edges.contains(&e), "missing {e:?}");
    }
    assert_eq!(edges.len(), 6);
    transformed
}

fn serial() -> SolverConfig {
    SolverConfig { parallel: false, ..SolverConfig::default() }
}

fn trivial_prior() -> JointTable {
    JointTable::new(vec!["U"], vec![1], vec![1.0]).unwrap()
}

/// Random back-door tables with |W| in {2, 3} and a one-state U: the interval
/// must shrink to the adjustment over W. Returns the widest interval seen.
pub fn backdoor_collapse(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut widest: f64 = 0.0;
    for ws in [2, 3] {
        for _ in 0..cases {
            let probs = random_row(&mut rng, 4 * ws);
            let pxyw = JointTable::new(vec!["X", "Y", "W"], vec![2, 2, ws], probs.clone()).unwrap();
            let inst: Instance<f64> = BackdoorInstance::new(pxyw, Some(trivial_prior()), (0, 0)).unwrap().into();
            let r = compute_bounds(&inst, &serial(), None).unwrap();
            let expected = adjust_w(&probs, ws);
            assert!(r.ub() - r.lb() <= 1e-9, "width {:e}", r.ub() - r.lb());
            assert!(
                (r.lb() - expected).abs() <= 1e-9 && (r.ub() - expected).abs() <= 1e-9,
                "{:?} vs {expected}",
                r.interval
            );
            widest = widest.max(r.ub() - r.lb());
        }
    }
    widest
}

/// The front-door counterpart of [`backdoor_collapse`] with binary W.
pub fn frontdoor_collapse(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut widest: f64 = 0.0;
    for _ in 0..cases {
        let probs = random_row(&mut rng, 8);
        let pxyw = JointTable::new(vec!["X", "Y", "W"], vec![2, 2, 2], probs.clone()).unwrap();
        let inst: Instance<f64> = FrontdoorInstance::from_observed(pxyw, Some(trivial_prior()), (0, 0)).unwrap().into();
        let r = compute_bounds(&inst, &serial(), None).unwrap();
        let expected = frontdoor_w(&probs, 2);
        assert!(r.ub() - r.lb() <= 1e-9, "width {:e}", r.ub() - r.lb());
        assert!((r.midpoint - expected).abs() <= 1e-9, "{:?} vs {expected}", r.interval);
        widest = widest.max(r.ub() - r.lb());
    }
    widest
}

/// Sample sizes for a 256-state Z observed directly, as 16 x 16 and as 8 x 32.
pub fn sample_sizes() -> [usize; 3] {
    let n = SAMPLES_PER_STATE;
    [
        required_sample_size(&[vec![2, 2, 256]], n),
        required_sample_size(&[vec![2, 2, 16], vec![16]], n),
        required_sample_size(&[vec![2, 2, 8], vec![32]], n),
    ]
}
