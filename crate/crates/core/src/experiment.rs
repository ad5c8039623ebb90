//! Simulation studies: draw random models, compute the true effect, the
//! Tian-Pearl bounds and the partially observed bounds, and summarize gaps
//! and coverage over many samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{compute_bounds, BackdoorInstance, FrontdoorInstance, Instance};
use crate::diagram::CausalDiagram;
use crate::error::{Error, Result};
use crate::nlp::SolverConfig;
use crate::reduce::{make_equivalent_tuple, Criterion, FactorOrder, Observations, ReduceOptions};
use crate::tables::{generate_cpts_with, joint_from_cpts, tian_pearl_from_table, JointTable, Sampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Binary X, Y, W, U with U -> W, {U, W} -> X and {U, W, X} -> Y.
    BackdoorSim,
    /// Binary X, Y and a many-state Z confounder, reduced to W x U before bounding.
    HighdimSim,
    /// A user-supplied diagram; see [`CustomScenario`].
    Custom,
}

/// Diagram and roles for the custom scenario. `observed` and `unobserved`
/// together form the adjustment set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomScenario {
    pub model: CausalDiagram,
    pub x: String,
    pub y: String,
    pub observed: Vec<String>,
    pub unobserved: Vec<String>,
}

fn default_z_states() -> usize {
    256
}

fn default_p() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub sample_count: usize,
    #[serde(default = "default_z_states")]
    pub z_states: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig<f64>,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub custom: Option<CustomScenario>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, sample_count: usize, seed: u64) -> Self {
        Self {
            scenario,
            sample_count,
            z_states: default_z_states(),
            p: default_p(),
            seed,
            solver: SolverConfig::default(),
            sampler: Sampler::Uniform,
            output: None,
            custom: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
        }
        self.solver.validate()?;
        self.sampler.check()?;
        match self.scenario {
            Scenario::HighdimSim if self.p == 0 || self.p > self.z_states => {
                Err(Error::InvalidArgument(format!("p = {} must lie in 1..={}", self.p, self.z_states)))
            }
            Scenario::Custom if self.custom.is_none() => {
                Err(Error::InvalidArgument("the custom scenario needs a `custom` section".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_id: usize,
    pub true_effect: f64,
    pub tp_lb: f64,
    pub tp_ub: f64,
    pub tp_mid: f64,
    pub our_lb: Option<f64>,
    pub our_ub: Option<f64>,
    pub our_mid: Option<f64>,
    /// `ok`, or the error that stopped the bound computation.
    pub status: String,
}

impl SampleRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn covered(&self, slack: f64) -> bool {
        match (self.our_lb, self.our_ub) {
            (Some(lb), Some(ub)) => self.true_effect >= lb - slack && self.true_effect <= ub + slack,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub samples: usize,
    pub failures: usize,
    pub avg_tp_gap: f64,
    /// Mean over rows whose bounds were computed.
    pub avg_our_gap: f64,
    /// Fraction of all rows whose interval contains the true effect (within 1e-6); failed rows count as misses.
    pub coverage: f64,
    pub tp_mid_mae: f64,
    pub our_mid_mae: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<SampleRow>,
    pub summary: Summary,
}

pub const COVERAGE_SLACK: f64 = 1e-6;

/// Runs every sample; samples run on the rayon pool, each with its own RNG
/// stream, so the output depends only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let setup = Setup::new(cfg)?;
    let rows: Vec<SampleRow> =
        (0..cfg.sample_count).into_par_iter().map(|id| setup.run_sample(cfg, id)).collect::<Result<_>>()?;
    let summary = summarize(cfg.scenario, &rows);
    Ok(ExperimentOutput { rows, summary })
}

pub fn summarize(scenario: Scenario, rows: &[SampleRow]) -> Summary {
    let n = rows.len().max(1) as f64;
    let ok: Vec<&SampleRow> = rows.iter().filter(|r| r.ok()).collect();
    let k = ok.len().max(1) as f64;
    Summary {
        scenario,
        samples: rows.len(),
        failures: rows.len() - ok.len(),
        avg_tp_gap: rows.iter().map(|r| r.tp_ub - r.tp_lb).sum::<f64>() / n,
        avg_our_gap: ok.iter().map(|r| r.our_ub.unwrap_or(0.0) - r.our_lb.unwrap_or(0.0)).sum::<f64>() / k,
        coverage: rows.iter().filter(|r| r.covered(COVERAGE_SLACK)).count() as f64 / n,
        tp_mid_mae: rows.iter().map(|r| (r.tp_mid - r.true_effect).abs()).sum::<f64>() / n,
        our_mid_mae: ok.iter().map(|r| (r.our_mid.unwrap_or(0.0) - r.true_effect).abs()).sum::<f64>() / k,
    }
}

/// Per-scenario fixed structure.
struct Setup {
    model: CausalDiagram,
    x: String,
    y: String,
    observed: Vec<String>,
    unobserved: Vec<String>,
    criterion: Criterion,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let s = |v: &[&str]| v.iter().map(|n| n.to_string()).collect::<Vec<_>>();
        let setup = match cfg.scenario {
            Scenario::BackdoorSim => Setup {
                model: CausalDiagram::new(
                    &[("U", 2), ("W", 2), ("X", 2), ("Y", 2)],
                    &[("U", "W"), ("U", "X"), ("W", "X"), ("U", "Y"), ("W", "Y"), ("X", "Y")],
                )?,
                x: "X".into(),
                y: "Y".into(),
                observed: s(&["W"]),
                unobserved: s(&["U"]),
                criterion: Criterion::Backdoor,
            },
            Scenario::HighdimSim => Setup {
                model: CausalDiagram::new(
                    &[("Z", cfg.z_states), ("X", 2), ("Y", 2)],
                    &[("Z", "X"), ("Z", "Y"), ("X", "Y")],
                )?,
                x: "X".into(),
                y: "Y".into(),
                observed: vec![],
                unobserved: vec![],
                criterion: Criterion::Backdoor,
            },
            Scenario::Custom => {
                let c = cfg.custom.clone().expect("validated");
                let mut q = c.observed.clone();
                q.extend(c.unobserved.iter().cloned());
                if c.unobserved.is_empty() {
                    return Err(Error::InvalidArgument(
                        "the custom scenario needs at least one unobserved variable".into(),
                    ));
                }
                let criterion = Criterion::detect(&c.model, &q, &c.x, &c.y)?
                    .ok_or_else(|| Error::Criterion("the custom adjustment set satisfies neither criterion".into()))?;
                Setup { model: c.model, x: c.x, y: c.y, observed: c.observed, unobserved: c.unobserved, criterion }
            }
        };
        Ok(setup)
    }

    fn run_sample(&self, cfg: &ExperimentConfig, id: usize) -> Result<SampleRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(id as u64);
        let cpts = generate_cpts_with::<f64, _>(&self.model, &cfg.sampler, &mut rng);
        let joint = joint_from_cpts(&self.model, &cpts)?;
        let (x, y) = ((self.x.as_str(), 0), (self.y.as_str(), 0));

        let tp = tian_pearl_from_table(&joint, x, y)?;
        let (truth, instance) = match cfg.scenario {
            Scenario::HighdimSim => {
                let truth = Criterion::Backdoor.effect(&joint, x, y, &["Z"])?;
                let opts = ReduceOptions { order: FactorOrder::WMajor, ..ReduceOptions::default() };
                let tuple =
                    make_equivalent_tuple(&self.model, &Observations::Joint(joint), "X", "Y", "Z", cfg.p, &opts)?;
                let inst: Instance<f64> = BackdoorInstance::new(tuple.pxyw, Some(tuple.pu), (0, 0))?.into();
                (truth, Ok(inst))
            }
            _ => {
                let mut q = self.observed.clone();
                q.extend(self.unobserved.iter().cloned());
                let truth = self.criterion.effect(&joint, x, y, &q)?;
                let mut obs = vec![self.x.clone(), self.y.clone()];
                obs.extend(self.observed.iter().cloned());
                let pxyw = joint.marginal(&obs)?;
                let pu = joint.marginal(&self.unobserved)?;
                (truth, self.instance(pxyw, pu))
            }
        };
        let solver = SolverConfig {
            rng_seed: cfg.seed ^ (id as u64).wrapping_mul(0x2545_f491_4f6c_dd1d),
            parallel: false,
            ..cfg.solver.clone()
        };
        let bounds = instance.and_then(|inst| compute_bounds(&inst, &solver, None));
        let mut row = SampleRow {
            sample_id: id,
            true_effect: truth,
            tp_lb: tp.lb,
            tp_ub: tp.ub,
            tp_mid: tp.midpoint(),
            our_lb: None,
            our_ub: None,
            our_mid: None,
            status: "ok".into(),
        };
        match bounds {
            Ok(b) => {
                row.our_lb = Some(b.lb());
                row.our_ub = Some(b.ub());
                row.our_mid = Some(b.midpoint);
            }
            Err(e) => row.status = e.to_string(),
        }
        Ok(row)
    }

    fn instance(&self, pxyw: JointTable<f64>, pu: JointTable<f64>) -> Result<Instance<f64>> {
        Ok(match self.criterion {
            Criterion::Backdoor => BackdoorInstance::new(pxyw, Some(pu), (0, 0))?.into(),
            Criterion::Frontdoor => FrontdoorInstance::from_observed(pxyw, Some(pu), (0, 0))?.into(),
        })
    }
}
