use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use causal_bounds::bounds::{compute_bounds, BackdoorInstance, FrontdoorInstance, Instance};
use causal_bounds::experiment::{run_experiment, ExperimentConfig, SampleRow};
use causal_bounds::reduce::{make_equivalent_tuple, suggest_p, verify_equivalence, Criterion, ReduceOptions};
use causal_bounds::tables::{required_sample_size, tian_pearl_from_table, CptSet, SAMPLES_PER_STATE};
use causal_bounds::{CausalDiagram, Error, Solution, SolverConfig};
use serde::Serialize;

use crate::error::CliError;
use crate::files::{load_model, load_observations, read_json, write_json, write_text, BoundsData};
use crate::{AdjustArgs, BoundsArgs, CriterionArg, DsepArgs, Global, ReduceArgs, SampleSizeArgs, SimulateArgs};

fn solver_config(g: &Global) -> SolverConfig {
    let mut cfg = SolverConfig { rng_seed: g.seed.unwrap_or(0), ..SolverConfig::default() };
    if let Some(r) = g.restarts {
        cfg.restarts = r;
    }
    cfg
}

/// 1-based CLI states to 0-based.
fn zero_based(target: &[usize]) -> Result<(usize, usize), CliError> {
    match target {
        [x, y] if *x >= 1 && *y >= 1 => Ok((x - 1, y - 1)),
        _ => Err(CliError::Usage("--target takes two 1-based states".into())),
    }
}

fn check_criterion(
    g: &CausalDiagram,
    set: &[String],
    x: &str,
    y: &str,
    wanted: Option<CriterionArg>,
) -> Result<Criterion, CliError> {
    let list = set.join(", ");
    match wanted {
        Some(c) => {
            let c = Criterion::from(c);
            let ok = match c {
                Criterion::Backdoor => g.satisfies_backdoor(set, x, y)?,
                Criterion::Frontdoor => g.satisfies_frontdoor(set, x, y)?,
            };
            if ok {
                Ok(c)
            } else {
                Err(Error::Criterion(format!("{{{list}}} does not satisfy the {c:?} criterion for ({x}, {y})")).into())
            }
        }
        None => Criterion::detect(g, set, x, y)?
            .ok_or_else(|| Error::Criterion(format!("{{{list}}} satisfies neither criterion for ({x}, {y})")).into()),
    }
}

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::Backdoor => "back-door",
        Criterion::Frontdoor => "front-door",
    }
}

#[derive(Serialize)]
struct Span {
    lb: f64,
    ub: f64,
}

#[derive(Serialize)]
struct SolveStats {
    value: f64,
    feasible: bool,
    kkt_residual: f64,
    restarts_used: usize,
    iterations: usize,
}

impl From<&Solution> for SolveStats {
    fn from(s: &Solution) -> Self {
        Self {
            value: s.value,
            feasible: s.feasible,
            kkt_residual: s.kkt_residual,
            restarts_used: s.restarts_used,
            iterations: s.iterations,
        }
    }
}

#[derive(Serialize)]
struct Diagnostics {
    min: SolveStats,
    max: SolveStats,
    seconds: f64,
}

#[derive(Serialize)]
struct BoundsReport {
    criterion: Criterion,
    x: String,
    y: String,
    x_state: usize,
    y_state: usize,
    adjustment: Vec<String>,
    unobserved: Vec<String>,
    prior: bool,
    tian_pearl: Span,
    proposed: Span,
    midpoint: f64,
    seed_value: f64,
    diagnostics: Diagnostics,
}

pub fn bounds(g: &Global, a: &BoundsArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let data: BoundsData = read_json(&a.data)?;
    let scope = data.observed.scope().to_vec();
    if scope.len() < 3 {
        return Err(CliError::Usage(
            "the observed table must list X, Y and then the observed adjustment variables".into(),
        ));
    }
    for (name, &states) in scope.iter().zip(data.observed.states()) {
        let declared = model.states_of(name)?;
        if declared != states {
            return Err(Error::ShapeMismatch(format!(
                "`{name}` has {declared} states in the model, {states} in the data"
            ))
            .into());
        }
    }
    let (x, y) = (scope[0].clone(), scope[1].clone());
    let observed_adj = scope[2..].to_vec();

    let unobserved: Vec<String> = if !data.unobserved.is_empty() {
        data.unobserved.clone()
    } else if let Some(p) = &data.prior {
        p.scope().to_vec()
    } else {
        model.nodes().iter().map(|n| n.name.clone()).filter(|n| !scope.contains(n)).collect()
    };
    if let Some(p) = &data.prior {
        if p.scope() != unobserved.as_slice() {
            return Err(CliError::Usage("`unobserved` must match the scope of `prior`".into()));
        }
    }
    let u_states: usize = unobserved.iter().map(|u| model.states_of(u)).product::<Result<usize, Error>>()?;

    let mut adjustment = observed_adj.clone();
    adjustment.extend(unobserved.iter().cloned());
    let criterion = check_criterion(&model, &adjustment, &x, &y, a.criterion)?;

    let target = zero_based(&a.target)?;
    let prior = if a.no_prior { None } else { data.prior.clone() };
    let has_prior = prior.is_some();
    let inst: Instance<f64> = match criterion {
        Criterion::Backdoor => {
            BackdoorInstance::new(data.observed.clone(), prior, target)?.with_u_states(u_states)?.into()
        }
        Criterion::Frontdoor => {
            FrontdoorInstance::from_observed(data.observed.clone(), prior, target)?.with_u_states(u_states)?.into()
        }
    };

    let cfg = solver_config(g);
    let start = Instant::now();
    let result = compute_bounds(&inst, &cfg, a.extra_independence.then_some(&model))?;
    let seconds = start.elapsed().as_secs_f64();
    let tp = tian_pearl_from_table(&data.observed, (&x, target.0), (&y, target.1))?;

    let report = BoundsReport {
        criterion,
        x: x.clone(),
        y: y.clone(),
        x_state: a.target[0],
        y_state: a.target[1],
        adjustment: adjustment.clone(),
        unobserved: unobserved.clone(),
        prior: has_prior,
        tian_pearl: Span { lb: tp.lb, ub: tp.ub },
        proposed: Span { lb: result.lb(), ub: result.ub() },
        midpoint: result.midpoint,
        seed_value: result.seed_value,
        diagnostics: Diagnostics { min: (&result.min_solution).into(), max: (&result.max_solution).into(), seconds },
    };

    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "effect       P({y}={} | do({x}={}))", a.target[1], a.target[0]);
    let _ = writeln!(
        out,
        "criterion    {} over {{{}}}, unobserved {{{}}}{}",
        criterion_name(criterion),
        adjustment.join(", "),
        unobserved.join(", "),
        if has_prior { "" } else { " (no prior)" }
    );
    let _ = writeln!(out, "tian-pearl   [{:.4}, {:.4}]  width {:.4}", tp.lb, tp.ub, tp.width());
    let _ =
        writeln!(out, "proposed     [{:.4}, {:.4}]  width {:.4}", result.lb(), result.ub(), result.interval.width());
    let _ = writeln!(out, "midpoint     {:.4}", result.midpoint);
    let _ = writeln!(out, "seed value   {:.4}", result.seed_value);
    if g.verbose {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report.diagnostics).expect("serializes"));
    }
    if let Some(path) = &g.out {
        write_json(path, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Skipped {
    skipped: String,
}

pub fn reduce(g: &Global, a: &ReduceArgs) -> Result<(), CliError> {
    let dir = g
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("reduce writes a directory of artifacts; pass --out DIR".into()))?;
    let model = load_model(&a.model)?;
    let data = load_observations(&a.data)?;
    let m = model.states_of(&a.z)?;
    let xy = model.states_of(&a.x)? * model.states_of(&a.y)?;
    let p = match (a.p, a.samples) {
        (Some(p), _) => p,
        (None, Some(n)) => suggest_p(m, xy, n)
            .ok_or_else(|| CliError::Usage(format!("{n} samples cannot support any factorization of `{}`", a.z)))?,
        (None, None) => return Err(CliError::Usage("give --p, or --samples to pick p from the sample size".into())),
    };
    if p == 0 || p > m {
        return Err(CliError::Usage(format!("--p {p} must lie in 1..={m}, the number of states of `{}`", a.z)));
    }
    let adjustment = if a.adjustment.is_empty() { vec![a.z.clone()] } else { a.adjustment.clone() };
    let opts = ReduceOptions {
        order: a.order.into(),
        w_name: a.w_name.clone(),
        u_name: a.u_name.clone(),
        adjustment: Some(adjustment.clone()),
    };
    let tuple = make_equivalent_tuple(&model, &data, &a.x, &a.y, &a.z, p, &opts)?;

    write_json(&dir.join("g_prime.json"), &tuple.g_prime)?;
    write_json(&dir.join("mapping.json"), &tuple.mapping)?;
    let observed = BoundsData {
        observed: tuple.pxyw.clone(),
        prior: Some(tuple.pu.clone()),
        unobserved: tuple.unobserved.clone(),
    };
    write_json(&dir.join("observed.json"), &observed)?;
    write_json(&dir.join("cpts.json"), &CptSet { cpts: tuple.cpts()? })?;

    let mut out = std::io::stdout().lock();
    let map = &tuple.mapping;
    let _ = writeln!(
        out,
        "{} ({} states) -> {} ({} states) x {} ({} states){}, {} criterion",
        map.z_name,
        map.m,
        map.w_name,
        map.p,
        map.u_name,
        map.q,
        if map.padded { ", padded" } else { "" },
        criterion_name(tuple.criterion)
    );
    let target = zero_based(&a.target)?;
    match verify_equivalence(&model, &data, &tuple, target.0, target.1, &adjustment) {
        Ok(rep) => {
            write_json(&dir.join("equivalence.json"), &rep)?;
            let _ = writeln!(
                out,
                "equivalence  original {:.6}, transformed {:.6}, difference {:.1e} ({})",
                rep.original,
                rep.transformed,
                rep.difference,
                if rep.passed { "passed" } else { "FAILED" }
            );
            let _ = writeln!(out, "wrote        {}", dir.display());
            if !rep.passed {
                return Err(CliError::Usage("the transformed tuple does not reproduce the effect".into()));
            }
            Ok(())
        }
        Err(e @ Error::Scale { .. }) => {
            write_json(&dir.join("equivalence.json"), &Skipped { skipped: e.to_string() })?;
            let _ = writeln!(out, "equivalence  skipped: {e}");
            let _ = writeln!(out, "wrote        {}", dir.display());
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn simulate(g: &Global, a: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg: ExperimentConfig = read_json(&a.config)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(r) = g.restarts {
        cfg.solver.restarts = r;
    }
    if let Some(n) = a.samples {
        cfg.sample_count = n;
    }
    cfg.validate()?;
    let csv_path: Option<PathBuf> = g.out.clone().or_else(|| cfg.output.clone().map(PathBuf::from));

    let start = Instant::now();
    let output = run_experiment(&cfg)?;
    let seconds = start.elapsed().as_secs_f64();

    let csv_text = rows_to_csv(&output.rows)?;
    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serializes");
    match &csv_path {
        Some(path) => {
            write_text(path, &csv_text)?;
            write_text(&summary_path(path), &format!("{summary}\n"))?;
            println!("{summary}");
        }
        None => {
            print!("{csv_text}");
            eprintln!("{summary}");
        }
    }
    if g.verbose {
        eprintln!("{} samples in {seconds:.2} s", output.rows.len());
    }
    match output.summary.failures {
        0 => Ok(()),
        n => Err(CliError::FailedSamples(n)),
    }
}

pub fn rows_to_csv(rows: &[SampleRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// `results.csv` -> `results.summary.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary.json")
}

pub fn dsep(a: &DsepArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let separated = model.d_separated(&a.a, &a.b, &a.given)?;
    println!("{separated}");
    Ok(())
}

pub fn adjust(g: &Global, a: &AdjustArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let joint = load_observations(&a.data)?.joint(&model)?;
    let criterion = check_criterion(&model, &a.set, &a.x, &a.y, a.criterion)?;
    let (tx, ty) = zero_based(&a.target)?;
    let effect = criterion.effect(&joint, (&a.x, tx), (&a.y, ty), &a.set)?;
    let tp = tian_pearl_from_table(&joint, (&a.x, tx), (&a.y, ty))?;
    println!("effect       {effect:.6}  ({} over {{{}}})", criterion_name(criterion), a.set.join(", "));
    println!("tian-pearl   [{:.4}, {:.4}]", tp.lb, tp.ub);
    if let Some(path) = &g.out {
        #[derive(Serialize)]
        struct AdjustReport {
            criterion: Criterion,
            effect: f64,
            tian_pearl: Span,
        }
        write_json(path, &AdjustReport { criterion, effect, tian_pearl: Span { lb: tp.lb, ub: tp.ub } })?;
    }
    Ok(())
}

pub fn samplesize(a: &SampleSizeArgs) -> Result<(), CliError> {
    let per = a.per_state.unwrap_or(SAMPLES_PER_STATE);
    let mut printed = false;
    if !a.table.is_empty() {
        let tables = a
            .table
            .iter()
            .map(|t| {
                t.split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Usage(format!("--table `{t}` must be comma-separated state counts")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        println!("{}", required_sample_size(&tables, per));
        printed = true;
    }
    if let Some(m) = a.z_states {
        if let Some(p) = a.p {
            if p == 0 || p > m {
                return Err(CliError::Usage(format!("--p {p} must lie in 1..={m}")));
            }
            let q = m.div_ceil(p);
            println!("{}", required_sample_size(&[vec![a.xy, p], vec![q]], per));
            printed = true;
        }
        if let Some(n) = a.samples {
            match suggest_p(m, a.xy, n) {
                Some(p) => println!("p = {p}"),
                None => println!("no p fits {n} samples"),
            }
            printed = true;
        }
        if !printed {
            println!("{}", required_sample_size(&[vec![a.xy, m]], per));
            printed = true;
        }
    }
    if !printed {
        return Err(CliError::Usage("give --table, or --z-states with --p or --samples".into()));
    }
    Ok(())
}
