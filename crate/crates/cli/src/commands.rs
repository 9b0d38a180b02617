//! One runner per subcommand. Each reads a resolved [`Settings`] and writes
//! its artifacts into the output directory.

use std::path::Path;
use std::sync::Arc;

use log::info;
use serde::Serialize;

use rosenau::elliptic::{self, EllipticCase, EllipticCaseParams, Eval};
use rosenau::io;
use rosenau::petviashvili::{self, PetviashviliConfig, SolitaryProfile};
use rosenau::solver::{Rosenau, SolverOptions};
use rosenau::spectral::{Field, Grid};
use rosenau::validation::{self, CollisionConfig, IdentityReport};

use crate::error::CliError;
use crate::settings::{CommandKind, Settings};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(kind: CommandKind, s: &Settings) -> Result<()> {
    match kind {
        CommandKind::Solve => solve(s),
        CommandKind::Profile => profile(s),
        CommandKind::Exact => exact(s),
        CommandKind::CheckIdentities => check_identities(s),
        CommandKind::ConvergeTime => converge_time(s),
        CommandKind::ConvergeSpace => converge_space(s),
        CommandKind::Collide => collide(s),
    }
}

fn wrote(dir: &Path, name: &str) {
    println!("wrote {}", dir.join(name).display());
}

fn grid(s: &Settings) -> Result<Arc<Grid>> {
    Ok(Grid::new(s.a.unwrap(), s.b.unwrap(), s.n.unwrap())?)
}

/// Reads the seed profile and interpolates it onto `grid`.
fn load_seed(path: &Path, grid: &Arc<Grid>) -> Result<Field> {
    let seed = io::read_profile_csv(path)?;
    if (seed.grid().a() - grid.a()).abs() > 1e-9 || (seed.grid().b() - grid.b()).abs() > 1e-9 {
        return Err(CliError::Config(format!(
            "seed profile {} spans [{}, {}] but the run domain is [{}, {}]; pass matching --a and --b",
            path.display(),
            seed.grid().a(),
            seed.grid().b(),
            grid.a(),
            grid.b()
        )));
    }
    Ok(seed.resample(grid)?)
}

fn solve_profile(s: &Settings, grid: Arc<Grid>) -> Result<SolitaryProfile> {
    let mut cfg = PetviashviliConfig::new(grid.clone(), s.c.unwrap(), s.p.unwrap())?;
    cfg.nu = s.nu.unwrap();
    cfg.tol_error = s.tol_error.unwrap();
    cfg.tol_factor = s.tol_factor.unwrap();
    cfg.tol_residual = s.tol_residual.unwrap();
    cfg.max_iters = s.max_iters.unwrap();
    if let Some(path) = &s.seed_profile_path {
        cfg.initial_guess = load_seed(path, &grid)?;
    }
    cfg.validate()?;
    let profile = petviashvili::solve_profile(&cfg)?;
    info!(
        "profile c = {} p = {} converged in {} iterations",
        profile.c, profile.p, profile.iterations
    );
    Ok(profile)
}

fn write_profile(dir: &Path, profile: &SolitaryProfile) -> Result<()> {
    io::write_profile_csv(&dir.join("profile.csv"), &profile.q)?;
    wrote(dir, "profile.csv");
    io::write_json(&dir.join("profile.json"), &io::ProfileSidecar::new(profile))?;
    wrote(dir, "profile.json");
    io::write_history_csv(&dir.join("history.csv"), &profile.history)?;
    wrote(dir, "history.csv");
    Ok(())
}

#[derive(Serialize)]
struct RunSummary {
    t_final: f64,
    steps: usize,
    dt: f64,
    snapshots: usize,
    energy_initial: f64,
    energy_final: f64,
    max_energy_drift: f64,
    max_abs_final: f64,
}

fn solve(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let grid = grid(s)?;
    let mid = 0.5 * (grid.a() + grid.b());
    let u0 = match s.initial.as_deref().unwrap() {
        "profile" => {
            let profile = solve_profile(s, grid)?;
            write_profile(dir, &profile)?;
            profile.q
        }
        "gaussian" => {
            let (amp, w) = (s.amplitude.unwrap(), s.width.unwrap());
            Field::from_fn(grid, |x| amp * (-((x - mid) / w).powi(2)).exp())?
        }
        "zero" => Field::zeros(grid),
        _ => load_seed(s.seed_profile_path.as_deref().unwrap(), &grid)?,
    };
    let options = SolverOptions { dealias: s.dealias.unwrap(), ..SolverOptions::default() };
    let solver = Rosenau::with_options(s.p.unwrap(), options)?;
    let (t_final, steps) = (s.t_final.unwrap(), s.m.unwrap());
    let record = solver.evolve(&u0, t_final, steps, s.snapshot_stride.unwrap())?;
    io::write_snapshots_csv(&dir.join("snapshots.csv"), &record)?;
    wrote(dir, "snapshots.csv");
    io::write_energy_csv(&dir.join("energy.csv"), &record)?;
    wrote(dir, "energy.csv");
    let summary = RunSummary {
        t_final,
        steps,
        dt: t_final / steps as f64,
        snapshots: record.snapshots.len(),
        energy_initial: record.energy_series[0],
        energy_final: *record.energy_series.last().unwrap(),
        max_energy_drift: record.max_energy_drift(),
        max_abs_final: record.final_field().max_abs(),
    };
    io::write_json(&dir.join("summary.json"), &summary)?;
    wrote(dir, "summary.json");
    println!("max energy drift {:.3e}", summary.max_energy_drift);
    Ok(())
}

fn profile(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let profile = solve_profile(s, grid(s)?)?;
    write_profile(dir, &profile)?;
    let last = profile.final_record();
    println!(
        "converged in {} iterations: error {:.3e}, |1-M| {:.3e}, residual {:.3e}",
        profile.iterations, last.error, last.factor_error, last.residual
    );
    Ok(())
}

#[derive(Serialize)]
struct ExactParams<'a> {
    #[serde(flatten)]
    params: &'a EllipticCaseParams,
    period: Option<f64>,
    poles_in_period: Vec<f64>,
    time: f64,
}

fn exact(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let case: EllipticCase = s.case.as_deref().unwrap().parse()?;
    let params = elliptic::derive_case_params(
        case,
        s.c.unwrap(),
        s.k.unwrap(),
        s.c2.unwrap(),
        s.c4.unwrap(),
        s.xi0.unwrap(),
    )?
    .with_epsilon(s.epsilon.unwrap())?;
    let (x_min, x_max, samples) = (s.x_min.unwrap(), s.x_max.unwrap(), s.samples.unwrap());
    if !(x_min < x_max) || samples < 2 {
        return Err(CliError::Config(format!(
            "need x_min < x_max and at least 2 samples, got [{x_min}, {x_max}] with {samples}"
        )));
    }
    let t = s.time.unwrap();
    let h = (x_max - x_min) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples).map(|i| x_min + i as f64 * h).collect();
    let values: Vec<Eval> = xs.iter().map(|&x| elliptic::evaluate_solution(&params, x, t)).collect();
    io::write_curve_csv(&dir.join("exact.csv"), &xs, &values)?;
    wrote(dir, "exact.csv");
    let sidecar = ExactParams {
        params: &params,
        period: params.period(),
        poles_in_period: params.poles_in_period(),
        time: t,
    };
    io::write_json(&dir.join("params.json"), &sidecar)?;
    wrote(dir, "params.json");
    let poles = values.iter().filter(|v| v.is_pole()).count();
    println!("case {case}: {samples} samples, {poles} at poles");
    Ok(())
}

#[derive(Serialize)]
struct IdentitySummary<'a> {
    c: f64,
    p: f64,
    identities: &'a [IdentityReport; 3],
}

fn check_identities(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let profile = solve_profile(s, grid(s)?)?;
    write_profile(dir, &profile)?;
    let reports = validation::check_identities(&profile)?;
    io::write_json(
        &dir.join("identities.json"),
        &IdentitySummary { c: profile.c, p: profile.p, identities: &reports },
    )?;
    wrote(dir, "identities.json");
    for r in &reports {
        println!("{:?}: lhs {:.12e} rhs {:.12e} relative gap {:.3e}", r.identity, r.lhs, r.rhs, r.rel_gap);
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    c: f64,
    p: f64,
    t_final: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_ref: Option<usize>,
    table: &'a validation::ConvergenceTable,
    fitted_order: Option<f64>,
}

fn converge_time(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let profile = solve_profile(s, grid(s)?)?;
    let m_list = s.m_list.clone().unwrap();
    let table = validation::temporal_convergence(&profile.q, s.p.unwrap(), s.t_final.unwrap(), &m_list, s.m_ref.unwrap())?;
    io::write_convergence_csv(&dir.join("convergence_time.csv"), &table)?;
    wrote(dir, "convergence_time.csv");
    let summary = ConvergenceSummary {
        c: profile.c,
        p: profile.p,
        t_final: s.t_final.unwrap(),
        n: s.n.unwrap(),
        m: None,
        m_ref: s.m_ref,
        table: &table,
        fitted_order: table.fitted_order(),
    };
    io::write_json(&dir.join("convergence_time.json"), &summary)?;
    wrote(dir, "convergence_time.json");
    print_table(&table, "M");
    Ok(())
}

fn converge_space(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let profile = solve_profile(s, grid(s)?)?;
    let n_list = s.n_list.clone().unwrap();
    if n_list.last().is_some_and(|&n| n >= s.n.unwrap()) {
        return Err(CliError::Config(format!(
            "n_list must stay below the reference N = {}; raise --N or shorten --n-list",
            s.n.unwrap()
        )));
    }
    let table = validation::spatial_convergence(&profile.q, s.p.unwrap(), s.t_final.unwrap(), &n_list, s.m.unwrap())?;
    io::write_convergence_csv(&dir.join("convergence_space.csv"), &table)?;
    wrote(dir, "convergence_space.csv");
    let summary = ConvergenceSummary {
        c: profile.c,
        p: profile.p,
        t_final: s.t_final.unwrap(),
        n: s.n.unwrap(),
        m: s.m,
        m_ref: None,
        table: &table,
        fitted_order: None,
    };
    io::write_json(&dir.join("convergence_space.json"), &summary)?;
    wrote(dir, "convergence_space.json");
    print_table(&table, "N");
    Ok(())
}

fn print_table(table: &validation::ConvergenceTable, label: &str) {
    for r in &table.rows {
        match r.observed_order {
            Some(q) => println!("{label} = {:>6}  error {:.3e}  order {q:.3}", r.resolution, r.error),
            None => println!("{label} = {:>6}  error {:.3e}", r.resolution, r.error),
        }
    }
}

#[derive(Serialize)]
struct CollisionOutput<'a> {
    config: &'a CollisionConfig,
    #[serde(flatten)]
    summary: &'a validation::CollisionSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement: Option<validation::TailRefinement>,
}

fn collide(s: &Settings) -> Result<()> {
    let dir = s.output_dir();
    let cfg = CollisionConfig {
        a: s.a.unwrap(),
        b: s.b.unwrap(),
        n: s.n.unwrap(),
        m: s.m.unwrap(),
        t_final: s.t_final.unwrap(),
        p: s.p.unwrap(),
        c1: s.c1.unwrap(),
        c2: s.c2.unwrap(),
        x1: s.x1.unwrap(),
        x2: s.x2.unwrap(),
        snapshot_stride: s.snapshot_stride.unwrap(),
        track_stride: s.track_stride.unwrap(),
    };
    let setup = validation::collision_setup(&cfg)?;
    let report = validation::collision_from_setup(&cfg, &setup)?;
    io::write_snapshots_csv(&dir.join("snapshots.csv"), &report.record)?;
    wrote(dir, "snapshots.csv");
    io::write_energy_csv(&dir.join("energy.csv"), &report.record)?;
    wrote(dir, "energy.csv");
    io::write_records_csv(&dir.join("peaks.csv"), &report.peaks)?;
    wrote(dir, "peaks.csv");
    let refinement = match &s.m_list {
        Some(steps) if s.refine_tail == Some(true) => Some(validation::tail_refinement(&cfg, &setup, steps)?),
        _ => None,
    };
    let summary = &report.summary;
    io::write_json(
        &dir.join("tail.json"),
        &CollisionOutput { config: &cfg, summary, refinement: refinement.clone() },
    )?;
    wrote(dir, "tail.json");
    match summary.crossover_time {
        Some(t) => println!("crossover at t = {t:.3}"),
        None => println!("no crossover detected"),
    }
    println!(
        "tail max |u| in [{:.1}, {:.1}]: {:.3e}",
        summary.tail.window.0, summary.tail.window.1, summary.tail.max_abs
    );
    if let Some(r) = refinement.and_then(|r| r.ratio) {
        println!("tail refinement ratio {r:.2}");
    }
    Ok(())
}
