//! Command-line front end: `simulate`, `darkcheck` and `scan`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::basis;
use crate::config::{Rate, RunConfig};
use crate::darkstate::{check_nullity, NullityCheck};
use crate::error::{Error, Result};
use crate::hamiltonian::{self, assemble_hnh, CouplingModel};
use crate::io;
use crate::parallel::{map_ordered, Execution};
use crate::params::SystemParams;
use crate::pulses::{ratio_diagnostics, PulseValues, DEFAULT_RATIO_EPSILON};
use crate::scan::{best_point, run_scan, ScanSpec};
use crate::simulation::{build_model, run, schedule_for, Scenario};

/// Relative nullity bound reported by `darkcheck`.
pub const NULLITY_BOUND: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "bimode-stirap", version, about = "STIRAP and fractional STIRAP of two atoms in a bi-mode cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one scenario and write the metrics CSV and metadata JSON.
    Simulate(RunArgs),
    /// Check that the analytic dark state spans part of the kernel of H0.
    Darkcheck(DarkcheckArgs),
    /// Evaluate a parameter grid described by a JSON spec.
    Scan(ScanArgs),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// JSON config (a metadata file from a previous run is accepted).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    /// Pulse width unit.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Pulse delay, in units of tau.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Cavity decay: `0.005`/`0.005g` (units of g) or `0.025w0` (units of Omega0).
    #[arg(long)]
    pub kappa: Option<Rate>,
    /// Atomic decay, same forms as --kappa.
    #[arg(long)]
    pub gamma: Option<Rate>,
    #[arg(long)]
    pub width_divisor: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Window start, in units of tau.
    #[arg(long)]
    pub t_start: Option<f64>,
    /// Window end, in units of tau.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Integration step, in units of tau.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub record_points: Option<usize>,
    #[arg(long)]
    pub normalize_pe: bool,
    /// Propagate on the eight-state invariant subspace only.
    #[arg(long)]
    pub restrict_to_s: bool,
    /// Write basis.json next to the metrics CSV.
    #[arg(long)]
    pub dump_basis: bool,
    /// Write hamiltonian.json (H_nh at this time, in units of tau) next to the metrics CSV.
    #[arg(long, value_name = "T")]
    pub dump_hamiltonian: Option<f64>,
    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown scenario `{s}` (stirap, fstirap, custom)"))
}

impl Overrides {
    /// Config file (if any) with command-line values layered on top.
    pub fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        let p = &mut cfg.params;
        macro_rules! over {
            ($($f:ident),*) => { $( if self.$f.is_some() { p.$f = self.$f; } )* };
        }
        over!(omega0, g, tau, t0, kappa, gamma, width_divisor, n_max, t_start, t_end, step, record_points);
        cfg.flags.normalize_pe |= self.normalize_pe;
        cfg.flags.restrict_to_s |= self.restrict_to_s;
        cfg.flags.dump_basis |= self.dump_basis;
        if self.dump_hamiltonian.is_some() {
            cfg.flags.dump_hamiltonian = self.dump_hamiltonian;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Metrics CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metadata JSON path.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DarkcheckArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Number of sample times (or random draws with --seed).
    #[arg(long)]
    pub points: Option<usize>,
    /// Draw random pulse values from this seed instead of evaluating the schedule.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Scan spec (JSON).
    pub spec: PathBuf,
    #[arg(long, default_value = "out/scan.csv")]
    pub out: PathBuf,
    /// Worker threads: 0 for all cores, 1 for serial. Overrides the spec.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Objective to minimize, e.g. `maxdev_third` or `1 - fid_qubit`. Overrides the spec.
    #[arg(long)]
    pub objective: Option<String>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Darkcheck(a) => darkcheck(&a),
        Command::Scan(a) => scan(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn print_config(cfg: &RunConfig) -> Result<i32> {
    let text = serde_json::to_string_pretty(&cfg.resolved())?;
    let _ = writeln!(std::io::stdout(), "{text}");
    Ok(0)
}

#[derive(Debug, Serialize)]
struct SimulationInfo<'a> {
    params_absolute: &'a SystemParams,
    window_absolute: (f64, f64),
    basis_dim: usize,
    restricted_to_subspace: bool,
    steps: usize,
    step_absolute: f64,
    record_every: usize,
    rows: usize,
    normalized_error: bool,
    /// Rows whose error probability used the nearest defined dark state.
    substituted_dark_rows: &'a [usize],
    time_averaged_pe: Option<f64>,
    ratio: crate::pulses::RatioReport,
}

pub fn simulate(args: &RunArgs) -> Result<i32> {
    let mut cfg = args.overrides.load()?;
    let mut output = cfg.output();
    if let Some(p) = &args.out {
        output.csv = p.clone();
    }
    if let Some(p) = &args.meta {
        output.meta = p.clone();
    }
    cfg.output = Some(output.clone());
    let params = cfg.validate()?;
    if args.overrides.print_config {
        return print_config(&cfg);
    }
    let schedule = schedule_for(cfg.scenario, &params, cfg.schedule.as_ref())?;
    let out = run(
        &params,
        &schedule,
        &cfg.initial,
        cfg.flags.restrict_to_s,
        cfg.flags.normalize_pe,
    )?;
    let traj = &out.trajectory;
    let (a, b) = params.window();
    let info = SimulationInfo {
        params_absolute: &params,
        window_absolute: (a, b),
        basis_dim: traj.meta.dim,
        restricted_to_subspace: traj.meta.restricted_to_subspace,
        steps: traj.meta.grid.steps,
        step_absolute: traj.meta.grid.step,
        record_every: traj.meta.record_every,
        rows: out.metrics.rows.len(),
        normalized_error: out.metrics.normalized_error,
        substituted_dark_rows: &out.metrics.substituted_dark_rows,
        time_averaged_pe: out.metrics.time_averaged_error(),
        ratio: ratio_diagnostics(&schedule, a, b, DEFAULT_RATIO_EPSILON),
    };

    io::write_bytes(&output.csv, &io::metrics_csv(&out.metrics)?)?;
    io::write_json(&output.meta, &json!({ "config": cfg.resolved(), "run": info }))?;
    let dir = output.csv.parent().unwrap_or(Path::new(""));
    if cfg.flags.dump_basis || cfg.flags.dump_hamiltonian.is_some() {
        let (index, model) = build_model(&params, cfg.flags.restrict_to_s)?;
        if cfg.flags.dump_basis {
            io::write_json(&dir.join("basis.json"), &basis::dump_json(&index))?;
        }
        if let Some(t) = cfg.flags.dump_hamiltonian {
            if !t.is_finite() {
                return Err(Error::config("flags.dump_hamiltonian", "must be finite"));
            }
            let h = assemble_hnh(t * params.tau, &schedule, &params, &model);
            io::write_json(&dir.join("hamiltonian.json"), &hamiltonian::dump_json(&h, model.states()))?;
        }
    }

    let last = out.metrics.last();
    println!("wrote {} ({} rows) and {}", output.csv.display(), info.rows, output.meta.display());
    println!(
        "final t = {:.4}: P1 = {:.6}, P5 = {:.6}, P8 = {:.6}, norm = {:.6}",
        last.t, last.populations[0], last.populations[4], last.populations[7], last.norm
    );
    Ok(0)
}

/// One sampled point of the nullity check.
#[derive(Debug, Clone, Copy)]
pub struct DarkcheckRow {
    pub t: Option<f64>,
    pub values: PulseValues,
    pub check: NullityCheck,
}

/// Nullity at `points` evenly spaced times of the window, or at `points`
/// random `(t, pulse)` draws when a seed is given.
pub fn darkcheck_rows(
    cfg: &RunConfig,
    params: &SystemParams,
    points: usize,
    seed: Option<u64>,
    exec: Execution,
) -> Result<Vec<DarkcheckRow>> {
    let schedule = schedule_for(cfg.scenario, params, cfg.schedule.as_ref())?;
    let (_, model) = build_model(params, true)?;
    let (a, b) = params.window();
    let samples: Vec<(Option<f64>, PulseValues)> = match seed {
        None => (0..points)
            .map(|k| {
                let t = if points == 1 { a } else { a + (b - a) * k as f64 / (points - 1) as f64 };
                (Some(t), schedule.evaluate(t))
            })
            .collect(),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = cfg.darkcheck.max_pulse;
            (0..points)
                .map(|_| {
                    let v = PulseValues {
                        omega_a: rng.random_range(0.0..m),
                        omega_b: rng.random_range(0.0..m),
                        g_a: rng.random_range(0.0..m),
                        g_b: rng.random_range(0.0..m),
                    };
                    (None, v)
                })
                .collect()
        }
    };
    let model: &CouplingModel = &model;
    Ok(map_ordered(&samples, exec, |(t, v)| DarkcheckRow {
        t: *t,
        values: *v,
        check: check_nullity(model, v),
    }))
}

pub const DARKCHECK_COLUMNS: [&str; 11] = [
    "t",
    "OmegaA",
    "OmegaB",
    "gA",
    "gB",
    "defined",
    "residual",
    "h0_norm",
    "rel_residual",
    "kernel_dim",
    "kernel_distance",
];

pub fn darkcheck(args: &DarkcheckArgs) -> Result<i32> {
    let mut cfg = args.overrides.load()?;
    if let Some(n) = args.points {
        cfg.darkcheck.points = n;
    }
    if args.seed.is_some() {
        cfg.darkcheck.random_seed = args.seed;
    }
    if let Some(p) = &args.out {
        cfg.darkcheck.csv = Some(p.clone());
    }
    let params = cfg.validate()?;
    if args.overrides.print_config {
        return print_config(&cfg);
    }
    let rows = darkcheck_rows(
        &cfg,
        &params,
        cfg.darkcheck.points,
        cfg.darkcheck.random_seed,
        Execution::Parallel,
    )?;
    let path = cfg
        .darkcheck
        .csv
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("out/darkcheck_{}.csv", cfg.scenario.name())));
    let header: Vec<String> = DARKCHECK_COLUMNS.iter().map(|s| s.to_string()).collect();
    io::write_csv(
        &path,
        &header,
        rows.iter().map(|r| {
            let c = &r.check;
            vec![
                io::format_optional(r.t),
                io::format_float(r.values.omega_a),
                io::format_float(r.values.omega_b),
                io::format_float(r.values.g_a),
                io::format_float(r.values.g_b),
                c.defined.to_string(),
                io::format_float(c.residual),
                io::format_float(c.h0_norm),
                io::format_optional(c.defined.then(|| c.relative_residual())),
                c.kernel_dim.to_string(),
                io::format_float(c.kernel_distance),
            ]
        }),
    )?;
    let undefined = rows.iter().filter(|r| !r.check.defined).count();
    let worst = rows.iter().map(|r| r.check.relative_residual()).fold(0.0, f64::max);
    println!("wrote {} ({} rows)", path.display(), rows.len());
    println!(
        "max relative residual {worst:e} (bound {NULLITY_BOUND:e}: {}), undefined rows {undefined}",
        if worst <= NULLITY_BOUND { "ok" } else { "VIOLATED" }
    );
    Ok(0)
}

pub fn scan(args: &ScanArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| Error::io(&args.spec, e))?;
    let mut spec = ScanSpec::from_json(&text)?;
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    if args.objective.is_some() {
        spec.objective = args.objective.clone();
    }
    if let Some(obj) = &spec.objective {
        crate::scan::Objective::parse(obj)?;
    }
    let table = run_scan(&spec, Execution::from_workers(spec.workers))?;
    io::write_bytes(&args.out, &io::scan_csv(&table)?)?;
    println!("wrote {} ({} points)", args.out.display(), table.rows.len());
    if let Some(obj) = &spec.objective {
        match best_point(&table, obj)? {
            Some((i, v)) => {
                let at: Vec<String> = table
                    .axes
                    .iter()
                    .zip(&table.rows[i].point)
                    .map(|(n, x)| format!("{n} = {}", io::format_float(*x)))
                    .collect();
                println!("best point (row {i}): {}; {obj} = {}", at.join(", "), io::format_float(v));
            }
            None => println!("best point: none (objective undefined at every point)"),
        }
    }
    let failed: Vec<_> = table.failures().collect();
    if let Some(first) = failed.first() {
        eprintln!("{} of {} points failed; first: {}", failed.len(), table.rows.len(), first.status());
        return Ok(first.failure.as_ref().map_or(1, |f| f.0));
    }
    Ok(0)
}
