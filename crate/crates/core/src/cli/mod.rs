//! `gfkit` subcommands. Each run reads one [`ScenarioConfig`], writes its
//! artifacts and a `manifest.json` under `<output>/<subcommand>/`, and maps
//! its outcome to an exit code.

mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bridge::{run_experiment, BridgeOptions, Conclusion};
use crate::cauchy::{growth_report, solve_regularized, CauchyProblem, GateMode, RegOptions};
use crate::gf::{
    check_association, estimate_moderateness, local_bumps, test_negligibility, Net, Target,
};
use crate::mizohata::{
    compute_kf, solvability_verdict, validate_coefficient, AssemblyOptions, KfOptions,
    KF_NORMALIZATION, KF_SCALE,
};
use crate::mollifier::fmt17;
use crate::numerics::{AnalyticityVerdict, Window};
use crate::{GfError, Result, FOURIER_CONVENTION};

pub use config::*;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "GFKIT_OUT";
pub const DEFAULT_OUT: &str = "out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_GATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gfkit",
    version,
    about = "Generalized-function experiments for Mizohata-type equations"
)]
pub struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Kf profile and analyticity report.
    Kf { config: PathBuf },
    /// Explicit distributional solution.
    SolveDist { config: PathBuf },
    /// Gated regularized Cauchy solve.
    SolveReg { config: PathBuf },
    /// Association experiment between the two solutions.
    Bridge { config: PathBuf },
    /// Growth gate table for a schedule.
    CheckH { config: PathBuf },
    /// Moderateness, negligibility and association of a stored net.
    Diagnose { config: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kf { .. } => "kf",
            Command::SolveDist { .. } => "solve-dist",
            Command::SolveReg { .. } => "solve-reg",
            Command::Bridge { .. } => "bridge",
            Command::CheckH { .. } => "check-h",
            Command::Diagnose { .. } => "diagnose",
        }
    }

    pub fn config(&self) -> &Path {
        match self {
            Command::Kf { config }
            | Command::SolveDist { config }
            | Command::SolveReg { config }
            | Command::Bridge { config }
            | Command::CheckH { config }
            | Command::Diagnose { config } => config,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ConfigError,
    ToleranceFailure,
    GateFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::ConfigError => EXIT_CONFIG,
            Status::ToleranceFailure => EXIT_TOLERANCE,
            Status::GateFailure => EXIT_GATE,
        }
    }
}

/// Exit status of an error that aborted a run.
pub fn error_status(e: &GfError) -> Status {
    match e {
        GfError::Config(_) | GfError::InvalidParameter(_) | GfError::Json(_) | GfError::Io(_) => {
            Status::ConfigError
        }
        GfError::Gate(_) => Status::GateFailure,
        _ => Status::ToleranceFailure,
    }
}

fn error_kind(e: &GfError) -> &'static str {
    match e {
        GfError::InvalidParameter(_) => "invalid-parameter",
        GfError::NonFinite(_) => "non-finite",
        GfError::Unresolved { .. } => "unresolved",
        GfError::Support(_) => "support",
        GfError::Quadrature(_) => "quadrature",
        GfError::Aliasing { .. } => "aliasing",
        GfError::SignCondition { .. } => "sign-condition",
        GfError::PositiveExponent { .. } => "positive-exponent",
        GfError::OutsideCertifiedDisk { .. } => "outside-certified-disk",
        GfError::Tolerance { .. } => "tolerance",
        GfError::Gate(_) => "gate",
        GfError::Divergence(_) => "divergence",
        GfError::Config(_) => "config",
        GfError::Io(_) => "io",
        GfError::Json(_) => "json",
        GfError::Csv(_) => "csv",
    }
}

/// Machine-readable diagnostic for an aborted run or a failed check.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorReport {
    pub fn from_error(e: &GfError) -> Self {
        Self {
            kind: error_kind(e).into(),
            message: e.to_string(),
            exit_code: error_status(e).exit_code(),
        }
    }

    fn failure(status: Status, kind: &str, message: String) -> Self {
        Self {
            kind: kind.into(),
            message,
            exit_code: status.exit_code(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self }).to_string()
    }
}

/// What a subcommand produced before the manifest is written.
struct Outcome {
    status: Status,
    summary: Value,
    /// Human-readable lines for stdout.
    table: Vec<String>,
    failure: Option<ErrorReport>,
}

impl Outcome {
    fn ok(summary: Value, table: Vec<String>) -> Self {
        Self {
            status: Status::Ok,
            summary,
            table,
            failure: None,
        }
    }

    fn fail(mut self, status: Status, kind: &str, message: String) -> Self {
        self.failure = Some(ErrorReport::failure(status, kind, message));
        self.status = status;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub subcommand: String,
    pub config_path: String,
    pub config: Option<ScenarioConfig>,
    pub fourier_convention: &'static str,
    pub kf_normalization: &'static str,
    pub kf_jump_scale: f64,
    pub seeds: Value,
    pub tolerances: Option<Tolerances>,
    pub jobs: Option<usize>,
    pub files: Vec<String>,
    pub status: Status,
    pub exit_code: i32,
    pub summary: Value,
    pub error: Option<ErrorReport>,
}

/// Result of [`run`]: exit code, output directory and the manifest written there.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

/// Output directory: `$GFKIT_OUT`, else the config's `output_dir`, else
/// `out`, followed by the subcommand name.
pub fn output_dir(cfg: Option<&ScenarioConfig>, subcommand: &str) -> PathBuf {
    let base = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    base.join(subcommand)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn list_files(dir: &Path) -> Vec<String> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) {
        let Ok(entries) = std::fs::read_dir(dir) else {
            return;
        };
        for entry in entries.flatten() {
            let path = entry.path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if let Ok(rel) = path.strip_prefix(root) {
                let name = rel.to_string_lossy().replace('\\', "/");
                if name != "manifest.json" {
                    out.push(name);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// Runs one subcommand with at most `jobs` worker threads, writes the
/// manifest and returns the exit code. Never panics on bad input.
pub fn run(command: &Command, jobs: Option<usize>) -> RunReport {
    let name = command.name();
    let loaded = ScenarioConfig::load(command.config());
    let cfg = loaded.as_ref().ok();
    let out_dir = output_dir(cfg, name);
    let result = loaded.as_ref().map_err(clone_config_error).and_then(|cfg| {
        if jobs == Some(0) {
            return Err(GfError::Config("--jobs must be at least 1".into()));
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = jobs {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| GfError::Config(format!("thread pool: {e}")))?;
        std::fs::create_dir_all(&out_dir)?;
        pool.install(|| dispatch(command, cfg, &out_dir))
    });
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let report = ErrorReport::from_error(&e);
            Outcome {
                status: error_status(&e),
                summary: Value::Null,
                table: Vec::new(),
                failure: Some(report),
            }
        }
    };
    for line in &outcome.table {
        println!("{line}");
    }
    if let Some(f) = &outcome.failure {
        eprintln!("{}", f.to_json());
    }
    let manifest = Manifest {
        tool: "gfkit",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        subcommand: name.into(),
        config_path: command.config().display().to_string(),
        config: cfg.cloned(),
        fourier_convention: FOURIER_CONVENTION,
        kf_normalization: KF_NORMALIZATION,
        kf_jump_scale: KF_SCALE,
        seeds: json!({ "association": cfg.map_or(default_seed(), |c| c.seed) }),
        tolerances: cfg.map(|c| c.tolerances.clone()),
        jobs,
        files: list_files(&out_dir),
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        summary: outcome.summary,
        error: outcome.failure,
    };
    let written = std::fs::create_dir_all(&out_dir)
        .map_err(GfError::from)
        .and_then(|_| write_json(&out_dir.join("manifest.json"), &manifest));
    let exit_code = match written {
        Ok(()) => manifest.exit_code,
        Err(e) => {
            eprintln!("{}", ErrorReport::from_error(&e).to_json());
            EXIT_CONFIG
        }
    };
    RunReport {
        exit_code,
        out_dir,
        manifest,
    }
}

fn clone_config_error(e: &GfError) -> GfError {
    GfError::Config(match e {
        GfError::Config(m) => m.clone(),
        other => other.to_string(),
    })
}

fn dispatch(command: &Command, cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    match command {
        Command::Kf { .. } => run_kf(cfg, dir),
        Command::SolveDist { .. } => run_solve_dist(cfg, dir),
        Command::SolveReg { .. } => run_solve_reg(cfg, dir),
        Command::Bridge { .. } => run_bridge(cfg, dir),
        Command::CheckH { .. } => run_check_h(cfg, dir),
        Command::Diagnose { .. } => run_diagnose(cfg, dir),
    }
}

fn kf_options(cfg: &ScenarioConfig) -> KfOptions {
    KfOptions {
        tol: cfg.tolerances.kf,
        ..KfOptions::default()
    }
}

fn assembly_options(cfg: &ScenarioConfig) -> AssemblyOptions {
    AssemblyOptions {
        residual_tol: cfg.tolerances.residual,
        pairing_tol: cfg.tolerances.pairing,
        kf: kf_options(cfg),
        ..AssemblyOptions::default()
    }
}

fn reg_options(cfg: &ScenarioConfig) -> RegOptions {
    RegOptions {
        method: cfg.method,
        gate: cfg.gate,
        p_max: cfg
            .check_h
            .as_ref()
            .map_or(RegOptions::default().p_max, |c| c.p_max),
        residual_tol: cfg.tolerances.reg_residual,
        ..RegOptions::default()
    }
}

fn run_kf(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let coeff = cfg.coefficient()?;
    let grid = cfg.grid()?;
    let record = validate_coefficient(&coeff, &grid.t)?;
    let source = cfg.source(&coeff)?;
    let kf = compute_kf(source.as_ref(), &coeff, &grid.x.coords(), &kf_options(cfg))?;
    kf.write(dir)?;
    let max_abs = kf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let a = &kf.analyticity;
    let summary = json!({
        "source": source.describe(),
        "coefficient": record,
        "max_abs_kf": max_abs,
        "tail_bound": kf.tail_bound,
        "xi_max_values": kf.xi_max_values,
        "xi_max_coefficients": kf.xi_max_coefficients,
        "verdict": a.verdict,
        "radius": a.radius,
        "tail_slope": a.tail_slope,
    });
    write_json(&dir.join("kf_report.json"), &summary)?;
    let table = vec![
        format!("source        {}", source.label()),
        format!("max |Kf|      {}", fmt17(max_abs)),
        format!("verdict       {}", verdict_tag(a.verdict)),
        format!("radius        {}", a.radius.map_or("none".into(), fmt17)),
    ];
    Ok(Outcome::ok(summary, table))
}

fn verdict_tag(v: AnalyticityVerdict) -> &'static str {
    match v {
        AnalyticityVerdict::AnalyticEvidence => "analytic-evidence",
        AnalyticityVerdict::GrowthEvidence => "growth-evidence",
        AnalyticityVerdict::Inconclusive => "inconclusive",
    }
}

fn run_solve_dist(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let coeff = cfg.coefficient()?;
    let grid = cfg.grid()?;
    let source = cfg.source(&coeff)?;
    let mut sv = solvability_verdict(source.as_ref(), &coeff, &grid, &assembly_options(cfg))?;
    sv.kf.write(dir)?;
    let solution = sv.solution.take();
    write_json(&dir.join("verdict.json"), &sv)?;
    let mut summary = json!({
        "source": sv.source,
        "verdict": sv.verdict,
        "jump_mismatch": sv.jump_mismatch,
        "solved": solution.is_some(),
    });
    let mut table = vec![format!("verdict       {}", verdict_tag(sv.verdict))];
    let Some(sol) = solution else {
        table.push("no solution assembled: Kf shows no analytic evidence".into());
        return Ok(Outcome::ok(summary, table));
    };
    sol.write(dir)?;
    summary["residual"] = json!(sol.residual);
    summary["max_pairing"] = json!(sol.max_pairing());
    summary["radius"] = json!(sol.radius);
    table.push(format!(
        "residual      {} (tol {})",
        fmt17(sol.residual.max_abs),
        sol.residual.tol
    ));
    table.push(format!(
        "max pairing   {} (tol {})",
        fmt17(sol.max_pairing()),
        cfg.tolerances.pairing
    ));
    let out = Outcome::ok(summary, table);
    if !sol.passed() {
        let msg = format!(
            "residual {:.3e} (tol {:.1e}), max pairing {:.3e} (tol {:.1e})",
            sol.residual.max_abs,
            sol.residual.tol,
            sol.max_pairing(),
            cfg.tolerances.pairing
        );
        return Ok(out.fail(Status::ToleranceFailure, "tolerance", msg));
    }
    Ok(out)
}

fn run_solve_reg(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let coeff = cfg.coefficient()?;
    let grid = cfg.grid()?;
    validate_coefficient(&coeff, &grid.t)?;
    let source = cfg.source(&coeff)?;
    let rho = cfg.mollifier()?;
    let ladder = cfg.ladder()?;
    let opts = reg_options(cfg);
    let problem = CauchyProblem::mizohata(&coeff, Some(source), cfg.initial(&grid), grid.clone())?;
    let (growth, _, _) = growth_report(&problem, cfg.schedule, &rho, &ladder, opts.p_max)?;
    write_json(&dir.join("growth.json"), &growth)?;
    let mut table = vec![
        format!("growth C      {}", fmt17(growth.constant)),
        format!(
            "minimal p     {}",
            growth.minimal_p.map_or("none".into(), |p| p.to_string())
        ),
    ];
    if opts.gate == GateMode::Enforce {
        if let Err(e) = growth.require() {
            let summary =
                json!({ "growth_constant": growth.constant, "minimal_p": growth.minimal_p });
            return Ok(Outcome::ok(summary, table).fail(
                Status::GateFailure,
                "gate",
                e.to_string(),
            ));
        }
    }
    let sol = solve_regularized(&problem, cfg.schedule, &rho, &ladder, &opts)?;
    sol.write(dir)?;
    let max_residual = sol.max_residual();
    let summary = json!({
        "growth_constant": sol.growth.constant,
        "minimal_p": sol.growth.minimal_p,
        "gate_overridden": sol.gate_overridden,
        "max_residual": max_residual,
        "residual_tol": opts.residual_tol,
        "boundary_ok": sol.boundary_ok(),
        "moderation": sol.moderation.verdict,
        "moderation_exponent": sol.moderation.exponent,
    });
    for r in &sol.records {
        table.push(format!(
            "eps {}  h {}  residual {}",
            fmt17(r.eps),
            fmt17(r.h),
            fmt17(r.residual)
        ));
    }
    let out = Outcome::ok(summary, table);
    if max_residual > opts.residual_tol {
        let msg = format!(
            "max residual {max_residual:.3e} exceeds {:.1e}",
            opts.residual_tol
        );
        return Ok(out.fail(Status::ToleranceFailure, "tolerance", msg));
    }
    Ok(out)
}

fn run_bridge(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let coeff = cfg.coefficient()?;
    let grid = cfg.grid()?;
    let source = cfg.source(&coeff)?;
    let rho = cfg.mollifier()?;
    let opts = BridgeOptions {
        schedule: cfg.schedule,
        ladder: cfg.ladder()?,
        radius: cfg.association.radius,
        bumps: cfg.association.bumps,
        seed: cfg.seed,
        tol: cfg.tolerances.association,
        assembly: assembly_options(cfg),
        reg: reg_options(cfg),
    };
    let exp = run_experiment(&cfg.label, source, &coeff, &grid, &rho, &opts)?;
    write_json(&dir.join("bridge.json"), &exp)?;
    if let Some(sol) = &exp.solution {
        sol.write(&dir.join("distributional"))?;
    }
    if let Some(u) = &exp.generalized {
        u.write(&dir.join("regularized"))?;
    }
    let gap = exp.association.max_gap();
    let table = vec![
        format!("scenario      {}", exp.scenario),
        format!("analyticity   {}", verdict_tag(exp.analyticity)),
        format!("candidate     {}", exp.candidate),
        format!(
            "max gap       {} (tol {})",
            gap.map_or("none".into(), fmt17),
            opts.tol
        ),
        format!("reg residual  {}", fmt17(exp.regularized.max_residual)),
        format!(
            "conclusion    {}",
            serde_json::to_value(exp.conclusion)?
                .as_str()
                .unwrap_or_default()
        ),
    ];
    let summary = json!({
        "conclusion": exp.conclusion,
        "analyticity": exp.analyticity,
        "candidate": exp.candidate,
        "max_gap": gap,
        "associated": exp.association.associated,
    });
    let out = Outcome::ok(summary, table);
    match exp.conclusion {
        Conclusion::AssociatedAndAnalytic | Conclusion::NoAssociationAndGrowthEvidence => Ok(out),
        c => {
            let msg = format!("conclusion {c:?} with max gap {gap:?}");
            Ok(out.fail(Status::ToleranceFailure, "association", msg))
        }
    }
}

fn run_check_h(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let ladder = cfg.ladder()?;
    let spec = cfg.check_h.clone().unwrap_or(CheckHConfig {
        constant: None,
        order: 1,
        p_max: 12,
    });
    let report = match spec.constant {
        Some(c) => crate::cauchy::check_h_condition(
            cfg.schedule,
            c,
            spec.order,
            &ladder.values,
            spec.p_max,
        )?,
        None => {
            let coeff = cfg.coefficient()?;
            let grid = cfg.grid()?;
            let problem =
                CauchyProblem::mizohata(&coeff, None, crate::cauchy::InitialData::Zero, grid)?;
            growth_report(
                &problem,
                cfg.schedule,
                &cfg.mollifier()?,
                &ladder,
                spec.p_max,
            )?
            .0
        }
    };
    write_json(&dir.join("growth.json"), &report)?;
    let mut w = csv::Writer::from_path(dir.join("gate.csv"))?;
    let mut header = vec!["p".to_string(), "slope".into(), "passes".into()];
    header.extend((0..ladder.values.len()).map(|k| format!("log_product_{k}")));
    w.write_record(&header)?;
    let mut table = vec![format!("{:>3}  {:>24}  passes", "p", "slope")];
    for row in &report.rows {
        let mut rec = vec![row.p.to_string(), fmt17(row.slope), row.passes.to_string()];
        rec.extend(row.log_products.iter().map(|v| fmt17(*v)));
        w.write_record(&rec)?;
        table.push(format!(
            "{:>3}  {:>24}  {}",
            row.p,
            fmt17(row.slope),
            row.passes
        ));
    }
    w.flush()?;
    table.push(format!(
        "minimal p = {}",
        report.minimal_p.map_or("none".into(), |p| p.to_string())
    ));
    let summary = json!({
        "schedule": report.schedule,
        "constant": report.constant,
        "order": report.order,
        "minimal_p": report.minimal_p,
    });
    let out = Outcome::ok(summary, table);
    match report.require() {
        Ok(_) => Ok(out),
        Err(e) => Ok(out.fail(Status::GateFailure, "gate", e.to_string())),
    }
}

fn run_diagnose(cfg: &ScenarioConfig, dir: &Path) -> Result<Outcome> {
    let d = cfg
        .diagnose
        .as_ref()
        .ok_or_else(|| GfError::Config("diagnose needs a 'diagnose' section".into()))?;
    let net = Net::read_json(&d.net)?;
    let dim = net.grid.dim();
    if d.alpha.len() != dim {
        return Err(GfError::Config(format!(
            "alpha has {} entries for a {dim}-dimensional net",
            d.alpha.len()
        )));
    }
    let window = Window::interior(&net.grid, 0.1);
    let moderation = estimate_moderateness(&net, &d.alpha, &window)?;
    let negligibility = test_negligibility(&net, &d.alpha, d.q_max)?;
    moderation.write_csv(&dir.join("moderation.csv"))?;
    negligibility.write_csv(&dir.join("negligibility.csv"))?;
    let mut table = vec![
        format!("net           {}", net.label),
        format!(
            "moderation    {:?} (exponent {:?})",
            moderation.verdict, moderation.exponent
        ),
        format!("negligible    up to q = {}", negligibility.max_passing()),
    ];
    let association = match &d.target {
        None => None,
        Some(t) => {
            let target = match t {
                DiagnoseTarget::Zero => Target::Zero,
                DiagnoseTarget::Dirac { at } => Target::Dirac { at: at.clone() },
                DiagnoseTarget::Heaviside { at } => Target::Heaviside { at: *at },
            };
            let x0 = d.x0.clone().unwrap_or_else(|| vec![0.0; dim]);
            let phis = local_bumps(&x0, cfg.association.radius, cfg.association.bumps, cfg.seed)?;
            let v = check_association(&net, &target, &phis, cfg.tolerances.association)?;
            table.push(format!(
                "associated    {} (max gap {:?})",
                v.associated,
                v.max_gap()
            ));
            Some(v)
        }
    };
    let summary = json!({
        "moderation": moderation,
        "negligibility": negligibility,
        "association": association,
    });
    write_json(&dir.join("diagnose.json"), &summary)?;
    let out = Outcome::ok(
        json!({
            "moderation": moderation.verdict,
            "max_negligible_q": negligibility.max_passing(),
            "associated": association.as_ref().map(|a| a.associated),
        }),
        table,
    );
    match &association {
        Some(a) if !a.associated => {
            let msg = format!(
                "net is not associated with the target (max gap {:?})",
                a.max_gap()
            );
            Ok(out.fail(Status::ToleranceFailure, "association", msg))
        }
        _ => Ok(out),
    }
}

/// Entry point of the `gfkit` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let report = ErrorReport {
                kind: "usage".into(),
                message: e.to_string().trim().into(),
                exit_code: EXIT_CONFIG,
            };
            eprintln!("{}", report.to_json());
            return EXIT_CONFIG;
        }
    };
    run(&cli.command, cli.jobs).exit_code
}
