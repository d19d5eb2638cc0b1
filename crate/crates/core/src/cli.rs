//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 computation error, 3 input error.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::asymptotics::standard_suite;
use crate::eigenfunctions::build_flatband_with;
use crate::error::Error;
use crate::lyapunov::{delta0_from_matrix, delta0_trace_form, monodromy_from_matrix, LyapunovPoint, SectorConstants};
use crate::oracle::{band_membership_with, closed_form_deviation, malk_relations_with};
use crate::potential::Potential;
use crate::spectra::{BandStructure, SpectralSolver};
use crate::tolerances::Tolerances;
use crate::Complex64;

#[derive(Debug, Parser)]
#[command(name = "zigzag", version, about = "Spectral analysis of Schrödinger operators on zigzag nanotubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band structure, gaps and spectral points.
    Bands(RunArgs),
    /// Compactly supported flat-band eigenfunction at `μ_n`.
    Eigenfunction {
        #[command(flatten)]
        run: RunArgs,
        /// Index `n ≥ 1` of the Dirichlet eigenvalue `μ_n`.
        #[arg(long)]
        mu_index: usize,
        /// Sector `k ∈ 0..=m`.
        #[arg(long, short)]
        k: usize,
        /// Trace samples per edge.
        #[arg(long, default_value_t = 33)]
        samples: usize,
    },
    /// Run the invariant, oracle and asymptotic checks.
    Validate {
        #[command(flatten)]
        run: RunArgs,
        /// Largest index used by the asymptotic checks.
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Potential JSON file; the zero potential if omitted.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Number of zigzag chains (odd).
    #[arg(long = "N", visible_alias = "n-chains", default_value_t = 3)]
    pub n_chains: usize,
    #[arg(long, default_value_t = 400.0)]
    pub lambda_max: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tol_root: Option<f64>,
    #[arg(long)]
    pub tol_matrix: Option<f64>,
    #[arg(long)]
    pub tol_f: Option<f64>,
    #[arg(long)]
    pub tol_tangent: Option<f64>,
    /// Write `Δ₀` and `Δ_{k,±}` on a uniform `√λ` grid to this CSV file.
    #[arg(long)]
    pub emit_plot_data: Option<PathBuf>,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: Potential,
    pub n_chains: usize,
    pub lambda_max: f64,
    pub tol: Tolerances,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub seed: u64,
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Computation(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) => 2,
            CliError::Input(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidPotential(_) | Error::LevelRange(_) => CliError::Input(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(failures) => {
                writeln!(f, "{} check(s) failed:", failures.len())?;
                for line in failures {
                    writeln!(f, "  {line}")?;
                }
                Ok(())
            }
            CliError::Computation(m) => write!(f, "computation error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> CliResult<Self> {
        if args.n_chains == 0 || args.n_chains.is_multiple_of(2) {
            return Err(CliError::Input(format!("N must be odd, got {}", args.n_chains)));
        }
        if !(args.lambda_max > 0.0 && args.lambda_max.is_finite()) {
            return Err(CliError::Input(format!("lambda_max must be positive, got {}", args.lambda_max)));
        }
        let mut tol = Tolerances::default();
        tol.root = args.tol_root.unwrap_or(tol.root);
        tol.matrix = args.tol_matrix.unwrap_or(tol.matrix);
        tol.f = args.tol_f.unwrap_or(tol.f);
        tol.tangent = args.tol_tangent.unwrap_or(tol.tangent);
        tol.validate().map_err(|e| CliError::Input(e.to_string()))?;
        let potential = match &args.potential {
            Some(path) => load_potential(path)?,
            None => Potential::zero(),
        };
        Ok(RunConfig {
            potential,
            n_chains: args.n_chains,
            lambda_max: args.lambda_max,
            tol,
            format: args.format,
            out: args.out.clone(),
            workers: args.workers.max(1),
            seed: args.seed,
            plot_data: args.emit_plot_data.clone(),
        })
    }

    pub fn solver(&self) -> SpectralSolver {
        SpectralSolver::with_tolerances(self.potential.clone(), self.tol).with_workers(self.workers)
    }

    fn m(&self) -> usize {
        (self.n_chains - 1) / 2
    }
}

pub fn load_potential(path: &Path) -> CliResult<Potential> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Potential::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_bands(config: &RunConfig) -> CliResult<BandStructure> {
    let bands = config.solver().assemble_bands(config.n_chains, config.lambda_max)?;
    let text = match config.format {
        Format::Json => bands.to_json() + "\n",
        Format::Csv => bands.to_csv(),
    };
    write_output(config.out.as_deref(), &text)?;
    if let Some(path) = &config.plot_data {
        let csv = plot_data(config)?;
        std::fs::write(path, csv).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(bands)
}

/// Rows `λ, Δ₀, Re/Im Δ_{k,±}` for `k = 0..=m` on a uniform `√λ` grid.
pub fn plot_data(config: &RunConfig) -> CliResult<String> {
    const POINTS: usize = 2001;
    let solver = config.solver();
    let hill = solver.hill().clone();
    let sectors = SectorConstants::all(config.n_chains)?;
    let top = config.lambda_max.sqrt();
    let grid: Vec<f64> = (0..POINTS).map(|i| (top * i as f64 / (POINTS - 1) as f64).powi(2)).collect();
    let row = |lambda: f64| -> crate::Result<String> {
        let z = Complex64::new(lambda, 0.0);
        let d0 = delta0_from_matrix(&hill.transfer(z)?);
        let mut line = format!("{lambda:.12e},{:.12e}", d0.re);
        for s in &sectors {
            let p = LyapunovPoint::from_delta0(z, d0, s);
            let _ = write!(
                line,
                ",{:.12e},{:.12e},{:.12e},{:.12e}",
                p.delta_k_plus.re, p.delta_k_plus.im, p.delta_k_minus.re, p.delta_k_minus.im
            );
        }
        Ok(line)
    };
    let chunk = grid.len().div_ceil(config.workers);
    let parts: Vec<crate::Result<Vec<String>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = grid
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(|&l| row(l)).collect::<crate::Result<Vec<_>>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("plot worker panicked")).collect()
    });
    let mut out = String::from("lambda,delta0");
    for s in &sectors {
        let k = s.k;
        let _ = write!(out, ",re_d{k}_plus,im_d{k}_plus,re_d{k}_minus,im_d{k}_minus");
    }
    out.push('\n');
    for part in parts {
        for line in part? {
            out.push_str(&line);
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn cmd_eigenfunction(config: &RunConfig, mu_index: usize, k: usize, samples: usize) -> CliResult<f64> {
    if mu_index == 0 {
        return Err(CliError::Input("mu_index must be at least 1".into()));
    }
    if k > config.m() {
        return Err(CliError::Input(format!("sector k = {k} outside 0..={} for N = {}", config.m(), config.n_chains)));
    }
    let solver = config.solver();
    let mu = dirichlet_eigenvalue(&solver, mu_index)?;
    let hill = solver.hill().clone();
    let f = build_flatband_with(&hill, mu, k, config.n_chains, config.tol)?;
    let residual = f.kirchhoff_residual(&hill)?;
    let vertex = f.vertex_max(&hill)?;
    let mut value = f.to_json_with_traces(&hill, samples.max(2))?;
    value["kirchhoff_residual"] = json!(residual);
    value["vertex_max"] = json!(vertex);
    write_output(config.out.as_deref(), &(serde_json::to_string_pretty(&value).expect("json") + "\n"))?;
    eprintln!("kirchhoff residual: {residual:.3e}");
    Ok(residual)
}

fn dirichlet_eigenvalue(solver: &SpectralSolver, n: usize) -> CliResult<f64> {
    let bound = solver.potential().max_abs_bound();
    let lambda_max = (PI * (n as f64 + 1.0)).powi(2) + bound + 10.0;
    let mu = solver.dirichlet_spectrum(lambda_max)?;
    mu.get(n - 1)
        .copied()
        .ok_or_else(|| CliError::Computation(format!("mu_{n} not found below {lambda_max}")))
}

/// One named check of the validation report.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub failures: Vec<String>,
    pub detail: Value,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn to_json_value(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass(),
            "failures": self.failures,
            "detail": self.detail,
        })
    }
}

fn outcome(name: &str, failures: Vec<String>, detail: Value) -> CheckOutcome {
    CheckOutcome { name: name.into(), failures, detail }
}

fn errored(name: &str, e: impl std::fmt::Display) -> CheckOutcome {
    outcome(name, vec![format!("{name}: {e}")], Value::Null)
}

/// Runs every check and returns the outcomes in a fixed order.
pub fn validation_report(config: &RunConfig, n_max: usize) -> Vec<CheckOutcome> {
    let solver = config.solver();
    let mut report = vec![check_identities(config, &solver)];
    match solver.assemble_bands(config.n_chains, config.lambda_max) {
        Ok(bands) => {
            let failures = bands.invariant_violations(1e-9);
            report.push(outcome(
                "band_invariants",
                failures,
                json!({"open_gaps": bands.open_gaps().len(), "flat_bands": bands.flat_bands.len()}),
            ));
            report.push(check_oracle(config, &solver, &bands));
        }
        Err(e) => {
            report.push(errored("band_invariants", e));
        }
    }
    report.push(check_flat_bands(config, &solver));
    report.push(match standard_suite(&config.potential, n_max) {
        Ok(checks) => {
            let failures = checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{} fails {} (max residual {:e})", c.law.name(), c.criterion.describe(), c.max_residual()))
                .collect();
            outcome("asymptotics", failures, Value::Array(checks.iter().map(|c| c.to_json_value()).collect()))
        }
        Err(e) => errored("asymptotics", e),
    });
    report
}

fn sample_grid(config: &RunConfig, count: usize) -> Vec<f64> {
    let lo = -10.0;
    (0..count).map(|i| lo + (config.lambda_max - lo) * (i as f64 + 0.5) / count as f64).collect()
}

/// `det M = 1`, `det M_k = s^{−k}` and the two forms of `Δ₀`.
fn check_identities(config: &RunConfig, solver: &SpectralSolver) -> CheckOutcome {
    let name = "identities";
    let sectors = match SectorConstants::all(config.n_chains) {
        Ok(s) => s,
        Err(e) => return errored(name, e),
    };
    let mut failures = Vec::new();
    let (mut worst_det, mut worst_forms, mut worst_sector) = (0.0f64, 0.0f64, 0.0f64);
    for lambda in sample_grid(config, 200) {
        let z = Complex64::new(lambda, 0.0);
        let m = match solver.hill().transfer(z) {
            Ok(m) => m,
            Err(e) => return errored(name, e),
        };
        let det_err = (m.det() - 1.0).norm();
        let scale = 1.0 + (m.theta1 * m.dphi1).norm();
        worst_det = worst_det.max(det_err / scale);
        if det_err > 1e-10 * scale {
            failures.push(format!("det M - 1 = {det_err:e} at lambda = {lambda}"));
        }
        let (a, b) = (delta0_from_matrix(&m), delta0_trace_form(&m));
        let form_err = (a - b).norm() / (1.0 + a.norm());
        worst_forms = worst_forms.max(form_err);
        if form_err > 1e-10 {
            failures.push(format!("Delta0 forms differ by {form_err:e} at lambda = {lambda}"));
        }
        for s in &sectors {
            if let Ok(mk) = monodromy_from_matrix(&m, s) {
                let e = (mk.det() - s.s_pow_inv()).norm();
                worst_sector = worst_sector.max(e);
                if e > 1e-10 * (1.0 + mk.entries.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)) {
                    failures.push(format!("det M_{} - s^-k = {e:e} at lambda = {lambda}", s.k));
                }
            }
        }
    }
    outcome(
        name,
        failures,
        json!({"det": worst_det, "delta0_forms": worst_forms, "sector_det": worst_sector}),
    )
}

/// Direct monodromy, multiplier relations and band membership on seeded samples.
fn check_oracle(config: &RunConfig, solver: &SpectralSolver, bands: &BandStructure) -> CheckOutcome {
    let name = "oracle";
    let hill = solver.hill().clone();
    let dirichlet = match solver.dirichlet_spectrum(config.lambda_max + 20.0) {
        Ok(d) => d,
        Err(e) => return errored(name, e),
    };
    let far = |z: Complex64| dirichlet.iter().all(|&d| (z - d).norm() >= 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = config.m();
    let mut failures = Vec::new();
    let (mut worst_direct, mut worst_malk, mut disagreements, mut tested) = (0.0f64, 0.0f64, 0usize, 0usize);
    let mut attempts = 0;
    while tested < 100 && attempts < 10_000 {
        attempts += 1;
        let z = Complex64::new(rng.gen_range(-10.0..config.lambda_max), rng.gen_range(-2.0..2.0));
        let k = rng.gen_range(0..=m);
        if !far(z) {
            continue;
        }
        tested += 1;
        match closed_form_deviation(&hill, z, k, config.n_chains) {
            Ok(d) => {
                worst_direct = worst_direct.max(d);
                if d > 1e-8 {
                    failures.push(format!("direct monodromy deviates by {d:e} at lambda = {z}, k = {k}"));
                }
            }
            Err(e) => failures.push(format!("direct monodromy at lambda = {z}: {e}")),
        }
        let kk = rng.gen_range(0..config.n_chains);
        match malk_relations_with(&hill, config.n_chains, kk, z) {
            Ok(r) => {
                worst_malk = worst_malk.max(r);
                if r > 1e-8 {
                    failures.push(format!("multiplier relations off by {r:e} at lambda = {z}, k = {kk}"));
                }
            }
            Err(e) => failures.push(format!("multiplier relations at lambda = {z}: {e}")),
        }
        let lambda = z.re;
        let sector = bands.sector(k).expect("sector present");
        let near_edge = sector
            .bands
            .iter()
            .any(|b| (b.interval.0 - lambda).abs() < 1e-6 || (b.interval.1 - lambda).abs() < 1e-6);
        if !near_edge && far(Complex64::new(lambda, 0.0)) {
            match band_membership_with(&hill, config.n_chains, k, lambda) {
                Ok(inside) if inside != sector.contains(lambda) => {
                    disagreements += 1;
                    failures.push(format!("band membership disagrees at lambda = {lambda}, k = {k}"));
                }
                Ok(_) => {}
                Err(e) => failures.push(format!("band membership at lambda = {lambda}: {e}")),
            }
        }
    }
    outcome(
        name,
        failures,
        json!({"samples": tested, "direct": worst_direct, "relations": worst_malk, "membership_disagreements": disagreements}),
    )
}

/// Kirchhoff residuals of the flat-band eigenfunctions at `μ₁..μ₃`.
fn check_flat_bands(config: &RunConfig, solver: &SpectralSolver) -> CheckOutcome {
    let name = "flat_bands";
    let hill = solver.hill().clone();
    let mut failures = Vec::new();
    let (mut worst_kirchhoff, mut worst_vertex) = (0.0f64, 0.0f64);
    for n in 1..=3 {
        let mu = match dirichlet_eigenvalue(solver, n) {
            Ok(mu) => mu,
            Err(e) => return errored(name, e),
        };
        for k in 0..=config.m() {
            let result = build_flatband_with(&hill, mu, k, config.n_chains, config.tol)
                .and_then(|f| Ok((f.kirchhoff_residual(&hill)?, f.vertex_max(&hill)?)));
            match result {
                Ok((r, v)) => {
                    worst_kirchhoff = worst_kirchhoff.max(r);
                    worst_vertex = worst_vertex.max(v);
                    if r > 1e-9 {
                        failures.push(format!("Kirchhoff residual {r:e} at mu_{n}, k = {k}"));
                    }
                    if v > 1e-12 {
                        failures.push(format!("vertex value {v:e} at mu_{n}, k = {k}"));
                    }
                }
                Err(e) => failures.push(format!("eigenfunction at mu_{n}, k = {k}: {e}")),
            }
        }
    }
    outcome(name, failures, json!({"kirchhoff": worst_kirchhoff, "vertex": worst_vertex}))
}

pub fn cmd_validate(config: &RunConfig, n_max: usize) -> CliResult<Vec<CheckOutcome>> {
    let report = validation_report(config, n_max);
    let pass = report.iter().all(|c| c.pass());
    let value = json!({
        "N": config.n_chains,
        "lambda_max": config.lambda_max,
        "seed": config.seed,
        "pass": pass,
        "checks": report.iter().map(|c| c.to_json_value()).collect::<Vec<_>>(),
    });
    write_output(config.out.as_deref(), &(serde_json::to_string_pretty(&value).expect("json") + "\n"))?;
    for c in &report {
        eprintln!("{:<16} {}", c.name, if c.pass() { "pass" } else { "FAIL" });
    }
    if pass {
        Ok(report)
    } else {
        Err(CliError::Validation(report.iter().flat_map(|c| c.failures.clone()).collect()))
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bands(args) => cmd_bands(&RunConfig::from_args(&args)?).map(|_| ()),
        Command::Eigenfunction { run, mu_index, k, samples } => {
            cmd_eigenfunction(&RunConfig::from_args(&run)?, mu_index, k, samples).map(|_| ())
        }
        Command::Validate { run, n_max } => cmd_validate(&RunConfig::from_args(&run)?, n_max).map(|_| ()),
    }
}

/// Parses `std::env::args`, runs the command and maps the outcome to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{e}");
            if !matches!(e, CliError::Validation(_)) {
                eprintln!();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
