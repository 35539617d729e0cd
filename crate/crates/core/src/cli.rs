//! Command-line front end: configuration merging, subcommands and output files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::classical::{integrate_rk4, write_csv, InitialConditions};
use crate::error::EpsError;
use crate::format::sci17;
use crate::grid::GridSpec;
use crate::params::{omega_prime, validate_params, OmegaPrimeConvention, ParamsInput, PhysParams};
use crate::propagator::{oracle_records, uncertainty_series, UncertaintyRecord};
use crate::spectral::eigenvalue_table;
use crate::transforms::chain_dump;
use crate::verify::{run_verification, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const CONFIG_ENV: &str = "EPSOSC_CONFIG";
pub const MAX_N_MAX: usize = 12;
pub const EVOLVE_HEADER: &str = "t,dq,dpiq,dp,dpip,prod_q,prod_p,prod_combined,flag_q,flag_p";
const ORACLE_COLUMNS: [&str; 8] = [
    "oracle_dq",
    "oracle_dpiq",
    "oracle_dp",
    "oracle_dpip",
    "oracle_prod_q",
    "oracle_prod_p",
    "oracle_prod_combined",
    "max_abs_diff",
];

#[derive(Debug, Parser)]
#[command(name = "epsosc", version, about = "Damped oscillator in extended phase space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Integrate the actual and image oscillators and export energies.
    SimulateClassical,
    /// Eigenvalue table of the harmonic extended Hamiltonian under both omega' conventions.
    Spectrum,
    /// Uncertainty products of an evolving Gaussian packet.
    Evolve,
    /// Run the invariant suite.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Paper,
    Rederived,
}

impl From<ConventionArg> for OmegaPrimeConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => OmegaPrimeConvention::PaperStated,
            ConventionArg::Rederived => OmegaPrimeConvention::Rederived,
        }
    }
}

/// Command-line options. Everything left unset falls back to the config file, then to defaults.
#[derive(Clone, Debug, Default, PartialEq, Args)]
pub struct Overrides {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hbar: Option<f64>,
    /// Initial packet width (defaults to sqrt(hbar)).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Classical integrator step.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Number of output intervals for `evolve`.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Grid intervals per axis for `evolve --oracle`.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Grid half-width for `evolve --oracle`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_l: Option<f64>,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML config file (also read from EPSOSC_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub omega_prime_convention: Option<ConventionArg>,
    /// Drop the e^{-iqp/hbar} factor from grid states.
    #[arg(long, global = true)]
    pub no_cross_phase: bool,
    /// Include the transformation-chain dump in `spectrum` output.
    #[arg(long, global = true)]
    pub dump_chain: bool,
    /// Add grid-quadrature moment columns to `evolve`.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Run the short verification subset.
    #[arg(long, global = true)]
    pub quick: bool,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub qdot0: Option<f64>,
    /// Image initial position (defaults to q0).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p0: Option<f64>,
    /// Image initial velocity (defaults to -qdot0).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub pdot0: Option<f64>,
    /// Fault injection: perturb every chain map before the symplectic check.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub perturb_symplectic: Option<f64>,
}

/// Flat TOML config file. Keys use snake_case versions of the flag names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub omega: Option<f64>,
    pub hbar: Option<f64>,
    pub delta: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub n_max: Option<usize>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub omega_prime_convention: Option<OmegaPrimeConvention>,
    pub cross_phase: Option<bool>,
    pub dump_chain: Option<bool>,
    pub oracle: Option<bool>,
    pub quick: Option<bool>,
    pub q0: Option<f64>,
    pub qdot0: Option<f64>,
    pub p0: Option<f64>,
    pub pdot0: Option<f64>,
    pub perturb_symplectic: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: PhysParams,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_max: f64,
    pub steps: usize,
    pub n_max: usize,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub omega_prime_convention: OmegaPrimeConvention,
    pub cross_phase: bool,
    pub dump_chain: bool,
    pub oracle: bool,
    pub quick: bool,
    pub initial: InitialConditions,
    pub perturb_symplectic: Option<f64>,
}

impl RunConfig {
    /// The same configuration as a config file; resolving it again gives `self` back.
    pub fn to_file_config(&self) -> FileConfig {
        FileConfig {
            lambda: Some(self.params.lambda()),
            omega: Some(self.params.omega()),
            hbar: Some(self.params.hbar()),
            delta: Some(self.params.delta()),
            t_max: Some(self.t_max),
            dt: Some(self.dt),
            steps: Some(self.steps),
            grid_n: Some(self.grid.points),
            grid_l: Some(self.grid.extent),
            n_max: Some(self.n_max),
            format: Some(self.format),
            out: self.out.clone(),
            omega_prime_convention: Some(self.omega_prime_convention),
            cross_phase: Some(self.cross_phase),
            dump_chain: Some(self.dump_chain),
            oracle: Some(self.oracle),
            quick: Some(self.quick),
            q0: Some(self.initial.q0),
            qdot0: Some(self.initial.qdot0),
            p0: Some(self.initial.p0),
            pdot0: Some(self.initial.pdot0),
            perturb_symplectic: self.perturb_symplectic,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(#[from] EpsError),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("verification failed")]
    Verify,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
            CliError::Verify => EXIT_VERIFY,
        }
    }
}

fn config_err(e: EpsError) -> CliError {
    CliError::Config(e.to_string())
}

/// Merges flags over the file over the built-in defaults.
pub fn resolve(command: Command, flags: &Overrides, file: &FileConfig) -> Result<RunConfig, CliError> {
    macro_rules! pick {
        ($field:ident, $default:expr) => {
            flags.$field.or(file.$field).unwrap_or($default)
        };
    }
    let params = validate_params(&ParamsInput {
        lambda: Some(pick!(lambda, 0.1)),
        omega: Some(pick!(omega, 1.0)),
        hbar: flags.hbar.or(file.hbar),
        delta: flags.delta.or(file.delta),
    })
    .map_err(config_err)?;

    let grid = GridSpec::new(pick!(grid_l, 10.0), pick!(grid_n, 256)).map_err(config_err)?;
    let t_max = pick!(t_max, 20.0);
    let dt = pick!(dt, params.period() / 1000.0);
    let steps = pick!(steps, 400);
    let n_max = pick!(n_max, 3);
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::Config(format!("t_max must be finite and > 0, got {t_max}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::Config(format!("dt must be finite and > 0, got {dt}")));
    }
    if steps < 2 {
        return Err(CliError::Config(format!("steps must be >= 2, got {steps}")));
    }
    if n_max > MAX_N_MAX {
        return Err(CliError::Config(format!("n_max must be <= {MAX_N_MAX}, got {n_max}")));
    }

    let default_format = match command {
        Command::Spectrum | Command::Verify => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };
    let format = flags.format.or(file.format).unwrap_or(default_format);
    let dump_chain = flags.dump_chain || file.dump_chain.unwrap_or(false);
    if command == Command::Spectrum && dump_chain && format == OutputFormat::Csv {
        return Err(CliError::Config("--dump-chain needs --format json".into()));
    }

    let q0 = pick!(q0, 1.0);
    let qdot0 = pick!(qdot0, 0.0);
    let initial =
        InitialConditions::new(q0, qdot0, pick!(p0, q0), pick!(pdot0, 0.0 - qdot0)).map_err(config_err)?;

    Ok(RunConfig {
        command,
        params,
        grid,
        dt,
        t_max,
        steps,
        n_max,
        format,
        out: flags.out.clone().or_else(|| file.out.clone()),
        omega_prime_convention: flags
            .omega_prime_convention
            .map(OmegaPrimeConvention::from)
            .or(file.omega_prime_convention)
            .unwrap_or_default(),
        cross_phase: !flags.no_cross_phase && file.cross_phase.unwrap_or(true),
        dump_chain,
        oracle: flags.oracle || file.oracle.unwrap_or(false),
        quick: flags.quick || file.quick.unwrap_or(false),
        initial,
        perturb_symplectic: flags.perturb_symplectic.or(file.perturb_symplectic),
    })
}

/// Reads the config file named by `--config` or, failing that, by the environment variable.
pub fn load_file_config(flags: &Overrides, env_path: Option<PathBuf>) -> Result<FileConfig, CliError> {
    match flags.config.clone().or(env_path) {
        Some(path) => FileConfig::load(&path),
        None => Ok(FileConfig::default()),
    }
}

/// Parses `args`, runs the subcommand, and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    let result = load_file_config(&cli.overrides, env_path)
        .and_then(|file| resolve(cli.command, &cli.overrides, &file))
        .and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !matches!(e, CliError::Verify) {
                eprintln!("epsosc: {e}");
            }
            e.exit_code()
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::SimulateClassical => cmd_simulate_classical(cfg),
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Evolve => cmd_evolve(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

fn emit(cfg: &RunConfig, body: &[u8]) -> Result<(), CliError> {
    match &cfg.out {
        None => io::stdout().write_all(body)?,
        Some(path) => {
            fs::write(path, body)?;
            let meta = json!({
                "tool": "epsosc",
                "version": env!("CARGO_PKG_VERSION"),
                "command": cfg.command,
                "omega_prime_convention": cfg.omega_prime_convention.label(),
                "config": cfg,
            });
            let mut meta_path = path.clone().into_os_string();
            meta_path.push(".meta.json");
            fs::write(meta_path, serde_json::to_string_pretty(&meta).expect("config serializes") + "\n")?;
        }
    }
    Ok(())
}

fn to_json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn cmd_simulate_classical(cfg: &RunConfig) -> Result<(), CliError> {
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    if steps == 0 {
        return Err(CliError::Config(format!("t_max = {} is shorter than dt = {}", cfg.t_max, cfg.dt)));
    }
    let traj = integrate_rk4(&cfg.initial, &cfg.params, cfg.dt, steps)?;
    let body = match cfg.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(&traj, &mut buf)?;
            buf
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = traj
                .times
                .iter()
                .zip(&traj.states)
                .zip(&traj.energies)
                .map(|((t, s), e)| {
                    json!({"t": t, "q": s.q, "qdot": s.qdot, "p": s.p, "pdot": s.pdot,
                           "E_actual": e.e_actual, "E_image": e.e_image, "H2": e.h2})
                })
                .collect();
            to_json_bytes(&rows)
        }
    };
    emit(cfg, &body)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let mut tables = Vec::new();
    for conv in [OmegaPrimeConvention::PaperStated, OmegaPrimeConvention::Rederived] {
        let w = omega_prime(&cfg.params, conv)?;
        tables.push((conv, w, eigenvalue_table(cfg.n_max, &cfg.params, conv)?));
    }
    let body = match cfg.format {
        OutputFormat::Csv => {
            let mut s = String::from("convention,n,m,re,im\n");
            for (conv, _, entries) in &tables {
                for e in entries {
                    s.push_str(&format!("{},{},{},{},{}\n", conv.label(), e.n, e.m, sci17(e.re), sci17(e.im)));
                }
            }
            s.into_bytes()
        }
        OutputFormat::Json => {
            let mut conventions = Map::new();
            for (conv, w, entries) in &tables {
                conventions.insert(
                    conv.label().to_string(),
                    json!({"omega_prime": [w.re, w.im], "eigenvalues": entries}),
                );
            }
            let mut doc = json!({
                "lambda": cfg.params.lambda(),
                "omega": cfg.params.omega(),
                "hbar": cfg.params.hbar(),
                "n_max": cfg.n_max,
                "conventions": conventions,
            });
            if cfg.dump_chain {
                doc["chain"] = chain_dump(&cfg.params)?;
            }
            to_json_bytes(&doc)
        }
    };
    emit(cfg, &body)
}

fn record_values(r: &UncertaintyRecord) -> [f64; 7] {
    [r.dq, r.dpi_q, r.dp, r.dpi_p, r.prod_q, r.prod_p, r.prod_combined]
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let delta = cfg.params.delta();
    let series = uncertainty_series(delta, &cfg.params, cfg.t_max, cfg.steps)?;
    let oracle = if cfg.oracle {
        let times: Vec<f64> = series.iter().map(|r| r.t).collect();
        Some(oracle_records(delta, &cfg.params, &times, &cfg.grid, cfg.cross_phase)?)
    } else {
        None
    };

    let body = match cfg.format {
        OutputFormat::Csv => {
            let mut s = String::from(EVOLVE_HEADER);
            if oracle.is_some() {
                for c in ORACLE_COLUMNS {
                    s.push(',');
                    s.push_str(c);
                }
            }
            s.push('\n');
            for (k, r) in series.iter().enumerate() {
                let mut cells: Vec<String> = std::iter::once(r.t).chain(record_values(r)).map(sci17).collect();
                cells.push(r.flag_q.to_string());
                cells.push(r.flag_p.to_string());
                if let Some(o) = &oracle {
                    cells.extend(record_values(&o[k].oracle).into_iter().map(sci17));
                    cells.push(sci17(o[k].max_abs_diff));
                }
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s.into_bytes()
        }
        OutputFormat::Json => {
            let keys = ["dq", "dpiq", "dp", "dpip", "prod_q", "prod_p", "prod_combined"];
            let rows: Vec<Value> = series
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let mut row = Map::new();
                    row.insert("t".into(), json!(r.t));
                    for (key, v) in keys.iter().zip(record_values(r)) {
                        row.insert((*key).into(), json!(v));
                    }
                    row.insert("flag_q".into(), json!(r.flag_q));
                    row.insert("flag_p".into(), json!(r.flag_p));
                    if let Some(o) = &oracle {
                        for (key, v) in ORACLE_COLUMNS.iter().zip(record_values(&o[k].oracle)) {
                            row.insert((*key).into(), json!(v));
                        }
                        row.insert("max_abs_diff".into(), json!(o[k].max_abs_diff));
                    }
                    Value::Object(row)
                })
                .collect();
            to_json_bytes(&rows)
        }
    };
    emit(cfg, &body)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let report = run_verification(&VerifyOptions {
        quick: cfg.quick,
        perturb_symplectic: cfg.perturb_symplectic,
    });
    match &cfg.out {
        None => print!("{}", report.render()),
        Some(_) => {
            eprint!("{}", report.render());
            emit(cfg, &to_json_bytes(&report))?;
        }
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Verify)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(args: &[&str]) -> (Command, Overrides) {
        let cli = Cli::try_parse_from(std::iter::once("epsosc").chain(args.iter().copied())).unwrap();
        (cli.command, cli.overrides)
    }

    #[test]
    fn defaults_are_explicit() {
        let (cmd, f) = flags(&["evolve"]);
        let cfg = resolve(cmd, &f, &FileConfig::default()).unwrap();
        assert_eq!(cfg.params.lambda(), 0.1);
        assert_eq!(cfg.params.hbar(), 1.0);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.omega_prime_convention, OmegaPrimeConvention::Rederived);
        assert!(cfg.cross_phase);
        assert_eq!(cfg.initial.p0, 1.0);
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let file = FileConfig {
            lambda: Some(0.2),
            omega: Some(2.0),
            steps: Some(50),
            cross_phase: Some(false),
            ..Default::default()
        };
        let (cmd, f) = flags(&["evolve", "--lambda", "0.05"]);
        let cfg = resolve(cmd, &f, &file).unwrap();
        assert_eq!(cfg.params.lambda(), 0.05);
        assert_eq!(cfg.params.omega(), 2.0);
        assert_eq!(cfg.steps, 50);
        assert!(!cfg.cross_phase);
        assert_eq!(cfg.t_max, 20.0);
    }

    #[test]
    fn resolving_is_idempotent() {
        let (cmd, f) = flags(&["simulate-classical", "--lambda", "0.3", "--q0", "-2", "--omega-prime-convention", "paper"]);
        let cfg = resolve(cmd, &f, &FileConfig::default()).unwrap();
        let again = resolve(cmd, &Overrides::default(), &cfg.to_file_config()).unwrap();
        assert_eq!(cfg, again);
        let text = toml::to_string(&cfg.to_file_config()).unwrap();
        let parsed: FileConfig = toml::from_str(&text).unwrap();
        assert_eq!(resolve(cmd, &Overrides::default(), &parsed).unwrap(), cfg);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("lambda = 0.1\nlamda = 0.2\n").is_err());
    }

    #[test]
    fn config_errors() {
        for args in [
            &["simulate-classical", "--lambda", "1", "--omega", "1"][..],
            &["spectrum", "--n-max", "13"][..],
            &["evolve", "--steps", "1"][..],
            &["spectrum", "--dump-chain", "--format", "csv"][..],
        ] {
            let (cmd, f) = flags(args);
            let err = resolve(cmd, &f, &FileConfig::default()).unwrap_err();
            assert_eq!(err.exit_code(), EXIT_CONFIG, "{args:?}");
        }
        let (cmd, f) = flags(&["simulate-classical", "--lambda", "1", "--omega", "1"]);
        let msg = resolve(cmd, &f, &FileConfig::default()).unwrap_err().to_string();
        assert!(msg.contains("lambda < omega"), "{msg}");
    }

    #[test]
    fn bad_flag_value_exits_with_config_code() {
        assert_eq!(run_from(["epsosc", "evolve", "--steps", "many"]), EXIT_CONFIG);
    }
}
