//! Command-line front end. [`run`] parses the arguments, dispatches one
//! subcommand and returns the process exit code: 0 on success or a passing
//! verdict, 1 on a failing verdict, 2 on usage, input or validation errors.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use levy_invert::geometry::{CapPartition, Direction};
use levy_invert::inversion::{beta_inversion, log_inversion, rosinski_inversion};
use levy_invert::json::{law_from_json, law_to_json, measure_from_json, measure_to_json};
use levy_invert::limits::{
    long_time_limit_check, sequence_convergence_check, short_time_limit_check, spectral_directions, LimitConfig,
    SequenceMode, SequenceTerm,
};
use levy_invert::measure::{ID0Law, LevyMeasure, MeasureRepr, RosinskiMeasure};
use levy_invert::regvar::{estimate_rv_index, prop2_constant_check, Endpoint, RVEstimate};
use levy_invert::simulate::{sample_increment, SimConfig, DEFAULT_BLOCKS};
use levy_invert::specfun::{k_const, TemperingParams};
use levy_invert::LevyError;

pub const THREADS_VAR: &str = "LEVY_INVERT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "levy-invert", version, about = "Inversions of Lévy measures and stable-limit diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// β-invert a measure (tempered inputs are inverted at the Rosiński level).
    Invert {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, required_unless_present = "log", allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Log-inversion of an atomic Rosiński measure instead of a β-inversion.
        #[arg(long, conflicts_with = "beta")]
        log: bool,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print K_{η,α,p} = Γ((η-α)/p)/p.
    Kconst {
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
    },
    /// Estimate the index of regular variation at 0 or ∞.
    Regvar {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        endpoint: Endpoint,
        /// JSON array of cell centers, e.g. [[1,0],[0,1],[-1,0],[0,-1]].
        #[arg(long)]
        caps: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        drift_tol: f64,
        /// CSV with columns r, tail, cap_id, ratio, prediction: the share of
        /// the tail in each cell against the estimated σ share.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample increments X_t; writes a CSV and a `.meta.json` sidecar.
    Simulate {
        #[arg(long)]
        law: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        /// Small-jump cutoff; chosen from a jump budget when omitted.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BLOCKS)]
        blocks: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo check of a short- or long-time stable limit.
    LimitCheck {
        #[arg(long)]
        law: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long, value_enum)]
        mode: LimitMode,
        /// `geom:<start>:<stop>:<count>`
        #[arg(long, value_parser = parse_grid)]
        t_grid: Grid,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// KS threshold at the last grid point; 1.36/√n + 0.02 when omitted.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Convergence criteria for a sequence of measures in a directory.
    ///
    /// The directory holds `limit.json` and one JSON file per term, taken in
    /// lexicographic order. Each file is a measure or a law
    /// `{"measure": ..., "shift": [...]}`.
    SeqCheck {
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long, value_enum)]
        mode: SeqMode,
        /// Tail weight exponent in ts mode.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
    /// Tail correspondence between M near 0 and M^β near ∞.
    Prop2 {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, value_parser = parse_grid, default_value = "geom:1e2:1e4:3")]
        t_grid: Grid,
        /// Largest accepted |ratio - 1|.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LimitMode {
    Short,
    Long,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SeqMode {
    Id0,
    Ts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Parse `geom:<start>:<stop>:<count>` into a geometric grid.
pub fn parse_grid(spec: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [kind, start, stop, count] = parts[..] else {
        return Err(format!("expected geom:<start>:<stop>:<count>, got `{spec}`"));
    };
    if kind != "geom" {
        return Err(format!("unknown grid kind `{kind}`"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let (a, b) = (num(start)?, num(stop)?);
    let n: usize = count.parse().map_err(|e| format!("`{count}`: {e}"))?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) || n == 0 {
        return Err("grid endpoints must be positive and finite and count at least 1".into());
    }
    if n == 1 {
        return Ok(Grid(vec![a]));
    }
    let step = (b / a).ln() / (n - 1) as f64;
    Ok(Grid((0..n).map(|i| a * (step * i as f64).exp()).collect()))
}

#[derive(Debug)]
enum CliError {
    Io(PathBuf, std::io::Error),
    Input(PathBuf, LevyError),
    Levy(LevyError),
    Other(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Input(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Levy(e) => write!(f, "{e}"),
            CliError::Other(s) => f.write_str(s),
        }
    }
}

impl From<LevyError> for CliError {
    fn from(e: LevyError) -> Self {
        CliError::Levy(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn read_measure(path: &Path) -> CliResult<LevyMeasure> {
    measure_from_json(&read(path)?).map_err(|e| CliError::Input(path.to_path_buf(), e))
}

fn read_law(path: &Path) -> CliResult<ID0Law> {
    law_from_json(&read(path)?).map_err(|e| CliError::Input(path.to_path_buf(), e))
}

/// A law file, or a bare measure with zero shift.
fn read_term(path: &Path) -> CliResult<SequenceTerm> {
    let text = read(path)?;
    let is_law = serde_json::from_str::<Value>(&text)
        .map(|v| v.get("measure").is_some())
        .unwrap_or(false);
    let parsed = if is_law {
        law_from_json(&text).map(|l| SequenceTerm {
            measure: l.measure,
            shift: l.shift,
        })
    } else {
        measure_from_json(&text).map(SequenceTerm::centered)
    };
    parsed.map_err(|e| CliError::Input(path.to_path_buf(), e))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialization cannot fail"));
}

/// Shortest decimal form after rounding to 14 significant digits.
fn round_display(v: f64) -> String {
    let rounded: f64 = format!("{v:.13e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Other(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    // a global pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parse `argv` (including the program name), run the subcommand and
/// return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match configure_threads().and_then(|_| dispatch(cli.command)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> CliResult<bool> {
    match command {
        Command::Invert { measure, beta, log, out } => invert(&measure, beta, log, out.as_deref()),
        Command::Kconst { eta, alpha, p } => {
            let k = k_const(eta, &TemperingParams::new(p, alpha)?)?;
            println!("{}", round_display(k));
            Ok(true)
        }
        Command::Regvar {
            measure,
            endpoint,
            caps,
            drift_tol,
            out,
        } => {
            let m = read_measure(&measure)?;
            let partition = match caps {
                Some(path) => read_caps(&path)?,
                None => CapPartition::axes(m.dim()),
            };
            let est = estimate_rv_index(&m, endpoint, None, Some(&partition), drift_tol)?;
            if let Some(path) = out {
                write_regvar_csv(&path, &m, &est, &partition)?;
            }
            print_json(&est);
            Ok(est.regularly_varying)
        }
        Command::Simulate {
            law,
            t,
            n,
            eps,
            seed,
            blocks,
            out,
        } => simulate(&law, t, n, eps, seed, blocks, &out),
        Command::LimitCheck {
            law,
            eta,
            mode,
            t_grid,
            n,
            seed,
            threshold,
        } => {
            let law = read_law(&law)?;
            let mut cfg = LimitConfig::new(n, seed);
            cfg.threshold = threshold;
            let mut grid = t_grid.0;
            let report = match mode {
                LimitMode::Short => {
                    grid.sort_by(|a, b| b.total_cmp(a));
                    short_time_limit_check(&law, eta, None, &grid, &cfg)?
                }
                LimitMode::Long => {
                    grid.sort_by(f64::total_cmp);
                    long_time_limit_check(&law, eta, &grid, &cfg)?
                }
            };
            print_json(&report);
            Ok(report.pass)
        }
        Command::SeqCheck {
            sequence,
            mode,
            gamma,
            tol,
        } => seq_check(&sequence, mode, gamma, tol),
        Command::Prop2 {
            measure,
            beta,
            rho,
            t_grid,
            tol,
        } => {
            let m = read_measure(&measure)?;
            let sigma = spectral_directions(&m, 1e-8)?;
            let report = prop2_constant_check(&m, beta, rho, &sigma, &t_grid.0)?;
            print_json(&report);
            Ok(report.max_small_deviation() <= tol && report.max_large_deviation() <= tol)
        }
    }
}

fn invert(path: &Path, beta: Option<f64>, log: bool, out: Option<&Path>) -> CliResult<bool> {
    let m = read_measure(path)?;
    let inverted = match (m.repr(), log) {
        (MeasureRepr::Tempered { params, rosinski }, true) => LevyMeasure::tempered(*params, log_inversion(rosinski)?)?,
        (_, true) => log_inversion(&RosinskiMeasure::new(m.clone())?)?.into_measure(),
        (MeasureRepr::Tempered { params, rosinski }, false) => {
            LevyMeasure::tempered(*params, rosinski_inversion(rosinski, beta.unwrap_or(0.0))?)?
        }
        (_, false) => beta_inversion(&m, beta.unwrap_or(0.0))?,
    };
    let text = measure_to_json(&inverted);
    match out {
        Some(p) => write(p, &format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(true)
}

fn read_caps(path: &Path) -> CliResult<CapPartition> {
    let centers: Vec<Vec<f64>> = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Other(format!("{}: expected an array of direction vectors: {e}", path.display())))?;
    let centers = centers
        .into_iter()
        .map(Direction::new)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(path.to_path_buf(), e))?;
    if centers.is_empty() {
        return Err(CliError::Other(format!("{}: no cell centers", path.display())));
    }
    Ok(CapPartition::from_centers(centers))
}

fn write_regvar_csv(path: &Path, m: &LevyMeasure, est: &RVEstimate, partition: &CapPartition) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Other(format!("{}: {e}", path.display()));
    let mut share = vec![0.0; partition.len()];
    for (u, w) in est.sigma_hat.atoms() {
        share[partition.index_of(u)] += w;
    }
    let total: f64 = share.iter().sum();
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["r", "tail", "cap_id", "ratio", "prediction"]).map_err(io)?;
    for &r in &est.grid {
        let cells = m.tail_mass_partition(r, partition)?;
        let all: f64 = cells.iter().sum();
        for (k, tail) in cells.iter().enumerate() {
            w.write_record([
                r.to_string(),
                tail.to_string(),
                k.to_string(),
                (tail / all).to_string(),
                (share[k] / total).to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))
}

#[derive(Serialize)]
struct SimulationMeta {
    law: Value,
    t: f64,
    n: usize,
    seed: u64,
    blocks: usize,
    dim: usize,
    eps: f64,
    bias_bound: f64,
    jump_rate: f64,
    samples: String,
}

/// Sidecar path: `samples.csv` becomes `samples.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn simulate(law_path: &Path, t: f64, n: usize, eps: Option<f64>, seed: u64, blocks: usize, out: &Path) -> CliResult<bool> {
    let law = read_law(law_path)?;
    let mut cfg = SimConfig::new(t, n, seed).with_blocks(blocks);
    if let Some(e) = eps {
        cfg = cfg.with_eps(e);
    }
    let samples = sample_increment(&law, &cfg)?;
    let io = |e: csv::Error| CliError::Other(format!("{}: {e}", out.display()));
    let mut w = csv::Writer::from_path(out).map_err(io)?;
    let mut header = vec!["sample_id".to_string()];
    header.extend((1..=samples.dim).map(|k| format!("x_{k}")));
    w.write_record(&header).map_err(io)?;
    for (i, row) in samples.rows().enumerate() {
        let mut record = vec![i.to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let meta = SimulationMeta {
        law: serde_json::from_str(&law_to_json(&law)).expect("law JSON is valid"),
        t,
        n,
        seed,
        blocks,
        dim: samples.dim,
        eps: samples.eps,
        bias_bound: samples.bias_bound,
        jump_rate: samples.jump_rate,
        samples: out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let side = sidecar_path(out);
    write(&side, &format!("{}\n", serde_json::to_string_pretty(&meta).expect("metadata serialization")))?;
    Ok(true)
}

fn seq_check(dir: &Path, mode: SeqMode, gamma: f64, tol: f64) -> CliResult<bool> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let limit_path = dir.join("limit.json");
    if !files.contains(&limit_path) {
        return Err(CliError::Other(format!("{}: missing limit.json", dir.display())));
    }
    files.retain(|p| p != &limit_path);
    let limit = read_term(&limit_path)?;
    let terms = files.iter().map(|p| read_term(p)).collect::<CliResult<Vec<_>>>()?;
    let mode = match mode {
        SeqMode::Id0 => SequenceMode::Id0,
        SeqMode::Ts => SequenceMode::Ts,
    };
    let report = sequence_convergence_check(&terms, &limit, mode, gamma, tol)?;
    print_json(&report);
    Ok(report.pass())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        let g = parse_grid("geom:1e-3:1e-1:3").unwrap().0;
        assert_eq!(g.len(), 3);
        assert!((g[1] - 1e-2).abs() < 1e-15);
        assert!(parse_grid("lin:1:2:3").is_err());
        assert!(parse_grid("geom:0:1:3").is_err());
        assert!(parse_grid("geom:1:2").is_err());
    }

    #[test]
    fn rounding_for_display() {
        assert_eq!(round_display(0.9999999999999998), "1.0");
        assert_eq!(round_display(0.25), "0.25");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("a/samples.csv")), PathBuf::from("a/samples.meta.json"));
    }
}
