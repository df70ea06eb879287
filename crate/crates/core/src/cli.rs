//! Command-line front end.
//!
//! ```text
//! twodesign [--out PATH] [--format json|csv] <command>
//!   design-check  (--exact | --approx) --n N [--trials T] [--reps R] [--samples M] [--seed S] [--tolerance t]
//!   twirl         --channel FILE
//!   converge      (--exact | --traj) --n N [--reps R] [--start LABEL] [--trajectories M] [--seed S]
//!   fidelity      --channel FILE [--exact | --approx] [--reps R] [--shots N] [--level L] [--seed S]
//! ```
//!
//! A relative `--out` path is resolved against `TWODESIGN_OUT_DIR` when that
//! variable is set. Exit status is 0 when every declared tolerance holds, 1
//! when a tolerance fails, and 2 on errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::approx::{convergence_exact, convergence_trajectories, sample_design_ensemble};
use crate::clifford::enumerate_clifford;
use crate::dense::{
    ensemble_twirl_map, haar_twirl_map, max_abs_diff, random_matrix, random_unit_matrix, Ensemble, KrausChannel,
};
use crate::error::{Error, Result};
use crate::fidelity::{
    estimate_average_fidelity, ApproxSampler, DesignSampler, ExactCliffordSampler, FidelityRecord, NoiseScenario,
};
use crate::pauli::{Pauli, PauliLabel};
use crate::rng::{stream_rng, streams};
use crate::twirl::{clifford_uniformize, depolarizing_parameter, pauli_twirl_channel, PauliDistribution};

/// Environment variable giving the directory for relative `--out` paths.
pub const OUT_DIR_ENV: &str = "TWODESIGN_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "twodesign", version, about = "Exact and approximate unitary 2-designs")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare an ensemble twirl against the Haar twirl on random operators.
    DesignCheck(DesignCheckArgs),
    /// Pauli-twirl a channel file and report the depolarizing parameter.
    Twirl(TwirlArgs),
    /// Label-distribution convergence of the repeated basic procedure.
    Converge(ConvergeArgs),
    /// Simulate the randomized average-fidelity experiment.
    Fidelity(FidelityArgs),
}

#[derive(Debug, Args)]
#[group(id = "design", required = true, multiple = false)]
pub struct DesignModeArgs {
    #[arg(long, group = "design")]
    pub exact: bool,
    #[arg(long, group = "design")]
    pub approx: bool,
}

#[derive(Debug, Args)]
pub struct DesignCheckArgs {
    #[command(flatten)]
    pub mode: DesignModeArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to 1e-10 (exact, n = 1), 1e-9 (exact, n = 2), or 5/sqrt(samples).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TwirlArgs {
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "chain", required = true, multiple = false)]
pub struct ChainModeArgs {
    #[arg(long, group = "chain")]
    pub exact: bool,
    #[arg(long, group = "chain")]
    pub traj: bool,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub mode: ChainModeArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    /// Full label (`XII`) or sparse form (`X1`, `X1Z3`); qubits are 1-based.
    #[arg(long, default_value = "X1")]
    pub start: String,
    #[arg(long, default_value_t = 10_000)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, conflicts_with = "approx")]
    pub exact: bool,
    #[arg(long)]
    pub approx: bool,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0.99)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A rendered report plus whether its tolerances held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Parses a start label for an `n`-qubit register: a full `{I,X,Y,Z}` string of
/// length `n`, a bare `I`, or symbol/position pairs such as `X1Z3`.
pub fn parse_start(n: usize, text: &str) -> Result<PauliLabel> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("I") {
        return Ok(PauliLabel::identity(n));
    }
    if text.chars().count() == n && text.chars().all(|ch| "IXYZixyz".contains(ch)) {
        return text.parse();
    }
    let mut label = PauliLabel::identity(n);
    let mut chars = text.chars().peekable();
    while let Some(sym) = chars.next() {
        let p = match sym.to_ascii_uppercase() {
            'I' => Pauli::I,
            'X' => Pauli::X,
            'Y' => Pauli::Y,
            'Z' => Pauli::Z,
            other => return Err(Error::Parse(format!("invalid Pauli symbol {other:?} in {text:?}"))),
        };
        let mut digits = String::new();
        while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            digits.push(*d);
            chars.next();
        }
        let q: usize = digits
            .parse()
            .map_err(|_| Error::Parse(format!("missing qubit index after {sym:?} in {text:?}")))?;
        if q == 0 || q > n {
            return Err(Error::Parse(format!("qubit {q} outside 1..={n}")));
        }
        label.set(q - 1, p);
    }
    Ok(label)
}

#[derive(Debug, Serialize)]
struct DesignCheckReport {
    mode: &'static str,
    n: usize,
    trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    repetitions: Option<usize>,
    ensemble_size: usize,
    seed: u64,
    tolerance: f64,
    deviations: Vec<f64>,
    max_deviation: f64,
    passed: bool,
}

fn design_check(args: &DesignCheckArgs, format: Format) -> Result<Outcome> {
    let n = args.n;
    if args.trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let mut triples = stream_rng(args.seed, streams::DESIGN_CHECK);
    let (ensemble, tolerance, unit, reps) = if args.mode.exact {
        let members = enumerate_clifford(n)?
            .iter()
            .map(|e| e.unitary())
            .collect::<Result<Vec<_>>>()?;
        let tol = args.tolerance.unwrap_or(if n == 1 { 1e-10 } else { 1e-9 });
        (Ensemble::uniform(members)?, tol, false, None)
    } else {
        if !(2..=3).contains(&n) {
            return Err(Error::Capacity(format!("approximate design check supports 2 <= n <= 3, got {n}")));
        }
        if args.samples == 0 {
            return Err(Error::Domain("need at least one sample".into()));
        }
        let mut rng = stream_rng(args.seed, streams::ENSEMBLE);
        let ens = sample_design_ensemble(n, args.reps, args.samples, &mut rng)?;
        let tol = args.tolerance.unwrap_or(5.0 / (args.samples as f64).sqrt());
        (ens, tol, true, Some(args.reps))
    };
    let dim = 1usize << n;
    let mut deviations = Vec::with_capacity(args.trials);
    for _ in 0..args.trials {
        let mut draw = || {
            if unit {
                random_unit_matrix(dim, &mut triples)
            } else {
                random_matrix(dim, &mut triples)
            }
        };
        let (a, b, x) = (draw(), draw(), draw());
        let lhs = ensemble_twirl_map(&ensemble, &a, &b, &x)?;
        let rhs = haar_twirl_map(&a, &b, &x)?;
        deviations.push(max_abs_diff(&lhs, &rhs));
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let report = DesignCheckReport {
        mode: if args.mode.exact { "exact" } else { "approx" },
        n,
        trials: args.trials,
        repetitions: reps,
        ensemble_size: ensemble.len(),
        seed: args.seed,
        tolerance,
        passed: max_deviation <= tolerance,
        deviations,
        max_deviation,
    };
    let body = match format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut out = String::from("trial,deviation,tolerance\n");
            for (i, d) in report.deviations.iter().enumerate() {
                out.push_str(&format!("{},{:.6e},{:.6e}\n", i + 1, d, tolerance));
            }
            out
        }
    };
    let notes = if report.passed {
        Vec::new()
    } else {
        vec![format!("max deviation {max_deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    };
    Ok(Outcome {
        body,
        passed: report.passed,
        notes,
    })
}

fn sparse_map(d: &PauliDistribution) -> BTreeMap<String, f64> {
    d.weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w.abs() > 1e-15)
        .map(|(i, &w)| (PauliLabel::from_index(d.num_qubits(), i).to_string(), w))
        .collect()
}

#[derive(Debug, Serialize)]
struct TwirlReport {
    n: usize,
    pauli_twirl: BTreeMap<String, f64>,
    uniformized: BTreeMap<String, f64>,
    depolarizing_parameter: f64,
}

fn twirl(args: &TwirlArgs, format: Format) -> Result<Outcome> {
    let ch = KrausChannel::load(&args.channel)?;
    let dist = pauli_twirl_channel(&ch)?;
    let uni = clifford_uniformize(&dist);
    let p = depolarizing_parameter(&dist);
    let body = match format {
        Format::Json => json(&TwirlReport {
            n: ch.num_qubits(),
            pauli_twirl: sparse_map(&dist),
            uniformized: sparse_map(&uni),
            depolarizing_parameter: p,
        })?,
        Format::Csv => {
            let mut out = String::from("label,pauli_twirl,uniformized\n");
            for (i, (w, u)) in dist.weights().iter().zip(uni.weights()).enumerate() {
                let label = PauliLabel::from_index(ch.num_qubits(), i);
                out.push_str(&format!("{label},{w:.12e},{u:.12e}\n"));
            }
            out.push_str(&format!("# depolarizing_parameter={p:.12e}\n"));
            out
        }
    };
    Ok(Outcome {
        body,
        passed: true,
        notes: Vec::new(),
    })
}

fn converge(args: &ConvergeArgs, format: Format) -> Result<Outcome> {
    let start = parse_start(args.n, &args.start)?;
    if args.mode.exact {
        let report = convergence_exact(&start, args.reps)?;
        let notes = vec![format!(
            "very_good_prob={:.12e} fitted_c={:.12e} fitted_rate={}",
            report.very_good_prob,
            report.fitted_c,
            report.fitted_rate.map_or("none".to_string(), |r| format!("{r:.12e}"))
        )];
        let body = match format {
            Format::Csv => report.to_csv(),
            Format::Json => json(&report)?,
        };
        Ok(Outcome {
            body,
            passed: true,
            notes,
        })
    } else {
        let report = convergence_trajectories(&start, args.reps, args.trajectories, args.seed)?;
        let body = match format {
            Format::Csv => report.to_csv(),
            Format::Json => {
                #[derive(Serialize)]
                struct Summary<'a> {
                    n: usize,
                    start: &'a str,
                    repetitions: usize,
                    trajectories: usize,
                    seed: u64,
                    marginal_tvd: Vec<f64>,
                    identity_fraction: Vec<f64>,
                    gate_count_mean: &'a [f64],
                }
                json(&Summary {
                    n: report.n,
                    start: &report.start,
                    repetitions: report.repetitions,
                    trajectories: report.trajectories,
                    seed: report.seed,
                    marginal_tvd: (0..=report.repetitions).map(|r| report.marginal_tvd(r)).collect(),
                    identity_fraction: report
                        .identity_hits
                        .iter()
                        .map(|&h| h as f64 / report.trajectories as f64)
                        .collect(),
                    gate_count_mean: &report.gate_count_mean,
                })?
            }
        };
        Ok(Outcome {
            body,
            passed: true,
            notes: Vec::new(),
        })
    }
}

fn fidelity(args: &FidelityArgs, format: Format) -> Result<Outcome> {
    let ch = KrausChannel::load(&args.channel)?;
    let id = args
        .channel
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut scenario = NoiseScenario::new(ch)?;
    let (sampler, reps): (Box<dyn DesignSampler>, Option<usize>) = if args.approx {
        if scenario.num_qubits() < 2 {
            scenario = scenario.pad(2 - scenario.num_qubits())?;
        }
        let n = scenario.num_qubits();
        (Box::new(ApproxSampler { n, repetitions: args.reps }), Some(args.reps))
    } else {
        (Box::new(ExactCliffordSampler::new(scenario.num_qubits())?), None)
    };
    let est = estimate_average_fidelity(&scenario, args.shots, sampler.as_ref(), args.seed, args.level)?;
    let record = FidelityRecord::new(&scenario, &id, sampler.as_ref(), reps, &est, args.seed)?;
    let body = match format {
        Format::Json => json(&record)?,
        Format::Csv => {
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.12e}"));
            format!(
                "n,channel_id,design,repetitions,shots,mean,confidence_radius,confidence_level,exact_value,seed,gate_fidelity,entanglement_fidelity\n{},{},{},{},{},{:.12e},{:.12e},{},{},{},{:.12e},{:.12e}\n",
                record.n,
                record.channel_id,
                record.design,
                record.repetitions.map_or(String::new(), |r| r.to_string()),
                record.shots,
                record.mean,
                record.confidence_radius,
                record.confidence_level,
                opt(record.exact_value),
                record.seed,
                record.gate_fidelity,
                record.entanglement_fidelity
            )
        }
    };
    Ok(Outcome {
        body,
        passed: true,
        notes: Vec::new(),
    })
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Runs a parsed command and renders its report.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::DesignCheck(a) => design_check(a, cli.format.unwrap_or(Format::Json)),
        Command::Twirl(a) => twirl(a, cli.format.unwrap_or(Format::Json)),
        Command::Converge(a) => converge(a, cli.format.unwrap_or(Format::Csv)),
        Command::Fidelity(a) => fidelity(a, cli.format.unwrap_or(Format::Json)),
    }
}

/// Final location of `--out`, honoring the output-directory variable.
pub fn resolve_out(path: &Path, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Parses `args`, runs the command, writes the report, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    let written = match &cli.out {
        Some(path) => {
            let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
            let target = resolve_out(path, dir.as_deref());
            if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    eprintln!("error: {e}");
                    return 2;
                }
            }
            std::fs::write(&target, &outcome.body)
        }
        None => std::io::stdout().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if outcome.passed {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("twodesign").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn start_labels() {
        assert_eq!(parse_start(3, "X1").unwrap().to_string(), "XII");
        assert_eq!(parse_start(3, "X1Z3").unwrap().to_string(), "XIZ");
        assert_eq!(parse_start(3, "IYI").unwrap().to_string(), "IYI");
        assert!(parse_start(2, "I").unwrap().is_identity());
        assert!(parse_start(2, "X3").is_err());
        assert!(parse_start(2, "Q1").is_err());
        assert!(parse_start(2, "X").is_err());
    }

    #[test]
    fn design_check_exact_passes() {
        let out = execute(&parse(&["design-check", "--exact", "--n", "1", "--trials", "20", "--seed", "7"])).unwrap();
        assert!(out.passed);
    }

    #[test]
    fn design_check_exact_n3_is_a_capacity_error() {
        let err = execute(&parse(&["design-check", "--exact", "--n", "3"])).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn modes_are_exclusive_and_required() {
        let bad = Cli::try_parse_from(["twodesign", "design-check", "--exact", "--approx", "--n", "1"]);
        assert!(bad.is_err());
        assert!(Cli::try_parse_from(["twodesign", "converge", "--n", "2"]).is_err());
    }

    #[test]
    fn converge_identity_start_is_all_zero() {
        let out = execute(&parse(&["converge", "--exact", "--n", "2", "--start", "I"])).unwrap();
        for line in out.body.lines().skip(1) {
            let tvd: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert_eq!(tvd, 0.0);
        }
    }

    #[test]
    fn out_dir_resolution() {
        let dir = Path::new("/tmp/reports");
        assert_eq!(resolve_out(Path::new("a.csv"), Some(dir)), dir.join("a.csv"));
        assert_eq!(resolve_out(Path::new("/x/a.csv"), Some(dir)), PathBuf::from("/x/a.csv"));
        assert_eq!(resolve_out(Path::new("a.csv"), None), PathBuf::from("a.csv"));
    }
}
