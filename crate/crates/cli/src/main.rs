//! `nearclifford` command-line front end. Each subcommand reads a JSON config,
//! calls the library and writes CSV or JSON.
//!
//! Exit codes: 0 on success, 1 on config and other errors, 2 when a resource guard
//! refuses the work.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nearclifford::experiments::{
    self, config_error, CancellationSweepConfig, ComplexitySweepConfig, ExperimentConfig,
    ObservableModel, ThresholdConfig,
};
use nearclifford::surrogate::{complexity_estimate_with, worst_case_threshold, ComplexityConfig};
use nearclifford::table::{emit_csv, write_csv, Provenance, Table};
use nearclifford::{
    beta, build_ansatz, construct_lce, gradient_at_zero, lce_transform, AnsatzSpec, Error,
    PauliObservable, PauliString,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "nearclifford",
    version,
    about = "Near-Clifford analysis of parameterized circuits"
)]
struct Cli {
    /// Worker threads for experiment runs.
    #[arg(long, global = true, env = "NEARCLIFFORD_THREADS")]
    threads: Option<usize>,
    /// Print errors as JSON objects on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Progress and summary lines on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gradient norms at θ = 0 or on a sampled patch, with and without the encoder.
    GradScaling(Io),
    /// Gradient-descent traces.
    Vqe(Io),
    /// Gradient-descent traces on the Heisenberg chain.
    Heisenberg(Io),
    /// Surrogate construction cost across families. Wall times go to `<out>.timing.csv`.
    Surrogate(Io),
    /// Worst-case truncation order, or with --config the expected-order grid.
    Threshold {
        #[arg(long, conflicts_with_all = ["l1", "norm", "eps"])]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, required_unless_present = "config")]
        l1: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        norm: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        eps: Option<f64>,
    },
    /// Operation-count regime of surrogate construction.
    Complexity {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        terms: usize,
        #[arg(long)]
        l1: f64,
        /// Optional JSON file with regime boundaries.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Build an encoder pair and verify the encoded gradient component.
    Lce {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cancellation frequency across sizes.
    Cancellation(Io),
}

/// A Pauli word or a full observable.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ObservableSpec {
    Word(PauliString),
    Full(PauliObservable),
}

#[derive(Debug, Deserialize)]
struct LceCommandConfig {
    ansatz: AnsatzSpec,
    observable: ObservableSpec,
    k: usize,
    #[serde(default)]
    i0: usize,
    /// Prepend an X flip when the natural sign is negative.
    #[serde(default)]
    positive_sign: bool,
}

#[derive(Debug, Serialize)]
struct Verification {
    k: usize,
    i0: usize,
    coefficient: f64,
    gradient_component: f64,
    beta: f64,
}

#[derive(Debug, Serialize)]
struct LceOutput {
    pair: serde_json::Value,
    achieved_sign: i8,
    verification: Verification,
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| match config_error(&e) {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn emit(table: &Table, prov: &Provenance, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => write_csv(table, prov, p),
        None => emit_csv(table, prov, std::io::stdout().lock()),
    }
}

fn write_text(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut s = std::io::stdout().lock();
            writeln!(s, "{text}").map_err(|e| Error::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            })
        }
    }
}

fn experiment_config(io: &Io) -> Result<ExperimentConfig, Error> {
    let mut cfg: ExperimentConfig = read_config(&io.config)?;
    if let Some(s) = io.seed {
        cfg.seeds.master = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn timing_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".timing.csv");
    out.with_file_name(name)
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    let verbose = cli.verbose > 0;
    match &cli.command {
        Command::GradScaling(io) => {
            let cfg = experiment_config(io)?;
            let rows = experiments::gradient_scaling(&cfg)?;
            if verbose {
                eprintln!("{} rows", rows.len());
            }
            emit(
                &experiments::grad_scaling_table(&rows),
                &Provenance::new(&cfg, cfg.seeds.master),
                io.out.as_deref(),
            )?;
        }
        Command::Vqe(io) | Command::Heisenberg(io) => {
            let mut cfg = experiment_config(io)?;
            if matches!(cli.command, Command::Heisenberg(_)) {
                cfg.observable_model = ObservableModel::Heisenberg;
                cfg.validate()?;
            }
            let results = experiments::vqe_experiment(&cfg)?;
            if verbose {
                let (plain, lce) = experiments::mean_final_costs(&results);
                eprintln!("mean final cost: without encoder {plain}, with encoder {lce}");
            }
            emit(
                &experiments::vqe_table(&results),
                &Provenance::new(&cfg, cfg.seeds.master),
                io.out.as_deref(),
            )?;
        }
        Command::Surrogate(io) => {
            let mut cfg: ComplexitySweepConfig = read_config(&io.config)?;
            if let Some(s) = io.seed {
                cfg.seeds.master = s;
            }
            cfg.validate()?;
            let rows = experiments::surrogate_complexity_sweep(&cfg)?;
            let prov = Provenance::new(&cfg, cfg.seeds.master);
            if verbose {
                for (n, m, r) in experiments::eval_count_ratios(&rows) {
                    eprintln!("N={n} m={m}: fHEA/mHEA eval-count ratio {r:.4}");
                }
            }
            if rows.iter().any(|r| r.flagged) {
                eprintln!("warning: some rows exceeded the index budget and are flagged");
            }
            emit(
                &experiments::complexity_table(&rows),
                &prov,
                io.out.as_deref(),
            )?;
            if let Some(out) = &io.out {
                write_csv(
                    &experiments::complexity_timing_table(&rows),
                    &prov,
                    &timing_path(out),
                )?;
            }
        }
        Command::Threshold {
            config: Some(path),
            out,
            seed,
            ..
        } => {
            let mut cfg: ThresholdConfig = read_config(path)?;
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let rows = experiments::threshold_phase_diagram(&cfg)?;
            if verbose {
                for (r, s) in experiments::fit_slopes(&rows) {
                    eprintln!("r={r}: log-log slope {s:.4}");
                }
            }
            emit(
                &experiments::threshold_table(&rows),
                &Provenance::new(&cfg, cfg.seed),
                out.as_deref(),
            )?;
        }
        Command::Threshold { l1, norm, eps, .. } => {
            let (l1, norm, eps) = (
                l1.expect("required"),
                norm.expect("required"),
                eps.expect("required"),
            );
            let m = worst_case_threshold(l1, norm, eps)?;
            println!("m={m}");
        }
        Command::Complexity {
            d,
            terms,
            l1,
            config,
        } => {
            let cfg = match config {
                Some(p) => read_config(p)?,
                None => ComplexityConfig::default(),
            };
            let report = complexity_estimate_with(*d, *terms, *l1, &cfg)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
        Command::Lce { config, out } => {
            let cfg: LceCommandConfig = read_config(config)?;
            let circuit = build_ansatz(&cfg.ansatz)?;
            let obs = match cfg.observable {
                ObservableSpec::Word(p) => PauliObservable::single(p)?,
                ObservableSpec::Full(o) => o,
            };
            let mut pair = construct_lce(&circuit, &obs, cfg.k, cfg.i0)?;
            if cfg.positive_sign {
                pair = pair.with_positive_sign(&circuit, &obs)?;
            }
            let encoded = lce_transform(&circuit, &pair)?;
            let grad = gradient_at_zero(&encoded, &obs)?;
            let output = LceOutput {
                pair: serde_json::to_value(&pair).expect("pair serializes"),
                achieved_sign: pair.achieved_sign,
                verification: Verification {
                    k: pair.k,
                    i0: pair.i0,
                    coefficient: obs.terms()[pair.i0].0,
                    gradient_component: grad[pair.k],
                    beta: beta(&circuit, &obs, &pair)?,
                },
            };
            write_text(
                &serde_json::to_string_pretty(&output).expect("output serializes"),
                out.as_deref(),
            )?;
        }
        Command::Cancellation(io) => {
            let mut cfg: CancellationSweepConfig = read_config(&io.config)?;
            if let Some(s) = io.seed {
                cfg.seed = s;
            }
            let table = experiments::cancellation_sweep(&cfg)?;
            emit(&table, &Provenance::new(&cfg, cfg.seed), io.out.as_deref())?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource { .. } => 2,
        _ => 1,
    }
}

fn report(e: &Error, json: bool) {
    let code = exit_code(e);
    if json {
        let mut obj =
            serde_json::json!({ "kind": e.kind(), "message": e.to_string(), "exit_code": code });
        if let Error::Resource { log_estimate, .. } = e {
            obj["log_estimate"] = serde_json::json!(log_estimate);
        }
        eprintln!("{obj}");
    } else {
        eprintln!("error: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            let err = Error::Config(format!("cannot configure {n} threads: {e}"));
            report(&err, cli.json_errors);
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            report(&error, cli.json_errors);
            ExitCode::from(exit_code(&error))
        }
    }
}
