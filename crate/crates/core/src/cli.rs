//! Command-line surface: reproducible file-based runs of the branch
//! assembly, profile verification, simulation and hysteresis sweeps.
//!
//! Exit codes: 0 success, 1 runtime failure (integration error), 2 invalid
//! configuration. `SINGULAR_DDE_THREADS` caps worker concurrency (the
//! sweep command runs its two directions concurrently when allowed).

use crate::algebra::{construct, BranchIndex, ModelParams, SolutionKind};
use crate::analysis::{self, RunOptions, SweepResult};
use crate::branch::{assemble, cusp_locus};
use crate::export;
use crate::profiles::{parametrisation, profile_of, verify_parametrisation, DEFAULT_GRID};
use crate::simulator::{integrate, HistorySpec, StepControl};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "singular-dde",
    about = "Singular periodic solutions and simulation of a two state-dependent-delay DDE",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model parameters shared by every subcommand. Either `--a2` or the ratio
/// `--A` (with a1 defaulting to 1) fixes the delay offsets.
#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Perturbation parameter (ignored by the eps = 0 commands).
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Gain on the first delayed term (the bifurcation parameter).
    #[arg(long, alias = "K1", default_value_t = 4.0)]
    k1: f64,
    /// Gain on the second delayed term, in (0, 1).
    #[arg(long, alias = "K2", default_value_t = 0.5)]
    k2: f64,
    /// First delay offset.
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    /// Second delay offset (alternative to --A).
    #[arg(long)]
    a2: Option<f64>,
    /// Delay-offset ratio A = a2/a1.
    #[arg(long = "A", short = 'A')]
    ratio: Option<f64>,
    /// Slope of the state dependence of the delays.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Reserved; accepted and recorded in output headers but unused by the
    /// deterministic commands.
    #[arg(long)]
    seed: Option<u64>,
}

impl ModelArgs {
    fn config_extra(&self) -> Vec<(&'static str, String)> {
        match self.seed {
            Some(seed) => vec![("seed", seed.to_string())],
            None => Vec::new(),
        }
    }

    fn resolve(&self) -> Result<ModelParams, String> {
        let a2 = match (self.a2, self.ratio) {
            (Some(a2), None) => a2,
            (None, Some(a)) => a * self.a1,
            (Some(a2), Some(a)) => {
                if (a2 - a * self.a1).abs() > 1e-12 * a2.abs().max(1.0) {
                    return Err(format!(
                        "--a2 {a2} conflicts with --A {a} (a1 = {})",
                        self.a1
                    ));
                }
                a2
            }
            (None, None) => return Err("one of --a2 or --A is required".to_string()),
        };
        ModelParams::new(self.eps, self.k1, self.k2, self.a1, a2, self.c)
            .map_err(|e| e.to_string())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble the singular branch for one n: legs, gaps and fold points.
    Legs {
        #[command(flatten)]
        model: ModelArgs,
        /// Branch index n.
        #[arg(long, default_value_t = 0)]
        n: u32,
        /// Scan cap for leg boundaries.
        #[arg(long = "k1-max", default_value_t = 50.0)]
        k1_max: f64,
        /// K1 samples per leg in the CSV.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Output prefix: writes <out>.csv and <out>.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Construct one singular solution, export its profile and inner
    /// parametrisation, and verify the solution conditions on a grid.
    Profile {
        #[command(flatten)]
        model: ModelArgs,
        /// unimodal | type-i | type-ii
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Verification grid points per piece.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Output prefix: writes <out>.profile.csv,
        /// <out>.parametrisation.csv and <out>.verify.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the eps > 0 equation and extract orbit metrics.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "t-end", default_value_t = 200.0)]
        t_end: f64,
        /// cold | constant:<u0> | sinusoid:<amp>:<period>:<offset> |
        /// warm:<kind>:<n>:<m>
        #[arg(long, default_value = "cold")]
        history: String,
        /// Fixed base step (default min(eps/10, a1(1+K1+K2)/400)).
        #[arg(long)]
        step: Option<f64>,
        /// Keep every STRIDE-th step in the trajectory CSV.
        #[arg(long, default_value_t = 10)]
        stride: usize,
        /// Fraction of the run analysed for the metrics.
        #[arg(long = "tail-fraction", default_value_t = 0.5)]
        tail_fraction: f64,
        /// Output prefix: writes <out>.csv and <out>.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Warm-started K1 sweeps for hysteresis detection.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 60)]
        steps: usize,
        /// up | down | both
        #[arg(long, default_value = "both")]
        direction: String,
        /// Integration cap per sample.
        #[arg(long = "t-max", default_value_t = 400.0)]
        t_max: f64,
        /// Output path for the sweep CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Parameter point (A, K1) where the fold at L_{n,m-1} disappears.
    Cusp {
        #[arg(long, default_value_t = 0.5)]
        k2: f64,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long)]
        m: u32,
        /// Optional output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<SolutionKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "unimodal" => Ok(SolutionKind::Unimodal),
        "type-i" | "typei" | "i" => Ok(SolutionKind::TypeI),
        "type-ii" | "typeii" | "ii" => Ok(SolutionKind::TypeII),
        other => Err(format!("unknown solution kind '{other}'")),
    }
}

fn parse_history(s: &str, params: &ModelParams) -> Result<HistorySpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[0] {
        "cold" => Ok(HistorySpec::cold(params)),
        "constant" => {
            let u0 = parts
                .get(1)
                .ok_or("constant history needs a value: constant:<u0>")?
                .parse::<f64>()
                .map_err(|e| e.to_string())?;
            Ok(HistorySpec::Constant(u0))
        }
        "sinusoid" => {
            let get = |i: usize, name: &str| -> Result<f64, String> {
                parts
                    .get(i)
                    .ok_or_else(|| format!("sinusoid history needs {name}"))?
                    .parse::<f64>()
                    .map_err(|e| e.to_string())
            };
            Ok(HistorySpec::Sinusoid {
                amplitude: get(1, "amplitude")?,
                period: get(2, "period")?,
                offset: get(3, "offset")?,
            })
        }
        "warm" => {
            let kind = parse_kind(parts.get(1).ok_or("warm history needs a kind")?)?;
            let n = parts
                .get(2)
                .ok_or("warm history needs n")?
                .parse::<u32>()
                .map_err(|e| e.to_string())?;
            let m = parts
                .get(3)
                .ok_or("warm history needs m")?
                .parse::<u32>()
                .map_err(|e| e.to_string())?;
            let sol = construct(params, BranchIndex::new(n, m), kind)
                .map_err(|e| format!("warm start solution: {e}"))?;
            Ok(HistorySpec::warm_start(sol))
        }
        other => Err(format!("unknown history '{other}'")),
    }
}

fn worker_threads() -> usize {
    std::env::var("SINGULAR_DDE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(2)
}

/// Runs the CLI; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            1
        }
    }
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io: {e}"))
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Legs { model, n, k1_max, samples, out } => {
            let params = model.resolve().map_err(CliError::Config)?;
            let branch = assemble(&params, n, k1_max);
            let mut extra = vec![
                ("cmd", "legs".to_string()),
                ("n", n.to_string()),
                ("k1_max", export::fmt_f64(k1_max)),
                ("samples", samples.to_string()),
            ];
            extra.extend(model.config_extra());
            let config = export::config_line(&params, &extra);
            let csv = export::branch_csv(&params, &branch, samples, k1_max, &config);
            export::write_text(&out.with_extension("csv"), &csv)?;
            let json = export::bifurcation_json(&params, &branch, &config);
            export::write_text(&out.with_extension("json"), &json)?;
            println!(
                "wrote {} and {} ({} bifurcation points)",
                out.with_extension("csv").display(),
                out.with_extension("json").display(),
                branch.points.len()
            );
            Ok(())
        }
        Command::Profile { model, kind, n, m, grid, out } => {
            let params = model.resolve().map_err(CliError::Config)?;
            let kind = parse_kind(&kind).map_err(CliError::Config)?;
            let idx = BranchIndex::new(n, m);
            let sol = construct(&params, idx, kind)
                .map_err(|e| CliError::Config(format!("no singular solution here: {e}")))?;
            let profile =
                profile_of(&params, &sol).map_err(|e| CliError::Runtime(e.to_string()))?;
            let parm =
                parametrisation(&params, &sol).map_err(|e| CliError::Runtime(e.to_string()))?;
            let report = verify_parametrisation(&profile, &parm, grid);
            let mut extra = vec![
                ("cmd", "profile".to_string()),
                ("kind", kind.label().to_string()),
                ("n", n.to_string()),
                ("m", m.to_string()),
                ("grid", grid.to_string()),
            ];
            extra.extend(model.config_extra());
            let config = export::config_line(&params, &extra);
            let base = out.as_os_str().to_string_lossy().to_string();
            export::write_text(
                &PathBuf::from(format!("{base}.profile.csv")),
                &export::profile_csv(&profile, grid, &config),
            )?;
            export::write_text(
                &PathBuf::from(format!("{base}.parametrisation.csv")),
                &export::parametrisation_csv(&profile, &parm, grid, &config),
            )?;
            export::write_text(
                &PathBuf::from(format!("{base}.verify.json")),
                &export::verification_json(&sol, &report, &config),
            )?;
            println!(
                "verification {}: residual {:.3e}, max|F| on J* {:.3e}",
                if report.pass { "PASS" } else { "FAIL" },
                report.max_delay_identity_residual,
                report.max_abs_f_on_jstar
            );
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Runtime("profile verification failed".to_string()))
            }
        }
        Command::Simulate { model, t_end, history, step, stride, tail_fraction, out } => {
            let params = model.resolve().map_err(CliError::Config)?;
            if params.eps <= 0.0 {
                return Err(CliError::Config("simulate requires eps > 0".to_string()));
            }
            let start = parse_history(&history, &params).map_err(CliError::Config)?;
            let control = StepControl { step, output_stride: stride };
            let traj = integrate(&params, start, t_end, control)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut extra = vec![
                ("cmd", "simulate".to_string()),
                ("t_end", export::fmt_f64(t_end)),
                ("history", history.clone()),
                ("stride", stride.to_string()),
            ];
            extra.extend(model.config_extra());
            let config = export::config_line(&params, &extra);
            export::write_text(
                &out.with_extension("csv"),
                &export::trajectory_csv(&traj, &config),
            )?;
            match analysis::extract_with(&traj, tail_fraction, &params) {
                Ok(metrics) => {
                    export::write_text(
                        &out.with_extension("json"),
                        &export::metrics_json(&metrics, &config),
                    )?;
                    println!(
                        "period {:.6}, amplitude {:.6}, modality {}, converged {}",
                        metrics.period, metrics.amplitude, metrics.modality, metrics.converged
                    );
                    Ok(())
                }
                Err(e) => Err(CliError::Runtime(e.to_string())),
            }
        }
        Command::Sweep { model, from, to, steps, direction, t_max, out } => {
            let params = model.resolve().map_err(CliError::Config)?;
            if steps < 2 {
                return Err(CliError::Config("sweep needs at least 2 steps".to_string()));
            }
            let opts = RunOptions { t_max, ..Default::default() };
            let eps = params.eps;
            let runs: Vec<(f64, f64)> = match direction.as_str() {
                "up" => vec![(from.min(to), from.max(to))],
                "down" => vec![(from.max(to), from.min(to))],
                "both" => vec![(from.min(to), from.max(to)), (from.max(to), from.min(to))],
                other => {
                    return Err(CliError::Config(format!("unknown direction '{other}'")));
                }
            };
            let results: Vec<SweepResult> = if runs.len() == 2 && worker_threads() >= 2 {
                let p2 = params;
                let (r0, r1) = (runs[0], runs[1]);
                let handle =
                    std::thread::spawn(move || analysis::sweep(&p2, r1.0, r1.1, steps, eps, &opts));
                let first = analysis::sweep(&params, r0.0, r0.1, steps, eps, &opts);
                let second = handle.join().expect("sweep worker panicked");
                vec![first, second]
            } else {
                runs.iter()
                    .map(|&(a, b)| analysis::sweep(&params, a, b, steps, eps, &opts))
                    .collect()
            };
            let mut extra = vec![
                ("cmd", "sweep".to_string()),
                ("from", export::fmt_f64(from)),
                ("to", export::fmt_f64(to)),
                ("steps", steps.to_string()),
                ("direction", direction.clone()),
            ];
            extra.extend(model.config_extra());
            let config = export::config_line(&params, &extra);
            export::write_text(&out, &export::sweep_csv(&results, &config))?;
            for res in &results {
                println!(
                    "{:?}: {} samples, jumps at {:?}",
                    res.direction,
                    res.samples.len(),
                    res.jumps
                );
            }
            Ok(())
        }
        Command::Cusp { k2, n, m, out } => {
            if !(k2 > 0.0 && k2 < 1.0) {
                return Err(CliError::Config(format!("K2 must lie in (0,1), got {k2}")));
            }
            let (a, k1) = cusp_locus(k2, n, m).map_err(|e| CliError::Config(e.to_string()))?;
            let doc = export::cusp_json(k2, n, m, a, k1);
            match out {
                Some(path) => export::write_text(&path, &doc)?,
                None => println!("{doc}"),
            }
            Ok(())
        }
    }
}
