//! `torus-spectral` command-line interface.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 budget or parameter
//! regime error. `TORUS_SPECTRAL_OUT_DIR` overrides output directories;
//! `TORUS_SPECTRAL_THREADS` pins the worker-pool size.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use torus_spectral::groups::{weyl_count_invariant, GroupAction};
use torus_spectral::harness::config::ExperimentConfig;
use torus_spectral::harness::csvio::{curves_to_csv, divergences_to_csv, field_to_csv, write_bytes};
use torus_spectral::harness::fig1::{default_fixed_lambda, reproduce_fig1, Fig1Options};
use torus_spectral::harness::runner::{estimate_once, run_convergence};
use torus_spectral::harness::svg::render_loglog;
use torus_spectral::spectral_sums::{theta, trace_heat, zeta};
use torus_spectral::spectrum::{enumerate_spectrum, weyl_count, LAMBDA_UNIT};
use torus_spectral::Error;

#[derive(Parser)]
#[command(
    name = "torus-spectral",
    about = "Spectral estimators and divergences for group-invariant measures on flat tori",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Group-action selection shared by the lattice subcommands.
#[derive(Args, Debug)]
struct GroupArgs {
    /// Ambient torus dimension d.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Action family: trivial | continuous_shift | cyclic_shift | permutation.
    #[arg(long, default_value = "trivial")]
    group_kind: String,
    /// Acted-on coordinate indices, comma separated (shift kinds) or the
    /// permutation cycle in order.
    #[arg(long, value_delimiter = ',')]
    coords: Vec<usize>,
    /// Cyclic-shift order m ≥ 2.
    #[arg(long)]
    order: Option<u32>,
}

impl GroupArgs {
    fn build(&self) -> Result<GroupAction, Error> {
        let action = match self.group_kind.as_str() {
            "trivial" => GroupAction::Trivial {
                ambient_dim: self.dim,
            },
            "continuous_shift" => GroupAction::ContinuousShift {
                ambient_dim: self.dim,
                coords: self.coords.clone(),
            },
            "cyclic_shift" => GroupAction::CyclicShift {
                ambient_dim: self.dim,
                coords: self.coords.clone(),
                order: self
                    .order
                    .ok_or_else(|| Error::Config("cyclic_shift requires --order".into()))?,
            },
            "permutation" => GroupAction::CyclicCoordinatePermutation {
                ambient_dim: self.dim,
                cycle: self.coords.clone(),
            },
            other => {
                return Err(Error::Config(format!("unknown group kind '{other}'")));
            }
        };
        action.validate()?;
        Ok(action)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate a spectrum slice and print cumulative Weyl counts as CSV.
    Spectrum {
        #[command(flatten)]
        group: GroupArgs,
        /// Slice cutoff in squared-frequency units: λ_max = 4π²·sq_max.
        #[arg(long, default_value_t = 16)]
        sq_max: i64,
        /// Also list every basis element instead of per-shell counts.
        #[arg(long)]
        elements: bool,
        /// Enumeration budget (max real elements).
        #[arg(long, default_value_t = 20_000_000)]
        budget: u64,
    },
    /// Print spectral zeta, theta, and heat-trace values as CSV.
    Spectral {
        #[command(flatten)]
        group: GroupArgs,
        /// Zeta exponents α (requires 2α > quotient dimension).
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        /// Heat-kernel inverse bandwidths β for theta and trace rows.
        #[arg(long, value_delimiter = ',')]
        beta: Vec<f64>,
        /// Relative tolerance for numerically-summed zeta values.
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
    },
    /// Run the configured estimators once at a single n and print divergences.
    Estimate {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Sample size; defaults to the last entry of the config's n_grid.
        #[arg(long)]
        n: Option<usize>,
        /// Repetition index fed into the trial seed.
        #[arg(long, default_value_t = 0)]
        rep: usize,
        /// Also write each estimator's coefficient field as CSV under the
        /// output directory (`<name>-<estimator>-field.csv`).
        #[arg(long)]
        dump_fields: bool,
    },
    /// Full convergence sweep from a config; writes curves CSV (and SVG).
    Convergence {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
    },
    /// Desk-scale reproduction of the three-curve T⁶ figure (CSV + SVG).
    ReproduceFig1 {
        /// Output directory.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 20250826)]
        seed: u64,
        /// Trials per (estimator, n); the preset default is 20.
        #[arg(long, default_value_t = 20)]
        repetitions: usize,
        /// Use a fixed truncation eigenvalue for the invariant curve instead
        /// of the per-n rule of thumb ("parallel plots" mode).
        #[arg(long)]
        fixed_lambda: Option<Option<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var_os("TORUS_SPECTRAL_THREADS") {
        let parsed = threads.to_string_lossy().parse::<usize>();
        match parsed {
            Ok(t) if t >= 1 => {
                // A second initialization attempt is harmless; ignore it.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: TORUS_SPECTRAL_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. }
        | Error::Regime(_)
        | Error::Divergent(_)
        | Error::CutoffExceedsSlice { .. } => 3,
        _ => 2,
    }
}

fn print_bytes(bytes: &[u8]) -> Result<(), Error> {
    std::io::stdout().write_all(bytes)?;
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Spectrum {
            group,
            sq_max,
            elements,
            budget,
        } => {
            let action = group.build()?;
            let d = action.ambient_dim();
            if elements {
                let slice = enumerate_spectrum(d, LAMBDA_UNIT * sq_max as f64, budget)?;
                let mut out = String::from("kind,freq,lambda,invariant\n");
                for (i, e) in slice.elements.iter().enumerate() {
                    let inv = match action.is_invariant_frequency(&e.freq) {
                        Ok(b) => b.to_string(),
                        Err(_) => "n/a".into(),
                    };
                    let freq: Vec<String> = e.freq.0.iter().map(|v| v.to_string()).collect();
                    out.push_str(&format!(
                        "{},\"{}\",{},{}\n",
                        e.kind.label(),
                        freq.join(","),
                        slice.lambdas[i],
                        inv
                    ));
                }
                return print_bytes(out.as_bytes());
            }
            let mut out = String::from("sq_norm,lambda,count,count_invariant\n");
            for s in 0..=sq_max {
                let lam = LAMBDA_UNIT * s as f64;
                let total = weyl_count(d, lam, budget)?;
                let inv = weyl_count_invariant(&action, lam, budget)?;
                out.push_str(&format!("{s},{lam},{total},{inv}\n"));
            }
            print_bytes(out.as_bytes())
        }
        Command::Spectral {
            group,
            alpha,
            beta,
            rel_tol,
        } => {
            let action = group.build()?;
            let mut out = String::from("quantity,param,value,tail_bound,closed_form\n");
            for &a in &alpha {
                let z = zeta(&action, a, rel_tol)?;
                out.push_str(&format!(
                    "zeta,{a},{},{},{}\n",
                    z.value, z.tail_bound, z.closed_form
                ));
            }
            for &b in &beta {
                let th = theta(b)?;
                out.push_str(&format!("theta,{b},{th},0,true\n"));
                let tr = trace_heat(&action, b)?;
                out.push_str(&format!(
                    "trace,{b},{},{},{}\n",
                    tr.value, tr.tail_bound, tr.closed_form
                ));
            }
            print_bytes(out.as_bytes())
        }
        Command::Estimate {
            config,
            n,
            rep,
            dump_fields,
        } => {
            let config = ExperimentConfig::from_path(&config)?;
            let n = n.unwrap_or_else(|| *config.n_grid.last().expect("validated grid"));
            let results = estimate_once(&config, n, rep)?;
            let rows: Vec<(String, f64, torus_spectral::divergence::DivergenceResult)> = results
                .iter()
                .map(|(est, r, _)| (format!("{}:{}", est.label(), r.metric), n as f64, r.clone()))
                .collect();
            print_bytes(&divergences_to_csv(&rows)?)?;
            if dump_fields {
                let dir = config.effective_out_dir();
                for (est, _, field) in &results {
                    let path = dir.join(format!("{}-{}-field.csv", config.name, est.label()));
                    write_bytes(&path, &field_to_csv(field)?)?;
                    eprintln!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Command::Convergence { config } => {
            let config = ExperimentConfig::from_path(&config)?;
            let curves = run_convergence(&config)?;
            let csv = curves_to_csv(&curves)?;
            let dir = config.effective_out_dir();
            let csv_name = config
                .output
                .csv
                .clone()
                .unwrap_or_else(|| format!("{}.csv", config.name));
            let csv_path = dir.join(csv_name);
            write_bytes(&csv_path, &csv)?;
            eprintln!("wrote {}", csv_path.display());
            if let Some(svg_name) = &config.output.svg {
                let svg = render_loglog(&curves, &config.name);
                let svg_path = dir.join(svg_name);
                write_bytes(&svg_path, svg.as_bytes())?;
                eprintln!("wrote {}", svg_path.display());
            }
            for c in &curves {
                eprintln!(
                    "{}: slope {:.4} ± {:.4}{}",
                    c.estimator.label(),
                    c.slope,
                    c.slope_stderr,
                    match c.predicted_slope {
                        Some(p) => format!(" (predicted {p:.4})"),
                        None => String::new(),
                    }
                );
            }
            print_bytes(&csv)
        }
        Command::ReproduceFig1 {
            out_dir,
            seed,
            repetitions,
            fixed_lambda,
        } => {
            let out_dir = match std::env::var_os("TORUS_SPECTRAL_OUT_DIR") {
                Some(d) if !d.is_empty() => PathBuf::from(d),
                _ => out_dir,
            };
            let opts = Fig1Options {
                out_dir,
                master_seed: seed,
                repetitions,
                fixed_lambda: fixed_lambda.map(|fl| fl.unwrap_or_else(default_fixed_lambda)),
                ..Fig1Options::default()
            };
            let report = reproduce_fig1(&opts)?;
            for c in &report.curves {
                let lts: Vec<String> = c
                    .lambda_ts
                    .iter()
                    .map(|lt| match lt {
                        Some(l) => format!("{:.1}", l / LAMBDA_UNIT),
                        None => "-".into(),
                    })
                    .collect();
                if c.lambda_ts.iter().any(|l| l.is_some()) {
                    eprintln!("{}: cutoff ‖v‖² per n: {}", c.estimator.label(), lts.join(" "));
                }
            }
            eprintln!("wrote {}", report.csv_path.display());
            eprintln!("wrote {}", report.svg_path.display());
            for o in &report.orderings {
                eprintln!(
                    "n={:5}: invariant<augmented={} augmented<non-invariant={} 2SE-separated={}",
                    o.n, o.inv_below_aug, o.aug_below_non, o.separated_2se
                );
            }
            print_bytes(&report.csv)
        }
    }
}
