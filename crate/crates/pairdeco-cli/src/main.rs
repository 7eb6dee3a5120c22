use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pairdeco::config::{parse_config, PhysicalConfig};
use pairdeco::echo::{compare_experiment, parse_experiment_csv, EchoEvolution};
use pairdeco::pair::{PairLevel, ReducedPairMatrix};
use pairdeco::phonon::{initial_after_pulse, rate_constants, FreeEvolution};
use pairdeco::verify::{run_oracle, FockGrid, Suite, Tolerances};

/// Pure dephasing of dipolar spin pairs in a phonon bath.
#[derive(Parser)]
#[command(name = "pairdeco", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate constants and decay times of one sample.
    Constants {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair deviation matrix on a time grid.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Times in seconds as start:stop:steps.
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = Mode::Free)]
        mode: Mode,
        /// Keep the thermal, lattice-phase and whole-sample factors.
        #[arg(long)]
        exact_path: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// τ_X over a grid of pair counts and sound speeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Pair counts as start:stop:steps, spaced geometrically.
        #[arg(long)]
        n_grid: String,
        /// Sound speeds in m/s as start:stop:steps.
        #[arg(long)]
        vs_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force oracle suites; exits with 2 if any check fails.
    Oracle {
        #[arg(value_enum, default_value_t = Which::All)]
        which: Which,
        /// Override every suite tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Fock grid at βω ∈ {1, 5} only.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measured echo decay times against the theory curve.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// CSV with header nu_hat_khz,tau_exp_us.
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Free,
    Me,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Fock,
    Eigdist,
    Ksum,
    All,
}

type Failure = String;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_config(path: &Path) -> Result<PhysicalConfig, Failure> {
    parse_config(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `start:stop:steps` with steps ≥ 1 and start ≤ stop.
fn parse_grid(text: &str) -> Result<(f64, f64, usize), Failure> {
    let bad = || format!("grid must be start:stop:steps, got {text:?}");
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() || start > stop {
        return Err(format!(
            "grid needs steps >= 1 and start <= stop, got {text:?}"
        ));
    }
    if steps == 1 && start != stop {
        return Err(format!("a single step needs start == stop, got {text:?}"));
    }
    Ok((start, stop, steps))
}

fn linear(text: &str) -> Result<Vec<f64>, Failure> {
    let (start, stop, steps) = parse_grid(text)?;
    if steps == 1 {
        return Ok(vec![start]);
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start + h * i as f64
            }
        })
        .collect())
}

fn geometric(text: &str) -> Result<Vec<f64>, Failure> {
    let (start, stop, steps) = parse_grid(text)?;
    if start <= 0.0 {
        return Err(format!(
            "geometric grid needs a positive start, got {text:?}"
        ));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let ratio = (stop / start).ln() / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                stop
            } else {
                start * (ratio * i as f64).exp()
            }
        })
        .collect())
}

fn constants(cfg: &PhysicalConfig) -> String {
    let r = rate_constants(cfg);
    let tau_hat_echo = 2.0 * r.tau_x / 3.0;
    let rows = [
        ("Omega0", r.omega0, "rad/s"),
        ("nu0", r.nu0, "Hz"),
        ("nu_hat0", r.nu_hat0, "Hz"),
        ("nu_D", r.nu_d, "Hz"),
        ("tau_gamma", r.tau_gamma, "s"),
        ("tau_gamma_min", r.tau_gamma_min, "s"),
        ("tau_X", r.tau_x, "s"),
        ("tau_X_hat", r.tau_x_hat, "s"),
        ("tau_X_hat_echo", tau_hat_echo, "s"),
        ("sigma_X", r.sigma_x, "1"),
        ("sigma_X_prime", r.sigma_x_prime, "1"),
    ];
    let mut out = String::from("name,value,unit\n");
    for (name, value, unit) in rows {
        let _ = writeln!(out, "{name},{value:.16e},{unit}");
    }
    out
}

fn evolve(cfg: &PhysicalConfig, times: &[f64], mode: Mode, exact: bool) -> Result<String, Failure> {
    if times[0] < 0.0 {
        return Err("times must be non-negative".into());
    }
    let start = initial_after_pulse(cfg.omega0_larmor, cfg.temperature);
    let step: Box<dyn Fn(f64) -> ReducedPairMatrix> = match mode {
        Mode::Free => {
            let evo = FreeEvolution::new(cfg, exact).map_err(|e| e.to_string())?;
            Box::new(move |t| evo.sigma(&start, t))
        }
        Mode::Me => {
            let evo = EchoEvolution::new(cfg, exact);
            Box::new(move |t| evo.sigma(&start, t))
        }
    };
    let mut out = String::from("t_s");
    for m in PairLevel::ALL {
        for n in PairLevel::ALL {
            let _ = write!(out, ",re_{0}_{1},im_{0}_{1}", m.label(), n.label());
        }
    }
    out.push('\n');
    for &t in times {
        let sigma = step(t);
        let _ = write!(out, "{t:.16e}");
        for m in PairLevel::ALL {
            for n in PairLevel::ALL {
                let z = sigma.get(m, n);
                // Adding zero folds −0 into +0.
                let _ = write!(out, ",{:.16e},{:.16e}", z.re + 0.0, z.im + 0.0);
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn sweep(cfg: &PhysicalConfig, counts: &[f64], speeds: &[f64]) -> Result<String, Failure> {
    let mut out = String::from("N,v_s_mps,tau_X_s\n");
    for &n in counts {
        for &v in speeds {
            let point = PhysicalConfig {
                n_pairs: n,
                v_s: v,
                ..*cfg
            }
            .validate()
            .map_err(|e| format!("N = {n}, v_s = {v}: {e}"))?;
            let _ = writeln!(
                out,
                "{n:.16e},{v:.16e},{:.16e}",
                rate_constants(&point).tau_x
            );
        }
    }
    Ok(out)
}

enum Outcome {
    Done,
    OracleFailed,
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Constants { config, out } => {
            emit(out.as_deref(), &constants(&load_config(&config)?))?;
        }
        Command::Evolve {
            config,
            grid,
            mode,
            exact_path,
            out,
        } => {
            let cfg = load_config(&config)?;
            emit(
                out.as_deref(),
                &evolve(&cfg, &linear(&grid)?, mode, exact_path)?,
            )?;
        }
        Command::Sweep {
            config,
            n_grid,
            vs_grid,
            out,
        } => {
            let cfg = load_config(&config)?;
            emit(
                out.as_deref(),
                &sweep(&cfg, &geometric(&n_grid)?, &linear(&vs_grid)?)?,
            )?;
        }
        Command::Oracle {
            which,
            tol,
            quick,
            out,
        } => {
            let suite = match which {
                Which::Fock => Suite::Fock,
                Which::Eigdist => Suite::Eigdist,
                Which::Ksum => Suite::Ksum,
                Which::All => Suite::All,
            };
            let grid = if quick {
                FockGrid::quick()
            } else {
                FockGrid::documented()
            };
            let tol = tol.map_or_else(Tolerances::default, Tolerances::uniform);
            let report = run_oracle(suite, &grid, &tol).map_err(|e| e.to_string())?;
            let mut json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            json.push('\n');
            emit(out.as_deref(), &json)?;
            if !report.passed {
                return Ok(Outcome::OracleFailed);
            }
        }
        Command::Compare { config, csv, out } => {
            let cfg = load_config(&config)?;
            let records = parse_experiment_csv(&read(&csv)?)
                .map_err(|e| format!("{}: {e}", csv.display()))?;
            let report =
                compare_experiment(&records, cfg.v_s, cfg.n_pairs).map_err(|e| e.to_string())?;
            emit(out.as_deref(), &report.to_csv())?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::OracleFailed) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
