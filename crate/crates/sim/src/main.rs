use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use uaic_core::gpr::GprModel;
use uaic_sim::bias::bias_demo;
use uaic_sim::config::{ControllerKind, FaultKindConfig, ScenarioConfig};
use uaic_sim::montecarlo::{run_batch, seed_range, summarize, write_runs_csv, write_summary};
use uaic_sim::output::{emit_outputs, log_from_records, read_trajectory_csv, write_trajectory_csv};
use uaic_sim::vision::{load_gpr, read_training_csv, train_gpr_on, write_training_csv, GprArtifact};
use uaic_sim::{calibrate, compute_metrics, run_scenario, train_gpr, Calibration, SimError, SimResult};

#[derive(Parser)]
#[command(name = "uaic", version, about = "Unbiased active inference control with sensor fault detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the camera model and write gpr.json and gpr_training.csv.
    TrainGpr {
        #[command(flatten)]
        common: Common,
        /// Training set CSV (q1,q2,yv_x,yv_z) instead of simulated camera frames.
        #[arg(long)]
        training: Option<PathBuf>,
    },
    /// Estimate healthy residual statistics and write calibration.json.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Number of healthy runs (overrides the config).
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Simulate one scenario and write trajectory, metrics and d_M files.
    Run(Common),
    /// Run consecutive seeds and report mean and std of every metric.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        runs: usize,
    },
    /// Recompute metrics from a trajectory CSV.
    Metrics {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/trajectory.csv.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Goal-change transients of the standard AIC residual.
    BiasDemo(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    Encoder,
    Camera,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Aic,
    Uaic,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    fault: Option<FaultArg>,
    #[arg(long, value_enum)]
    recovery: Option<Switch>,
    #[arg(long, value_enum)]
    controller: Option<ControllerArg>,
    /// GP artifact; the model is trained in-process when absent.
    #[arg(long)]
    gpr: Option<PathBuf>,
    /// Calibration artifact; defaults to <out>/calibration.json.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

impl Common {
    fn scenario(&self) -> SimResult<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(a) = self.alpha {
            cfg.fdi.alpha = a;
        }
        if let Some(f) = self.fault {
            cfg.fault.kind = match f {
                FaultArg::None => FaultKindConfig::None,
                FaultArg::Encoder => FaultKindConfig::EncoderFreeze,
                FaultArg::Camera => FaultKindConfig::CameraBias,
            };
        }
        if let Some(r) = self.recovery {
            cfg.fdi.recovery = matches!(r, Switch::On);
        }
        if let Some(c) = self.controller {
            cfg.controller = match c {
                ControllerArg::Aic => ControllerKind::Aic,
                ControllerArg::Uaic => ControllerKind::Uaic,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn model(&self, cfg: &ScenarioConfig) -> SimResult<GprModel> {
        match &self.gpr {
            Some(p) => load_gpr(p, cfg),
            None => {
                info!("training the camera model in-process");
                train_gpr(cfg)
            }
        }
    }

    /// Calibration for runs that use detection, `None` otherwise.
    fn calibration(&self, cfg: &ScenarioConfig) -> SimResult<Option<Calibration>> {
        if !(cfg.fdi.enabled && cfg.controller == ControllerKind::Uaic) {
            return Ok(None);
        }
        let path = self.calibration.clone().unwrap_or_else(|| self.out.join("calibration.json"));
        Calibration::load(&path).map(Some)
    }

    fn out_dir(&self) -> SimResult<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| SimError::io(&self.out, e))?;
        Ok(&self.out)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
}

fn execute(cmd: Command) -> SimResult<()> {
    match cmd {
        Command::TrainGpr { common: c, training } => {
            let cfg = c.scenario()?;
            let model = match training {
                Some(p) => train_gpr_on(&cfg, read_training_csv(&p)?)?,
                None => train_gpr(&cfg)?,
            };
            let dir = c.out_dir()?;
            GprArtifact::from_model(&model, &cfg.gpr_hash()).save(&dir.join("gpr.json"))?;
            write_training_csv(&model, &dir.join("gpr_training.csv"))?;
            let h = model.hyperparams();
            println!(
                "gpr: {} points, signal_var {:.4e}, noise_var {:.4e}, theta [{:.4}, {:.4}], log ML {:.3}",
                model.training_set().len(),
                h.signal_var,
                h.noise_var,
                h.theta[0],
                h.theta[1],
                model.log_marginal_likelihood()
            );
        }
        Command::Calibrate { common: c, runs } => {
            let mut cfg = c.scenario()?;
            if let Some(r) = runs {
                cfg.fdi.calibration.runs = r;
            }
            let model = c.model(&cfg)?;
            let cal = calibrate(&cfg, &model)?;
            let path = c.out_dir()?.join("calibration.json");
            cal.save(&path)?;
            println!(
                "calibration: {} runs, {} transient steps, written to {}",
                cal.main.runs(),
                cal.main.transient_steps(),
                path.display()
            );
        }
        Command::Run(c) => {
            let cfg = c.scenario()?;
            let model = c.model(&cfg)?;
            let cal = c.calibration(&cfg)?;
            let log = run_scenario(&cfg, &model, cal.as_ref())?;
            let m = compute_metrics(&log);
            emit_outputs(&log, &m, c.out_dir()?)?;
            println!(
                "e_ss [{:+.5}, {:+.5}]  rmse [{:.5}, {:.5}]  detection {}  isolation {} ({})  recovered {}",
                m.e_ss[0],
                m.e_ss[1],
                m.rmse[0],
                m.rmse[1],
                opt(m.detection_delay),
                opt(m.isolation_delay),
                m.isolated_as.as_deref().unwrap_or("-"),
                m.recovered
            );
        }
        Command::Montecarlo { common: c, runs } => {
            let cfg = c.scenario()?;
            let model = c.model(&cfg)?;
            let cal = c.calibration(&cfg)?;
            let results = run_batch(&cfg, &model, cal.as_ref(), &seed_range(cfg.seed, runs))?;
            let summary = summarize(&results);
            let dir = c.out_dir()?;
            write_runs_csv(&results, &dir.join("montecarlo_runs.csv"))?;
            write_summary(&summary, &dir.join("montecarlo_summary.json"))?;
            println!("{} runs", summary.runs);
            for (name, f) in &summary.fields {
                println!("{name:<30} {:+.6e} ± {:.6e}  (n = {})", f.mean, f.std, f.count);
            }
        }
        Command::Metrics { common: c, trajectory } => {
            let cfg = c.scenario()?;
            let path = trajectory.unwrap_or_else(|| c.out.join("trajectory.csv"));
            let log = log_from_records(read_trajectory_csv(&path)?, &cfg)?;
            let m = compute_metrics(&log);
            println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
        }
        Command::BiasDemo(c) => {
            let cfg = c.scenario()?;
            let model = c.model(&cfg)?;
            let (log, spikes) = bias_demo(&cfg, &model)?;
            let dir = c.out_dir()?;
            write_trajectory_csv(&log, &dir.join("bias_trajectory.csv"))?;
            let path = dir.join("bias_demo.json");
            let json = serde_json::to_string_pretty(&spikes).expect("spikes serialize");
            std::fs::write(&path, json + "\n").map_err(|e| SimError::io(&path, e))?;
            for s in &spikes {
                println!(
                    "goal change at {:.3} s: pre-switch mean {:.3e}, peak {:.3e}, ratio {:.1}",
                    s.time, s.pre_mean, s.peak, s.ratio
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
