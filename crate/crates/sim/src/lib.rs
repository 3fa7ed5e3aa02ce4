//! Experiment harness: scenario configuration, closed-loop simulation,
//! calibration, metrics and file outputs.

pub mod bias;
pub mod calibration;
pub mod config;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod output;
pub mod scenario;
pub mod vision;

pub use calibration::{calibrate, Calibration};
pub use config::ScenarioConfig;
pub use error::{SimError, SimResult};
pub use metrics::{compute_metrics, Metrics};
pub use scenario::{run_scenario, StepRecord, TrajectoryLog};
pub use vision::train_gpr;
