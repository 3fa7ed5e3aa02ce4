//! Unbiased active inference control (u-AIC) for a torque-controlled planar
//! arm with redundant encoder and camera sensing.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! parts: the simulated plant and its sensors, the Gaussian-process camera
//! model, the standard and unbiased active inference controllers, and the
//! residual-based fault detection, isolation and recovery logic. File
//! formats, configuration and the command line live in `uaic-sim`.
//!
//! All angles are in radians, torques in N·m, and Cartesian quantities in
//! metres.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
#![allow(clippy::too_many_arguments)]

extern crate alloc;

pub mod aic;
pub mod error;
pub mod fdi;
pub mod gpr;
pub mod plant;
pub mod uaic;

mod math;

pub use error::{Error, Result};
pub use gpr::{GprHyperparams, GprModel, GprTrainingSet, VisualModel};
pub use plant::{
    CameraParams, FaultKind, FaultSpec, ManipulatorParams, NoiseParams, PlantState, SensorReading,
    Sensors, Workspace,
};
pub use uaic::{ControlLaw, Schedule, UaicBelief, UaicGains, UaicPrecisions};

pub use nalgebra::{Matrix2, Matrix4, Vector2, Vector4, Vector6};
