//! PV single-diode model, MPP oracle, neural I_mp predictor and MPPT
//! tracking simulation.

pub mod controllers;
pub mod dataset;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mlp;
pub mod mpp;
pub mod pv;
pub mod scalar;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModuleParamsF64 = pv::ModuleParams<f64>;
pub type ModuleParamsF32 = pv::ModuleParams<f32>;
pub type EnvConditionsF64 = pv::EnvConditions<f64>;
pub type EnvConditionsF32 = pv::EnvConditions<f32>;
pub type OperatingPointF64 = pv::OperatingPoint<f64>;
pub type OperatingPointF32 = pv::OperatingPoint<f32>;
pub type MppResultF64 = mpp::MppResult<f64>;
pub type MppResultF32 = mpp::MppResult<f32>;
pub type MlpModelF64 = mlp::MlpModel<f64>;
pub type MlpModelF32 = mlp::MlpModel<f32>;
pub type ControllerStateF64 = controllers::ControllerState<f64>;
pub type ControllerStateF32 = controllers::ControllerState<f32>;
