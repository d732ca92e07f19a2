//! Pinned acceptance thresholds.

/// STC reference operating point.
pub const STC_P_MAX_W: f64 = 200.017;
pub const STC_V_MP_V: f64 = 26.4;
pub const STC_I_MP_A: f64 = 7.5764;
pub const P_MAX_REL: f64 = 0.01;
pub const V_MP_ABS_V: f64 = 0.3;
pub const I_MP_REL: f64 = 0.01;

/// Residual of the implicit current equation (A).
pub const RESIDUAL_A: f64 = 1e-9;
/// I(0) against I_ph, relative.
pub const SHORT_CIRCUIT_REL: f64 = 0.005;
/// Zero crossing against rated V_oc, relative.
pub const OPEN_CIRCUIT_REL: f64 = 0.02;
pub const RESIDUAL_SAMPLES: usize = 1000;
pub const UNIMODAL_POINTS: usize = 1000;

pub const DATASET_ROWS: usize = 1300;
pub const SPLIT_SIZES: [usize; 3] = [1105, 130, 65];

pub const TEST_MSE_A2: f64 = 5e-3;
/// Prediction at STC against the oracle's I_mp, relative.
pub const PREDICTION_REL: f64 = 0.005;

pub const GRADIENT_REL: f64 = 1e-5;
pub const GRADIENT_STEP: f64 = 1e-6;
pub const GRADIENT_SEEDS: u64 = 10;

pub const BIN_WIDTH: f64 = 0.02095;
/// One f64 ulp of slack: (0.1968 + 0.2222) / 20 is not the literal 0.02095.
pub const BIN_WIDTH_ABS: f64 = 1e-15;

pub const NN_EFFICIENCY_MIN: f64 = 0.99;
pub const PERFECT_EFFICIENCY_ABS: f64 = 1e-6;
pub const SCENARIO_DURATION_S: f64 = 300.0;
pub const STEP_TIME_S: f64 = 150.0;

pub const DECISION_MEAN_S: f64 = 1e-3;
pub const DECISION_STEPS: usize = 1000;

/// Wall-clock budgets (s).
pub const BUDGET_STC_S: f64 = 1.0;
pub const BUDGET_SOLVER_S: f64 = 10.0;
pub const BUDGET_TRAINING_S: f64 = 300.0;
pub const BUDGET_CONTROLLERS_S: f64 = 30.0;
pub const BUDGET_REPRODUCE_S: f64 = 600.0;
