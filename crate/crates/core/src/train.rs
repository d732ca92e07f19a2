//! Training and evaluation of [`MlpModel`].
//!
//! Two optimisers share one entry point, [`train`]:
//!
//! * `bayesian_lm` (default) minimises `beta * E_D + alpha * E_W`, with `E_D`
//!   the sum of squared normalized errors and `E_W` the sum of squared
//!   parameters, by Levenberg-Marquardt steps. After every accepted step the
//!   effective parameter count `gamma = N_w - 2 alpha tr(H^-1)` (Gauss-Newton
//!   Hessian `H = 2 beta J'J + 2 alpha I`) re-estimates
//!   `alpha = gamma / (2 E_W)` and `beta = (N - gamma) / (2 E_D)`.
//! * `adam` minimises the mean squared normalized error with mini-batches and
//!   keeps the parameters that scored best on the validation part.
//!
//! Both are deterministic for a given split and seed.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSplit, Sample};
use crate::error::{Error, Result};
use crate::io::write_string_atomic;
use crate::linalg::Cholesky;
use crate::mlp::{MlpModel, NormSpec, DEFAULT_HIDDEN};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BayesianLm,
    Adam,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bayesian_lm" | "bayesian-lm" | "br" => Ok(Algorithm::BayesianLm),
            "adam" => Ok(Algorithm::Adam),
            other => Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub max_epochs: usize,
    /// Adam step size.
    pub learning_rate: f64,
    pub seed: u64,
    pub mu_init: f64,
    /// Damping is multiplied by this on a rejected step and divided by it on
    /// an accepted one.
    pub mu_factor: f64,
    /// Damping cap; reaching it ends an epoch without a step.
    pub mu_max: f64,
    /// Stop once the objective's gradient norm falls below this.
    pub min_grad: f64,
    pub hidden_width: usize,
    /// Adam mini-batch size.
    pub batch_size: usize,
    /// Adam early-stopping patience in epochs without validation improvement.
    pub patience: usize,
    /// Consecutive epochs without an accepted step before training ends.
    pub stall_limit: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::BayesianLm,
            max_epochs: 1000,
            learning_rate: 0.001,
            seed: 1,
            mu_init: 0.005,
            mu_factor: 10.0,
            mu_max: 1e10,
            min_grad: 1e-7,
            hidden_width: DEFAULT_HIDDEN,
            batch_size: 32,
            patience: 50,
            stall_limit: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.max_epochs < 1 {
            return bad("max_epochs must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if !(self.mu_factor > 1.0) {
            return bad("mu_factor must be > 1");
        }
        if !(self.mu_init > 0.0) || !(self.mu_max >= self.mu_init) {
            return bad("need 0 < mu_init <= mu_max");
        }
        if self.hidden_width < 1 || self.batch_size < 1 || self.stall_limit < 1 {
            return bad("hidden_width, batch_size and stall_limit must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    GradientTolerance,
    DampingCap,
    EarlyStopping,
}

/// One row of the training history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Normalized-unit MSE on the training part after the epoch.
    pub mse_train: f64,
    pub mse_val: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Regularized objective before and after the accepted step, both under
    /// the hyperparameters in force when the step was taken.
    pub objective_before: Option<f64>,
    pub objective_after: Option<f64>,
}

/// Mean squared error in normalized target units and in A^2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mse {
    pub normalized: f64,
    pub amps2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub algorithm: Algorithm,
    pub mse_train: Mse,
    pub mse_validation: Option<Mse>,
    pub mse_test: Option<Mse>,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    pub accepted_steps: usize,
    pub param_count: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub history: Vec<EpochRecord>,
}

impl TrainReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `epoch,mse_train,mse_val,alpha,beta,gamma`; absent values are empty.
    pub fn history_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("epoch,mse_train,mse_val,alpha,beta,gamma\n");
        for r in &self.history {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epoch,
                r.mse_train,
                opt(r.mse_val),
                opt(r.alpha),
                opt(r.beta),
                opt(r.gamma)
            );
        }
        out
    }

    pub fn write(&self, json_path: &Path, history_path: &Path) -> Result<()> {
        write_string_atomic(json_path, &self.to_json())?;
        write_string_atomic(history_path, &self.history_csv())
    }
}

/// Normalized inputs and targets.
struct Batch<S> {
    x: Vec<[S; 2]>,
    t: Vec<S>,
}

impl<S: Scalar> Batch<S> {
    fn new(samples: &[Sample], norm: &NormSpec<S>) -> Self {
        Batch {
            x: samples
                .iter()
                .map(|s| norm.normalize_inputs(S::of(s.t_c), S::of(s.g)))
                .collect(),
            t: samples
                .iter()
                .map(|s| norm.normalize_target(S::of(s.i_mp)))
                .collect(),
        }
    }

    fn len(&self) -> usize {
        self.t.len()
    }
}

/// Derivatives of the normalized output with respect to the flat parameter
/// vector (layout of [`MlpModel::params`]) at normalized input `x`. Returns
/// the output itself.
fn output_jacobian<S: Scalar>(model: &MlpModel<S>, x: [S; 2], hidden: &mut Vec<S>, row: &mut [S]) -> S {
    let h = model.hidden_width();
    model.hidden(x, hidden);
    let mut y = model.b_out();
    for j in 0..h {
        let a = hidden[j];
        let wo = model.w_out()[j];
        y += wo * a;
        let back = wo * (S::one() - a * a);
        row[2 * j] = back * x[0];
        row[2 * j + 1] = back * x[1];
        row[2 * h + j] = back;
        row[3 * h + j] = a;
    }
    row[4 * h] = S::one();
    y
}

/// Exact gradient of the mean squared normalized error over `batch` with
/// respect to every parameter, in [`MlpModel::params`] order.
pub fn gradient<S: Scalar>(model: &MlpModel<S>, batch: &[Sample]) -> Result<Vec<S>> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let data = Batch::new(batch, model.norm());
    Ok(batch_gradient(model, &data, 0..data.len()))
}

fn batch_gradient<S: Scalar>(
    model: &MlpModel<S>,
    data: &Batch<S>,
    rows: impl ExactSizeIterator<Item = usize>,
) -> Vec<S> {
    let n = rows.len();
    let np = model.param_count();
    let mut grad = vec![S::zero(); np];
    let mut row = vec![S::zero(); np];
    let mut hidden = Vec::with_capacity(model.hidden_width());
    for k in rows {
        let y = output_jacobian(model, data.x[k], &mut hidden, &mut row);
        let e = y - data.t[k];
        for (g, r) in grad.iter_mut().zip(&row) {
            *g += e * *r;
        }
    }
    let scale = S::of(2.0) / S::of(n as f64);
    grad.iter_mut().for_each(|g| *g *= scale);
    grad
}

fn sum_squared_error<S: Scalar>(model: &MlpModel<S>, data: &Batch<S>) -> S {
    data.x
        .iter()
        .zip(&data.t)
        .fold(S::zero(), |acc, (x, t)| {
            let e = model.forward_normalized(*x) - *t;
            acc + e * e
        })
}

fn mse<S: Scalar>(model: &MlpModel<S>, data: &Batch<S>) -> Option<f64> {
    (data.len() > 0).then(|| sum_squared_error(model, data).to_f64() / data.len() as f64)
}

fn sum_squares<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, x| acc + *x * *x)
}

/// Trains a fresh network on `split.train`, normalizing with the ranges of the
/// training part.
pub fn train<S: Scalar>(split: &DataSplit, cfg: &TrainConfig) -> Result<(MlpModel<S>, TrainReport)> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let norm: NormSpec<S> = NormSpec::fit(
        split
            .train
            .iter()
            .map(|s| (S::of(s.t_c), S::of(s.g), S::of(s.i_mp))),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::random(cfg.hidden_width, norm, &mut rng)?;

    let train_data = Batch::new(&split.train, &norm);
    let val_data = Batch::new(&split.validation, &norm);

    let outcome = match cfg.algorithm {
        Algorithm::BayesianLm => bayesian_lm(&mut model, &train_data, &val_data, cfg)?,
        Algorithm::Adam => adam(&mut model, &train_data, &val_data, cfg, &mut rng)?,
    };

    let half_span = norm.target_half_span().to_f64();
    let to_mse = |normalized: f64| Mse {
        normalized,
        amps2: normalized * half_span * half_span,
    };
    let test_data = Batch::new(&split.test, &norm);
    let report = TrainReport {
        algorithm: cfg.algorithm,
        mse_train: to_mse(mse(&model, &train_data).unwrap_or(0.0)),
        mse_validation: mse(&model, &val_data).map(to_mse),
        mse_test: mse(&model, &test_data).map(to_mse),
        epochs_run: outcome.history.len(),
        stop_reason: outcome.stop_reason,
        accepted_steps: outcome.accepted_steps,
        param_count: model.param_count(),
        alpha: outcome.history.last().and_then(|r| r.alpha),
        beta: outcome.history.last().and_then(|r| r.beta),
        gamma: outcome.history.last().and_then(|r| r.gamma),
        history: outcome.history,
    };
    Ok((model, report))
}

struct Outcome {
    history: Vec<EpochRecord>,
    stop_reason: StopReason,
    accepted_steps: usize,
}

/// Residuals `y - t`, the Jacobian of `y` (row-major, one row per sample) and
/// the sum of squared residuals.
fn residuals_and_jacobian<S: Scalar>(model: &MlpModel<S>, data: &Batch<S>) -> (Vec<S>, Vec<S>, S) {
    let np = model.param_count();
    let mut jac = vec![S::zero(); data.len() * np];
    let mut res = Vec::with_capacity(data.len());
    let mut hidden = Vec::with_capacity(model.hidden_width());
    let mut sse = S::zero();
    for (k, (x, t)) in data.x.iter().zip(&data.t).enumerate() {
        let y = output_jacobian(model, *x, &mut hidden, &mut jac[k * np..(k + 1) * np]);
        let e = y - *t;
        sse += e * e;
        res.push(e);
    }
    (res, jac, sse)
}

/// `J'J` (full symmetric) and `J'e`.
fn normal_equations<S: Scalar>(jac: &[S], res: &[S], np: usize) -> (Vec<S>, Vec<S>) {
    let mut jj = vec![S::zero(); np * np];
    let mut je = vec![S::zero(); np];
    for (row, e) in jac.chunks_exact(np).zip(res) {
        for a in 0..np {
            let ra = row[a];
            je[a] += ra * *e;
            let out = &mut jj[a * np..a * np + a + 1];
            for (o, rb) in out.iter_mut().zip(&row[..=a]) {
                *o += ra * *rb;
            }
        }
    }
    for a in 0..np {
        for b in 0..a {
            jj[b * np + a] = jj[a * np + b];
        }
    }
    (jj, je)
}

fn shifted<S: Scalar>(jj: &[S], np: usize, beta: S, shift: S) -> Vec<S> {
    let mut a: Vec<S> = jj.iter().map(|v| *v * beta).collect();
    for d in 0..np {
        a[d * np + d] += shift;
    }
    a
}

/// `gamma = N_w - alpha * tr((beta J'J + alpha I)^-1)`, clamped to `[0, N_w]`.
fn effective_parameters<S: Scalar>(jj: &[S], np: usize, alpha: S, beta: S) -> S {
    let n_w = S::of(np as f64);
    if alpha <= S::zero() {
        return n_w;
    }
    match Cholesky::factor(&shifted(jj, np, beta, alpha), np) {
        Some(chol) => (n_w - alpha * chol.inverse_trace()).max(S::zero()).min(n_w),
        None => n_w,
    }
}

/// `(alpha, beta)` from the effective parameter count and current sums.
fn reestimate<S: Scalar>(gamma: S, n: usize, sse: S, ssw: S) -> (S, S) {
    let alpha = if ssw > S::zero() { gamma / (S::of(2.0) * ssw) } else { S::one() };
    // gamma can approach N on tiny training sets; keep beta positive
    let dof = (S::of(n as f64) - gamma).max(S::one());
    let beta = if sse > S::zero() { dof / (S::of(2.0) * sse) } else { S::one() };
    (alpha, beta)
}

fn bayesian_lm<S: Scalar>(
    model: &mut MlpModel<S>,
    train: &Batch<S>,
    val: &Batch<S>,
    cfg: &TrainConfig,
) -> Result<Outcome> {
    let np = model.param_count();
    let n = train.len();
    let mu_factor = S::of(cfg.mu_factor);
    let mu_max = S::of(cfg.mu_max);
    let two = S::of(2.0);

    let mut params = model.params();
    let (mut res, mut jac, mut sse) = residuals_and_jacobian(model, train);
    let mut ssw = sum_squares(&params);

    let mut gamma = S::of(np as f64);
    let mut alpha = if ssw > S::zero() { gamma / (two * ssw) } else { S::one() };
    let mut beta = if sse > S::zero() {
        (S::of(n as f64) - gamma) / (two * sse)
    } else {
        S::one()
    };
    if !(beta > S::zero()) {
        beta = S::one();
    }

    let mut mu = S::of(cfg.mu_init);
    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut accepted_steps = 0;
    let mut stalls = 0;
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 1..=cfg.max_epochs {
        let (jj, je) = normal_equations(&jac, &res, np);
        let rhs: Vec<S> = je
            .iter()
            .zip(&params)
            .map(|(g, w)| beta * *g + alpha * *w)
            .collect();
        let grad_norm = (two * sum_squares(&rhs).sqrt()).to_f64();
        if grad_norm < cfg.min_grad {
            stop_reason = StopReason::GradientTolerance;
            break;
        }
        let objective = beta * sse + alpha * ssw;

        let mut accepted = None;
        let mut factored_any = false;
        while mu <= mu_max {
            let Some(chol) = Cholesky::factor(&shifted(&jj, np, beta, mu + alpha), np) else {
                mu *= mu_factor;
                continue;
            };
            factored_any = true;
            let step = chol.solve(&rhs);
            let trial: Vec<S> = params.iter().zip(&step).map(|(w, d)| *w - *d).collect();
            model.set_params(&trial)?;
            let trial_sse = sum_squared_error(model, train);
            let trial_ssw = sum_squares(&trial);
            let trial_objective = beta * trial_sse + alpha * trial_ssw;
            if trial_objective.is_finite() && trial_objective < objective {
                accepted = Some((trial, trial_sse, trial_ssw, trial_objective));
                break;
            }
            mu *= mu_factor;
        }

        match accepted {
            Some((trial, trial_sse, trial_ssw, trial_objective)) => {
                stalls = 0;
                accepted_steps += 1;
                gamma = effective_parameters(&jj, np, alpha, beta);
                let record_before = objective.to_f64();
                let record_after = trial_objective.to_f64();
                (alpha, beta) = reestimate(gamma, n, trial_sse, trial_ssw);
                params = trial;
                model.set_params(&params)?;
                (res, jac, sse) = residuals_and_jacobian(model, train);
                ssw = trial_ssw;
                mu /= mu_factor;
                history.push(EpochRecord {
                    epoch,
                    mse_train: sse.to_f64() / n as f64,
                    mse_val: mse(model, val),
                    alpha: Some(alpha.to_f64()),
                    beta: Some(beta.to_f64()),
                    gamma: Some(gamma.to_f64()),
                    objective_before: Some(record_before),
                    objective_after: Some(record_after),
                });
            }
            None => {
                model.set_params(&params)?;
                if !factored_any && accepted_steps == 0 {
                    return Err(Error::SingularHessian { mu: mu.to_f64() });
                }
                stalls += 1;
                history.push(EpochRecord {
                    epoch,
                    mse_train: sse.to_f64() / n as f64,
                    mse_val: mse(model, val),
                    alpha: Some(alpha.to_f64()),
                    beta: Some(beta.to_f64()),
                    gamma: Some(gamma.to_f64()),
                    objective_before: None,
                    objective_after: None,
                });
                if stalls >= cfg.stall_limit {
                    if accepted_steps == 0 {
                        return Err(Error::NoProgress { epochs: stalls });
                    }
                    stop_reason = StopReason::DampingCap;
                    break;
                }
                // retry from the same point under refreshed hyperparameters
                gamma = effective_parameters(&jj, np, alpha, beta);
                (alpha, beta) = reestimate(gamma, n, sse, ssw);
                mu = S::of(cfg.mu_init);
            }
        }
    }
    Ok(Outcome {
        history,
        stop_reason,
        accepted_steps,
    })
}

fn adam<S: Scalar>(
    model: &mut MlpModel<S>,
    train: &Batch<S>,
    val: &Batch<S>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome> {
    let (beta1, beta2, eps) = (S::of(0.9), S::of(0.999), S::of(1e-8));
    let lr = S::of(cfg.learning_rate);
    let np = model.param_count();
    let mut params = model.params();
    let mut m = vec![S::zero(); np];
    let mut v = vec![S::zero(); np];
    let mut step = 0i32;

    let score = |model: &MlpModel<S>| mse(model, val).or_else(|| mse(model, train)).unwrap_or(f64::INFINITY);
    let mut best = (score(model), params.clone());
    let mut since_best = 0;
    let mut stalls = 0;
    let mut accepted_steps = 0;
    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut stop_reason = StopReason::MaxEpochs;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(rng);
        let start = params.clone();
        for chunk in order.chunks(cfg.batch_size) {
            let g = batch_gradient(model, train, chunk.iter().copied());
            step += 1;
            let c1 = S::one() - beta1.powi(step);
            let c2 = S::one() - beta2.powi(step);
            for k in 0..np {
                m[k] = beta1 * m[k] + (S::one() - beta1) * g[k];
                v[k] = beta2 * v[k] + (S::one() - beta2) * g[k] * g[k];
                params[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
            }
            model.set_params(&params)?;
        }
        let train_mse = mse(model, train).unwrap_or(f64::INFINITY);
        if !train_mse.is_finite() {
            // diverged: undo the epoch
            params = start;
            model.set_params(&params)?;
            stalls += 1;
            if stalls >= cfg.stall_limit {
                return Err(Error::NoProgress { epochs: stalls });
            }
            continue;
        }
        stalls = 0;
        accepted_steps += 1;
        let s = score(model);
        history.push(EpochRecord {
            epoch,
            mse_train: train_mse,
            mse_val: mse(model, val),
            alpha: None,
            beta: None,
            gamma: None,
            objective_before: None,
            objective_after: None,
        });
        if s < best.0 {
            best = (s, params.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                stop_reason = StopReason::EarlyStopping;
                break;
            }
        }
    }
    model.set_params(&best.1)?;
    Ok(Outcome {
        history,
        stop_reason,
        accepted_steps,
    })
}

/// Number of bins in the error histogram.
pub const ERROR_BINS: usize = 20;

/// Equal-width histogram of prediction errors between their extremes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    /// `bins + 1` ascending edges from `min_error` to `max_error`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub min_error: f64,
    pub max_error: f64,
}

impl ErrorHistogram {
    pub fn new(errors: &[f64]) -> Result<Self> {
        Self::with_bins(errors, ERROR_BINS)
    }

    pub fn with_bins(errors: &[f64], bins: usize) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if bins == 0 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("errors must be finite".into()));
        }
        let min = errors.iter().copied().fold(f64::INFINITY, f64::min);
        let max = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (max - min) / bins as f64;
        let bin_edges = (0..=bins)
            .map(|k| if k == bins { max } else { min + width * k as f64 })
            .collect();
        let mut counts = vec![0; bins];
        for &e in errors {
            let k = if width > 0.0 {
                (((e - min) / width).floor() as usize).min(bins - 1)
            } else {
                0
            };
            counts[k] += 1;
        }
        Ok(ErrorHistogram {
            bin_edges,
            counts,
            min_error: min,
            max_error: max,
        })
    }

    pub fn bin_width(&self) -> f64 {
        (self.max_error - self.min_error) / self.counts.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.bin_edges[k], self.bin_edges[k + 1], c);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub samples: usize,
    /// Mean squared error (A^2).
    pub mse: f64,
    pub histogram: ErrorHistogram,
    /// Pearson correlation between targets and predictions.
    pub r: f64,
}

/// Pearson correlation; `DegenerateVariance` when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch("correlation needs equal, non-empty inputs".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Errors (`target - prediction`, A), their histogram and the regression
/// coefficient of predictions on targets.
pub fn evaluate<S: Scalar>(model: &MlpModel<S>, samples: &[Sample]) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let targets: Vec<f64> = samples.iter().map(|s| s.i_mp).collect();
    let predictions: Vec<f64> = samples
        .iter()
        .map(|s| model.forward(S::of(s.t_c), S::of(s.g)).to_f64())
        .collect();
    let errors: Vec<f64> = targets.iter().zip(&predictions).map(|(t, p)| t - p).collect();
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    let histogram = ErrorHistogram::new(&errors)?;
    let r = pearson(&targets, &predictions)?;
    Ok(Evaluation {
        samples: samples.len(),
        mse,
        histogram,
        r,
    })
}
