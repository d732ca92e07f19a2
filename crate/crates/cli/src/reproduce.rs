//! End-to-end pipeline with one pass/fail verdict per acceptance criterion.
//!
//! Each check returns a [`Verdict`] rather than panicking, so a single failure
//! never hides the others.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use helios_core::dataset::{generate_grid, shuffle_split, DataSplit, Dataset, GridSpec, Manifest, SplitFractions};
use helios_core::io::write_string_atomic;
use helios_core::mlp::{MlpModel, NormSpec};
use helios_core::mpp::{find_mpp, MppConfig};
use helios_core::pv::{EnvConditions, ModuleParams, SolverConfig};
use helios_core::sim::{compare, nn_decision, run_simulation, ControllerKind, Scenario};
use helios_core::train::{evaluate, gradient, train, ErrorHistogram, TrainConfig};
use helios_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::published;
use crate::tolerances as tol;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Verdict {
    fn new(id: u8, title: &'static str, start: Instant, outcome: Result<(bool, String), Error>) -> Self {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        Verdict {
            id,
            title,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}. {:<28} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub fn table(verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        let _ = writeln!(out, "{}", v.line());
    }
    let passed = verdicts.iter().filter(|v| v.passed).count();
    let _ = writeln!(out, "{passed}/{} criteria passed", verdicts.len());
    out
}

fn within_rel(x: f64, reference: f64, rel: f64) -> bool {
    (x - reference).abs() <= rel * reference.abs()
}

fn stc() -> EnvConditions {
    EnvConditions::from_celsius(25.0, 1000.0)
}

/// 1. STC operating point.
pub fn stc_operating_point(params: &ModuleParams) -> Verdict {
    let start = Instant::now();
    let outcome = find_mpp(params, &stc(), &MppConfig::default()).map(|r| {
        let ok = within_rel(r.p_max, tol::STC_P_MAX_W, tol::P_MAX_REL)
            && (r.v_mp - tol::STC_V_MP_V).abs() <= tol::V_MP_ABS_V
            && within_rel(r.i_mp, tol::STC_I_MP_A, tol::I_MP_REL)
            && start.elapsed().as_secs_f64() < tol::BUDGET_STC_S;
        (
            ok,
            format!("P_max {:.4} W, V_mp {:.4} V, I_mp {:.4} A", r.p_max, r.v_mp, r.i_mp),
        )
    });
    Verdict::new(1, "STC operating point", start, outcome)
}

/// F(I) written out from the circuit equations, independent of the solver.
pub fn circuit_residual(p: &ModuleParams, env: &EnvConditions, v: f64, i: f64) -> f64 {
    let t_k = env.t_k;
    let iph = (p.isc_ref + p.ki * (t_k - p.t_ref)) * env.g / p.g_ref;
    let irs = p.isc_ref / ((p.q * p.voc_ref / (p.ideality * p.ns as f64 * p.k_b * t_k)).exp() - 1.0);
    let i0 = irs
        * (t_k / p.t_ref).powi(3)
        * (p.q * p.eg0 * (1.0 / p.t_ref - 1.0 / t_k) / (p.ideality * p.k_b)).exp();
    let a = p.ideality * p.k_b * p.ns as f64 * t_k / p.q;
    let vd = v + i * p.rs;
    iph - i0 * (vd / a).exp_m1() - vd / p.rsh - i
}

/// 2. Solver residual, curve endpoints and unimodality.
pub fn solver_properties(params: &ModuleParams, seed: u64) -> Verdict {
    let start = Instant::now();
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..tol::RESIDUAL_SAMPLES {
            let env = EnvConditions::from_celsius(rng.random_range(15.0..=40.0), rng.random_range(0.0..=1090.0));
            let v = rng.random_range(0.0..=1.1 * params.voc_ref);
            let i = params.solve_output_current(&env, v)?;
            worst = worst.max(circuit_residual(params, &env, v, i).abs());
        }
        let curve = params.curve(&stc(), &SolverConfig::default())?;
        let iph = params.photo_current(&stc());
        let i_sc = curve.current(0.0)?;
        let voc = curve.open_circuit_voltage()?;
        let sweep = params.sweep_iv(&stc(), params.voc_ref, tol::UNIMODAL_POINTS)?;
        let diffs: Vec<f64> = sweep.points.windows(2).map(|w| w[1].p - w[0].p).collect();
        let sign_changes = diffs.windows(2).filter(|d| (d[0] > 0.0) != (d[1] > 0.0)).count();
        let ok = worst <= tol::RESIDUAL_A
            && within_rel(i_sc, iph, tol::SHORT_CIRCUIT_REL)
            && within_rel(voc, params.voc_ref, tol::OPEN_CIRCUIT_REL)
            && sign_changes == 1
            && start.elapsed().as_secs_f64() < tol::BUDGET_SOLVER_S;
        Ok((
            ok,
            format!(
                "max |F| {worst:.2e} A, I(0)/I_ph {:.5}, V_oc {voc:.4} V, {sign_changes} turning point(s)",
                i_sc / iph
            ),
        ))
    })();
    Verdict::new(2, "solver properties", start, outcome)
}

/// Default dataset and split, with byte-level determinism.
pub struct DatasetStage {
    pub dataset: Dataset,
    pub split: DataSplit,
}

/// 3. Dataset reproduction.
pub fn dataset_reproduction(params: &ModuleParams, seed: u64, out_dir: Option<&Path>) -> (Verdict, Option<DatasetStage>) {
    let start = Instant::now();
    let mut stage = None;
    let outcome = (|| {
        let grid = GridSpec::default();
        let dataset = generate_grid(params, &grid)?;
        let again = generate_grid(params, &grid)?;
        let split = shuffle_split(&dataset, seed, SplitFractions::default())?;
        let split_again = shuffle_split(&again, seed, SplitFractions::default())?;
        let bytes_equal = dataset.to_csv() == again.to_csv()
            && [&split.train, &split.validation, &split.test]
                .iter()
                .zip([&split_again.train, &split_again.validation, &split_again.test])
                .all(|(a, b)| Dataset::new(a.to_vec()).to_csv() == Dataset::new(b.to_vec()).to_csv());
        let fold = |f: fn(&helios_core::dataset::Sample) -> f64| {
            dataset
                .samples
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
        };
        let t_range = fold(|s| s.t_c);
        let g_range = fold(|s| s.g);
        let ok = dataset.len() == tol::DATASET_ROWS
            && t_range == (15.0, 40.0)
            && g_range == (200.0, 1090.0)
            && split.sizes() == tol::SPLIT_SIZES
            && bytes_equal;
        let detail = format!(
            "{} rows, T {:?}, G {:?}, split {:?}, deterministic {bytes_equal}",
            dataset.len(),
            t_range,
            g_range,
            split.sizes()
        );
        if let Some(dir) = out_dir {
            let path = dir.join("dataset.csv");
            dataset.export(&path)?;
            let mut manifest = Manifest::for_dataset(dataset.len());
            manifest.grid = Some(grid);
            manifest.params_sha256 = Some(helios_core::dataset::params_hash(params));
            manifest.write(dir.join("dataset.manifest.json"))?;
            split.export(dir.join("split"), manifest)?;
        }
        stage = Some(DatasetStage { dataset, split });
        Ok((ok, detail))
    })();
    (Verdict::new(3, "dataset reproduction", start, outcome), stage)
}

/// 4. Bayesian-regularized training on the default split.
pub fn training_quality(params: &ModuleParams, split: Option<&DataSplit>, seed: u64, out_dir: Option<&Path>) -> (Verdict, Option<MlpModel>) {
    let start = Instant::now();
    let mut trained = None;
    let outcome = (|| {
        let split = split.ok_or_else(|| Error::InvalidParameter("no dataset split available".into()))?;
        let cfg = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        let (model, report) = train::<f64>(split, &cfg)?;
        let oracle = find_mpp(params, &stc(), &MppConfig::default())?;
        let prediction = model.forward(25.0, 1000.0);
        let test_mse = report.mse_test.map_or(f64::INFINITY, |m| m.amps2);
        let deviation = (prediction - oracle.i_mp).abs() / oracle.i_mp;
        let ok = test_mse <= tol::TEST_MSE_A2
            && deviation <= tol::PREDICTION_REL
            && start.elapsed().as_secs_f64() <= tol::BUDGET_TRAINING_S;
        let detail = format!(
            "test MSE {test_mse:.3e} A^2 ({:.3e} normalized), I_mp(25, 1000) {prediction:.5} A vs oracle {:.5} A ({:.4}%), {} epochs",
            report.mse_test.map_or(f64::NAN, |m| m.normalized),
            oracle.i_mp,
            100.0 * deviation,
            report.epochs_run
        );
        if let Some(dir) = out_dir {
            model.save(dir.join("model.json"))?;
            report.write(&dir.join("train_report.json"), &dir.join("train_history.csv"))?;
            let eval = evaluate(&model, &split.test)?;
            write_string_atomic(&dir.join("test_histogram.csv"), &eval.histogram.to_csv())?;
            let mut json = serde_json::to_string_pretty(&eval).expect("evaluation serializes");
            json.push('\n');
            write_string_atomic(&dir.join("test_eval.json"), &json)?;
        }
        trained = Some(model);
        Ok((ok, detail))
    })();
    (Verdict::new(4, "training quality", start, outcome), trained)
}

/// Mean squared normalized error, evaluated directly from the forward pass.
fn mse_normalized(model: &MlpModel, batch: &[helios_core::dataset::Sample]) -> f64 {
    let norm = model.norm();
    batch
        .iter()
        .map(|s| {
            let y = model.forward_normalized(norm.normalize_inputs(s.t_c, s.g));
            (y - norm.normalize_target(s.i_mp)).powi(2)
        })
        .sum::<f64>()
        / batch.len() as f64
}

/// Worst relative gap between the analytic gradient and central differences.
pub fn gradient_gap(seed: u64) -> Result<f64, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = NormSpec::new([15.0, 40.0], [200.0, 1090.0], [1.4, 8.4])?;
    let mut model = MlpModel::<f64>::random(15, norm, &mut rng)?;
    let n = rng.random_range(4..64);
    let batch: Vec<_> = (0..n)
        .map(|_| helios_core::dataset::Sample {
            t_c: rng.random_range(15.0..40.0),
            g: rng.random_range(200.0..1090.0),
            i_mp: rng.random_range(1.4..8.4),
        })
        .collect();
    let analytic = gradient(&model, &batch)?;
    let base = model.params();
    let h = tol::GRADIENT_STEP;
    let mut diff2 = 0.0;
    let mut norm2 = 0.0;
    for k in 0..base.len() {
        let mut p = base.clone();
        p[k] = base[k] + h;
        model.set_params(&p)?;
        let up = mse_normalized(&model, &batch);
        p[k] = base[k] - h;
        model.set_params(&p)?;
        let down = mse_normalized(&model, &batch);
        let numeric = (up - down) / (2.0 * h);
        diff2 += (analytic[k] - numeric).powi(2);
        norm2 += numeric * numeric;
    }
    Ok((diff2 / norm2).sqrt())
}

/// 5. Gradient oracle.
pub fn gradient_oracle() -> Verdict {
    let start = Instant::now();
    let outcome = (0..tol::GRADIENT_SEEDS)
        .map(gradient_gap)
        .collect::<Result<Vec<_>, _>>()
        .map(|gaps| {
            let worst = gaps.iter().copied().fold(0.0, f64::max);
            (
                worst <= tol::GRADIENT_REL,
                format!("worst relative error {worst:.2e} over {} seeds", gaps.len()),
            )
        });
    Verdict::new(5, "gradient oracle", start, outcome)
}

/// Error list spanning [-0.2222, 0.1968] and its bin counts from an
/// independent binning script.
pub fn histogram_fixture() -> (Vec<f64>, [usize; 20]) {
    let mut errors = vec![-0.2222, 0.1968];
    errors.extend((0..98).map(|k| 0.2 * (1.7 * k as f64 + 0.3).sin() - 0.012));
    (errors, [11, 7, 6, 4, 4, 4, 4, 3, 3, 2, 3, 5, 4, 3, 3, 5, 5, 4, 7, 13])
}

/// 6. Histogram arithmetic.
pub fn histogram_arithmetic() -> Verdict {
    let start = Instant::now();
    let (errors, expected) = histogram_fixture();
    let outcome = ErrorHistogram::new(&errors).map(|h| {
        let width = h.bin_width();
        let ok = (width - tol::BIN_WIDTH).abs() <= tol::BIN_WIDTH_ABS && h.counts == expected;
        (
            ok,
            format!("bin width {width:.17}, counts match oracle {}", h.counts == expected),
        )
    });
    Verdict::new(6, "histogram arithmetic", start, outcome)
}

pub fn constant_stc_scenario() -> Scenario {
    Scenario::constant(25.0, 1000.0, tol::SCENARIO_DURATION_S)
}

pub fn step_scenario() -> Scenario {
    Scenario::irradiance_step(25.0, 1000.0, 600.0, tol::STEP_TIME_S, tol::SCENARIO_DURATION_S)
}

/// 7. Controller ordering on the constant and step scenarios.
pub fn controller_ordering(params: &ModuleParams, model: Option<&MlpModel>, out_dir: Option<&Path>) -> Verdict {
    let start = Instant::now();
    let outcome = (|| {
        let model = model.ok_or_else(|| Error::InvalidController("no trained model available".into()))?;
        let mut ok = true;
        let mut detail = Vec::new();
        for scenario in [constant_stc_scenario(), step_scenario()] {
            let (report, results) = compare(
                params,
                &scenario,
                &[
                    ControllerKind::Nn,
                    ControllerKind::PerturbObserve,
                    ControllerKind::IncrementalConductance,
                ],
                Some(model),
            )?;
            let eff = |k: ControllerKind| {
                results
                    .iter()
                    .find(|r| r.controller == k)
                    .map_or(f64::NAN, |r| r.efficiency)
            };
            let (nn, po, ic) = (
                eff(ControllerKind::Nn),
                eff(ControllerKind::PerturbObserve),
                eff(ControllerKind::IncrementalConductance),
            );
            ok &= nn >= tol::NN_EFFICIENCY_MIN && nn > po && ic >= po;
            detail.push(format!("{}: nn {nn:.6} po {po:.6} ic {ic:.6}", scenario.id));
            if let Some(dir) = out_dir {
                write_string_atomic(&dir.join(format!("compare_{}.json", scenario.id)), &report.to_json())?;
                for r in &results {
                    r.write_trace(dir.join(format!("trace_{}_{}.csv", scenario.id, r.controller)))?;
                }
            }
        }
        let perfect = run_simulation(params, &constant_stc_scenario(), ControllerKind::Oracle, None)?;
        ok &= (perfect.efficiency - 1.0).abs() <= tol::PERFECT_EFFICIENCY_ABS;
        ok &= start.elapsed().as_secs_f64() < tol::BUDGET_CONTROLLERS_S;
        detail.push(format!("perfect {:.9}", perfect.efficiency));
        Ok((ok, detail.join("; ")))
    })();
    Verdict::new(7, "controller ordering", start, outcome)
}

/// Criterion 8: bundled weights against the embedded fixture; the STC
/// prediction is a diagnostic only.
pub fn paper_weights() -> Verdict {
    let start = Instant::now();
    let m = MlpModel::paper_weights();
    let mut mismatches = 0;
    for k in 0..15 {
        mismatches += usize::from(m.b_hidden()[k] != published::HIDDEN_BIASES[k]);
        mismatches += usize::from(m.w_hidden()[k] != published::HIDDEN_WEIGHTS[k]);
        mismatches += usize::from(m.w_out()[k] != published::OUTPUT_WEIGHTS[k]);
    }
    mismatches += usize::from(m.b_out() != published::OUTPUT_BIAS);
    let diagnostic = m.forward(25.0, 1000.0);
    let ok = mismatches == 0 && m.hidden_width() == 15 && m.b_out() == 0.1528;
    Verdict::new(
        8,
        "published weights",
        start,
        Ok((
            ok,
            format!(
                "{mismatches} mismatches over 61 values, b_out {}; diagnostic I_mp(25, 1000) = {diagnostic:.4} A (not gated)",
                m.b_out()
            ),
        )),
    )
}

/// Mean wall time of one NN control decision over `steps` varied conditions.
pub fn decision_latency(params: &ModuleParams, model: &MlpModel, steps: usize) -> Result<f64, Error> {
    let start = Instant::now();
    for k in 0..steps {
        let t_c = 15.0 + (k % 26) as f64;
        let g = 200.0 + (k % 90) as f64 * 10.0;
        std::hint::black_box(nn_decision(params, model, t_c, g)?);
    }
    Ok(start.elapsed().as_secs_f64() / steps as f64)
}

/// 9. NN decision latency.
pub fn nn_latency(params: &ModuleParams, model: Option<&MlpModel>) -> Verdict {
    let start = Instant::now();
    let outcome = model
        .ok_or_else(|| Error::InvalidController("no trained model available".into()))
        .and_then(|m| decision_latency(params, m, tol::DECISION_STEPS))
        .map(|mean| {
            (
                mean < tol::DECISION_MEAN_S,
                format!("mean {:.1} us per decision over {} steps", mean * 1e6, tol::DECISION_STEPS),
            )
        });
    Verdict::new(9, "NN decision latency", start, outcome)
}

/// Runs criteria 1-9 in order; artifacts land in `out_dir` when given.
pub fn run_all(params: &ModuleParams, seed: u64, out_dir: Option<&Path>, log: &mut dyn FnMut(&Verdict)) -> Vec<Verdict> {
    let mut verdicts = Vec::with_capacity(9);
    let mut push = |v: Verdict, verdicts: &mut Vec<Verdict>| {
        log(&v);
        verdicts.push(v);
    };
    push(stc_operating_point(params), &mut verdicts);
    push(solver_properties(params, seed), &mut verdicts);
    let (v, stage) = dataset_reproduction(params, seed, out_dir);
    push(v, &mut verdicts);
    let (v, model) = training_quality(params, stage.as_ref().map(|s| &s.split), seed, out_dir);
    push(v, &mut verdicts);
    push(gradient_oracle(), &mut verdicts);
    push(histogram_arithmetic(), &mut verdicts);
    push(controller_ordering(params, model.as_ref(), out_dir), &mut verdicts);
    push(paper_weights(), &mut verdicts);
    push(nn_latency(params, model.as_ref()), &mut verdicts);
    verdicts
}

/// Verdict for the whole run: every criterion passed within the budget.
pub fn overall(verdicts: &[Verdict], start: Instant) -> Verdict {
    let failed: Vec<String> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id.to_string()).collect();
    let seconds = start.elapsed().as_secs_f64();
    let ok = failed.is_empty() && seconds <= tol::BUDGET_REPRODUCE_S;
    let detail = if failed.is_empty() {
        format!("criteria 1-{} passed", verdicts.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Verdict {
        id: 10,
        title: "reproduce end-to-end",
        passed: ok,
        detail,
        seconds,
    }
}

pub fn write_report(path: PathBuf, verdicts: &[Verdict]) -> Result<(), Error> {
    let mut json = serde_json::to_string_pretty(verdicts).expect("verdicts serialize");
    json.push('\n');
    write_string_atomic(&path, &json)
}
