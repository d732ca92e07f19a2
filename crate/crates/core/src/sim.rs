//! Closed-loop tracking simulation.
//!
//! Each control period the scenario's `(T, G)` is read by zero-order hold,
//! the controller picks an operating voltage, and the plant answers with the
//! module current at that voltage. The converter is quasi-static: the
//! commanded point is reached within the period, and the load never drives
//! current back into the module, so delivered current is clamped at zero.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controllers::{
    focv_reference, ic_step, po_step, ControllerState, DEFAULT_FOCV_K, DEFAULT_IC_EPSILON,
    DEFAULT_STEP_V,
};
use crate::error::{Error, Result};
use crate::io::{read_numeric_csv, read_to_string, write_string_atomic};
use crate::mlp::MlpModel;
use crate::mpp::{find_mpp_on, MppConfig};
use crate::pv::{EnvConditions, ModuleParams, OperatingCurve, OperatingPoint, SolverConfig};

pub const DEFAULT_CONTROL_PERIOD_S: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSample {
    pub t_s: f64,
    #[serde(rename = "T_degC")]
    pub t_c: f64,
    #[serde(rename = "G_Wm2")]
    pub g: f64,
}

/// Tunables for the baseline controllers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSettings {
    pub step_v: f64,
    pub ic_epsilon: f64,
    pub focv_k: f64,
    /// Starting reference of the hill climbers.
    pub v_init: f64,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        ControllerSettings {
            step_v: DEFAULT_STEP_V,
            ic_epsilon: DEFAULT_IC_EPSILON,
            focv_k: DEFAULT_FOCV_K,
            v_init: 15.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub id: String,
    pub control_period_s: f64,
    /// Defaults to the last sample time (at least one period).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    pub samples: Vec<ScenarioSample>,
    #[serde(default)]
    pub controllers: ControllerSettings,
}

impl Scenario {
    pub fn constant(t_c: f64, g: f64, duration_s: f64) -> Self {
        Scenario {
            id: format!("constant_{t_c}C_{g}Wm2"),
            control_period_s: DEFAULT_CONTROL_PERIOD_S,
            duration_s: Some(duration_s),
            samples: vec![ScenarioSample { t_s: 0.0, t_c, g }],
            controllers: ControllerSettings::default(),
        }
    }

    /// Irradiance steps from `g_before` to `g_after` at `t_switch`.
    pub fn irradiance_step(t_c: f64, g_before: f64, g_after: f64, t_switch: f64, duration_s: f64) -> Self {
        Scenario {
            id: format!("step_{g_before}to{g_after}Wm2_at{t_switch}s"),
            control_period_s: DEFAULT_CONTROL_PERIOD_S,
            duration_s: Some(duration_s),
            samples: vec![
                ScenarioSample { t_s: 0.0, t_c, g: g_before },
                ScenarioSample { t_s: t_switch, t_c, g: g_after },
            ],
            controllers: ControllerSettings::default(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration_s.unwrap_or_else(|| {
            let last = self.samples.last().map_or(0.0, |s| s.t_s);
            last.max(self.control_period_s)
        })
    }

    pub fn steps(&self) -> usize {
        ((self.duration() / self.control_period_s) + 1e-9).floor().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("scenario: {m}")));
        if !(self.control_period_s > 0.0) || !self.control_period_s.is_finite() {
            return bad("control_period_s must be > 0".into());
        }
        if let Some(d) = self.duration_s {
            if !(d > 0.0) || !d.is_finite() {
                return bad("duration_s must be > 0".into());
            }
        }
        let Some(first) = self.samples.first() else {
            return bad("no samples".into());
        };
        if first.t_s != 0.0 {
            return bad("first sample must be at t_s = 0".into());
        }
        for w in self.samples.windows(2) {
            if !(w[1].t_s > w[0].t_s) {
                return bad(format!("sample times not strictly increasing at t_s = {}", w[1].t_s));
            }
        }
        for s in &self.samples {
            if !s.t_c.is_finite() || !(s.g >= 0.0) || !s.g.is_finite() {
                return bad(format!("invalid conditions at t_s = {}", s.t_s));
            }
        }
        let c = &self.controllers;
        if !(c.step_v > 0.0) || !(c.ic_epsilon >= 0.0) || !(c.focv_k > 0.0 && c.focv_k < 1.0) || !(c.v_init >= 0.0) {
            return bad("invalid controller settings".into());
        }
        Ok(())
    }

    /// Conditions in force at `t` (zero-order hold).
    pub fn at(&self, t: f64) -> &ScenarioSample {
        let k = self.samples.partition_point(|s| s.t_s <= t + 1e-12);
        &self.samples[k.saturating_sub(1)]
    }

    /// Reads JSON (`.json`) or CSV `t_s,T_degC,G_Wm2` (anything else).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut scenario = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            let text = read_to_string(path)?;
            serde_json::from_str::<Scenario>(&text).map_err(|e| Error::schema(path, e.to_string()))?
        } else {
            let rows = read_numeric_csv(path, &["t_s", "T_degC", "G_Wm2"])?;
            Scenario {
                id: String::new(),
                control_period_s: DEFAULT_CONTROL_PERIOD_S,
                duration_s: None,
                samples: rows
                    .into_iter()
                    .map(|r| ScenarioSample { t_s: r[0], t_c: r[1], g: r[2] })
                    .collect(),
                controllers: ControllerSettings::default(),
            }
        };
        if scenario.id.is_empty() {
            scenario.id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Neural I_mp predictor.
    Nn,
    PerturbObserve,
    IncrementalConductance,
    Focv,
    /// Commands the oracle's V_mp every step.
    Oracle,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 5] = [
        ControllerKind::Nn,
        ControllerKind::PerturbObserve,
        ControllerKind::IncrementalConductance,
        ControllerKind::Focv,
        ControllerKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Nn => "nn",
            ControllerKind::PerturbObserve => "po",
            ControllerKind::IncrementalConductance => "ic",
            ControllerKind::Focv => "focv",
            ControllerKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidController(format!("unknown controller `{s}` (expected nn, po, ic, focv or oracle)"))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub v: f64,
    pub i: f64,
    pub p: f64,
    pub p_mpp: f64,
    pub v_ref: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub controller: ControllerKind,
    pub scenario: String,
    /// Delivered energy over ideal MPP energy.
    pub efficiency: f64,
    pub trace: Vec<TraceRow>,
}

impl SimResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t_s,v_V,i_A,p_W,p_mpp_W,v_ref_V\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.t_s, r.v, r.i, r.p, r.p_mpp, r.v_ref);
        }
        out
    }

    pub fn write_trace(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string_atomic(path.as_ref(), &self.trace_csv())
    }
}

/// The module curve and its maximum power point under one set of conditions.
struct Plant {
    env: EnvConditions,
    curve: OperatingCurve,
    voc: f64,
    v_mp: f64,
    p_mpp: f64,
}

impl Plant {
    fn new(params: &ModuleParams, sample: &ScenarioSample) -> Result<Self> {
        let env = EnvConditions::from_celsius(sample.t_c, sample.g);
        let curve = params.curve(&env, &SolverConfig::default())?;
        let voc = curve.open_circuit_voltage()?;
        let (v_mp, p_mpp) = match find_mpp_on(&curve, &MppConfig::default()) {
            Ok(m) => (m.v_mp, m.p_max),
            // a dark module delivers nothing whatever the controller does
            Err(Error::DegenerateCurve { .. }) => (0.0, 0.0),
            Err(e) => return Err(e),
        };
        Ok(Plant { env, curve, voc, v_mp, p_mpp })
    }

    /// Operating point at `v`; the load sinks current only.
    fn respond(&self, v: f64) -> Result<OperatingPoint> {
        let i = self.curve.current(v)?.max(0.0);
        Ok(OperatingPoint::new(v, i))
    }
}

/// Voltage at which the curve delivers the model's predicted I_mp, or the
/// oracle's V_mp when the prediction is off the curve.
fn nn_voltage(model: &MlpModel, plant: &Plant) -> Result<f64> {
    let t_c = plant.env.t_c();
    let i_pred = model.forward(t_c, plant.env.g);
    match plant.curve.voltage_for_current(i_pred, plant.voc)? {
        Some(v) => Ok(v),
        None => Ok(plant.v_mp),
    }
}

/// One NN control decision from scratch: curve set-up, forward pass and
/// operating-point solve.
pub fn nn_decision(params: &ModuleParams, model: &MlpModel, t_c: f64, g: f64) -> Result<f64> {
    let env = EnvConditions::from_celsius(t_c, g);
    let curve = params.curve(&env, &SolverConfig::default())?;
    let voc = curve.open_circuit_voltage()?;
    let i_pred = model.forward(t_c, g);
    match curve.voltage_for_current(i_pred, voc)? {
        Some(v) => Ok(v),
        None => Ok(find_mpp_on(&curve, &MppConfig::default())?.v_mp),
    }
}

pub fn run_simulation(
    params: &ModuleParams,
    scenario: &Scenario,
    controller: ControllerKind,
    model: Option<&MlpModel>,
) -> Result<SimResult> {
    scenario.validate()?;
    let model = match (controller, model) {
        (ControllerKind::Nn, None) => {
            return Err(Error::InvalidController("the nn controller needs a model".into()))
        }
        (ControllerKind::Nn, Some(m)) => Some(m),
        _ => None,
    };
    let settings = scenario.controllers;
    let v_max = 1.2 * params.voc_ref;
    let mut state = ControllerState::new(settings.v_init.min(v_max), v_max)?;

    let steps = scenario.steps();
    let mut trace = Vec::with_capacity(steps);
    let mut plant: Option<(ScenarioSample, Plant)> = None;
    let (mut energy, mut ideal) = (0.0, 0.0);

    for k in 0..steps {
        let t_s = k as f64 * scenario.control_period_s;
        let at_step = |source: Error| Error::AtStep {
            step: k,
            time_s: t_s,
            source: Box::new(source),
        };
        let sample = *scenario.at(t_s);
        if plant.as_ref().is_none_or(|(s, _)| *s != sample) {
            plant = Some((sample, Plant::new(params, &sample).map_err(at_step)?));
        }
        let plant = &plant.as_ref().expect("plant prepared").1;

        let v_ref = match controller {
            ControllerKind::Nn => nn_voltage(model.expect("checked above"), plant).map_err(at_step)?,
            ControllerKind::Oracle => plant.v_mp,
            ControllerKind::Focv => focv_reference(plant.voc, settings.focv_k)?,
            ControllerKind::PerturbObserve | ControllerKind::IncrementalConductance => state.v_ref,
        };
        let point = plant.respond(v_ref).map_err(at_step)?;
        state = match controller {
            ControllerKind::PerturbObserve => po_step(&state, &point, settings.step_v)?,
            ControllerKind::IncrementalConductance => {
                ic_step(&state, &point, settings.step_v, settings.ic_epsilon)?
            }
            _ => state,
        };

        energy += point.p;
        ideal += plant.p_mpp;
        trace.push(TraceRow {
            t_s,
            v: point.v,
            i: point.i,
            p: point.p,
            p_mpp: plant.p_mpp,
            v_ref,
        });
    }

    if !(ideal > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scenario `{}` offers no energy to track",
            scenario.id
        )));
    }
    Ok(SimResult {
        controller,
        scenario: scenario.id.clone(),
        efficiency: energy / ideal,
        trace,
    })
}

/// Efficiency figures quoted from the literature, never computed here.
pub const PAPER_REPORTED: [(&str, &str); 4] = [
    ("P&O", "67.4%"),
    ("IC", ">80%"),
    ("fuzzy", "<=96%"),
    ("NN", "~99.8%"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub controller: ControllerKind,
    /// 1-based rank among successful runs.
    pub rank: Option<usize>,
    pub efficiency: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperFigure {
    pub controller: String,
    pub efficiency: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    /// Ranked best first; failed runs last.
    pub measured: Vec<ComparisonEntry>,
    pub paper_reported: Vec<PaperFigure>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("scenario: {}\n\nmeasured\n", self.scenario);
        let _ = writeln!(out, "{:<6} {:<10} {:>12}", "rank", "controller", "efficiency");
        for e in &self.measured {
            let rank = e.rank.map_or("-".to_string(), |r| r.to_string());
            let eff = match (&e.efficiency, &e.error) {
                (Some(x), _) => format!("{:.4}%", 100.0 * x),
                (None, Some(err)) => format!("error: {err}"),
                (None, None) => "-".to_string(),
            };
            let _ = writeln!(out, "{:<6} {:<10} {:>12}", rank, e.controller.name(), eff);
        }
        out.push_str("\npaper-reported (literature, not measured)\n");
        for p in &self.paper_reported {
            let _ = writeln!(out, "{:<17} {:>12}", p.controller, p.efficiency);
        }
        out
    }
}

/// Runs every controller on the same scenario. A failing controller is
/// recorded with its error and does not stop the others.
pub fn compare(
    params: &ModuleParams,
    scenario: &Scenario,
    controllers: &[ControllerKind],
    model: Option<&MlpModel>,
) -> Result<(ComparisonReport, Vec<SimResult>)> {
    if controllers.len() < 2 {
        return Err(Error::InvalidParameter("comparison needs at least two controllers".into()));
    }
    scenario.validate()?;
    let mut results = Vec::new();
    let mut measured = Vec::new();
    for &c in controllers {
        match run_simulation(params, scenario, c, model) {
            Ok(r) => {
                measured.push(ComparisonEntry {
                    controller: c,
                    rank: None,
                    efficiency: Some(r.efficiency),
                    error: None,
                });
                results.push(r);
            }
            Err(e) => measured.push(ComparisonEntry {
                controller: c,
                rank: None,
                efficiency: None,
                error: Some(e.to_string()),
            }),
        }
    }
    // stable: ties keep the requested order
    measured.sort_by(|a, b| match (a.efficiency, b.efficiency) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    for (k, e) in measured.iter_mut().enumerate() {
        if e.efficiency.is_some() {
            e.rank = Some(k + 1);
        }
    }
    let report = ComparisonReport {
        scenario: scenario.id.clone(),
        measured,
        paper_reported: PAPER_REPORTED
            .iter()
            .map(|(c, e)| PaperFigure {
                controller: c.to_string(),
                efficiency: e.to_string(),
            })
            .collect(),
    };
    Ok((report, results))
}
