//! Single-diode PV module model.
//!
//! The module is a photo-current source in parallel with one diode and a shunt
//! resistance, all behind a series resistance. The terminal current is implicit:
//!
//! ```text
//! F(I) = I_ph - I_0 * (exp((V + I*R_s) / a) - 1) - (V + I*R_s) / R_sh - I = 0
//! a    = ideality * k_b * N_s * T / q
//! ```
//!
//! `F` is strictly decreasing in `I`, so every voltage has exactly one root and
//! a sign bracket always exists.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::scalar::Scalar;

/// Offset between degrees Celsius and Kelvin.
pub const KELVIN_OFFSET: f64 = 273.15;

const TABLE1_JSON: &str = include_str!("../assets/table1.json");

/// Electrical constants of a PV module.
///
/// Field names double as the JSON schema of the parameter file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct ModuleParams<S = f64> {
    /// Series-connected cells.
    pub ns: u32,
    /// Short-circuit current at the reference conditions (A).
    pub isc_ref: S,
    /// Open-circuit voltage at the reference conditions (V).
    pub voc_ref: S,
    /// Series resistance (ohm).
    pub rs: S,
    /// Shunt resistance (ohm).
    pub rsh: S,
    /// Temperature coefficient of the short-circuit current (A/K).
    pub ki: S,
    /// Diode ideality factor.
    pub ideality: S,
    /// Band-gap energy (eV).
    pub eg0: S,
    /// Reference temperature (K).
    pub t_ref: S,
    /// Reference irradiance (W/m^2).
    pub g_ref: S,
    /// Electron charge (C).
    pub q: S,
    /// Boltzmann constant (J/K).
    pub k_b: S,
}

impl ModuleParams<f64> {
    /// The bundled 54-cell, 200 W module with the calibrated `ki` and ideality.
    pub fn table1() -> Self {
        serde_json::from_str(TABLE1_JSON).expect("bundled table1.json is valid")
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: Self =
            serde_json::from_str(&text).map_err(|e| Error::schema(path, e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("module params serialize")
    }
}

impl<S: Scalar> ModuleParams<S> {
    pub fn cast<T: Scalar>(&self) -> ModuleParams<T> {
        let c = |x: S| T::of(x.to_f64());
        ModuleParams {
            ns: self.ns,
            isc_ref: c(self.isc_ref),
            voc_ref: c(self.voc_ref),
            rs: c(self.rs),
            rsh: c(self.rsh),
            ki: c(self.ki),
            ideality: c(self.ideality),
            eg0: c(self.eg0),
            t_ref: c(self.t_ref),
            g_ref: c(self.g_ref),
            q: c(self.q),
            k_b: c(self.k_b),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let all_finite = [
            self.isc_ref,
            self.voc_ref,
            self.rs,
            self.rsh,
            self.ki,
            self.ideality,
            self.eg0,
            self.t_ref,
            self.g_ref,
            self.q,
            self.k_b,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite {
            return bad("module parameters must be finite");
        }
        if self.ns < 1 {
            return bad("ns must be at least 1");
        }
        if self.rs < S::zero() {
            return bad("rs must be >= 0");
        }
        if self.rsh <= S::zero() {
            return bad("rsh must be > 0");
        }
        if self.isc_ref <= S::zero() || self.voc_ref <= S::zero() {
            return bad("isc_ref and voc_ref must be > 0");
        }
        if self.ideality < S::of(0.5) || self.ideality > S::of(2.5) {
            return bad("ideality must lie in [0.5, 2.5]");
        }
        if self.g_ref <= S::zero() || self.t_ref <= S::zero() {
            return bad("g_ref and t_ref must be > 0");
        }
        if self.q <= S::zero() || self.k_b <= S::zero() {
            return bad("q and k_b must be > 0");
        }
        Ok(())
    }

    /// Light-generated current, linear in irradiance.
    pub fn photo_current(&self, env: &EnvConditions<S>) -> S {
        (self.isc_ref + self.ki * (env.t_k - self.t_ref)) * env.g / self.g_ref
    }

    /// Diode reverse saturation current at temperature `t_k`.
    pub fn reverse_saturation_current(&self, t_k: S, exponent_cap: S) -> Result<S> {
        if !(t_k > S::zero()) {
            return Err(Error::InvalidParameter(format!("temperature {t_k} K must be > 0")));
        }
        let ns = S::of(f64::from(self.ns));
        let exponent = self.q * self.voc_ref / (self.ideality * ns * self.k_b * t_k);
        check_exponent(exponent, exponent_cap)?;
        let denom = exponent.exp_m1();
        let irs = self.isc_ref / denom;
        if !(denom > S::zero()) || !irs.is_finite() {
            return Err(Error::NumericOverflow {
                exponent: exponent.to_f64(),
                cap: exponent_cap.to_f64(),
            });
        }
        Ok(irs)
    }

    /// Diode saturation current at temperature `t_k`, scaled from the reverse
    /// saturation current by the cubic temperature law and the band-gap term.
    pub fn saturation_current(&self, t_k: S, exponent_cap: S) -> Result<S> {
        let irs = self.reverse_saturation_current(t_k, exponent_cap)?;
        let ratio = t_k / self.t_ref;
        // eg0 is in eV; q * eg0 converts it to joules.
        let exponent = self.q * self.eg0 * (self.t_ref.recip() - t_k.recip())
            / (self.ideality * self.k_b);
        check_exponent(exponent, exponent_cap)?;
        let i0 = irs * ratio * ratio * ratio * exponent.exp();
        if !i0.is_finite() {
            return Err(Error::NumericOverflow {
                exponent: exponent.to_f64(),
                cap: exponent_cap.to_f64(),
            });
        }
        Ok(i0)
    }

    /// Module thermal voltage `ideality * k_b * N_s * T / q` (V).
    pub fn thermal_voltage(&self, t_k: S) -> S {
        self.ideality * self.k_b * S::of(f64::from(self.ns)) * t_k / self.q
    }

    /// Freezes the temperature- and irradiance-dependent quantities for `env`.
    pub fn curve(&self, env: &EnvConditions<S>, solver: &SolverConfig<S>) -> Result<OperatingCurve<S>> {
        env.validate()?;
        Ok(OperatingCurve {
            env: *env,
            iph: self.photo_current(env),
            i0: self.saturation_current(env.t_k, solver.exponent_cap)?,
            a: self.thermal_voltage(env.t_k),
            rs: self.rs,
            rsh: self.rsh,
            voc_hint: self.voc_ref,
            solver: *solver,
        })
    }

    /// Terminal current at voltage `v` under `env`.
    pub fn solve_output_current(&self, env: &EnvConditions<S>, v: S) -> Result<S> {
        self.curve(env, &SolverConfig::default())?.current(v)
    }

    /// `n_points` evenly spaced voltages over `[0, v_max]`.
    pub fn sweep_iv(&self, env: &EnvConditions<S>, v_max: S, n_points: usize) -> Result<IvCurve<S>> {
        self.curve(env, &SolverConfig::default())?.sweep(v_max, n_points)
    }
}

fn check_exponent<S: Scalar>(exponent: S, cap: S) -> Result<()> {
    if !exponent.is_finite() || exponent > cap {
        return Err(Error::NumericOverflow {
            exponent: exponent.to_f64(),
            cap: cap.to_f64(),
        });
    }
    Ok(())
}

/// Cell temperature and irradiance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EnvConditions<S = f64> {
    /// Cell temperature (K).
    pub t_k: S,
    /// Irradiance (W/m^2).
    pub g: S,
}

impl<S: Scalar> EnvConditions<S> {
    pub fn new(t_k: S, g: S) -> Self {
        EnvConditions { t_k, g }
    }

    pub fn from_celsius(t_c: S, g: S) -> Self {
        EnvConditions {
            t_k: t_c + S::of(KELVIN_OFFSET),
            g,
        }
    }

    pub fn t_c(&self) -> S {
        self.t_k - S::of(KELVIN_OFFSET)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_k > S::zero()) || !self.t_k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature {} K must be finite and > 0",
                self.t_k
            )));
        }
        if !(self.g >= S::zero()) || !self.g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "irradiance {} W/m^2 must be finite and >= 0",
                self.g
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct OperatingPoint<S = f64> {
    pub v: S,
    pub i: S,
    pub p: S,
}

impl<S: Scalar> OperatingPoint<S> {
    pub fn new(v: S, i: S) -> Self {
        OperatingPoint { v, i, p: v * i }
    }
}

/// Controls for the implicit current solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<S = f64> {
    /// Required `|F(I)|` at the returned root (A).
    pub residual_tol: S,
    pub max_iter: usize,
    /// Largest exponent passed to `exp` before reporting overflow.
    pub exponent_cap: S,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        SolverConfig {
            residual_tol: S::of(S::CURRENT_TOL),
            max_iter: 200,
            exponent_cap: S::of(700.0).min(S::max_value().ln()),
        }
    }
}

/// The module's I-V relation at one fixed (T, G).
#[derive(Clone, Copy, Debug)]
pub struct OperatingCurve<S = f64> {
    pub env: EnvConditions<S>,
    pub iph: S,
    pub i0: S,
    /// Module thermal voltage (V).
    pub a: S,
    pub rs: S,
    pub rsh: S,
    voc_hint: S,
    solver: SolverConfig<S>,
}

impl<S: Scalar> OperatingCurve<S> {
    /// `F(I)` at voltage `v`; negative infinity once the diode term overflows.
    pub fn residual(&self, i: S, v: S) -> S {
        let vd = v + i * self.rs;
        let diode = self.i0 * (vd / self.a).exp_m1();
        let f = self.iph - diode - vd / self.rsh - i;
        if f.is_nan() {
            S::neg_infinity()
        } else {
            f
        }
    }

    fn residual_slope(&self, i: S, v: S) -> S {
        let vd = v + i * self.rs;
        -self.i0 * (vd / self.a).exp() * self.rs / self.a - self.rs / self.rsh - S::one()
    }

    /// Terminal current at `v`, `|F(I)| <= residual_tol`.
    ///
    /// Safeguarded Newton from `I = I_ph`: steps are halved while the residual
    /// grows and replaced by bisection when they leave the sign bracket.
    pub fn current(&self, v: S) -> Result<S> {
        if !(v >= S::zero()) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("voltage {v} V must be finite and >= 0")));
        }
        let tol = self.solver.residual_tol;
        let two = S::of(2.0);
        let no_convergence = |residual: S, iterations: usize| Error::NoConvergence {
            voltage: v.to_f64(),
            residual: residual.to_f64(),
            iterations,
        };

        // F(lo) >= 0 >= F(hi)
        let mut lo = S::of(-0.1);
        let mut hi = S::of(1.5) * self.iph + S::one();
        let mut widen = 0;
        while self.residual(lo, v) < S::zero() {
            lo = lo * two - S::one();
            widen += 1;
            if widen > 200 || !lo.is_finite() {
                return Err(no_convergence(self.residual(lo, v), 0));
            }
        }
        while self.residual(hi, v) > S::zero() {
            hi = hi * two + S::one();
            widen += 1;
            if widen > 200 || !hi.is_finite() {
                return Err(no_convergence(self.residual(hi, v), 0));
            }
        }

        let mut i = self.iph.max(lo).min(hi);
        let mut f = self.residual(i, v);
        for iter in 0..self.solver.max_iter {
            if f.abs() <= tol {
                return Ok(i);
            }
            if f > S::zero() {
                lo = i;
            } else {
                hi = i;
            }

            let slope = self.residual_slope(i, v);
            let mut step = -f / slope;
            let mut next = None;
            if step.is_finite() {
                for _ in 0..8 {
                    let candidate = i + step;
                    if candidate > lo && candidate < hi {
                        let fc = self.residual(candidate, v);
                        if fc.abs() < f.abs() {
                            next = Some((candidate, fc));
                            break;
                        }
                    }
                    step = step / two;
                }
            }
            let (ni, nf) = next.unwrap_or_else(|| {
                let mid = (lo + hi) / two;
                (mid, self.residual(mid, v))
            });
            if ni == i {
                // bracket collapsed to adjacent floats
                return if nf.abs() <= tol {
                    Ok(ni)
                } else {
                    Err(no_convergence(nf, iter + 1))
                };
            }
            i = ni;
            f = nf;
        }
        if f.abs() <= tol {
            Ok(i)
        } else {
            Err(no_convergence(f, self.solver.max_iter))
        }
    }

    pub fn point(&self, v: S) -> Result<OperatingPoint<S>> {
        Ok(OperatingPoint::new(v, self.current(v)?))
    }

    /// Voltage where the terminal current crosses zero, found by bisection.
    /// Zero when the curve carries no current at all.
    pub fn open_circuit_voltage(&self) -> Result<S> {
        self.open_circuit_voltage_counted().map(|(voc, _)| voc)
    }

    /// [`Self::open_circuit_voltage`] plus the number of current solves spent.
    pub fn open_circuit_voltage_counted(&self) -> Result<(S, usize)> {
        let two = S::of(2.0);
        let mut solves = 1;
        if self.current(S::zero())? <= S::zero() {
            return Ok((S::zero(), solves));
        }
        let mut lo = S::zero();
        let mut hi = self.voc_hint.max(S::one()) * S::of(1.5);
        loop {
            solves += 1;
            if self.current(hi)? <= S::zero() {
                break;
            }
            lo = hi;
            hi = hi * two;
            if solves > 60 {
                return Err(Error::NoConvergence {
                    voltage: hi.to_f64(),
                    residual: f64::NAN,
                    iterations: solves,
                });
            }
        }
        let vtol = S::of(1e-12).max(S::epsilon() * hi * S::of(4.0));
        for _ in 0..200 {
            if hi - lo <= vtol {
                break;
            }
            let mid = (lo + hi) / two;
            solves += 1;
            if self.current(mid)? > S::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(((lo + hi) / two, solves))
    }

    /// Voltage in `[0, voc]` where the terminal current equals `target`, by
    /// bisection on the non-increasing I-V relation. `None` if `target` lies
    /// outside `(0, I(0)]`.
    pub fn voltage_for_current(&self, target: S, voc: S) -> Result<Option<S>> {
        let two = S::of(2.0);
        let i_sc = self.current(S::zero())?;
        if !(target > S::zero()) || target > i_sc || !(voc > S::zero()) {
            return Ok(None);
        }
        let (mut lo, mut hi) = (S::zero(), voc);
        let vtol = S::of(1e-10).max(S::epsilon() * voc * S::of(4.0));
        for _ in 0..200 {
            if hi - lo <= vtol {
                break;
            }
            let mid = (lo + hi) / two;
            if self.current(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some((lo + hi) / two))
    }

    pub fn sweep(&self, v_max: S, n_points: usize) -> Result<IvCurve<S>> {
        if n_points < 2 {
            return Err(Error::InvalidParameter("sweep needs at least 2 points".into()));
        }
        if !(v_max > S::zero()) || !v_max.is_finite() {
            return Err(Error::InvalidParameter(format!("v_max {v_max} must be > 0")));
        }
        let last = S::of((n_points - 1) as f64);
        let points = (0..n_points)
            .map(|k| {
                // pin the endpoint exactly to v_max
                let v = if k + 1 == n_points {
                    v_max
                } else {
                    v_max * S::of(k as f64) / last
                };
                self.point(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IvCurve {
            points,
            env: self.env,
        })
    }
}

/// A sampled I-V curve, ordered by increasing voltage from `v = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct IvCurve<S = f64> {
    pub points: Vec<OperatingPoint<S>>,
    pub env: EnvConditions<S>,
}

impl<S: Scalar> IvCurve<S> {
    pub fn max_power_point(&self) -> Option<&OperatingPoint<S>> {
        self.points
            .iter()
            .max_by(|a, b| a.p.partial_cmp(&b.p).unwrap_or(std::cmp::Ordering::Equal))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("v_V,i_A,p_W\n");
        for pt in &self.points {
            out.push_str(&format!("{},{},{}\n", pt.v, pt.i, pt.p));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), |w| w.write_all(self.to_csv().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stc() -> EnvConditions {
        EnvConditions::from_celsius(25.0, 1000.0)
    }

    #[test]
    fn table1_matches_bundled_values() {
        let p = ModuleParams::table1();
        assert_eq!(p.ns, 54);
        assert_eq!(p.isc_ref, 8.21);
        assert_eq!(p.voc_ref, 32.9);
        assert_eq!(p.rs, 0.221);
        assert_eq!(p.rsh, 415.405);
        assert_eq!(p.ki, 0.0032);
        assert_eq!(p.ideality, 1.3);
        assert_eq!(p.t_ref, 298.15);
        p.validate().unwrap();
    }

    #[test]
    fn photo_current_examples() {
        let p = ModuleParams::table1();
        assert_eq!(p.photo_current(&EnvConditions::new(298.15, 1000.0)), 8.21);
        assert_relative_eq!(p.photo_current(&EnvConditions::new(298.15, 500.0)), 4.105, epsilon = 1e-15);
        // mpmath oracle: 8.274
        assert_relative_eq!(p.photo_current(&EnvConditions::new(318.15, 1000.0)), 8.274, epsilon = 1e-12);
    }

    #[test]
    fn reverse_saturation_golden() {
        let p = ModuleParams::table1();
        // mpmath (40 digits): 1.005174744629453636e-7
        let irs = p.reverse_saturation_current(298.15, 700.0).unwrap();
        assert_relative_eq!(irs, 1.005174744629453636e-7, max_relative = 1e-12);
    }

    #[test]
    fn reverse_saturation_singular_limit_is_overflow() {
        let mut p = ModuleParams::table1();
        p.voc_ref = 0.0;
        assert!(matches!(
            p.reverse_saturation_current(298.15, 700.0),
            Err(Error::NumericOverflow { .. })
        ));
    }

    #[test]
    fn reverse_saturation_exponent_cap() {
        let p = ModuleParams::table1();
        assert!(matches!(
            p.reverse_saturation_current(298.15, 10.0),
            Err(Error::NumericOverflow { .. })
        ));
    }

    #[test]
    fn more_cells_raise_reverse_saturation() {
        let p = ModuleParams::table1();
        let doubled = ModuleParams { ns: 108, ..p };
        assert!(
            doubled.reverse_saturation_current(298.15, 700.0).unwrap()
                > p.reverse_saturation_current(298.15, 700.0).unwrap()
        );
    }

    #[test]
    fn saturation_current_examples() {
        let p = ModuleParams::table1();
        let irs = p.reverse_saturation_current(298.15, 700.0).unwrap();
        assert_eq!(p.saturation_current(298.15, 700.0).unwrap(), irs);
        assert!(p.saturation_current(308.15, 700.0).unwrap() > irs);
        // mpmath oracle: 6.674205146424106630e-6
        assert_relative_eq!(
            p.saturation_current(323.15, 700.0).unwrap(),
            6.674205146424106630e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn dark_short_circuit_is_zero() {
        let p = ModuleParams::table1();
        let i = p.solve_output_current(&EnvConditions::from_celsius(25.0, 0.0), 0.0).unwrap();
        assert!(i.abs() <= 1e-9);
    }

    #[test]
    fn stc_current_at_reported_mpp_voltage() {
        let p = ModuleParams::table1();
        let i = p.solve_output_current(&stc(), 26.4).unwrap();
        // mpmath bisection: 7.5751752722527386
        assert_relative_eq!(i, 7.5751752722527386, epsilon = 1e-9);
        assert_relative_eq!(i, 7.5764, max_relative = 1e-3);
    }

    #[test]
    fn stc_short_circuit_current() {
        let p = ModuleParams::table1();
        let i = p.solve_output_current(&stc(), 0.0).unwrap();
        // mpmath bisection over [-50, 1.2*Isc+1]: 8.2056343389867914
        assert_relative_eq!(i, 8.2056343389867914, epsilon = 1e-9);
    }

    #[test]
    fn negative_voltage_rejected() {
        let p = ModuleParams::table1();
        assert!(matches!(
            p.solve_output_current(&stc(), -1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn far_beyond_open_circuit_still_converges() {
        let p = ModuleParams::table1();
        let curve = p.curve(&stc(), &SolverConfig::default()).unwrap();
        let i = curve.current(60.0).unwrap();
        assert!(i < 0.0);
        assert!(curve.residual(i, 60.0).abs() <= 1e-9);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let p = ModuleParams::table1();
        let solver = SolverConfig {
            max_iter: 1,
            ..SolverConfig::default()
        };
        let curve = p.curve(&stc(), &solver).unwrap();
        match curve.current(30.0) {
            Err(Error::NoConvergence { voltage, residual, .. }) => {
                assert_eq!(voltage, 30.0);
                assert!(residual.abs() > 1e-9);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn stc_sweep_peaks_near_26_4() {
        let p = ModuleParams::table1();
        let curve = p.sweep_iv(&stc(), 32.9, 330).unwrap();
        assert_eq!(curve.points.len(), 330);
        assert_eq!(curve.points[0].v, 0.0);
        assert_eq!(curve.points.last().unwrap().v, 32.9);
        let mpp = curve.max_power_point().unwrap();
        assert!((mpp.v - 26.4).abs() < 0.3, "v = {}", mpp.v);
        assert!((mpp.p - 200.017).abs() / 200.017 < 0.01, "p = {}", mpp.p);
        for w in curve.points.windows(2) {
            assert!(w[1].v > w[0].v);
            assert!(w[1].i <= w[0].i);
        }
    }

    #[test]
    fn dark_sweep_has_no_power() {
        let p = ModuleParams::table1();
        let curve = p.sweep_iv(&EnvConditions::from_celsius(25.0, 0.0), 30.0, 50).unwrap();
        for pt in &curve.points {
            assert!(pt.i <= 1e-9);
        }
        assert!(curve.max_power_point().unwrap().p <= 1e-9);
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        let p = ModuleParams::table1();
        assert!(p.sweep_iv(&stc(), 32.9, 1).is_err());
        assert!(p.sweep_iv(&stc(), 0.0, 10).is_err());
    }

    #[test]
    fn csv_header() {
        let p = ModuleParams::table1();
        let csv = p.sweep_iv(&stc(), 10.0, 3).unwrap().to_csv();
        assert!(csv.starts_with("v_V,i_A,p_W\n0,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn open_circuit_voltage_near_datasheet() {
        let p = ModuleParams::table1();
        let curve = p.curve(&stc(), &SolverConfig::default()).unwrap();
        let voc = curve.open_circuit_voltage().unwrap();
        // scipy brentq oracle: 32.8825039318
        assert_relative_eq!(voc, 32.8825039318, epsilon = 1e-8);
    }

    #[test]
    fn voltage_for_current_inverts_the_curve() {
        let p = ModuleParams::table1();
        let curve = p.curve(&stc(), &SolverConfig::default()).unwrap();
        let voc = curve.open_circuit_voltage().unwrap();
        let v = curve.voltage_for_current(7.5, voc).unwrap().unwrap();
        assert_relative_eq!(curve.current(v).unwrap(), 7.5, epsilon = 1e-8);
        assert_eq!(curve.voltage_for_current(9.0, voc).unwrap(), None);
        assert_eq!(curve.voltage_for_current(-1.0, voc).unwrap(), None);
    }

    #[test]
    fn f32_model_tracks_f64() {
        let p64 = ModuleParams::table1();
        let p32: ModuleParams<f32> = p64.cast();
        let i32_ = p32
            .solve_output_current(&EnvConditions::from_celsius(25.0f32, 1000.0), 26.4)
            .unwrap();
        let i64_ = p64.solve_output_current(&stc(), 26.4).unwrap();
        assert!((f64::from(i32_) - i64_).abs() < 1e-3);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = ModuleParams::table1();
        assert!(ModuleParams { rsh: 0.0, ..p }.validate().is_err());
        assert!(ModuleParams { rs: -0.1, ..p }.validate().is_err());
        assert!(ModuleParams { ns: 0, ..p }.validate().is_err());
        assert!(ModuleParams { ideality: 3.0, ..p }.validate().is_err());
        assert!(ModuleParams { isc_ref: 0.0, ..p }.validate().is_err());
    }
}
