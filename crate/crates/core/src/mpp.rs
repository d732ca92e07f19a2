//! Maximum-power-point search over the voltage axis.
//!
//! A coarse grid over `[0, V_oc]` brackets the peak of the (unimodal) P-V
//! curve, then golden-section search narrows the bracket to the voltage
//! tolerance.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_numeric_csv, write_atomic};
use crate::pv::{EnvConditions, ModuleParams, OperatingCurve, OperatingPoint, SolverConfig};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct MppResult<S = f64> {
    pub v_mp: S,
    pub i_mp: S,
    pub p_max: S,
    /// Current solves spent, including the open-circuit search.
    pub solver_evals: usize,
    pub env: EnvConditions<S>,
}

#[derive(Clone, Copy, Debug)]
pub struct MppConfig<S = f64> {
    pub coarse_points: usize,
    pub v_tol: S,
    pub solver: SolverConfig<S>,
}

impl<S: Scalar> Default for MppConfig<S> {
    fn default() -> Self {
        MppConfig {
            coarse_points: 200,
            v_tol: S::of(1e-4).max(S::epsilon().sqrt() * S::of(32.0)),
            solver: SolverConfig::default(),
        }
    }
}

/// Result of a bounded one-dimensional maximisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum<S> {
    pub x: S,
    pub value: S,
    pub evals: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is no wider than `tol`.
///
/// The returned point is the best of the interior probe and both final
/// bracket endpoints.
pub fn golden_section_max<S, F>(mut f: F, a: S, b: S, tol: S) -> Result<Maximum<S>>
where
    S: Scalar,
    F: FnMut(S) -> Result<S>,
{
    if !(b >= a) || !(tol > S::zero()) {
        return Err(Error::InvalidParameter(format!(
            "golden section needs a <= b and tol > 0 (a = {a}, b = {b}, tol = {tol})"
        )));
    }
    // 1/phi
    let inv_phi = S::of(0.618_033_988_749_894_9);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
        evals += 1;
        if evals > 10_000 {
            break;
        }
    }
    let (mut best_x, mut best) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x)?;
        evals += 1;
        if fx > best {
            best = fx;
            best_x = x;
        }
    }
    Ok(Maximum {
        x: best_x,
        value: best,
        evals,
    })
}

/// Maximum power point of `params` under `env`.
pub fn find_mpp<S: Scalar>(
    params: &ModuleParams<S>,
    env: &EnvConditions<S>,
    cfg: &MppConfig<S>,
) -> Result<MppResult<S>> {
    let curve = params.curve(env, &cfg.solver)?;
    find_mpp_on(&curve, cfg)
}

/// Same as [`find_mpp`] on an already prepared curve.
pub fn find_mpp_on<S: Scalar>(curve: &OperatingCurve<S>, cfg: &MppConfig<S>) -> Result<MppResult<S>> {
    if cfg.coarse_points < 3 {
        return Err(Error::InvalidParameter("coarse grid needs at least 3 points".into()));
    }
    if !(cfg.v_tol > S::zero()) {
        return Err(Error::InvalidParameter("voltage tolerance must be > 0".into()));
    }
    let degenerate = |p_max: S| Error::DegenerateCurve {
        t_c: curve.env.t_c().to_f64(),
        g: curve.env.g.to_f64(),
        p_max: p_max.to_f64(),
    };

    let (voc, mut evals) = curve.open_circuit_voltage_counted()?;
    if !(voc > S::zero()) {
        return Err(degenerate(S::zero()));
    }

    let n = cfg.coarse_points;
    let last = S::of((n - 1) as f64);
    let grid = |k: usize| if k + 1 == n { voc } else { voc * S::of(k as f64) / last };
    let mut best_k = 0;
    let mut best_p = S::neg_infinity();
    for k in 0..n {
        let v = grid(k);
        let p = v * curve.current(v)?;
        evals += 1;
        if p > best_p {
            best_p = p;
            best_k = k;
        }
    }
    if !(best_p > S::zero()) {
        return Err(degenerate(best_p));
    }

    let a = grid(best_k.saturating_sub(1));
    let b = grid((best_k + 1).min(n - 1));
    let refined = golden_section_max(|v| Ok(v * curve.current(v)?), a, b, cfg.v_tol)?;
    evals += refined.evals;

    let point = OperatingPoint::new(refined.x, curve.current(refined.x)?);
    evals += 1;
    if !(point.p > S::zero()) {
        return Err(degenerate(point.p));
    }
    Ok(MppResult {
        v_mp: point.v,
        i_mp: point.i,
        p_max: point.p,
        solver_evals: evals,
        env: curve.env,
    })
}

/// Reads a `t_C,g_Wm2` conditions file.
pub fn read_conditions_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let rows = read_numeric_csv(path.as_ref(), &["t_C", "g_Wm2"])?;
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn mpp_csv(results: &[MppResult<f64>]) -> String {
    let mut out = String::from("t_C,g_Wm2,v_mp_V,i_mp_A,p_max_W\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.env.t_c(),
            r.env.g,
            r.v_mp,
            r.i_mp,
            r.p_max
        ));
    }
    out
}

pub fn write_mpp_csv(path: impl AsRef<Path>, results: &[MppResult<f64>]) -> Result<()> {
    let body = mpp_csv(results);
    write_atomic(path.as_ref(), |w| w.write_all(body.as_bytes()))
}
