//! Baseline MPPT controllers as pure step functions over a voltage reference.
//!
//! Both hill climbers take one forced positive step on their first call,
//! since there is no previous measurement to compare against yet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pv::OperatingPoint;
use crate::scalar::Scalar;

pub const DEFAULT_STEP_V: f64 = 0.2;
pub const DEFAULT_IC_EPSILON: f64 = 0.01;
pub const DEFAULT_FOCV_K: f64 = 0.80;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ControllerState<S = f64> {
    /// Commanded operating voltage.
    pub v_ref: S,
    /// Previous measurement, if any.
    pub last: Option<OperatingPoint<S>>,
    /// `+1` or `-1`.
    pub direction: i8,
    pub v_max: S,
}

impl<S: Scalar> ControllerState<S> {
    pub fn new(v_ref: S, v_max: S) -> Result<Self> {
        if !(v_max > S::zero()) || !v_max.is_finite() {
            return Err(Error::InvalidController(format!("v_max {v_max} must be > 0")));
        }
        if !(v_ref >= S::zero() && v_ref <= v_max) {
            return Err(Error::InvalidController(format!(
                "v_ref {v_ref} outside [0, {v_max}]"
            )));
        }
        Ok(ControllerState {
            v_ref,
            last: None,
            direction: 1,
            v_max,
        })
    }

    fn moved(&self, measured: &OperatingPoint<S>, direction: i8, step_v: S) -> Self {
        let delta = if direction > 0 { step_v } else { -step_v };
        ControllerState {
            v_ref: (self.v_ref + delta).max(S::zero()).min(self.v_max),
            last: Some(*measured),
            direction,
            v_max: self.v_max,
        }
    }
}

fn check_step<S: Scalar>(step_v: S) -> Result<()> {
    if step_v > S::zero() && step_v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidController(format!("step_v {step_v} must be > 0")))
    }
}

/// Perturb & Observe: keep the direction while power rises, reverse otherwise.
pub fn po_step<S: Scalar>(
    state: &ControllerState<S>,
    measured: &OperatingPoint<S>,
    step_v: S,
) -> Result<ControllerState<S>> {
    check_step(step_v)?;
    let direction = match state.last {
        None => 1,
        Some(last) if measured.p - last.p > S::zero() => state.direction,
        Some(_) => -state.direction,
    };
    Ok(state.moved(measured, direction, step_v))
}

/// Incremental Conductance: moves toward `dI/dV = -I/V`, holding once
/// `|dI/dV + I/V| <= epsilon`.
pub fn ic_step<S: Scalar>(
    state: &ControllerState<S>,
    measured: &OperatingPoint<S>,
    step_v: S,
    epsilon: S,
) -> Result<ControllerState<S>> {
    check_step(step_v)?;
    if !(epsilon >= S::zero()) {
        return Err(Error::InvalidController(format!("epsilon {epsilon} must be >= 0")));
    }
    let Some(last) = state.last else {
        return Ok(state.moved(measured, 1, step_v));
    };
    let dv = measured.v - last.v;
    let di = measured.i - last.i;
    let hold = ControllerState {
        last: Some(*measured),
        ..*state
    };
    let direction: i8 = if dv == S::zero() {
        // operating voltage unchanged: only the conditions can have moved
        if di == S::zero() {
            return Ok(hold);
        }
        if di > S::zero() {
            1
        } else {
            -1
        }
    } else if !(measured.v > S::zero()) {
        1
    } else {
        let mismatch = di / dv + measured.i / measured.v;
        if mismatch.abs() <= epsilon {
            return Ok(hold);
        }
        if mismatch > S::zero() {
            1
        } else {
            -1
        }
    };
    Ok(state.moved(measured, direction, step_v))
}

/// Fractional open-circuit voltage reference `k * voc`.
pub fn focv_reference<S: Scalar>(voc_measured: S, k: S) -> Result<S> {
    if !(k > S::zero() && k < S::one()) {
        return Err(Error::InvalidController(format!("FOCV fraction {k} must lie in (0, 1)")));
    }
    Ok(k * voc_measured)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: f64, i: f64) -> OperatingPoint {
        OperatingPoint::new(v, i)
    }

    fn state(v_ref: f64) -> ControllerState {
        ControllerState::new(v_ref, 40.0).unwrap()
    }

    #[test]
    fn first_call_steps_forward() {
        let s = state(15.0);
        assert_eq!(po_step(&s, &pt(15.0, 8.0), 0.2).unwrap().v_ref, 15.2);
        let ic = ic_step(&s, &pt(15.0, 8.0), 0.2, 0.01).unwrap();
        assert_eq!(ic.v_ref, 15.2);
        assert_eq!(ic.last, Some(pt(15.0, 8.0)));
    }

    #[test]
    fn po_keeps_direction_on_gain() {
        let s = ControllerState {
            last: Some(pt(20.0, 7.0)),
            ..state(20.2)
        };
        let next = po_step(&s, &pt(20.2, 7.0), 0.2).unwrap();
        assert_eq!(next.direction, 1);
        assert!((next.v_ref - 20.4).abs() < 1e-12);
    }

    #[test]
    fn po_reverses_on_loss() {
        let s = ControllerState {
            last: Some(pt(27.0, 7.0)),
            ..state(27.2)
        };
        let next = po_step(&s, &pt(27.2, 6.8), 0.2).unwrap();
        assert_eq!(next.direction, -1);
        assert!((next.v_ref - 27.0).abs() < 1e-12);
    }

    #[test]
    fn ic_holds_at_mpp_condition() {
        // dI/dV = -0.25, -I/V = -5/20 = -0.25
        let s = ControllerState {
            last: Some(pt(19.8, 5.05)),
            ..state(20.0)
        };
        let next = ic_step(&s, &pt(20.0, 5.0), 0.2, 0.0).unwrap();
        assert_eq!(next.v_ref, 20.0);
    }

    #[test]
    fn ic_climbs_left_of_mpp() {
        let s = ControllerState {
            last: Some(pt(5.0, 8.20)),
            ..state(5.2)
        };
        let next = ic_step(&s, &pt(5.2, 8.199), 0.2, 0.01).unwrap();
        assert!(next.v_ref > 5.2);
        // and descends right of it
        let s = ControllerState {
            last: Some(pt(30.0, 4.0)),
            ..state(30.2)
        };
        assert!(ic_step(&s, &pt(30.2, 3.5), 0.2, 0.01).unwrap().v_ref < 30.2);
    }

    #[test]
    fn ic_uses_current_change_when_voltage_is_fixed() {
        let s = ControllerState {
            last: Some(pt(26.0, 7.0)),
            ..state(26.0)
        };
        assert!(ic_step(&s, &pt(26.0, 7.5), 0.2, 0.01).unwrap().v_ref > 26.0);
        assert!(ic_step(&s, &pt(26.0, 6.5), 0.2, 0.01).unwrap().v_ref < 26.0);
        assert_eq!(ic_step(&s, &pt(26.0, 7.0), 0.2, 0.01).unwrap().v_ref, 26.0);
    }

    #[test]
    fn reference_is_clamped() {
        let s = state(39.9);
        assert_eq!(po_step(&s, &pt(39.9, 0.0), 0.2).unwrap().v_ref, 40.0);
        let s = ControllerState {
            last: Some(pt(0.3, 8.0)),
            ..state(0.1)
        };
        assert_eq!(po_step(&s, &pt(0.1, 8.0), 0.2).unwrap().v_ref, 0.0);
    }

    #[test]
    fn focv() {
        assert!((focv_reference(32.9f64, 0.8024).unwrap() - 26.399).abs() < 1e-3);
        assert!(focv_reference(32.9, 0.0).is_err());
        assert!(focv_reference(32.9, 1.0).is_err());
        let a = focv_reference(20.0, 0.8).unwrap();
        assert_eq!(focv_reference(40.0, 0.8).unwrap(), 2.0 * a);
    }

    #[test]
    fn bad_parameters() {
        let s = state(10.0);
        assert!(po_step(&s, &pt(1.0, 1.0), 0.0).is_err());
        assert!(ic_step(&s, &pt(1.0, 1.0), 0.2, -1.0).is_err());
        assert!(ControllerState::new(50.0, 40.0).is_err());
        assert!(ControllerState::new(-1.0, 40.0).is_err());
    }
}
