use helios_core::controllers::{ic_step, po_step, ControllerState};
use helios_core::mpp::{find_mpp, MppConfig};
use helios_core::pv::{EnvConditions, ModuleParams, OperatingPoint};
use helios_core::sim::{compare, run_simulation, ControllerKind, Scenario};
use proptest::prelude::*;

fn stc() -> EnvConditions {
    EnvConditions::from_celsius(25.0, 1000.0)
}

/// Runs a hill climber directly against the module model.
fn climb(ic: bool, steps: usize) -> Vec<f64> {
    let p = ModuleParams::table1();
    let mut state = ControllerState::new(15.0, 40.0).unwrap();
    let mut refs = Vec::with_capacity(steps);
    for _ in 0..steps {
        let v = state.v_ref;
        let point = OperatingPoint::new(v, p.solve_output_current(&stc(), v).unwrap());
        state = if ic {
            ic_step(&state, &point, 0.2, 0.01).unwrap()
        } else {
            po_step(&state, &point, 0.2).unwrap()
        };
        refs.push(state.v_ref);
    }
    refs
}

#[test]
fn po_straddles_the_mpp_and_never_freezes() {
    let refs = climb(false, 500);
    let tail = &refs[400..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo <= 26.4 && hi >= 26.4, "[{lo}, {hi}]");
    assert!(hi - 26.4 <= 0.4 + 1e-9 && 26.4 - lo <= 0.4 + 1e-9, "[{lo}, {hi}]");
    assert!(refs.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn ic_converges_and_then_holds() {
    let refs = climb(true, 500);
    let last = *refs.last().unwrap();
    assert!((last - 26.4).abs() <= 0.01 * 26.4, "{last}");
    let settled = refs.iter().position(|&v| v == last).unwrap();
    assert!(refs[settled..].iter().all(|&v| v == last));
    assert!(settled < 100);
}

proptest! {
    #[test]
    fn references_stay_within_bounds(
        measurements in prop::collection::vec((0.0f64..50.0, -2.0f64..10.0), 1..60),
        v0 in 0.0f64..40.0,
        step in 0.01f64..5.0,
    ) {
        let mut po = ControllerState::new(v0, 40.0).unwrap();
        let mut ic = po;
        for (v, i) in measurements {
            let m = OperatingPoint::new(v, i);
            po = po_step(&po, &m, step).unwrap();
            ic = ic_step(&ic, &m, step, 0.01).unwrap();
            prop_assert!((0.0..=40.0).contains(&po.v_ref));
            prop_assert!((0.0..=40.0).contains(&ic.v_ref));
            prop_assert!(po.direction == 1 || po.direction == -1);
            prop_assert!(ic.direction == 1 || ic.direction == -1);
        }
    }
}

#[test]
fn every_controller_respects_the_oracle() {
    let p = ModuleParams::table1();
    let scenario = Scenario::irradiance_step(30.0, 900.0, 400.0, 5.0, 12.0);
    for c in [ControllerKind::PerturbObserve, ControllerKind::IncrementalConductance, ControllerKind::Focv, ControllerKind::Oracle] {
        let r = run_simulation(&p, &scenario, c, None).unwrap();
        assert!(r.efficiency >= 0.0 && r.efficiency <= 1.0 + 1e-9, "{c}: {}", r.efficiency);
        for row in &r.trace {
            assert!(row.p <= row.p_mpp + 1e-6, "{c} at {}: {} > {}", row.t_s, row.p, row.p_mpp);
        }
        let again = run_simulation(&p, &scenario, c, None).unwrap();
        assert_eq!(r, again);
    }
}

#[test]
fn perfect_controller_scores_one() {
    let p = ModuleParams::table1();
    let r = run_simulation(&p, &Scenario::constant(25.0, 1000.0, 300.0), ControllerKind::Oracle, None).unwrap();
    assert!((r.efficiency - 1.0).abs() <= 1e-6);
    let mpp = find_mpp(&p, &stc(), &MppConfig::default()).unwrap();
    assert_eq!(r.trace[0].p_mpp, mpp.p_max);
}

#[test]
fn repeated_controller_gives_identical_efficiencies() {
    let p = ModuleParams::table1();
    let (report, _) = compare(
        &p,
        &Scenario::constant(25.0, 1000.0, 30.0),
        &[ControllerKind::PerturbObserve, ControllerKind::PerturbObserve],
        None,
    )
    .unwrap();
    assert_eq!(report.measured[0].efficiency, report.measured[1].efficiency);
    assert!(report.to_json().contains("paper_reported"));
}

#[test]
fn trace_csv_layout() {
    let p = ModuleParams::table1();
    let r = run_simulation(&p, &Scenario::constant(25.0, 1000.0, 0.5), ControllerKind::Focv, None).unwrap();
    let csv = r.trace_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_s,v_V,i_A,p_W,p_mpp_W,v_ref_V"));
    assert_eq!(lines.count(), 5);
}
