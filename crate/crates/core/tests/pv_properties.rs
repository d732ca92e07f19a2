use helios_core::pv::{EnvConditions, ModuleParams, SolverConfig};
use proptest::prelude::*;

/// F(I) evaluated straight from the model equations, independent of the
/// solver's own residual.
fn residual(p: &ModuleParams, t_k: f64, g: f64, v: f64, i: f64) -> f64 {
    let iph = (p.isc_ref + p.ki * (t_k - p.t_ref)) * g / p.g_ref;
    let irs = p.isc_ref / ((p.q * p.voc_ref / (p.ideality * p.ns as f64 * p.k_b * t_k)).exp() - 1.0);
    let i0 = irs
        * (t_k / p.t_ref).powi(3)
        * (p.q * p.eg0 * (1.0 / p.t_ref - 1.0 / t_k) / (p.ideality * p.k_b)).exp();
    let vd = v + i * p.rs;
    let a = p.ideality * p.k_b * p.ns as f64 * t_k / p.q;
    iph - i0 * ((vd / a).exp() - 1.0) - vd / p.rsh - i
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn solved_current_satisfies_the_circuit_equation(
        t_c in -10.0f64..75.0,
        g in 0.0f64..1200.0,
        frac in 0.0f64..1.1,
    ) {
        let p = ModuleParams::table1();
        let env = EnvConditions::from_celsius(t_c, g);
        let v = frac * p.voc_ref;
        let i = p.solve_output_current(&env, v).unwrap();
        let r = residual(&p, env.t_k, g, v, i);
        // the direct formula loses a few ulps in exp() - 1 near the knee
        prop_assert!(r.abs() <= 1e-9 + 1e-12 * i.abs(), "F = {r} at T {t_c} G {g} V {v}");
    }

    #[test]
    fn current_is_non_increasing_in_voltage(
        t_c in 15.0f64..40.0,
        g in 200.0f64..1090.0,
    ) {
        let p = ModuleParams::table1();
        let curve = p.sweep_iv(&EnvConditions::from_celsius(t_c, g), 40.0, 200).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[1].i <= w[0].i + 1e-12);
        }
    }

    #[test]
    fn photo_current_is_linear_in_irradiance(g in 0.0f64..1200.0, t_c in 0.0f64..60.0) {
        let p = ModuleParams::table1();
        let t_k = t_c + 273.15;
        let direct = (p.isc_ref + p.ki * (t_k - p.t_ref)) * g / p.g_ref;
        prop_assert_eq!(p.photo_current(&EnvConditions::new(t_k, g)), direct);
    }
}

fn stc() -> EnvConditions {
    EnvConditions::from_celsius(25.0, 1000.0)
}

#[test]
fn short_circuit_current_close_to_photo_current() {
    let p = ModuleParams::table1();
    let i0 = p.solve_output_current(&stc(), 0.0).unwrap();
    let iph = p.photo_current(&stc());
    assert!((iph - i0).abs() / iph < 0.005);
}

#[test]
fn open_circuit_near_rated_voltage() {
    let p = ModuleParams::table1();
    let curve = p.sweep_iv(&stc(), 40.0, 4001).unwrap();
    let crossing = curve.points.windows(2).find(|w| w[0].i > 0.0 && w[1].i <= 0.0).unwrap();
    assert!((crossing[1].v - p.voc_ref).abs() / p.voc_ref < 0.02);
    let voc = p.curve(&stc(), &SolverConfig::default()).unwrap().open_circuit_voltage().unwrap();
    assert!((voc - p.voc_ref).abs() / p.voc_ref < 0.02);
}

#[test]
fn power_curve_has_a_single_interior_maximum() {
    let p = ModuleParams::table1();
    let curve = p.sweep_iv(&stc(), p.voc_ref, 1000).unwrap();
    let diffs: Vec<f64> = curve.points.windows(2).map(|w| w[1].p - w[0].p).collect();
    let sign_changes = diffs.windows(2).filter(|d| (d[0] > 0.0) != (d[1] > 0.0)).count();
    assert_eq!(sign_changes, 1);
    let peak = curve.max_power_point().unwrap();
    assert!((peak.v - 26.4).abs() < 0.3);
}

#[test]
fn sweep_endpoints() {
    let p = ModuleParams::table1();
    let curve = p.sweep_iv(&stc(), 32.9, 330).unwrap();
    assert_eq!(curve.points.len(), 330);
    assert_eq!(curve.points[0].v, 0.0);
    assert_eq!(curve.points[329].v, 32.9);
    for w in curve.points.windows(2) {
        assert!(w[1].v > w[0].v);
    }
    let peak = curve.max_power_point().unwrap();
    assert!((peak.p - 200.017).abs() / 200.017 < 0.01);
}

#[test]
fn dark_module_produces_no_power() {
    let p = ModuleParams::table1();
    let curve = p.sweep_iv(&EnvConditions::from_celsius(25.0, 0.0), 30.0, 50).unwrap();
    assert_eq!(curve.points[0].i, 0.0);
    assert!(curve.points.iter().all(|pt| pt.i <= 0.0 && pt.p <= 1e-12));
}
