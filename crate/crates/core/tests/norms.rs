use nsinflation::calculus::{heat_flow, heat_semigroup, leray_project, FrozenField, Phase, TrigField, VectorProfile};
use nsinflation::construction::{build_frequency_family, build_initial_data, Preset};
use nsinflation::norms::besov::witness_discrepancy as besov_witness;
use nsinflation::norms::carleson::witness_discrepancy as xt_witness;
use nsinflation::norms::{
    besov_norm, besov_norm_grid, bilinear_sanity, bmo_neg1_norm, linf_frozen, xt_norm, BesovOptions,
    CarlesonOptions, LinfOptions, NormReport,
};
use nsinflation::solver::spectralize;
use nsinflation::vec3::{self, IVec3, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wavevector() -> impl Strategy<Value = IVec3> {
    prop::array::uniform3(-3i64..=3).prop_filter("nonzero", |k| *k != [0, 0, 0])
}

// Divergence-free, band-limited, mean-free.
fn field() -> impl Strategy<Value = TrigField> {
    prop::collection::vec((wavevector(), any::<bool>(), prop::array::uniform3(-1.0f64..1.0)), 1..=4).prop_map(|ms| {
        let mut f = TrigField::zero();
        for (k, s, a) in ms {
            f.insert(k, if s { Phase::Sin } else { Phase::Cos }, VectorProfile::constant(a));
        }
        leray_project(&f)
    })
}

fn unit_mode(k: IVec3, v: Vec3) -> TrigField {
    let mut f = TrigField::zero();
    f.insert(k, Phase::Cos, VectorProfile::constant(v));
    f
}

fn besov(f: &TrigField) -> NormReport {
    besov_norm(&FrozenField::from_trig(f, 0.0), &BesovOptions::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norms_are_homogeneous(f in field()) {
        prop_assume!(!f.is_empty());
        let co = CarlesonOptions::default();
        let b = besov(&f).value;
        let x = xt_norm(&heat_flow(&f), 1.0, &co).unwrap().value;
        let m = bmo_neg1_norm(&f, &co).unwrap().value;
        for c in [2.0, 10.0, -3.0] {
            let g = f.scale(c);
            prop_assert!(rel(besov(&g).value, c.abs() * b) <= 1e-10);
            prop_assert!(rel(xt_norm(&heat_flow(&g), 1.0, &co).unwrap().value, c.abs() * x) <= 1e-10);
            prop_assert!(rel(bmo_neg1_norm(&g, &co).unwrap().value, c.abs() * m) <= 1e-10);
        }
    }

    #[test]
    fn xt_is_monotone_in_t(f in field(), t1 in 0.01f64..0.5, dt in 0.0f64..1.0) {
        let u = heat_flow(&f);
        let co = CarlesonOptions::default();
        let a = xt_norm(&u, t1, &co).unwrap().value;
        let b = xt_norm(&u, t1 + dt, &co).unwrap().value;
        prop_assert!(a <= b * (1.0 + 1e-12) + 1e-12, "{a} > {b}");
    }

    #[test]
    fn witnesses_reproduce_values(f in field()) {
        prop_assume!(!f.is_empty());
        let r = besov(&f);
        prop_assert!(besov_witness(&FrozenField::from_trig(&f, 0.0), &r) <= 1e-12);
        let co = CarlesonOptions::default();
        let u = heat_flow(&f);
        let x = xt_norm(&u, 0.5, &co).unwrap();
        prop_assert!(xt_witness(&u, &x, &co) <= 1e-12);
    }

    #[test]
    fn heat_flow_does_not_increase_besov(f in field(), t0 in 0.001f64..0.5) {
        prop_assume!(!f.is_empty());
        let a = besov(&heat_semigroup(&f, t0)).value;
        let b = besov(&f).value;
        prop_assert!(a <= b * (1.0 + 1e-9), "{a} > {b}");
    }

    #[test]
    fn norms_vanish_only_on_zero(f in field()) {
        let b = besov(&f).value;
        prop_assert_eq!(b == 0.0, f.is_empty());
        prop_assert!(b >= 0.0);
    }
}

#[test]
fn single_mode_besov_closed_form() {
    for m in [1i64, 8, 64] {
        let r = besov(&unit_mode([m, 0, 0], [0.0, 1.0, 0.0]));
        let want = 1.0 / (m as f64 * (2.0 * std::f64::consts::E).sqrt());
        assert!(rel(r.value, want) <= 1e-3, "m = {m}");
        let t = r.witnesses.t_star.unwrap();
        assert!(rel(t, 0.5 / (m * m) as f64) <= 1e-3);
    }
}

#[test]
fn besov_is_scale_invariant() {
    let v = [0.0, 0.6, 0.8];
    let f = unit_mode([1, 2, 0], v);
    let g = unit_mode([2, 4, 0], vec3::scale(&v, 2.0));
    assert!(rel(besov(&f).value, besov(&g).value) <= 1e-10);
}

#[test]
fn grid_and_exact_besov_agree_on_datum() {
    let fam = build_frequency_family(2, 1, Preset::Desk, None).unwrap();
    let u0 = build_initial_data(&fam, 1.0).unwrap();
    let exact = besov(&u0.field).value;
    let g = spectralize(&u0.field, 0.0, [32, 32, 1], 1.0).unwrap();
    let grid = besov_norm_grid(&g, &BesovOptions::default()).unwrap().value;
    assert!(rel(exact, grid) <= 1e-6, "{exact} vs {grid}");
}

#[test]
fn datum_sup_norm_matches_dense_sampling() {
    let fam = build_frequency_family(2, 1, Preset::Desk, None).unwrap();
    let u0 = build_initial_data(&fam, 1.0).unwrap();
    let f = FrozenField::from_trig(&u0.field, 0.0);
    let est = linf_frozen(&f, &LinfOptions::default()).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut best: f64 = 0.0;
    for _ in 0..1_000_000 {
        let x = [rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU), 0.0];
        best = best.max(vec3::norm(&f.evaluate(&x)));
    }
    assert!(est >= best * (1.0 - 1e-12));
    assert!(rel(est, best) <= 5e-3, "{est} vs {best}");
}

#[test]
fn bmo_single_mode_ratio() {
    let co = CarlesonOptions::default();
    let a = bmo_neg1_norm(&unit_mode([4, 0, 0], [0.0, 1.0, 0.0]), &co).unwrap().value;
    let b = bmo_neg1_norm(&unit_mode([8, 0, 0], [0.0, 1.0, 0.0]), &co).unwrap().value;
    assert!((a / b - 2.0).abs() <= 0.1, "{}", a / b);
}

#[test]
fn besov_is_dominated_by_bmo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let co = CarlesonOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut f = TrigField::zero();
        for _ in 0..3 {
            let k = [rng.gen_range(-4..=4), rng.gen_range(-4..=4), rng.gen_range(1..=4)];
            let a = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            f.insert(k, Phase::Cos, VectorProfile::constant(a));
        }
        let f = leray_project(&f);
        let ratio = besov(&f).value / bmo_neg1_norm(&f, &co).unwrap().value;
        worst = worst.max(ratio);
    }
    assert!(worst.is_finite() && worst < 10.0, "besov/bmo constant {worst}");
}

#[test]
fn bilinear_ratio_is_finite_and_degenerate_cases_are_flagged() {
    let co = CarlesonOptions::default();
    let u = heat_flow(&unit_mode([2, 0, 0], [0.0, 1.0, 0.0]));
    let z = bilinear_sanity(&u, &TrigField::zero(), 0.5, &co).unwrap();
    assert!(z.degenerate && z.ratio == 0.0);
    let s = bilinear_sanity(&u, &u, 0.5, &co).unwrap();
    assert_eq!(s.b_norm, 0.0);
    let v = heat_flow(&leray_project(&unit_mode([1, 2, 0], [1.0, 0.0, 1.0])));
    let r = bilinear_sanity(&u, &v, 0.5, &co).unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
}

#[test]
fn report_json_round_trip() {
    let r = besov(&unit_mode([3, 0, 0], [0.0, 0.0, 1.0]));
    assert_eq!(NormReport::from_json(&r.to_json().unwrap()).unwrap(), r);
}
