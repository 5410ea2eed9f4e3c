use proptest::prelude::*;

use super::*;
use crate::equivalence::{cs_to_arum, cs_to_arum_e};
use crate::instances::{integer_box, point, reference_consideration_model, reference_grid};
use crate::models::{ArumDistribution, EpsilonAtom, GumbelModel, Model};
use crate::scalar::{ratio, Rational};

fn ri(x: i64) -> Rational {
    Rational::from_i64(x)
}

fn fp(v: &[f64]) -> UtilityPoint<f64> {
    UtilityPoint::from_f64(v).unwrap()
}

#[test]
fn gumbel_envelope() {
    let u = fp(&[0.3, -0.2, 1.1]);
    let dev = envelope_check(&GumbelModel::new(3), &u, &1e-4).unwrap();
    assert!(dev <= 1e-6, "{dev}");
}

#[test]
fn gumbel_envelope_is_second_order() {
    let u = fp(&[0.3, -0.2, 1.1]);
    let d1 = envelope_check(&GumbelModel::new(3), &u, &1e-4).unwrap();
    let d2 = envelope_check(&GumbelModel::new(3), &u, &5e-5).unwrap();
    let r = d1 / d2;
    assert!((3.5..=4.5).contains(&r), "ratio {r}");
}

#[test]
fn finite_envelope_is_exact() {
    let m = ArumDistribution::new(vec![EpsilonAtom::finite(vec![ri(1), ri(0)], ri(1))]).unwrap();
    assert_eq!(envelope_check(&m, &point(&[0, 0]), &ratio(1, 100)).unwrap(), ri(0));
    let mf = ArumDistribution::new(vec![EpsilonAtom::finite(vec![1.0, 0.0], 1.0)]).unwrap();
    // Exact in rational mode; float rounding of V leaves ~1e-13.
    assert!(envelope_check(&mf, &fp(&[0.0, 0.0]), &1e-4).unwrap() < 1e-12);
}

#[test]
fn cs_envelope_is_exact() {
    let nu = reference_consideration_model::<Rational>();
    for u in integer_box::<Rational>(2, 2).points() {
        assert_eq!(envelope_check(&nu, u, &ratio(1, 8)).unwrap(), ri(0));
    }
}

#[test]
fn envelope_reports_ties() {
    let m = ArumDistribution::new(vec![EpsilonAtom::finite(vec![ri(1), ri(0)], ri(1))]).unwrap();
    assert!(matches!(envelope_check(&m, &point(&[0, 1]), &ratio(1, 8)), Err(Error::ArgmaxTie { .. })));
    assert!(envelope_check(&m, &point(&[0, 0]), &ri(0)).is_err());
}

#[test]
fn gumbel_path_integral() {
    let g = GumbelModel::new(2);
    let v = welfare_change_path_integral(model_evaluator(&g), &fp(&[0.0, 0.0]), &fp(&[1.0, 0.0]), 64).unwrap();
    let exact = ((std::f64::consts::E + 1.0) / 2.0).ln();
    assert!((v - exact).abs() < 1e-8);
    assert!((v - 0.620_114_5).abs() < 1e-7);
}

#[test]
fn zero_length_path() {
    let g = GumbelModel::new(2);
    let u = fp(&[0.2, 0.1]);
    assert_eq!(welfare_change_path_integral(model_evaluator(&g), &u, &u, 64).unwrap(), 0.0);
    assert_eq!(welfare_change_exact(&g, &u, &u).unwrap(), 0.0);
}

#[test]
fn exact_single_atom() {
    let m = ArumDistribution::new(vec![EpsilonAtom::finite(vec![ri(0), ri(0)], ri(1))]).unwrap();
    // V(0, 0) ties but is still well defined as a maximum.
    assert_eq!(welfare_change_exact(&m, &point(&[0, 0]), &point(&[1, 0])).unwrap(), ri(1));
}

#[test]
fn reference_routes_agree() {
    let nu = reference_consideration_model::<Rational>();
    let (u, ut) = (point(&[-1, 1]), point(&[1, -1]));
    let exact = welfare_change_exact(&nu, &u, &ut).unwrap();
    assert_eq!(exact, ratio(-1, 2));
    let path = welfare_change_path_integral(model_evaluator(&nu), &fp(&[-1.0, 1.0]), &fp(&[1.0, -1.0]), 64).unwrap();
    assert!((path - exact.to_f64()).abs() < 1e-9, "{path}");
}

#[test]
fn representation_invariance() {
    let nu = reference_consideration_model::<Rational>();
    let g = integer_box::<Rational>(2, 2);
    let e = cs_to_arum_e(&nu);
    let a = cs_to_arum(&nu, &g).unwrap();
    let (u, ut) = (fp(&[-1.5, 0.5]), fp(&[1.25, -0.75]));
    let d_cs = welfare_change_path_integral(model_evaluator(&nu), &u, &ut, 64).unwrap();
    let d_e = welfare_change_path_integral(model_evaluator(&e), &u, &ut, 64).unwrap();
    let d_a = welfare_change_path_integral(model_evaluator(&a), &u, &ut, 64).unwrap();
    assert!((d_cs - d_e).abs() < 1e-9 && (d_cs - d_a).abs() < 1e-9);
    let (ur, utr) = (
        UtilityPoint::new(vec![ratio(-3, 2), ratio(1, 2)]).unwrap(),
        UtilityPoint::new(vec![ratio(5, 4), ratio(-3, 4)]).unwrap(),
    );
    for m in [Model::ArumCs(nu), Model::ArumE(e), Model::Arum(a)] {
        let ex = welfare_change_exact(&m, &ur, &utr).unwrap();
        assert_eq!(ex, ratio(1, 4));
    }
    // The kink at t = 3/11 is off the panel boundaries.
    assert!((d_cs - 0.25).abs() < 5e-2);
}

#[test]
fn plot_samples() {
    let nu = reference_consideration_model::<Rational>();
    let s =
        integrand_samples(model_evaluator(&nu), &fp(&[-1.0, 1.0]), &fp(&[1.0, -1.0]), DEFAULT_PLOT_SAMPLES).unwrap();
    assert_eq!(s.len(), 65);
    assert!(s.iter().all(|&(t, _)| t > 0.0 && t < 1.0));
    // Integrand is 2 p_0 - 2 p_1: every atom picks 1 before the kink, the
    // full-attention atom switches to 0 after it.
    assert_eq!(s[0].1, -2.0);
    assert!((s[64].1 - (0.6 * 2.0 - 0.4 * 2.0)).abs() < 1e-12);
}

#[test]
fn welfare_set_cases() {
    let nu = reference_consideration_model::<Rational>();
    let g = reference_grid::<Rational>();
    let f = choice_prob_field(&nu, &g).unwrap();
    assert_eq!(attention_welfare_set(&f, 0, false).unwrap(), WelfareSet::UnboundedAbove(ri(0)));
    assert_eq!(attention_welfare_set(&f, 1, false).unwrap(), WelfareSet::Point(ri(0)));
    assert_eq!(WelfareSet::UnboundedAbove(ri(0)).to_string(), "[0, inf)");
    assert_eq!(WelfareSet::Point(ri(0)).to_string(), "{0}");

    let never = ArumCsDistribution::new(vec![ConsiderationAtom::new(vec![ri(0), ri(0)], vec![1], ri(1))]).unwrap();
    let fn_ = choice_prob_field(&never, &g).unwrap();
    assert_eq!(attention_welfare_set(&fn_, 0, false).unwrap(), WelfareSet::UnboundedAbove(ri(0)));
}

#[test]
fn welfare_set_without_k_maximal_point() {
    let g = UtilityGrid::new(vec![point(&[1, 0, 1]), point(&[1, 1, 0]), point(&[0, 0, 0])]).unwrap();
    let nu = ArumCsDistribution::new(vec![
        ConsiderationAtom::new(vec![ratio(1, 3), ratio(1, 7), ri(0)], vec![0, 1, 2], ratio(1, 2)),
        ConsiderationAtom::new(vec![ratio(1, 3), ratio(1, 7), ri(0)], vec![1, 2], ratio(1, 2)),
    ])
    .unwrap();
    let f = choice_prob_field(&nu, &g).unwrap();
    assert_eq!(attention_welfare_set(&f, 0, false).unwrap_err(), Error::NoKMaximalPoint { k: 0 });
    assert_eq!(attention_welfare_set(&f, 0, true).unwrap(), WelfareSet::UnboundedAbove(ri(0)));
}

#[test]
fn welfare_set_depends_on_sup_only() {
    let g = reference_grid::<Rational>();
    let mk = |w: Rational| {
        let nu = ArumCsDistribution::new(vec![
            ConsiderationAtom::new(vec![ratio(1, 2), ri(0)], vec![0, 1], w.clone()),
            ConsiderationAtom::new(vec![ri(0), ri(3)], vec![0, 1], ri(1) - w),
        ])
        .unwrap();
        choice_prob_field(&nu, &g).unwrap()
    };
    let (a, b) = (mk(ratio(1, 3)), mk(ratio(3, 5)));
    assert_ne!(a, b);
    assert_eq!(attention_welfare_set(&a, 0, false).unwrap(), attention_welfare_set(&b, 0, false).unwrap());
}

#[test]
fn reference_welfare_witness() {
    let nu = reference_consideration_model::<Rational>();
    let g = reference_grid::<Rational>();
    let u = point(&[0, 0]);
    let w = unbounded_welfare_witness(&nu, &g, 0, &u, &ri(10)).unwrap();
    assert_eq!(w.gamma, ratio(2, 5));
    assert_eq!(w.base_shift, ratio(-1, 2));
    assert_eq!(w.shift, ratio(19, 2));
    assert!(w.achieved_gain >= ri(4));
    assert_eq!(w.guaranteed_gain, ri(4));
    assert!(!w.used_companion);
    assert_eq!(choice_prob_field(&w.witness, &g).unwrap(), choice_prob_field(&nu, &g).unwrap());

    let w2 = unbounded_welfare_witness(&nu, &g, 0, &u, &ri(20)).unwrap();
    assert!(w2.shift >= ri(2) * w.shift.clone());
    assert_eq!(w2.achieved_gain, ri(2) * w.achieved_gain.clone());
}

#[test]
fn zero_target_returns_input() {
    let nu = reference_consideration_model::<Rational>();
    let w = unbounded_welfare_witness(&nu, &reference_grid(), 0, &point(&[0, 0]), &ri(0)).unwrap();
    assert_eq!(w.witness, nu);
}

#[test]
fn full_consideration_uses_companion_or_fails() {
    let g = reference_grid::<Rational>();
    // Alternative 0 loses at the corner in the second atom, so a rationalisation
    // with k ignored there exists.
    let nu = ArumCsDistribution::new(vec![
        ConsiderationAtom::new(vec![ratio(1, 2), ri(0)], vec![0, 1], ratio(1, 2)),
        ConsiderationAtom::new(vec![ri(0), ri(5)], vec![0, 1], ratio(1, 2)),
    ])
    .unwrap();
    let w = unbounded_welfare_witness(&nu, &g, 0, &point(&[0, 0]), &ri(2)).unwrap();
    assert!(w.used_companion);
    assert_eq!(w.gamma, ratio(1, 2));
    assert!(w.achieved_gain >= ri(1));
    assert_eq!(choice_prob_field(&w.witness, &g).unwrap(), choice_prob_field(&nu, &g).unwrap());

    let always = ArumCsDistribution::new(vec![ConsiderationAtom::new(vec![ri(9), ri(0)], vec![0, 1], ri(1))]).unwrap();
    assert_eq!(
        unbounded_welfare_witness(&always, &g, 0, &point(&[0, 0]), &ri(1)).unwrap_err(),
        Error::FullConsideration { k: 0 }
    );
}

#[test]
fn reference_breakpoint_is_the_kink() {
    let m = Model::ArumCs(reference_consideration_model::<Rational>());
    let b = segment_breakpoints(&m, &point(&[-1, 1]), &point(&[1, -1])).unwrap();
    assert_eq!(b, vec![ratio(3, 8)]);
}

#[test]
fn split_integral_is_exact_off_panel_boundaries() {
    let m = Model::ArumCs(reference_consideration_model::<Rational>());
    // Kink at t = 2/5.
    let (u, ut) = (
        UtilityPoint::new(vec![ratio(-3, 2), ratio(1, 2)]).unwrap(),
        UtilityPoint::new(vec![ri(1), ratio(-3, 4)]).unwrap(),
    );
    assert_eq!(welfare_change_exact(&m, &u, &ut).unwrap(), ratio(1, 10));
    let uniform = welfare_change_path_integral(model_evaluator(&m), &fp(&[-1.5, 0.5]), &fp(&[1.0, -0.75]), 64).unwrap();
    let split = model_path_integral(&m, &u, &ut, 64).unwrap();
    assert!((uniform - 0.1).abs() > 1e-6, "{uniform}");
    assert!((split - 0.1).abs() < 1e-12, "{split}");
}

#[test]
fn split_without_breaks_matches_uniform() {
    let g = GumbelModel::new(2);
    let (u, ut) = (fp(&[0.0, 0.0]), fp(&[1.0, 0.0]));
    let a = welfare_change_path_integral(model_evaluator(&g), &u, &ut, 64).unwrap();
    let b = welfare_change_path_integral_split(model_evaluator(&g), &u, &ut, &[], 64).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn path_additivity(
        a in proptest::collection::vec(-2.0f64..2.0, 3),
        b in proptest::collection::vec(-2.0f64..2.0, 3),
        c in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let g = GumbelModel::new(3);
        let (u, w, ut) = (fp(&a), fp(&b), fp(&c));
        let d1 = welfare_change_path_integral(model_evaluator(&g), &u, &w, 64).unwrap();
        let d2 = welfare_change_path_integral(model_evaluator(&g), &w, &ut, 64).unwrap();
        let d = welfare_change_path_integral(model_evaluator(&g), &u, &ut, 64).unwrap();
        prop_assert!((d1 + d2 - d).abs() < 1e-9);
        prop_assert!((d - welfare_change_exact(&g, &u, &ut).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn split_integral_matches_exact(
        shocks in proptest::collection::vec(proptest::collection::vec(-6i64..6, 3), 1..5),
        a in proptest::collection::vec(-8i64..8, 3),
        b in proptest::collection::vec(-8i64..8, 3),
    ) {
        let atoms = shocks
            .iter()
            .map(|e| EpsilonAtom::finite(e.iter().enumerate().map(|(j, &x)| ri(x) + ratio(j as i64 + 1, 16)).collect(), ratio(1, shocks.len() as i64)))
            .collect();
        let m = Model::Arum(ArumDistribution::new(atoms).unwrap());
        // Odd multiples of 1/7 keep the endpoints off every tie.
        let q = |v: &[i64]| UtilityPoint::new(v.iter().map(|&x| ratio(2 * x + 1, 7)).collect()).unwrap();
        let (u, ut) = (q(&a), q(&b));
        let exact = welfare_change_exact(&m, &u, &ut).unwrap().to_f64();
        prop_assert!((model_path_integral(&m, &u, &ut, 64).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn witness_gain_bound(
        shocks in proptest::collection::vec(proptest::collection::vec(-6i64..6, 3), 1..5),
        masks in proptest::collection::vec(1u8..8, 5),
        c in 0i64..20,
        k in 0usize..3,
    ) {
        let n = shocks.len();
        let atoms = shocks
            .iter()
            .zip(&masks)
            .map(|(e, &m)| {
                let eps = e.iter().enumerate().map(|(j, &x)| ri(x) + ratio(j as i64 + 1, 16)).collect();
                let set = (0..3).filter(|j| m & (1 << j) != 0).collect();
                ConsiderationAtom::new(eps, set, ratio(1, n as i64))
            })
            .collect();
        let nu = ArumCsDistribution::new(atoms).unwrap();
        let g = integer_box::<Rational>(1, 3);
        let u = point(&[0, 1, -1]);
        match unbounded_welfare_witness(&nu, &g, k, &u, &ri(c)) {
            Ok(w) => {
                prop_assert_eq!(choice_prob_field(&w.witness, &g).unwrap(), choice_prob_field(&nu, &g).unwrap());
                prop_assert!(w.achieved_gain >= w.guaranteed_gain);
                prop_assert!(w.gamma > ri(0));
            }
            Err(e) => prop_assert_eq!(e, Error::FullConsideration { k }),
        }
    }
}
