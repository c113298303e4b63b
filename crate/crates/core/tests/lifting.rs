use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use gift_core::examples::{self, by_name, SampleRegion};
use gift_core::{lift_path, newton_correct, transformed_problem, PathSpec, SolutionAtlas, Tag, TracerOptions, Vector};
use proptest::prelude::*;

fn v(s: &[f64]) -> Vector {
    Vector::from_column_slice(s)
}

fn atlas(name: &str) -> SolutionAtlas {
    let d = by_name(name, &BTreeMap::new()).unwrap();
    SolutionAtlas::new(d.problem, TracerOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Lifting a path and then its reverse returns to the starting value.
    #[test]
    fn reversal_returns_home(a in -8.0f64..8.0, b in -8.0f64..8.0) {
        let mut at = atlas("cubic");
        let path = PathSpec::segment(v(&[a]), v(&[b]));
        let y0 = at.evaluate(&v(&[a])).unwrap();
        let opts = TracerOptions::default();
        let fwd = lift_path(at.problem(), &path, &y0, &opts).unwrap();
        prop_assert!(fwd.is_completed());
        let back = lift_path(at.problem(), &path.reversed(), &fwd.final_y().unwrap(), &opts).unwrap();
        prop_assert!(back.is_completed());
        prop_assert!((back.final_y().unwrap() - y0).amax() <= 1e-7);
    }

    // Every accepted sample sits on the zero set within the tracing tolerance,
    // and a fresh correction from it does not move it.
    #[test]
    fn samples_are_on_the_zero_set(a in -1.8f64..15.0, b in -1.8f64..15.0) {
        let mut at = atlas("diode");
        let opts = TracerOptions::default();
        let y0 = at.evaluate(&v(&[a])).unwrap();
        let tr = lift_path(at.problem(), &PathSpec::segment(v(&[a]), v(&[b])), &y0, &opts).unwrap();
        prop_assert!(tr.is_completed());
        for s in &tr.samples {
            prop_assert!(s.residual <= opts.trace_tol);
            let c = newton_correct(at.problem(), &s.x_vec(), &s.y_vec(), &opts.corrector).unwrap();
            prop_assert!((c.y - s.y_vec()).amax() <= 1e-9);
        }
    }

    // The atlas derivative matches central differences of the atlas values.
    #[test]
    fn derivative_matches_differences(i in -1.5f64..15.0) {
        let mut at = atlas("diode");
        let h = 1e-3;
        let plus = at.evaluate(&v(&[i + h])).unwrap()[0];
        let minus = at.evaluate(&v(&[i - h])).unwrap()[0];
        let fd = (plus - minus) / (2.0 * h);
        let dg = at.derivative(&v(&[i])).unwrap()[(0, 0)];
        prop_assert!(((fd - dg) / dg).abs() <= 1e-5, "fd {} vs {}", fd, dg);
    }

    // Lifting in chart coordinates and mapping back agrees with lifting directly.
    #[test]
    fn charts_commute_with_lifting(a in -1.5f64..15.0, b in -1.5f64..15.0) {
        let d = by_name("diode", &BTreeMap::new()).unwrap();
        let opts = TracerOptions::default();
        let mut at = SolutionAtlas::new(d.problem.clone(), opts.clone()).unwrap();
        let ya = at.evaluate(&v(&[a])).unwrap();
        let yb = at.evaluate(&v(&[b])).unwrap();
        let t = transformed_problem(&d.problem, &d.charts).unwrap();
        let (ua, ub) = (d.charts.phi.forward(&v(&[a])).unwrap(), d.charts.phi.forward(&v(&[b])).unwrap());
        let wa = d.charts.psi.forward(&ya).unwrap();
        let tr = lift_path(&t, &PathSpec::segment(ua, ub), &wa, &opts).unwrap();
        prop_assert!(tr.is_completed());
        let back = d.charts.psi.inverse(&tr.final_y().unwrap()).unwrap();
        prop_assert!((back - yb).amax() <= 1e-7);
    }

    // On the annulus the designated loop opens by delta / (1 + eps).
    #[test]
    fn annulus_gap_formula(delta in 0.3f64..0.8, eps in 0.5f64..1.5) {
        let d = examples::annulus(delta, 1.0, eps).unwrap();
        let lp = d.designated_loop.clone().unwrap();
        let at = SolutionAtlas::new(d.problem, TracerOptions::default()).unwrap();
        let r = at.monodromy_check(&lp.path).unwrap();
        prop_assert!(r.outcome.is_open());
        prop_assert!((r.outcome.gap() - delta / (1.0 + eps)).abs() <= 1e-5);
    }
}

#[test]
fn oracle_examples_match_their_oracles() {
    for d in examples::catalog().into_iter().filter(|d| d.has_tag(Tag::Solvable)) {
        // straight chords from the seed only make sense on open x regions
        if !matches!(d.x_region, SampleRegion::Box(_)) {
            continue;
        }
        let Some(oracle) = d.oracle.clone() else { continue };
        let mut at = SolutionAtlas::new(d.problem.clone(), TracerOptions::default()).unwrap();
        for k in 0..10 {
            let u: Vec<f64> = (0..d.x_region.arity())
                .map(|j| ((k * 7 + j * 3) % 10) as f64 / 10.0 + 0.05)
                .collect();
            let x = d.x_region.point(&u);
            let y = at
                .evaluate(&x)
                .unwrap_or_else(|e| panic!("{} at {:?}: {e}", d.name, x.as_slice()));
            assert_abs_diff_eq!((y - (oracle.g)(&x)).amax(), 0.0, epsilon = 1e-7);
        }
    }
}

#[test]
fn fold_stops_before_the_turning_point() {
    let d = by_name("fold", &BTreeMap::new()).unwrap();
    let (x0, y0) = d.problem.seed();
    let tr = lift_path(
        &d.problem,
        &PathSpec::segment(x0.clone(), v(&[-1.0])),
        y0,
        &TracerOptions::default(),
    )
    .unwrap();
    assert!(!tr.is_completed());
    let last = tr.samples.last().unwrap();
    assert!(last.x[0] > -1e-6, "went past the fold to {:?}", last.x);
}
