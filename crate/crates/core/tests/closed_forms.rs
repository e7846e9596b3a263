use mapburst::closed_forms::{mmpp2_metrics, Mmpp2Params};
use mapburst::metrics::{MapAnalysis, TimeGrid};
use mapburst::simulate::rng_for;
use rand::Rng;

fn random_params(i: u64) -> Mmpp2Params<f64> {
    let mut rng = rng_for(77, i);
    Mmpp2Params::new(
        rng.gen_range(0.0..4.0),
        rng.gen_range(0.0..4.0),
        rng.gen_range(0.1..3.0),
        rng.gen_range(0.1..3.0),
    )
    .unwrap()
}

#[test]
fn gap_closed_form_matches_pipeline() {
    let grid: Vec<f64> = TimeGrid::default().points();
    for i in 0..2000 {
        let p = random_params(i);
        let m = p.to_model().unwrap();
        let gap = MapAnalysis::new(&m).unwrap().stochastic_order_gap(&grid).unwrap();
        assert_eq!(p.gap(0.0), 0.0);
        for &(t, g) in &gap.points {
            let cf = p.gap(t);
            assert!((cf - g).abs() <= 1e-8, "instance {i}, t = {t}: {cf} vs {g}");
            if t > 0.0 && (p.lambda1 - p.lambda2).abs() > 1e-3 && cf > 1e-250 {
                assert!(cf > 0.0);
            }
        }
    }
}

#[test]
fn pipeline_alpha_is_the_closed_form_alpha() {
    for i in 0..500 {
        let p = random_params(i);
        let m = p.to_model().unwrap();
        let a = MapAnalysis::new(&m).unwrap();
        assert!(a.alpha().max_abs_diff(p.alpha().as_slice()) < 1e-12);
        assert!(a.pi().max_abs_diff(p.pi().as_slice()) < 1e-12);
    }
}

#[test]
fn hazard_numerator_matches_and_is_negative() {
    let grid: Vec<f64> = TimeGrid::new(0.0, 5.0, 0.25).unwrap().points();
    for i in 0..500 {
        let p = random_params(i);
        let m = p.to_model().unwrap();
        let a = MapAnalysis::new(&m).unwrap();
        let scale = mmpp2_metrics(&p).unwrap().hazard_sign_factor.abs().max(1e-300);
        let curve = a.hazard_curve(a.alpha(), &grid).unwrap();
        for (s, &t) in curve.samples.iter().zip(&grid) {
            let cf = p.hazard_numerator(t);
            let general = a.dhr_expression(t).unwrap();
            assert!((cf - general).abs() <= 1e-9 * scale, "instance {i}, t = {t}");
            if (p.lambda1 - p.lambda2).abs() > 1e-3 && cf < -1e-13 {
                assert!(s.dh < 0.0, "instance {i}, t = {t}");
            }
        }
    }
}

#[test]
fn variance_ratio_matches_pipeline() {
    for i in 0..200 {
        let p = random_params(i);
        let m = p.to_model().unwrap();
        let grid = [0.5, 2.0, 10.0, 40.0];
        for (t, mean, var) in MapAnalysis::new(&m).unwrap().variance_curve(&grid).unwrap() {
            assert!((var / mean - p.variance_ratio(t)).abs() < 1e-9, "instance {i}, t = {t}");
        }
    }
}

#[test]
fn single_precision_closed_forms() {
    let p = Mmpp2Params::<f32>::new(1.0, 3.0, 1.0, 1.0).unwrap();
    assert!((p.scv() - 9.0 / 7.0).abs() < 1e-6);
    let m = p.to_model().unwrap();
    let a = MapAnalysis::new(&m).unwrap();
    assert!((a.scv().unwrap() - 9.0 / 7.0).abs() < 1e-4);
    assert!((a.dispersion_index().unwrap() - 1.5).abs() < 1e-4);
}
