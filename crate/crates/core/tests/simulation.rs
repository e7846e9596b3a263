use mapburst::map::{cyclic_counterexample, MapModel};
use mapburst::metrics::MapAnalysis;
use mapburst::simulate::{
    first_interval_mean, scv_correlation_check, simulate_events, RunLength, SimConfig, SimStart,
};
use mapburst::Matrix;

fn mmpp2() -> MapModel<f64> {
    let q = Matrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
    MapModel::mmpp(&q, &[1.0, 3.0]).unwrap()
}

#[test]
fn dispersion_from_interval_correlations() {
    for (seed, m) in [(31, mmpp2()), (32, cyclic_counterexample())] {
        let cfg = SimConfig::events(seed, 400_000, SimStart::EventStationary);
        let check = scv_correlation_check(&m, &cfg).unwrap();
        assert!(check.consistent, "{check:?}");
        let d2 = MapAnalysis::new(&m).unwrap().dispersion_index().unwrap();
        assert!(check.from_intervals.within(d2, 4.0), "{check:?}");
        assert!(check.lags >= 1);
    }
}

#[test]
fn first_interval_means_under_both_starts() {
    let m = cyclic_counterexample::<f64>();
    let a = MapAnalysis::new(&m).unwrap();
    let event = first_interval_mean(&m, SimStart::EventStationary, 100_000, 5).unwrap();
    assert!(event.within(a.moment(1).unwrap(), 3.0), "{event:?}");
    let time = first_interval_mean(&m, SimStart::TimeStationary, 100_000, 6).unwrap();
    assert!(time.within(a.mean_first_time_stationary(), 3.0), "{time:?}");
    assert!(time.estimate > event.estimate);
}

#[test]
fn phase_occupancy_approaches_pi() {
    let m = mmpp2();
    let cfg = SimConfig {
        run: RunLength::Horizon(50_000.0),
        ..SimConfig::events(8, 1, SimStart::TimeStationary)
    };
    let s = simulate_events(&m, &cfg).unwrap();
    // events occur at rates 1 and 3 with equal occupancy, so a quarter of
    // post-event phases are phase 0
    let share = s.phases.iter().filter(|&&p| p == 0).count() as f64 / s.len() as f64;
    assert!((share - 0.25).abs() < 0.01, "{share}");
    assert!((s.len() as f64 / 50_000.0 - 2.0).abs() < 0.05);
}
