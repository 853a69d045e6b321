use cartpole_core::catalog;
use cartpole_core::metrics::{compute_metrics, Metrics, MetricsConfig, Sample, TimeSeries};
use cartpole_core::scenario::{run_scenario, Controller, Outcome};
use cartpole_core::tune::{gain_search, GainBounds, SearchOutcome, TuningSpec};
use proptest::prelude::*;

fn s1_run() -> TimeSeries {
    run_scenario(&catalog::scenario("S1").unwrap())
        .unwrap()
        .series
}

fn shape(m: &Metrics) -> [Option<f64>; 6] {
    [
        m.percent_overshoot,
        Some(m.undershoot),
        Some(m.peak_angle_deg),
        m.settling_time,
        m.rise_time,
        Some(m.max_abs_x),
    ]
}

fn close(a: &[Option<f64>], b: &[Option<f64>], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Some(x), Some(y)) => (x - y).abs() <= tol * (1.0 + x.abs()),
        (None, None) => true,
        _ => false,
    })
}

#[test]
fn runs_are_bit_identical() {
    for name in ["S1", "S5", "S6"] {
        let s = catalog::scenario(name).unwrap();
        assert_eq!(
            run_scenario(&s).unwrap(),
            run_scenario(&s).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seed_changes_hardware_noise() {
    let s6 = catalog::scenario("S6").unwrap();
    let other = cartpole_core::scenario::Scenario {
        seed: s6.seed + 1,
        ..s6.clone()
    };
    assert_ne!(
        run_scenario(&s6).unwrap().series.measured_x,
        run_scenario(&other).unwrap().series.measured_x
    );
}

#[test]
fn halving_dt_barely_moves_the_final_position() {
    let s1 = catalog::scenario("S1").unwrap();
    let fine = cartpole_core::scenario::Scenario {
        dt: s1.dt / 2.0,
        ..s1.clone()
    };
    let coarse = run_scenario(&s1).unwrap().series;
    let fine = run_scenario(&fine).unwrap().series;
    assert_eq!(fine.len(), 2 * coarse.len());
    let diff = (coarse.x.last().unwrap() - fine.x.last().unwrap()).abs();
    assert!(diff < 1e-4, "final x moved by {diff}");
}

#[test]
fn metrics_ignore_time_shift() {
    let series = s1_run();
    let cfg = MetricsConfig::new(0.10);
    let base = compute_metrics(&series, &cfg).unwrap();
    let mut shifted = series.clone();
    shifted.t.iter_mut().for_each(|t| *t += 3.7);
    let moved = compute_metrics(&shifted, &cfg).unwrap();
    assert!(close(&shape(&base), &shape(&moved), 1e-9));
}

#[test]
fn metrics_ignore_appended_settled_samples() {
    let series = s1_run();
    let cfg = MetricsConfig::new(0.10);
    let base = compute_metrics(&series, &cfg).unwrap();
    let mut longer = series.clone();
    let last = series.sample(series.len() - 1);
    for k in 1..=2000 {
        longer.push(Sample {
            t: last.t + k as f64 * 1e-3,
            ..last
        });
    }
    let extended = compute_metrics(&longer, &cfg).unwrap();
    assert_eq!(shape(&base), shape(&extended));
}

#[test]
fn s2_peaks_increase_with_command() {
    let peaks: Vec<f64> = catalog::s2_family()
        .iter()
        .map(|s| {
            compute_metrics(&run_scenario(s).unwrap().series, &s.metrics_config())
                .unwrap()
                .max_abs_x
        })
        .collect();
    assert!(peaks.windows(2).all(|w| w[1] > w[0]), "{peaks:?}");
}

#[test]
fn s3_fails_and_s4_recovers() {
    let s3 = run_scenario(&catalog::scenario("S3").unwrap()).unwrap();
    assert!(s3.outcome.aborted());
    let s4 = catalog::scenario("S4").unwrap();
    let run = run_scenario(&s4).unwrap();
    assert_eq!(run.outcome, Outcome::Settled);
    let m = compute_metrics(&run.series, &s4.metrics_config()).unwrap();
    assert!(m.settling_time.unwrap() < 40.0);
}

#[test]
fn search_started_on_a_passing_point_keeps_it() {
    let s1 = catalog::scenario("S1").unwrap();
    let Controller::Cascade(start) = s1.controller else {
        unreachable!()
    };
    let result = gain_search(
        &TuningSpec::default(),
        &GainBounds::around(&start, 0.2),
        &s1,
    )
    .unwrap();
    assert!(result.is_found());
    assert_eq!(result.evaluations(), 1);
    assert_eq!(result.best().config, start);
}

#[test]
fn search_from_reference_gains_meets_tuning_spec() {
    let mut s1 = catalog::scenario("S1").unwrap();
    let reference = catalog::reference_cascade();
    s1.controller = Controller::Cascade(reference);
    let spec = TuningSpec::default();
    let result = gain_search(&spec, &GainBounds::around(&reference, 0.5), &s1).unwrap();
    let best = result.best();
    assert!(result.is_found());
    assert!(result.evaluations() <= spec.budget);
    assert!(best.metrics.percent_overshoot.unwrap() < 10.0);
    assert!(best.angle_settling.unwrap() <= 3.0);
}

#[test]
fn impossible_settling_fails_with_best_attempt() {
    let s1 = catalog::scenario("S1").unwrap();
    let Controller::Cascade(start) = s1.controller else {
        unreachable!()
    };
    let spec = TuningSpec {
        max_settling_time: Some(0.01),
        budget: 30,
        ..TuningSpec::default()
    };
    match gain_search(&spec, &GainBounds::around(&start, 0.5), &s1).unwrap() {
        SearchOutcome::Failed { best, evaluations } => {
            assert_eq!(evaluations, 30);
            assert!(!best.meets_spec);
        }
        found => panic!("expected failure, got {found:?}"),
    }
}

#[test]
fn search_rejects_non_cascade_base() {
    let s5 = catalog::scenario("S5").unwrap();
    let bounds = GainBounds::around(&catalog::tuned_cascade(), 0.1);
    assert!(gain_search(&TuningSpec::default(), &bounds, &s5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_never_worsens_the_start(f in 0.05..0.6f64, budget in 1usize..12) {
        let s1 = cartpole_core::scenario::Scenario { duration: 4.0, ..catalog::scenario("S1").unwrap() };
        let Controller::Cascade(start) = s1.controller else { unreachable!() };
        let spec = TuningSpec { max_settling_time: Some(0.5), budget, ..TuningSpec::default() };
        let initial = cartpole_core::tune::evaluate(&spec, &s1, &start).unwrap();
        let result = gain_search(&spec, &GainBounds::around(&start, f), &s1).unwrap();
        prop_assert!(result.best().penalty <= initial.penalty);
        prop_assert!(result.evaluations() <= budget);
    }
}
