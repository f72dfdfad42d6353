//! Seeded statistical checks of the samplers and the Monte Carlo engine.

use eventum_core::atom::AtomParams;
use eventum_core::chainspace::{
    expectation_mc, expectation_quadrature, sample_poisson_chain, McSettings, Observable,
    ObservationClass,
};
use eventum_core::filtering::{observation_probabilities, sample_observation};
use eventum_core::parallel::{stream_rng, Execution};

#[test]
fn poisson_counts_have_unit_mean_and_vacuum_mass() {
    let mut rng = stream_rng(2024, 0);
    let draws = 100_000;
    let mut total = 0usize;
    let mut empty = 0usize;
    for _ in 0..draws {
        let chain = sample_poisson_chain(1.0, 1.0, 2.0, &mut rng).unwrap();
        total += chain.len();
        empty += usize::from(chain.is_empty());
    }
    let mean = total as f64 / draws as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    let p0 = (-1.0f64).exp();
    let freq = empty as f64 / draws as f64;
    let sigma = (p0 * (1.0 - p0) / draws as f64).sqrt();
    assert!((freq - p0).abs() < 3.0 * sigma, "vacuum frequency {freq}");
}

#[test]
fn class_frequencies_match_closed_form() {
    let p = AtomParams::real(1.0, 0.6, 0.8, 5.0).unwrap();
    let t = 1.0;
    let draws = 100_000;
    let mut rng = stream_rng(77, 3);
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        let class = sample_observation(&p, t, &mut rng).unwrap().class();
        counts[ObservationClass::ALL
            .iter()
            .position(|&c| c == class)
            .unwrap()] += 1;
    }
    let probs = observation_probabilities(&p, t).unwrap();
    for (i, class) in ObservationClass::ALL.iter().enumerate() {
        let q = probs.get(*class);
        let freq = counts[i] as f64 / draws as f64;
        let sigma = (q * (1.0 - q) / draws as f64).sqrt();
        assert!((freq - q).abs() < 3.0 * sigma, "{class}: {freq} vs {q}");
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let p = AtomParams::real(2.0, 0.8, 0.6, 3.0).unwrap();
    let settings = McSettings::new(50_000, 11);
    for name in Observable::NAMES {
        let obs: Observable = name.parse().unwrap();
        let exact = expectation_quadrature(&obs, &p, 1.5, 40).unwrap().value;
        let est = expectation_mc(&obs, &p, 1.5, &settings).unwrap();
        assert!(
            (est.mean - exact).abs() < 3.0 * est.std_err,
            "{name}: {} +- {} vs {exact}",
            est.mean,
            est.std_err
        );
    }
}

#[test]
fn monte_carlo_does_not_depend_on_execution_mode() {
    let p = AtomParams::real(1.0, 0.6, 0.8, 5.0).unwrap();
    let obs = Observable::Number(0);
    let seq = expectation_mc(
        &obs,
        &p,
        2.0,
        &McSettings::new(10_001, 5).with_execution(Execution::Sequential),
    )
    .unwrap();
    let par = expectation_mc(
        &obs,
        &p,
        2.0,
        &McSettings::new(10_001, 5).with_execution(Execution::Parallel),
    )
    .unwrap();
    assert_eq!(seq.mean.to_bits(), par.mean.to_bits());
    assert_eq!(seq.std_err.to_bits(), par.std_err.to_bits());
}
