use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::chain::Chain;
use crate::error::{Error, Result};

/// Poisson process of rate `nu` on `[0, window)`, returned as a chain on
/// `[0, horizon)`. The count is Poisson(`nu * window`) and the times are
/// sorted uniforms; a draw with coincident times is discarded and redrawn.
pub fn sample_poisson_chain<R: Rng + ?Sized>(
    nu: f64,
    window: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<Chain> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::param(
            "nu",
            format!("rate must be positive, got {nu}"),
        ));
    }
    if !(window >= 0.0 && window <= horizon) {
        return Err(Error::param(
            "window",
            format!("window {window} outside [0, {horizon}]"),
        ));
    }
    let n = sample_count(nu * window, rng);
    Ok(uniform_chain(n, window, horizon, rng))
}

/// Poisson(`mean`) count; zero for a zero mean.
pub fn sample_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    let draw: f64 = poisson.sample(rng);
    draw as usize
}

/// `n` sorted distinct uniforms on `[0, window)` as a chain on `[0, horizon)`.
pub fn uniform_chain<R: Rng + ?Sized>(n: usize, window: f64, horizon: f64, rng: &mut R) -> Chain {
    loop {
        let mut times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * window).collect();
        times.sort_by(|a, b| a.total_cmp(b));
        if let Ok(chain) = Chain::new(times, horizon) {
            return chain;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::stream_rng;

    #[test]
    fn samples_are_sorted_and_inside_window() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..2000 {
            let c = sample_poisson_chain(3.0, 0.7, 1.0, &mut rng).unwrap();
            assert!(c.times().windows(2).all(|w| w[0] < w[1]));
            assert!(c.times().iter().all(|&z| (0.0..0.7).contains(&z)));
        }
    }

    #[test]
    fn zero_window_gives_empty_chains() {
        let mut rng = stream_rng(3, 0);
        assert!(sample_poisson_chain(2.0, 0.0, 1.0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = stream_rng(3, 0);
        assert!(sample_poisson_chain(0.0, 0.5, 1.0, &mut rng).is_err());
        assert!(sample_poisson_chain(1.0, 1.5, 1.0, &mut rng).is_err());
    }
}
