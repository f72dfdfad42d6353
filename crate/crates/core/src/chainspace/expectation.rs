//! Expectations `E_t[B] = Psi_t* B Psi_t` of adapted observables.
//!
//! The integrand `<Psi_t(chain)|B(chain)|Psi_t(chain)>` equals the coherent
//! weight `nu^n e^{-nu r}` times a value that depends only on how many events
//! fall before `t`. Events after `t` integrate out against the coherent
//! weight to `e^{nu (r - t)}`, and the `k` events before `t` contribute the
//! simplex volume `t^k / k!`, so
//!
//! `E_t[B] = sum_k Poisson(k; nu t) * reduced(k)`
//!
//! where `reduced(k)` is the integrand divided by the coherent weight on any
//! chain with `k` events in `[0, t)`. The Monte Carlo engine samples the
//! Poisson process on `[0, t)` directly, which makes the importance weight
//! the same ratio.

use rand::Rng;

use super::chain::Chain;
use super::observable::{Observable, ObservationClass};
use super::sampling::sample_poisson_chain;
use super::vector::{psi_t_eval, CoherentParams};
use crate::atom::{analytic_rho, AtomParams};
use crate::error::{Error, Result};
use crate::parallel::{map_streams, stream_quota, stream_rng, Execution, DEFAULT_STREAMS};

/// Default truncation of the event-count sum.
pub const DEFAULT_N_MAX: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Poisson mass of the neglected counts `k > n_max`.
    pub tail_mass: f64,
    pub n_max: usize,
}

/// `ln k!`
fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_factorial(k)).exp()
}

/// `P[K > n_max]` for `K ~ Poisson(mean)`, summed upward so tiny tails keep
/// their relative precision.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut term = poisson_pmf(mean, n_max + 1);
    let mut k = n_max + 1;
    while term > 0.0 && (term > total * 1e-17 || (k as f64) < mean) {
        total += term;
        k += 1;
        term *= mean / k as f64;
        if k > n_max + 100_000 {
            break;
        }
    }
    total
}

/// `k` evenly spaced events inside `[0, t)`.
pub fn representative_chain(t: f64, k: usize, horizon: f64) -> Result<Chain> {
    let times = (0..k).map(|i| t * (i as f64 + 0.5) / k as f64).collect();
    Chain::new(times, horizon)
}

/// `<Psi_t|B|Psi_t> / |Phi|^2` on `chain`.
pub fn reduced_integrand(obs: &Observable, p: &AtomParams, t: f64, chain: &Chain) -> Result<f64> {
    let psi = psi_t_eval(p, t, chain)?;
    let weight = CoherentParams::from_atom(p).weight(chain.len());
    Ok(obs.evaluate(&psi, t)? / weight)
}

/// Deterministic expectation by summing the count-reduced integrand up to
/// `n_max` events before `t`.
pub fn expectation_quadrature(
    obs: &Observable,
    p: &AtomParams,
    t: f64,
    n_max: usize,
) -> Result<QuadratureResult> {
    check_time(p, t)?;
    let mean = p.nu() * t;
    let mut value = 0.0;
    for k in 0..=n_max {
        let weight = poisson_pmf(mean, k);
        if weight == 0.0 {
            continue;
        }
        let chain = representative_chain(t, k, p.r())?;
        value += weight * reduced_integrand(obs, p, t, &chain)?;
    }
    Ok(QuadratureResult {
        value,
        tail_mass: poisson_tail(mean, n_max),
        n_max,
    })
}

/// Closed-form expectation at time `t`.
pub fn expectation_closed_form(obs: &Observable, p: &AtomParams, t: f64) -> Result<f64> {
    check_time(p, t)?;
    let nu_t = p.nu() * t;
    let decayed = -(-nu_t).exp_m1();
    let (a2, b2) = (p.alpha().norm_sqr(), p.beta().norm_sqr());
    Ok(match obs {
        Observable::Number(0) => nu_t - decayed * b2,
        Observable::Number(1) => decayed * b2,
        Observable::Number(k) => {
            return Err(Error::param(
                "k",
                format!("apparatus outcome {k} not in {{0, 1}}"),
            ))
        }
        Observable::Class(ObservationClass::Empty) => (-nu_t).exp(),
        Observable::Class(ObservationClass::AllZero) => decayed * a2,
        Observable::Class(ObservationClass::FirstOne) => decayed * b2,
        Observable::PossibleObservations | Observable::Identity => 1.0,
        Observable::System(x) => x.matmul(&analytic_rho(p, t)?)?.trace()?.re,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
    pub streams: usize,
    pub execution: Execution,
}

impl McSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            streams: DEFAULT_STREAMS,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_streams(mut self, streams: usize) -> Self {
        self.streams = streams;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean; infinite for a single sample.
    pub std_err: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    fn estimate(self) -> McEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let std_err = if self.count > 1 {
            let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            f64::INFINITY
        };
        McEstimate {
            mean,
            std_err,
            samples: self.count,
        }
    }
}

/// Runs `sample` over the stream-split generators and averages it.
pub fn run_streams<F>(settings: &McSettings, sample: F) -> Result<McEstimate>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    if settings.samples == 0 {
        return Err(Error::param("samples", "at least one sample is required"));
    }
    if settings.streams == 0 {
        return Err(Error::param("streams", "at least one stream is required"));
    }
    let partials = map_streams(settings.streams, settings.execution, |s| {
        let mut rng = stream_rng(settings.seed, s);
        let mut m = Moments::default();
        for _ in 0..stream_quota(settings.samples, settings.streams, s) {
            m.push(sample(&mut rng)?);
        }
        Ok(m)
    });
    let mut total = Moments::default();
    for part in partials {
        total = total.merge(part?);
    }
    Ok(total.estimate())
}

/// Monte Carlo expectation: chains drawn from the Poisson process on
/// `[0, t)`, each weighted by the integrand over the coherent weight.
pub fn expectation_mc(
    obs: &Observable,
    p: &AtomParams,
    t: f64,
    settings: &McSettings,
) -> Result<McEstimate> {
    check_time(p, t)?;
    run_streams(settings, |rng| sample_integrand(obs, p, t, rng))
}

fn sample_integrand<R: Rng + ?Sized>(
    obs: &Observable,
    p: &AtomParams,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    let chain = sample_poisson_chain(p.nu(), t, p.r(), rng)?;
    reduced_integrand(obs, p, t, &chain)
}

fn check_time(p: &AtomParams, t: f64) -> Result<()> {
    if !(0.0..=p.r()).contains(&t) {
        return Err(Error::param(
            "t",
            format!("time {t} outside [0, {}]", p.r()),
        ));
    }
    Ok(())
}
