//! The nonlinear filter.
//!
//! Only three observations have non-zero probability before time `t`: no
//! event at all, every event reading `0`, or the first event reading `1`
//! followed by zeros. The conditional state is `|psi>` on the first and `|g>`
//! on the other two, and the filter `eps_t(X)` jumps at most once.

use std::collections::BTreeMap;

use rand::Rng;

use crate::atom::{analytic_rho, apparatus_projector, build_dilation, ground, AtomParams};
use crate::chainspace::{
    poisson_pmf, poisson_tail, psi_t_eval, representative_chain, sample_poisson_chain, Chain,
    ObservationClass,
};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, Ket, TOLERANCE};

/// Amplitudes below this modulus count as zero when choosing the
/// renormalized propagator branch.
pub const AMPLITUDE_EPS: f64 = 1e-14;

/// Event times before `t` and the apparatus reading at each.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationRecord {
    chain: Chain,
    outcomes: Vec<u8>,
}

impl ObservationRecord {
    /// Rejects length mismatches, readings outside `{0, 1}` and any pattern
    /// other than all zeros or a single leading one.
    pub fn new(chain: Chain, outcomes: Vec<u8>) -> Result<Self> {
        if chain.len() != outcomes.len() {
            return Err(Error::ImpossibleRecord(format!(
                "{} events but {} outcomes",
                chain.len(),
                outcomes.len()
            )));
        }
        classify_outcomes(&outcomes)?;
        Ok(Self { chain, outcomes })
    }

    pub fn empty(horizon: f64) -> Self {
        Self {
            chain: Chain::empty(horizon),
            outcomes: Vec::new(),
        }
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn times(&self) -> &[f64] {
        self.chain.times()
    }

    pub fn outcomes(&self) -> &[u8] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn class(&self) -> ObservationClass {
        classify_outcomes(&self.outcomes).expect("validated at construction")
    }

    /// The record truncated to its first `events` events.
    pub fn prefix(&self, events: usize) -> ObservationRecord {
        let events = events.min(self.len());
        let chain = Chain::new(self.times()[..events].to_vec(), self.chain.horizon())
            .expect("prefix of a valid chain");
        Self {
            chain,
            outcomes: self.outcomes[..events].to_vec(),
        }
    }
}

fn classify_outcomes(outcomes: &[u8]) -> Result<ObservationClass> {
    if let Some(&bad) = outcomes.iter().find(|&&o| o > 1) {
        return Err(Error::ImpossibleRecord(format!(
            "outcome {bad} is not 0 or 1"
        )));
    }
    match outcomes {
        [] => Ok(ObservationClass::Empty),
        [first, rest @ ..] if rest.iter().all(|&o| o == 0) => Ok(if *first == 1 {
            ObservationClass::FirstOne
        } else {
            ObservationClass::AllZero
        }),
        _ => Err(Error::ImpossibleRecord(format!(
            "outcomes {outcomes:?} read 1 after the first event"
        ))),
    }
}

pub fn classify_projector(record: &ObservationRecord) -> ObservationClass {
    record.class()
}

/// Filtering wave-function at time `t` given a record.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState {
    pub ket: Ket,
    pub record: ObservationRecord,
    pub t: f64,
}

impl FilterState {
    pub fn new(p: &AtomParams, record: ObservationRecord, t: f64) -> Result<Self> {
        if record.times().last().is_some_and(|&z| z >= t) {
            return Err(Error::param(
                "t",
                format!("record has events at or after {t}"),
            ));
        }
        Ok(Self {
            ket: conditional_ket(p, &record),
            record,
            t,
        })
    }
}

/// `P(Empty)`, `P(AllZero)`, `P(FirstOne)` at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservationProbabilities {
    pub empty: f64,
    pub zero: f64,
    pub one: f64,
}

impl ObservationProbabilities {
    pub fn get(&self, class: ObservationClass) -> f64 {
        match class {
            ObservationClass::Empty => self.empty,
            ObservationClass::AllZero => self.zero,
            ObservationClass::FirstOne => self.one,
        }
    }

    pub fn total(&self) -> f64 {
        self.empty + self.zero + self.one
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.empty, self.zero, self.one]
    }
}

pub fn observation_probabilities(p: &AtomParams, t: f64) -> Result<ObservationProbabilities> {
    check_time(p, t)?;
    let empty = (-p.nu() * t).exp();
    let decayed = -(-p.nu() * t).exp_m1();
    Ok(ObservationProbabilities {
        empty,
        zero: decayed * p.alpha().norm_sqr(),
        one: decayed * p.beta().norm_sqr(),
    })
}

/// Output distribution resolved by event count, truncated at `n_max` with
/// the exact Poisson tail kept aside.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution {
    nu: f64,
    t: f64,
    alpha_sq: f64,
    beta_sq: f64,
    n_max: usize,
}

impl OutputDistribution {
    pub fn new(p: &AtomParams, t: f64, n_max: usize) -> Result<Self> {
        check_time(p, t)?;
        Ok(Self {
            nu: p.nu(),
            t,
            alpha_sq: p.alpha().norm_sqr(),
            beta_sq: p.beta().norm_sqr(),
            n_max,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `e^{-nu t} (nu t)^n / n!`
    pub fn count_weight(&self, n: usize) -> f64 {
        poisson_pmf(self.nu * self.t, n)
    }

    /// Probability of `n` events carrying `class`.
    pub fn branch(&self, n: usize, class: ObservationClass) -> f64 {
        let w = self.count_weight(n);
        match (class, n) {
            (ObservationClass::Empty, 0) => w,
            (ObservationClass::Empty, _) | (_, 0) => 0.0,
            (ObservationClass::AllZero, _) => w * self.alpha_sq,
            (ObservationClass::FirstOne, _) => w * self.beta_sq,
        }
    }

    /// Mass of counts above `n_max`.
    pub fn tail_mass(&self) -> f64 {
        poisson_tail(self.nu * self.t, self.n_max)
    }

    pub fn truncated_mass(&self) -> f64 {
        (0..=self.n_max)
            .flat_map(|n| ObservationClass::ALL.map(|c| self.branch(n, c)))
            .sum()
    }

    /// Class probability: truncated branches plus the class share of the tail.
    pub fn class_mass(&self, class: ObservationClass) -> f64 {
        let head: f64 = (0..=self.n_max).map(|n| self.branch(n, class)).sum();
        let tail_share = match class {
            ObservationClass::Empty => 0.0,
            ObservationClass::AllZero => self.alpha_sq,
            ObservationClass::FirstOne => self.beta_sq,
        };
        head + self.tail_mass() * tail_share
    }

    /// `|truncated + tail - 1|`.
    pub fn closure_defect(&self) -> f64 {
        (self.truncated_mass() + self.tail_mass() - 1.0).abs()
    }
}

/// Draws a record on `[0, t)`: a Poisson chain, then the readings from the
/// Born rule on the apparatus labels of `Psi_t` over that chain.
pub fn sample_observation<R: Rng + ?Sized>(
    p: &AtomParams,
    t: f64,
    rng: &mut R,
) -> Result<ObservationRecord> {
    check_time(p, t)?;
    let chain = sample_poisson_chain(p.nu(), t, p.r(), rng)?;
    if chain.is_empty() {
        return Ok(ObservationRecord::empty(p.r()));
    }
    let psi = psi_t_eval(p, t, &chain)?;
    let mut weights: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (label, amp) in psi.terms() {
        *weights.entry(label.fibers.clone()).or_default() += amp.norm_sqr();
    }
    let total: f64 = weights.values().sum();
    let mut draw = rng.random::<f64>() * total;
    let mut chosen = None;
    for (fibers, w) in &weights {
        if *w <= 0.0 {
            continue;
        }
        chosen = Some(fibers);
        if draw < *w {
            break;
        }
        draw -= w;
    }
    let outcomes = chosen.expect("non-zero state").clone();
    ObservationRecord::new(chain, outcomes)
}

/// `|psi>` before any event, `|g>` after.
pub fn conditional_ket(p: &AtomParams, record: &ObservationRecord) -> Ket {
    match record.class() {
        ObservationClass::Empty => p.psi(),
        ObservationClass::AllZero | ObservationClass::FirstOne => ground(),
    }
}

/// `eps_t(X) = <ket|X|ket>` for the record's conditional ket.
pub fn conditional_expectation(
    x: &ComplexMatrix,
    p: &AtomParams,
    record: &ObservationRecord,
) -> Result<f64> {
    system_value(x, &conditional_ket(p, record))
}

fn system_value(x: &ComplexMatrix, ket: &Ket) -> Result<f64> {
    if x.shape() != (2, 2) {
        return Err(Error::InvalidShape(format!(
            "system observable must be 2x2, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    x.require_hermitian(TOLERANCE)?;
    Ok(ket.expectation(x)?.re)
}

/// `(sum_class P(class) eps(X | class), Tr[X rho(t)])`.
pub fn tower_check(x: &ComplexMatrix, p: &AtomParams, t: f64, n_max: usize) -> Result<(f64, f64)> {
    let dist = OutputDistribution::new(p, t, n_max)?;
    let horizon = p.r();
    let mut lhs = 0.0;
    for class in ObservationClass::ALL {
        let n = if class == ObservationClass::Empty {
            0
        } else {
            1
        };
        let record = ObservationRecord::new(
            representative_chain(t, n, horizon)?,
            class.pattern(n).expect("pattern exists"),
        )?;
        lhs += dist.class_mass(class) * conditional_expectation(x, p, &record)?;
    }
    let rho = analytic_rho(p, t)?;
    let rhs = x.matmul(&rho)?.trace()?.re;
    Ok((lhs, rhs))
}

/// Conditional values of `(N^0, N^1)` given the record.
pub fn conditional_counts(record: &ObservationRecord) -> (usize, usize) {
    let n = record.len();
    match record.class() {
        ObservationClass::Empty => (0, 0),
        ObservationClass::AllZero => (n, 0),
        ObservationClass::FirstOne => (n - 1, 1),
    }
}

/// Jump coefficients `(kappa_0, kappa_1)` at the `event_index`-th event
/// (1-based) of `record`.
///
/// The first event moves the filter from `<psi|X|psi>` to `<g|X|g>` for either
/// reading. At later events a `0` changes nothing, and the `1` branch, which
/// has probability zero, carries `-eps_t(X)`.
pub fn kappa(
    x: &ComplexMatrix,
    p: &AtomParams,
    record: &ObservationRecord,
    event_index: usize,
) -> Result<(f64, f64)> {
    if event_index == 0 || event_index > record.len() {
        return Err(Error::param(
            "event_index",
            format!("must lie in 1..={}, got {event_index}", record.len()),
        ));
    }
    if event_index == 1 {
        let k = system_value(x, &ground())? - system_value(x, &p.psi())?;
        Ok((k, k))
    } else {
        let before = conditional_expectation(x, p, &record.prefix(event_index - 1))?;
        Ok((0.0, -before))
    }
}

/// Piecewise-constant filter trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplaySeries {
    /// Jump times, one per event.
    pub times: Vec<f64>,
    /// `values[0]` holds before the first event, `values[i]` after event `i`.
    pub values: Vec<f64>,
}

impl ReplaySeries {
    pub fn final_value(&self) -> f64 {
        *self
            .values
            .last()
            .expect("series starts with the prior value")
    }
}

/// Integrates `d eps = kappa_k dN^k` along the record.
pub fn sde_replay(
    x: &ComplexMatrix,
    p: &AtomParams,
    record: &ObservationRecord,
) -> Result<ReplaySeries> {
    let mut value = system_value(x, &p.psi())?;
    let mut values = Vec::with_capacity(record.len() + 1);
    values.push(value);
    for (i, &outcome) in record.outcomes().iter().enumerate() {
        let (k0, k1) = kappa(x, p, record, i + 1)?;
        // exactly one of dN^0, dN^1 fires at each event
        let (dn0, dn1) = if outcome == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
        value += k0 * dn0 + k1 * dn1;
        values.push(value);
    }
    Ok(ReplaySeries {
        times: record.times().to_vec(),
        values,
    })
}

/// One step of the renormalized propagator.
#[derive(Clone, Debug, PartialEq)]
pub enum RenormalizedSigma {
    /// 4x4 on atom (x) first fiber: `JJ^dag/|alpha| (x) P_0 + J/|beta| (x) P_1`,
    /// with zero-norm branches dropped.
    First(ComplexMatrix),
    /// `local` is `diag(JJ^dag, 0)` on atom (x) current fiber, `q` acts on
    /// the first fiber.
    Later {
        local: ComplexMatrix,
        q: ComplexMatrix,
    },
}

impl RenormalizedSigma {
    /// Dense form. `First` is 4x4; `Later` is 8x8 on
    /// atom (x) first fiber (x) current fiber.
    pub fn to_matrix(&self) -> ComplexMatrix {
        match self {
            RenormalizedSigma::First(m) => m.clone(),
            RenormalizedSigma::Later { local, q } => ComplexMatrix::from_fn(8, 8, |i, j| {
                let (a, f, c) = (i / 4, (i / 2) % 2, i % 2);
                let (a2, f2, c2) = (j / 4, (j / 2) % 2, j % 2);
                local.get(2 * a + c, 2 * a2 + c2) * q.get(f, f2)
            }),
        }
    }
}

/// Renormalized propagator at step `step` (1-based) with the dilation
/// evaluated at `event_time`. `prior` holds the readings of the earlier
/// steps and must be a possible pattern.
pub fn renormalized_sigma(
    p: &AtomParams,
    step: usize,
    prior: &[u8],
    event_time: f64,
) -> Result<RenormalizedSigma> {
    if step == 0 {
        return Err(Error::param("step", "steps are counted from 1"));
    }
    if prior.len() != step - 1 {
        return Err(Error::param(
            "prior",
            format!(
                "step {step} needs {} prior outcomes, got {}",
                step - 1,
                prior.len()
            ),
        ));
    }
    classify_outcomes(prior)?;
    let ops = build_dilation(p, event_time);
    let jjd = &ops.j * &ops.j.adjoint();
    let a = p.alpha().norm();
    let b = p.beta().norm();
    let has_a = a > AMPLITUDE_EPS;
    let has_b = b > AMPLITUDE_EPS;
    if step == 1 {
        let mut sigma = ComplexMatrix::zeros(4, 4);
        if has_a {
            sigma = &sigma + &(&jjd * (1.0 / a)).kron(&apparatus_projector(0));
        }
        if has_b {
            sigma = &sigma + &(&ops.j * (1.0 / b)).kron(&apparatus_projector(1));
        }
        return Ok(RenormalizedSigma::First(sigma));
    }
    let local = jjd.kron(&apparatus_projector(0));
    let q = match (has_a, has_b) {
        (true, true) => ComplexMatrix::identity(2),
        (true, false) => apparatus_projector(0),
        (false, true) => apparatus_projector(1),
        (false, false) => unreachable!("normalized amplitudes"),
    };
    Ok(RenormalizedSigma::Later { local, q })
}

/// Named Hermitian system observables.
pub fn named_observable(name: &str) -> Option<ComplexMatrix> {
    let m = match name {
        "excited" => ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        "ground" => ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        "sigma_x" => ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        _ => return None,
    };
    Some(m)
}

/// Names accepted by [`named_observable`].
pub const OBSERVABLE_NAMES: [&str; 3] = ["excited", "ground", "sigma_x"];

fn check_time(p: &AtomParams, t: f64) -> Result<()> {
    if !(0.0..=p.r()).contains(&t) {
        return Err(Error::param(
            "t",
            format!("time {t} outside [0, {}]", p.r()),
        ));
    }
    Ok(())
}
