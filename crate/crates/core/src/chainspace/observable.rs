//! Apparatus observables evaluated on a chain.
//!
//! Every observable here is diagonal in the fiber basis, so an evaluation is
//! a function of the basis label alone.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::chain::Chain;
use super::vector::ChainVector;
use crate::error::{Error, Result};
use crate::qmat::{re, ComplexMatrix, ZERO};

/// The three observations with non-zero probability in this model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObservationClass {
    /// No event before `t`.
    Empty,
    /// Every event reads `0`.
    AllZero,
    /// The first event reads `1`, the rest `0`.
    FirstOne,
}

impl ObservationClass {
    pub const ALL: [ObservationClass; 3] = [
        ObservationClass::Empty,
        ObservationClass::AllZero,
        ObservationClass::FirstOne,
    ];

    /// Outcome sequence of this class on `n` events, `None` when the class
    /// cannot be carried by `n` events.
    pub fn pattern(self, n: usize) -> Option<Vec<u8>> {
        match (self, n) {
            (ObservationClass::Empty, 0) => Some(Vec::new()),
            (ObservationClass::Empty, _) | (_, 0) => None,
            (ObservationClass::AllZero, n) => Some(vec![0; n]),
            (ObservationClass::FirstOne, n) => {
                let mut v = vec![0; n];
                v[0] = 1;
                Some(v)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObservationClass::Empty => "Empty",
            ObservationClass::AllZero => "AllZero",
            ObservationClass::FirstOne => "FirstOne",
        }
    }
}

impl fmt::Display for ObservationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum DiagonalKind {
    /// Number of past fibers reading `k`.
    Count {
        k: u8,
    },
    /// Indicator that the past fibers read exactly `outcomes`.
    Pattern {
        outcomes: Vec<u8>,
    },
    Zero,
}

/// Diagonal operator on the apparatus fibers of an `events`-long chain,
/// acting as the identity on fibers at or after the adaptedness time.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOp {
    events: usize,
    past: usize,
    kind: DiagonalKind,
}

impl DiagonalOp {
    pub fn events(&self) -> usize {
        self.events
    }

    /// Number of fibers the operator acts on non-trivially.
    pub fn past(&self) -> usize {
        self.past
    }

    pub fn is_zero(&self) -> bool {
        self.kind == DiagonalKind::Zero
    }

    /// Diagonal entry at the apparatus basis state `fibers` (earliest first).
    pub fn value(&self, fibers: &[u8]) -> f64 {
        debug_assert_eq!(fibers.len(), self.events);
        match &self.kind {
            DiagonalKind::Count { k } => {
                fibers[..self.past].iter().filter(|&&f| f == *k).count() as f64
            }
            DiagonalKind::Pattern { outcomes } => {
                if fibers[..self.past] == outcomes[..] {
                    1.0
                } else {
                    0.0
                }
            }
            DiagonalKind::Zero => 0.0,
        }
    }

    /// Dense `2^events` diagonal matrix in the latest-first fiber order.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.events > 12 {
            return Err(Error::InvalidShape(format!(
                "{} events is too many for a dense observable",
                self.events
            )));
        }
        let dim = 1usize << self.events;
        let diag: Vec<Complex64> = (0..dim)
            .map(|i| {
                let fibers: Vec<u8> = (0..self.events).map(|b| ((i >> b) & 1) as u8).collect();
                re(self.value(&fibers))
            })
            .collect();
        Ok(ComplexMatrix::diagonal(&diag))
    }
}

/// `N^k_t(chain) = sum_{z in chain, z < t} I (x) P_k(z) (x) I`.
pub fn number_operator_eval(k: u8, t: f64, chain: &Chain) -> Result<DiagonalOp> {
    if k > 1 {
        return Err(Error::param(
            "k",
            format!("apparatus outcome {k} not in {{0, 1}}"),
        ));
    }
    Ok(DiagonalOp {
        events: chain.len(),
        past: chain.past_len(t),
        kind: DiagonalKind::Count { k },
    })
}

/// Observation projector `I(future) (x) P_{k_n}(t_n) (x) ... (x) P_{k_1}(t_1)`
/// for outcomes `k_1, ..., k_n` (earliest first). Zero unless the number of
/// outcomes equals the number of events before `t`.
pub fn projector_eval(outcomes: &[u8], t: f64, chain: &Chain) -> DiagonalOp {
    let past = chain.past_len(t);
    let kind = if outcomes.len() == past && outcomes.iter().all(|&k| k <= 1) {
        DiagonalKind::Pattern {
            outcomes: outcomes.to_vec(),
        }
    } else {
        DiagonalKind::Zero
    };
    DiagonalOp {
        events: chain.len(),
        past,
        kind,
    }
}

/// `Pi^empty_t`, `Pi^0_t` or `Pi^1_t` evaluated on `chain`.
pub fn class_projector_eval(class: ObservationClass, t: f64, chain: &Chain) -> DiagonalOp {
    match class.pattern(chain.past_len(t)) {
        Some(outcomes) => projector_eval(&outcomes, t, chain),
        None => DiagonalOp {
            events: chain.len(),
            past: chain.past_len(t),
            kind: DiagonalKind::Zero,
        },
    }
}

/// Observables the expectation engines understand.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// `N^0_t` or `N^1_t`.
    Number(u8),
    /// `Pi^empty_t`, `Pi^0_t`, `Pi^1_t`.
    Class(ObservationClass),
    /// `Pi^empty + Pi^0 + Pi^1`.
    PossibleObservations,
    Identity,
    /// Atom property `X (x) I` for Hermitian 2x2 `X`.
    System(ComplexMatrix),
}

impl Observable {
    pub const NAMES: [&'static str; 5] = ["N0", "N1", "Pi_empty", "Pi_0", "Pi_1"];

    pub fn system(x: ComplexMatrix) -> Result<Self> {
        if x.shape() != (2, 2) {
            return Err(Error::InvalidShape(format!(
                "atom property must be 2x2, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        x.require_hermitian(1e-12)?;
        Ok(Observable::System(x))
    }

    /// `<v| B(chain) |v>` for a chain vector with the atom factor.
    pub fn evaluate(&self, v: &ChainVector, t: f64) -> Result<f64> {
        if v.atom_dim() != 2 {
            return Err(Error::InvalidShape(
                "observables need the atom factor".into(),
            ));
        }
        let chain = v.chain();
        let diag = match self {
            Observable::Number(k) => Some(number_operator_eval(*k, t, chain)?),
            Observable::Class(class) => Some(class_projector_eval(*class, t, chain)),
            _ => None,
        };
        if let Some(op) = diag {
            return Ok(v
                .terms()
                .map(|(l, a)| a.norm_sqr() * op.value(&l.fibers))
                .sum());
        }
        match self {
            Observable::PossibleObservations => ObservationClass::ALL
                .iter()
                .map(|&c| Observable::Class(c).evaluate(v, t))
                .sum(),
            Observable::Identity => Ok(v.norm_sqr()),
            Observable::System(x) => {
                // sum over fibers of <v_f| X |v_f>, v_f the atom slice at fibers f
                let mut total = ZERO;
                for (l, a) in v.terms() {
                    for b in 0..2u8 {
                        let other = crate::chainspace::vector::BasisLabel {
                            atom: b,
                            fibers: l.fibers.clone(),
                        };
                        let amp = v.amplitude(&other);
                        if amp != ZERO {
                            total += a.conj() * x.get(l.atom as usize, b as usize) * amp;
                        }
                    }
                }
                Ok(total.re)
            }
            Observable::Number(_) | Observable::Class(_) => unreachable!(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Observable::Number(k) => format!("N{k}"),
            Observable::Class(ObservationClass::Empty) => "Pi_empty".into(),
            Observable::Class(ObservationClass::AllZero) => "Pi_0".into(),
            Observable::Class(ObservationClass::FirstOne) => "Pi_1".into(),
            Observable::PossibleObservations => "Pi_sum".into(),
            Observable::Identity => "I".into(),
            Observable::System(_) => "X".into(),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "N0" => Observable::Number(0),
            "N1" => Observable::Number(1),
            "Pi_empty" => Observable::Class(ObservationClass::Empty),
            "Pi_0" => Observable::Class(ObservationClass::AllZero),
            "Pi_1" => Observable::Class(ObservationClass::FirstOne),
            "Pi_sum" => Observable::PossibleObservations,
            "I" => Observable::Identity,
            other => return Err(Error::UnknownObservable(other.to_string())),
        })
    }
}
