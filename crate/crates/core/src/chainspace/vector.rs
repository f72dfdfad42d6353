//! Evaluations of Fock-space vectors on a fixed chain.
//!
//! A chain vector `phi(chain)` lives in `h (x) k(t_n) (x) ... (x) k(t_1)`:
//! the atom factor is slowest, then apparatus fibers from the latest event
//! down to the earliest. Vectors are stored sparsely by basis label; the
//! dense layout is only materialised on request.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::chain::Chain;
use crate::atom::{build_dilation, AtomParams};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, Ket, ZERO};

/// Largest chain that [`ChainVector::to_dense`] will expand.
pub const MAX_DENSE_EVENTS: usize = 20;

/// Basis label: atom index plus one apparatus value per event.
/// `fibers[i]` belongs to the `i`-th earliest event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub atom: u8,
    pub fibers: Vec<u8>,
}

impl BasisLabel {
    /// Position in the dense layout (earliest event is the fastest bit).
    pub fn dense_index(&self) -> usize {
        let apparatus = self
            .fibers
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &k)| acc | ((k as usize) << i));
        ((self.atom as usize) << self.fibers.len()) | apparatus
    }

    pub fn from_dense_index(index: usize, events: usize) -> Self {
        Self {
            atom: (index >> events) as u8,
            fibers: (0..events).map(|i| ((index >> i) & 1) as u8).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainVector {
    chain: Chain,
    atom_dim: usize,
    terms: BTreeMap<BasisLabel, Complex64>,
}

impl ChainVector {
    /// `atom_dim` is 1 for apparatus-only vectors and 2 with the atom factor.
    pub fn from_terms(
        chain: Chain,
        atom_dim: usize,
        terms: impl IntoIterator<Item = (BasisLabel, Complex64)>,
    ) -> Result<Self> {
        if atom_dim != 1 && atom_dim != 2 {
            return Err(Error::InvalidShape(format!(
                "atom dimension {atom_dim} not in {{1, 2}}"
            )));
        }
        let mut map = BTreeMap::new();
        for (label, amp) in terms {
            if label.fibers.len() != chain.len()
                || label.atom as usize >= atom_dim
                || label.fibers.iter().any(|&k| k > 1)
            {
                return Err(Error::InvalidShape(format!(
                    "label {label:?} does not fit a {atom_dim} x 2^{} tensor",
                    chain.len()
                )));
            }
            *map.entry(label).or_insert(ZERO) += amp;
        }
        map.retain(|_, a| *a != ZERO);
        Ok(Self {
            chain,
            atom_dim,
            terms: map,
        })
    }

    /// Dense coefficients of shape `atom_dim x 2^|chain|`, row-major.
    pub fn from_dense(chain: Chain, atom_dim: usize, data: &[Complex64]) -> Result<Self> {
        let n = chain.len();
        if data.len() != atom_dim << n {
            return Err(Error::InvalidShape(format!(
                "dense tensor needs {} entries, got {}",
                atom_dim << n,
                data.len()
            )));
        }
        let terms = data
            .iter()
            .enumerate()
            .map(|(i, &a)| (BasisLabel::from_dense_index(i, n), a));
        Self::from_terms(chain, atom_dim, terms)
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn atom_dim(&self) -> usize {
        self.atom_dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.terms.get(label).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let n = self.chain.len();
        if n > MAX_DENSE_EVENTS {
            return Err(Error::InvalidShape(format!(
                "refusing to expand a {n}-event chain vector densely"
            )));
        }
        let mut out = vec![ZERO; self.atom_dim << n];
        for (label, amp) in &self.terms {
            out[label.dense_index()] = *amp;
        }
        Ok(out)
    }

    /// `|atom> (x) self` for an apparatus-only vector.
    pub fn with_atom(&self, atom: &Ket) -> Result<ChainVector> {
        if self.atom_dim != 1 || atom.dim() != 2 {
            return Err(Error::InvalidShape(
                "with_atom expects an apparatus-only vector and a qubit ket".into(),
            ));
        }
        let terms = self.terms.iter().flat_map(|(label, amp)| {
            atom.amplitudes().iter().enumerate().map(move |(a, &x)| {
                (
                    BasisLabel {
                        atom: a as u8,
                        fibers: label.fibers.clone(),
                    },
                    x * amp,
                )
            })
        });
        ChainVector::from_terms(self.chain.clone(), 2, terms)
    }

    pub fn scale(&self, s: Complex64) -> ChainVector {
        let mut out = self.clone();
        for amp in out.terms.values_mut() {
            *amp *= s;
        }
        out.terms.retain(|_, a| *a != ZERO);
        out
    }

    /// Largest amplitude difference over the union of supports; infinite if
    /// the chains or shapes differ.
    pub fn max_abs_diff(&self, other: &ChainVector) -> f64 {
        if self.chain != other.chain || self.atom_dim != other.atom_dim {
            return f64::INFINITY;
        }
        self.terms
            .keys()
            .chain(other.terms.keys())
            .map(|l| (self.amplitude(l) - other.amplitude(l)).norm())
            .fold(0.0, f64::max)
    }
}

/// Coherent-state parameters: rate `nu` on `[0, r)`, fiber state `|0>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentParams {
    pub nu: f64,
    pub r: f64,
}

impl CoherentParams {
    pub fn from_atom(p: &AtomParams) -> Self {
        Self {
            nu: p.nu(),
            r: p.r(),
        }
    }

    /// `|Phi(chain)|^2 = nu^n e^{-nu r}` for an `n`-event chain.
    pub fn weight(&self, n: usize) -> f64 {
        (n as f64 * self.nu.ln() - self.nu * self.r).exp()
    }
}

/// `Phi(chain) = sqrt(nu)^n e^{-nu r / 2} |0>^(x)n` (apparatus only).
pub fn coherent_eval(p: &CoherentParams, chain: &Chain) -> ChainVector {
    let n = chain.len();
    let amp = (0.5 * (n as f64 * p.nu.ln() - p.nu * p.r)).exp();
    let label = BasisLabel {
        atom: 0,
        fibers: vec![0; n],
    };
    ChainVector::from_terms(chain.clone(), 1, [(label, Complex64::new(amp, 0.0))])
        .expect("coherent label fits")
}

/// Adapted semi-tensor product operator: at every event `z < t` a 4x4
/// block (atom (x) fiber(z)) is applied, earliest event first; events at or
/// after `t` are left alone.
pub struct AdaptedOperator<F>
where
    F: Fn(f64) -> ComplexMatrix,
{
    t: f64,
    block: F,
}

impl<F> AdaptedOperator<F>
where
    F: Fn(f64) -> ComplexMatrix,
{
    pub fn new(t: f64, block: F) -> Self {
        Self { t, block }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn apply(&self, v: &ChainVector) -> Result<ChainVector> {
        if v.atom_dim != 2 {
            return Err(Error::InvalidShape(
                "adapted operators act on vectors with the atom factor".into(),
            ));
        }
        let past = v.chain.past_len(self.t);
        let mut terms = v.terms.clone();
        for (i, &z) in v.chain.times()[..past].iter().enumerate() {
            let block = (self.block)(z);
            if block.shape() != (4, 4) {
                return Err(Error::InvalidShape(format!(
                    "block at event {z} is {}x{}, expected 4x4",
                    block.rows(),
                    block.cols()
                )));
            }
            terms = apply_local(&block, i, &terms);
        }
        ChainVector::from_terms(v.chain.clone(), 2, terms)
    }

    /// Dense matrix of the operator on `chain` (small chains only).
    pub fn to_dense(&self, chain: &Chain) -> Result<ComplexMatrix> {
        let n = chain.len();
        if n > 10 {
            return Err(Error::InvalidShape(format!(
                "{n} events is too many for a dense operator"
            )));
        }
        let mut out = ComplexMatrix::identity(2 << n);
        for (i, &z) in chain.times()[..chain.past_len(self.t)].iter().enumerate() {
            out = &embed_local(&(self.block)(z), i, n)? * &out;
        }
        Ok(out)
    }
}

/// `semi_tensor_apply(block, t, v)`: applies the adapted product of `block`
/// over the events of `v`'s chain before `t`.
pub fn semi_tensor_apply(
    block: impl Fn(f64) -> ComplexMatrix,
    t: f64,
    v: &ChainVector,
) -> Result<ChainVector> {
    AdaptedOperator::new(t, block).apply(v)
}

fn apply_local(
    block: &ComplexMatrix,
    event: usize,
    terms: &BTreeMap<BasisLabel, Complex64>,
) -> BTreeMap<BasisLabel, Complex64> {
    let mut out = BTreeMap::new();
    for (label, &amp) in terms {
        let input = 2 * label.atom as usize + label.fibers[event] as usize;
        for output in 0..4 {
            let coef = block.get(output, input);
            if coef == ZERO {
                continue;
            }
            let mut next = label.clone();
            next.atom = (output / 2) as u8;
            next.fibers[event] = (output % 2) as u8;
            *out.entry(next).or_insert(ZERO) += coef * amp;
        }
    }
    out
}

/// Embeds a 4x4 operator on (atom, fiber of event `event`) into the dense
/// `2 * 2^events` space.
pub fn embed_local(block: &ComplexMatrix, event: usize, events: usize) -> Result<ComplexMatrix> {
    if block.shape() != (4, 4) || event >= events {
        return Err(Error::InvalidShape(format!(
            "cannot embed a {}x{} block at event {event} of {events}",
            block.rows(),
            block.cols()
        )));
    }
    let dim = 2 << events;
    let bit = 1usize << event;
    let atom_bit = 1usize << events;
    let local = |idx: usize| 2 * ((idx & atom_bit != 0) as usize) + ((idx & bit != 0) as usize);
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        let rest = !(bit | atom_bit);
        if i & rest != j & rest {
            ZERO
        } else {
            block.get(local(i), local(j))
        }
    }))
}

/// `Psi_t(chain) = U_t (|psi> (x) Phi)(chain)` via the generic adapted product
/// of the dilation `S(z)`.
pub fn psi_t_eval(p: &AtomParams, t: f64, chain: &Chain) -> Result<ChainVector> {
    check_time(p, t)?;
    check_chain(p, chain)?;
    let start = coherent_eval(&CoherentParams::from_atom(p), chain).with_atom(&p.psi())?;
    semi_tensor_apply(|z| build_dilation(p, z).s, t, &start)
}

/// Closed form of `Psi_t(chain)`: only the first event before `t` acts,
/// leaving `sqrt(nu) F|psi>` on that fiber and `|0>` everywhere else.
pub fn psi_t_closed_form(p: &AtomParams, t: f64, chain: &Chain) -> Result<ChainVector> {
    check_time(p, t)?;
    check_chain(p, chain)?;
    let phi = coherent_eval(&CoherentParams::from_atom(p), chain);
    if chain.past_len(t) == 0 {
        return phi.with_atom(&p.psi());
    }
    let coef = phi.amplitude(&BasisLabel {
        atom: 0,
        fibers: vec![0; chain.len()],
    });
    let u = p.phase(chain.times()[0]);
    let fibers = |first: u8| {
        let mut f = vec![0u8; chain.len()];
        f[0] = first;
        f
    };
    ChainVector::from_terms(
        chain.clone(),
        2,
        [
            (
                BasisLabel {
                    atom: 0,
                    fibers: fibers(0),
                },
                coef * p.alpha(),
            ),
            (
                BasisLabel {
                    atom: 0,
                    fibers: fibers(1),
                },
                coef * u * p.beta(),
            ),
        ],
    )
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

fn check_chain(p: &AtomParams, chain: &Chain) -> Result<()> {
    if chain.horizon() != p.r() {
        return Err(Error::InvalidChain(format!(
            "chain horizon {} differs from experiment horizon {}",
            chain.horizon(),
            p.r()
        )));
    }
    Ok(())
}
