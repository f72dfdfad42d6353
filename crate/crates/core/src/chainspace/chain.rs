use crate::error::{Error, Result};

/// Finite, strictly increasing set of event times inside `[0, horizon)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    times: Vec<f64>,
    horizon: f64,
}

impl Chain {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidChain(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        for (i, &z) in times.iter().enumerate() {
            if !(z.is_finite() && (0.0..horizon).contains(&z)) {
                return Err(Error::InvalidChain(format!(
                    "event time {z} outside [0, {horizon})"
                )));
            }
            if i > 0 && times[i - 1] >= z {
                return Err(Error::InvalidChain(format!(
                    "event times must be strictly increasing: {} then {z}",
                    times[i - 1]
                )));
            }
        }
        Ok(Self { times, horizon })
    }

    pub fn empty(horizon: f64) -> Self {
        Self {
            times: Vec::new(),
            horizon,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn first(&self) -> Option<f64> {
        self.times.first().copied()
    }

    /// Number of events strictly before `t`.
    pub fn past_len(&self, t: f64) -> usize {
        self.times.partition_point(|&z| z < t)
    }

    /// `(chain ∩ [0, t), chain ∩ [t, horizon))`.
    pub fn split(&self, t: f64) -> Result<(Chain, Chain)> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::InvalidChain(format!(
                "split time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let k = self.past_len(t);
        Ok((
            Chain {
                times: self.times[..k].to_vec(),
                horizon: self.horizon,
            },
            Chain {
                times: self.times[k..].to_vec(),
                horizon: self.horizon,
            },
        ))
    }

    /// Concatenation of a past and a future part of the same horizon.
    pub fn join(past: &Chain, future: &Chain) -> Result<Chain> {
        let mut times = past.times.clone();
        times.extend_from_slice(&future.times);
        Chain::new(times, past.horizon)
    }
}

/// Future-past decomposition of a chain at time `t`.
pub fn chain_split(chain: &Chain, t: f64) -> Result<(Chain, Chain)> {
    chain.split(t)
}
