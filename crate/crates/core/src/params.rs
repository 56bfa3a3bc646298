//! Run parameters shared by every construction.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::graphs::MAX_VERTICES;

/// Default cap on the number of objects any enumeration may produce.
pub const DEFAULT_CAP: u64 = 100_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Enforces `2 < ell < p < k < m`.
    Strict,
    /// Only asks for `2 <= ell`, `2 <= p`, `2 <= k <= m`.
    #[default]
    Relaxed,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "strict" => Ok(Mode::Strict),
            "relaxed" => Ok(Mode::Relaxed),
            other => Err(Error::InvalidParams(format!(
                "unknown mode `{other}` (strict|relaxed)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Relaxed => "relaxed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub m: u32,
    pub k: usize,
    pub ell: usize,
    pub p: usize,
    /// The plucking threshold `L`.
    pub threshold: BigUint,
    pub mode: Mode,
    /// Largest number of objects an enumeration may produce.
    pub cap: u64,
}

impl Params {
    /// Relaxed-mode parameters with `L = (p-1)^ell * ell!`.
    pub fn new(m: u32, k: usize, ell: usize, p: usize) -> Result<Params> {
        let params = Params {
            m,
            k,
            ell,
            p,
            threshold: bounds::erdos_rado_threshold(p as u64, ell as u64),
            mode: Mode::Relaxed,
            cap: DEFAULT_CAP,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters for enumeration-only work, where ell, p and L are irrelevant.
    pub fn desk(m: u32, k: usize) -> Result<Params> {
        let params = Params {
            m,
            k,
            ell: 2,
            p: 2,
            threshold: BigUint::one(),
            mode: Mode::Relaxed,
            cap: DEFAULT_CAP,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_threshold(mut self, threshold: BigUint) -> Result<Params> {
        self.threshold = threshold;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: Mode) -> Result<Params> {
        self.mode = mode;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cap(mut self, cap: u64) -> Params {
        self.cap = cap;
        self
    }

    pub fn n(&self) -> usize {
        (self.m as usize) * (self.m as usize).saturating_sub(1) / 2
    }

    pub fn strict_chain_holds(&self) -> bool {
        2 < self.ell && self.ell < self.p && self.p < self.k && self.k < self.m as usize
    }

    /// Whether the asymptotic deviation bounds are meant to apply: `k = ell^2`
    /// together with the strict chain.
    pub fn bound_applicable(&self) -> bool {
        self.k == self.ell * self.ell && self.strict_chain_holds()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > MAX_VERTICES {
            return Err(Error::InvalidParams(format!(
                "m = {} exceeds the supported universe of {MAX_VERTICES} vertices",
                self.m
            )));
        }
        if self.threshold < BigUint::one() {
            return Err(Error::InvalidParams("L must be at least 1".into()));
        }
        match self.mode {
            Mode::Strict => {
                if !self.strict_chain_holds() {
                    return Err(Error::InvalidParams(format!(
                        "strict mode needs 2 < ell < p < k < m, got ell={} p={} k={} m={}",
                        self.ell, self.p, self.k, self.m
                    )));
                }
            }
            Mode::Relaxed => {
                if self.ell < 2 || self.p < 2 || self.k < 2 || self.k > self.m as usize {
                    return Err(Error::InvalidParams(format!(
                        "relaxed mode needs ell >= 2, p >= 2, 2 <= k <= m, got ell={} p={} k={} m={}",
                        self.ell, self.p, self.k, self.m
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} k={} ell={} p={} L={} mode={}",
            self.m, self.k, self.ell, self.p, self.threshold, self.mode
        )
    }
}
