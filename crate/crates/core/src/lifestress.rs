//! Life-stress relationships expressed as a linear basis expansion of the
//! log-lifetime location, `mu(s) = beta . g(s)`.
//!
//! The single-regressor empirical models (thermochemical, Arrhenius, power
//! law, exponential-sqrt) all reduce to an intercept plus one transformed
//! stress term; polynomial bases cover purely empirical fits.

use crate::error::{Error, Result};

/// Functional form of the transformed stress regressor(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StressBasis {
    /// `mu = b0 + b1 * s` (thermochemical model in reduced form).
    Identity,
    /// `mu = b0 + b1 / s` (Arrhenius model).
    Reciprocal,
    /// `mu = b0 + b1 * ln(s)` (power law model).
    Log,
    /// `mu = b0 + b1 * sqrt(s)` (exponential-sqrt model).
    Sqrt,
    /// `mu = b0 + b1*s + ... + bd*s^d`, degree >= 1.
    Polynomial(u32),
}

impl StressBasis {
    /// Number of coefficients, intercept included.
    pub fn dimension(&self) -> usize {
        match self {
            StressBasis::Polynomial(d) => *d as usize + 1,
            _ => 2,
        }
    }

    /// True when the transform is undefined for s <= 0.
    pub fn requires_positive_stress(&self) -> bool {
        matches!(self, StressBasis::Reciprocal | StressBasis::Log)
    }

    /// Configuration-file name: "identity", "reciprocal", "log", "sqrt",
    /// "poly:<degree>".
    pub fn name(&self) -> String {
        match self {
            StressBasis::Identity => "identity".into(),
            StressBasis::Reciprocal => "reciprocal".into(),
            StressBasis::Log => "log".into(),
            StressBasis::Sqrt => "sqrt".into(),
            StressBasis::Polynomial(d) => format!("poly:{d}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(StressBasis::Identity),
            "reciprocal" => Ok(StressBasis::Reciprocal),
            "log" => Ok(StressBasis::Log),
            "sqrt" => Ok(StressBasis::Sqrt),
            _ => {
                if let Some(deg) = s.strip_prefix("poly:") {
                    let d: u32 = deg.parse().map_err(|_| {
                        Error::Parse(format!("invalid polynomial degree in basis name {s:?}"))
                    })?;
                    if d == 0 {
                        return Err(Error::Parse("polynomial degree must be >= 1".into()));
                    }
                    Ok(StressBasis::Polynomial(d))
                } else {
                    Err(Error::Parse(format!(
                        "unknown basis {s:?}; expected identity, reciprocal, log, sqrt or poly:<degree>"
                    )))
                }
            }
        }
    }
}

/// A stress-to-location mapping together with the admissible stress interval.
///
/// The domain is explicit so that optimizer bounds and the model domain can be
/// validated against each other once, at configuration time.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeStressModel {
    basis: StressBasis,
    stress_domain: (f64, f64),
}

impl LifeStressModel {
    pub fn new(basis: StressBasis, lo: f64, hi: f64) -> Result<Self> {
        if let StressBasis::Polynomial(d) = basis {
            if d == 0 {
                return Err(Error::InvalidArgument(
                    "polynomial degree must be >= 1".into(),
                ));
            }
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "stress domain [{lo}, {hi}] must be a finite non-empty interval"
            )));
        }
        if basis.requires_positive_stress() && lo <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{} basis requires a strictly positive stress domain, got lower bound {lo}",
                basis.name()
            )));
        }
        Ok(Self {
            basis,
            stress_domain: (lo, hi),
        })
    }

    pub fn basis(&self) -> StressBasis {
        self.basis
    }

    pub fn stress_domain(&self) -> (f64, f64) {
        self.stress_domain
    }

    pub fn basis_dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn check_stress(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.stress_domain;
        if !s.is_finite() || s < lo || s > hi {
            return Err(Error::StressOutOfDomain {
                basis: self.basis.name(),
                value: s,
                lo,
                hi,
            });
        }
        Ok(())
    }

    /// Writes `(1, g(s), ...)` into `out`; `out.len()` must equal the basis
    /// dimension. Allocation-free variant for hot loops.
    pub fn basis_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        self.check_stress(s)?;
        if out.len() != self.basis_dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.basis_dimension(),
                got: out.len(),
            });
        }
        out[0] = 1.0;
        match self.basis {
            StressBasis::Identity => out[1] = s,
            StressBasis::Reciprocal => out[1] = 1.0 / s,
            StressBasis::Log => out[1] = s.ln(),
            StressBasis::Sqrt => out[1] = s.sqrt(),
            StressBasis::Polynomial(_) => {
                let mut p = 1.0;
                for slot in out.iter_mut().skip(1) {
                    p *= s;
                    *slot = p;
                }
            }
        }
        Ok(())
    }

    /// Returns `(1, g(s), ...)` of length `basis_dimension`.
    pub fn basis_vector(&self, s: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.basis_dimension()];
        self.basis_into(s, &mut out)?;
        Ok(out)
    }

    /// Location `mu(s) = beta . basis_vector(s)`.
    pub fn location(&self, beta: &[f64], s: f64) -> Result<f64> {
        if beta.len() != self.basis_dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.basis_dimension(),
                got: beta.len(),
            });
        }
        let x = self.basis_vector(s)?;
        Ok(x.iter().zip(beta).map(|(a, b)| a * b).sum())
    }
}
