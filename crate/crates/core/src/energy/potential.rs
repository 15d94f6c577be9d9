//! Isotropic pair potentials with closed-form envelopes and integrals.
//!
//! Every built-in form has |phi| non-increasing on all of [0, inf) (so
//! `tail_monotone_from` is 0) and closed forms for interval suprema, signed
//! antiderivatives, and absolutely-weighted tail integrals. An optional hard
//! core makes phi equal +inf strictly below the core radius.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialForm {
    /// `beta * min(1, r^-p)`.
    TruncatedPower { beta: f64, p: f64 },
    /// `beta * exp(-kappa r)`.
    Exponential { beta: f64, kappa: f64 },
    /// `beta * 1[r <= range]`.
    Indicator { beta: f64, range: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    form: PotentialForm,
    hardcore_radius: f64,
}

impl Potential {
    pub fn truncated_power(beta: f64, p: f64) -> Result<Self> {
        if !beta.is_finite() || !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidModel(format!(
                "truncated power needs finite beta and p > 0, got beta={beta}, p={p}"
            )));
        }
        Ok(Self { form: PotentialForm::TruncatedPower { beta, p }, hardcore_radius: 0.0 })
    }

    pub fn exponential(beta: f64, kappa: f64) -> Result<Self> {
        if !beta.is_finite() || !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidModel(format!(
                "exponential needs finite beta and kappa > 0, got beta={beta}, kappa={kappa}"
            )));
        }
        Ok(Self { form: PotentialForm::Exponential { beta, kappa }, hardcore_radius: 0.0 })
    }

    pub fn indicator(beta: f64, range: f64) -> Result<Self> {
        if !beta.is_finite() || !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidModel(format!(
                "indicator needs finite beta and range > 0, got beta={beta}, range={range}"
            )));
        }
        Ok(Self { form: PotentialForm::Indicator { beta, range }, hardcore_radius: 0.0 })
    }

    /// Pure hard core: +inf below `radius`, zero beyond.
    pub fn hardcore(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidModel(format!(
                "hardcore needs radius > 0, got {radius}"
            )));
        }
        Ok(Self {
            form: PotentialForm::Indicator { beta: 0.0, range: radius },
            hardcore_radius: radius,
        })
    }

    /// Adds a hard core below `radius` to this potential.
    pub fn with_hardcore(mut self, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "hardcore radius must be nonnegative, got {radius}"
            )));
        }
        self.hardcore_radius = radius;
        Ok(self)
    }

    pub fn form(&self) -> &PotentialForm {
        &self.form
    }

    pub fn hardcore_radius(&self) -> f64 {
        self.hardcore_radius
    }

    /// Radius beyond which |phi| is non-increasing; 0 for every built-in.
    pub fn tail_monotone_from(&self) -> f64 {
        0.0
    }

    /// Identifier of the closed form used for tail sums of this potential.
    pub fn tail_family(&self) -> &'static str {
        match self.form {
            PotentialForm::TruncatedPower { .. } => "hurwitz_zeta",
            PotentialForm::Exponential { .. } => "geometric_series",
            PotentialForm::Indicator { .. } => "finite_sum",
        }
    }

    /// phi(r); +inf strictly below the hard core.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r < self.hardcore_radius {
            f64::INFINITY
        } else {
            self.tail_eval(r)
        }
    }

    /// The finite part of phi, ignoring the hard core.
    pub fn tail_eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self.form {
            PotentialForm::TruncatedPower { beta, p } => {
                if r <= 1.0 {
                    beta
                } else {
                    beta * r.powf(-p)
                }
            }
            PotentialForm::Exponential { beta, kappa } => beta * (-kappa * r).exp(),
            PotentialForm::Indicator { beta, range } => {
                if r <= range {
                    beta
                } else {
                    0.0
                }
            }
        }
    }

    /// sup of |phi| over `[a, b]`; +inf when the interval meets the hard
    /// core, `|phi(a)|` otherwise by monotonicity.
    pub fn sup_abs_on(&self, a: f64, b: f64) -> f64 {
        debug_assert!(0.0 <= a && a <= b);
        if a < self.hardcore_radius {
            f64::INFINITY
        } else {
            self.tail_eval(a).abs()
        }
    }

    /// True when `sum_l l^(d-1) sup_[l,l+1] |phi|` converges, i.e. the tail
    /// is summable against shell volumes in dimension `dim`.
    pub fn tail_integrable(&self, dim: usize) -> bool {
        match self.form {
            PotentialForm::TruncatedPower { beta, p } => beta == 0.0 || p > dim as f64,
            PotentialForm::Exponential { .. } | PotentialForm::Indicator { .. } => true,
        }
    }

    /// Radius beyond which phi vanishes identically (hard core included),
    /// when such a radius exists.
    pub fn compact_support(&self) -> Option<f64> {
        match self.form {
            PotentialForm::Indicator { range, .. } => Some(range.max(self.hardcore_radius)),
            PotentialForm::TruncatedPower { beta, .. }
            | PotentialForm::Exponential { beta, .. } => {
                if beta == 0.0 && self.hardcore_radius > 0.0 {
                    Some(self.hardcore_radius)
                } else if beta == 0.0 {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self.form {
            PotentialForm::TruncatedPower { beta, .. }
            | PotentialForm::Exponential { beta, .. }
            | PotentialForm::Indicator { beta, .. } => beta >= 0.0,
        }
    }

    /// Signed antiderivative `int_0^t phi(r) dr` of the finite part.
    /// Callers that forbid hard cores must check separately.
    pub fn integral_0_to(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match self.form {
            PotentialForm::TruncatedPower { beta, p } => {
                if t <= 1.0 {
                    beta * t
                } else {
                    // p > 1 is guaranteed by tail-integrability checks in d >= 1.
                    beta * (1.0 + (1.0 - t.powf(1.0 - p)) / (p - 1.0))
                }
            }
            PotentialForm::Exponential { beta, kappa } => beta * (1.0 - (-kappa * t).exp()) / kappa,
            PotentialForm::Indicator { beta, range } => beta * t.min(range),
        }
    }

    /// `int_a^inf r^k |phi(r)| dr` of the finite part, for `k <= 2`.
    /// Finite only when the tail decays fast enough (power: p > k + 1).
    pub fn abs_tail_integral(&self, a: f64, k: usize) -> Result<f64> {
        if !(a.is_finite() && a >= 0.0) || k > 2 {
            return Err(Error::InvalidModel(format!(
                "abs_tail_integral needs a >= 0 and k <= 2, got a={a}, k={k}"
            )));
        }
        let kk = k as f64;
        match self.form {
            PotentialForm::TruncatedPower { beta, p } => {
                if beta == 0.0 {
                    return Ok(0.0);
                }
                if p <= kk + 1.0 {
                    return Err(Error::InvalidModel(format!(
                        "power tail integral diverges: p={p} <= k+1={}",
                        kk + 1.0
                    )));
                }
                let tail_from = |x: f64| x.powf(kk + 1.0 - p) / (p - kk - 1.0);
                let v = if a < 1.0 {
                    (1.0 - a.powf(kk + 1.0)) / (kk + 1.0) + tail_from(1.0)
                } else {
                    tail_from(a)
                };
                Ok(beta.abs() * v)
            }
            PotentialForm::Exponential { beta, kappa } => {
                let e = (-kappa * a).exp();
                let v = match k {
                    0 => e / kappa,
                    1 => e * (a / kappa + 1.0 / (kappa * kappa)),
                    _ => e * (a * a / kappa + 2.0 * a / (kappa * kappa) + 2.0 / kappa.powi(3)),
                };
                Ok(beta.abs() * v)
            }
            PotentialForm::Indicator { beta, range } => {
                if a >= range {
                    Ok(0.0)
                } else {
                    Ok(beta.abs() * (range.powf(kk + 1.0) - a.powf(kk + 1.0)) / (kk + 1.0))
                }
            }
        }
    }

    /// Short human-readable description for manifests.
    pub fn describe(&self) -> String {
        let base = match self.form {
            PotentialForm::TruncatedPower { beta, p } => {
                format!("truncated_power beta={beta} p={p}")
            }
            PotentialForm::Exponential { beta, kappa } => {
                format!("exponential beta={beta} kappa={kappa}")
            }
            PotentialForm::Indicator { beta, range } => {
                format!("indicator beta={beta} range={range}")
            }
        };
        if self.hardcore_radius > 0.0 {
            format!("{base} hardcore={}", self.hardcore_radius)
        } else {
            base
        }
    }
}
