//! Drive and detuning profiles and their definite integrals.
//!
//! All quantities are in reduced units (hbar = 1): frequencies and times are
//! dimensionless. The pulse area over an interval is the integrated Rabi
//! frequency Omega' and the detuning integral is Delta'.

use libm::erf;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Absolute tolerance for quadrature-based pulse areas.
pub const AREA_QUAD_TOL: f64 = 1e-12;

/// Time-dependent Rabi drive Omega(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseProfile {
    /// Omega(t) = omega0 * exp(-(t - tau)^2 / sigma^2).
    Gaussian { omega0: f64, tau: f64, sigma: f64 },
    Constant { omega0: f64 },
    Zero,
    /// Sign-alternating drive (-1)^n * inner(t) with n = floor(t / period).
    DynamicallyDecoupled {
        inner: Box<PulseProfile>,
        period: f64,
    },
}

impl PulseProfile {
    /// Check the structural invariants (positive widths, finite parameters).
    pub fn validate(&self) -> Result<()> {
        match self {
            PulseProfile::Gaussian { omega0, tau, sigma } => {
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(Error::Domain(format!(
                        "gaussian pulse requires sigma > 0, got {sigma}"
                    )));
                }
                if !omega0.is_finite() || !tau.is_finite() {
                    return Err(Error::Domain("gaussian pulse parameters must be finite".into()));
                }
                Ok(())
            }
            PulseProfile::Constant { omega0 } => {
                if !omega0.is_finite() {
                    return Err(Error::Domain("constant pulse amplitude must be finite".into()));
                }
                Ok(())
            }
            PulseProfile::Zero => Ok(()),
            PulseProfile::DynamicallyDecoupled { inner, period } => {
                if !period.is_finite() || *period <= 0.0 {
                    return Err(Error::Domain(format!(
                        "dynamical decoupling requires period > 0, got {period}"
                    )));
                }
                inner.validate()
            }
        }
    }

    /// Instantaneous amplitude Omega(t).
    pub fn amplitude(&self, t: f64) -> f64 {
        match self {
            PulseProfile::Gaussian { omega0, tau, sigma } => {
                let x = (t - tau) / sigma;
                omega0 * (-x * x).exp()
            }
            PulseProfile::Constant { omega0 } => *omega0,
            PulseProfile::Zero => 0.0,
            PulseProfile::DynamicallyDecoupled { inner, period } => {
                let n = (t / period).floor() as i64;
                let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                sign * inner.amplitude(t)
            }
        }
    }

    /// Pulse area Omega' = integral of Omega over [t0, t1].
    ///
    /// The Gaussian variant uses the erf closed form; other variants fall
    /// back to adaptive quadrature at 1e-12 absolute tolerance, with the
    /// sign-alternating drive integrated piecewise between sign flips.
    pub fn area(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0 > t1 {
            return Err(Error::Domain(format!(
                "pulse area interval inverted: [{t0}, {t1}]"
            )));
        }
        Ok(match self {
            PulseProfile::Gaussian { omega0, tau, sigma } => {
                let half_sqrt_pi = 0.5 * std::f64::consts::PI.sqrt();
                omega0 * sigma * half_sqrt_pi * (erf((t1 - tau) / sigma) - erf((t0 - tau) / sigma))
            }
            PulseProfile::Zero => 0.0,
            PulseProfile::Constant { .. } => {
                adaptive_simpson(&|t| self.amplitude(t), t0, t1, AREA_QUAD_TOL)
            }
            PulseProfile::DynamicallyDecoupled { inner, period } => {
                let mut total = 0.0;
                let mut n = (t0 / period).floor() as i64;
                let mut a = t0;
                loop {
                    let seg_end = ((n + 1) as f64 * period).min(t1);
                    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    total += sign * inner.area(a, seg_end)?;
                    if seg_end >= t1 {
                        break;
                    }
                    a = seg_end;
                    n += 1;
                }
                total
            }
        })
    }
}

/// Constant laser detuning Delta = omega_L - omega_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DetuningSpec {
    pub delta: f64,
}

impl DetuningSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Domain(format!("detuning must be finite, got {delta}")));
        }
        Ok(Self { delta })
    }

    /// Delta' = integral of Delta over [t0, t1].
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0 > t1 {
            return Err(Error::Domain(format!(
                "detuning integral interval inverted: [{t0}, {t1}]"
            )));
        }
        Ok(self.delta * (t1 - t0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn reference_pulse() -> PulseProfile {
        PulseProfile::Gaussian {
            omega0: 1.0,
            tau: 5.0,
            sigma: 1.0,
        }
    }

    #[test]
    fn gaussian_peak_amplitude() {
        assert_eq!(reference_pulse().amplitude(5.0), 1.0);
    }

    #[test]
    fn zero_pulse() {
        assert_eq!(PulseProfile::Zero.amplitude(3.7), 0.0);
        assert_eq!(PulseProfile::Zero.area(-4.0, 9.0).unwrap(), 0.0);
    }

    #[test]
    fn decoupled_sign_flip() {
        let p = PulseProfile::DynamicallyDecoupled {
            inner: Box::new(PulseProfile::Constant { omega0: 1.0 }),
            period: 1.0,
        };
        assert_eq!(p.amplitude(0.5), 1.0);
        assert_eq!(p.amplitude(1.5), -1.0);
        assert_eq!(p.amplitude(2.5), 1.0);
    }

    #[test]
    fn gaussian_area_is_sqrt_pi() {
        // The exact value is sqrt(pi) * erf(5), about 2.7e-12 below sqrt(pi).
        let a = reference_pulse().area(0.0, 10.0).unwrap();
        assert_abs_diff_eq!(a, PI.sqrt(), epsilon = 5e-12);
        assert_abs_diff_eq!(a, 1.7724539, epsilon = 1e-7);
    }

    #[test]
    fn gaussian_area_matches_composite_simpson() {
        // Independent cross-check of the erf closed form.
        let p = reference_pulse();
        let n = 1_000_000usize;
        let (a, b) = (0.0f64, 10.0f64);
        let h = (b - a) / n as f64;
        let mut sum = p.amplitude(a) + p.amplitude(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * p.amplitude(a + i as f64 * h);
        }
        let simpson = sum * h / 3.0;
        assert_abs_diff_eq!(p.area(a, b).unwrap(), simpson, epsilon = 1e-12);
    }

    #[test]
    fn constant_area() {
        let p = PulseProfile::Constant { omega0: 2.0 };
        assert_abs_diff_eq!(p.area(0.0, PI / 4.0).unwrap(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn decoupled_full_periods_cancel() {
        let p = PulseProfile::DynamicallyDecoupled {
            inner: Box::new(PulseProfile::Constant { omega0: 1.3 }),
            period: 0.7,
        };
        for k in 1..=4 {
            let t1 = 2.0 * k as f64 * 0.7;
            assert_abs_diff_eq!(p.area(0.0, t1).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverted_interval_is_domain_error() {
        assert!(matches!(
            reference_pulse().area(5.0, 1.0),
            Err(Error::Domain(_))
        ));
        let d = DetuningSpec::new(1.0).unwrap();
        assert!(matches!(d.integral(2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn detuning_integrals() {
        assert_eq!(DetuningSpec::new(0.0).unwrap().integral(0.0, 10.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            DetuningSpec::new(0.5).unwrap().integral(0.0, 4.0).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert_eq!(DetuningSpec::new(1.0).unwrap().integral(3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn validation_rejects_bad_widths() {
        let p = PulseProfile::Gaussian {
            omega0: 1.0,
            tau: 0.0,
            sigma: 0.0,
        };
        assert!(p.validate().is_err());
        let p = PulseProfile::DynamicallyDecoupled {
            inner: Box::new(PulseProfile::Zero),
            period: -1.0,
        };
        assert!(p.validate().is_err());
    }
}
