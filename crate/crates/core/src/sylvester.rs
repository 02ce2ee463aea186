//! Analytic propagators for the coherence-vector equation of motion.
//!
//! When the coefficient matrix commutes with itself at different times the
//! solution is exp(G) with G the elementwise integral of g. The exponential
//! is evaluated with Sylvester's eigenvalue formula; a scaling-and-squaring
//! series is kept as a fallback for (near-)degenerate spectra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::{BlochSystem, CoherenceVector};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Eigenvalue gaps at or below this trigger the series fallback.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Default tolerance on the sampled commutator residual for the analytic path.
pub const COMMUTATIVITY_TOL: f64 = 1e-8;

/// Elementwise integral G of the coefficient matrix over an interval,
/// together with an empirical commutativity diagnostic.
#[derive(Debug, Clone)]
pub struct IntegratedCoefficient {
    pub matrix: DMatrix<f64>,
    pub interval: (f64, f64),
    /// Max entry of [g(t_a), g(t_b)] over a 16-point sample grid.
    pub commutativity_residual: f64,
}

impl IntegratedCoefficient {
    pub fn antisymmetry_residual(&self) -> f64 {
        (&self.matrix + self.matrix.transpose())
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }
}

/// Integrate g elementwise over [t0, t1] (adaptive quadrature, 1e-12
/// absolute per entry) and sample the commutator residual on a 16-point grid.
pub fn integrate_coefficient<G>(gfun: &G, t0: f64, t1: f64) -> Result<IntegratedCoefficient>
where
    G: Fn(f64) -> DMatrix<f64>,
{
    if t0 > t1 {
        return Err(Error::Domain(format!(
            "coefficient integral interval inverted: [{t0}, {t1}]"
        )));
    }
    let probe = gfun(t0);
    let d = probe.nrows();
    let mut g_int = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g_int[(i, j)] = adaptive_simpson(&|t| gfun(t)[(i, j)], t0, t1, 1e-12);
        }
    }

    let mut residual = 0.0f64;
    if t1 > t0 {
        let samples: Vec<DMatrix<f64>> = (0..16)
            .map(|k| gfun(t0 + (t1 - t0) * (k as f64 + 0.5) / 16.0))
            .collect();
        for a in 0..16 {
            for b in (a + 1)..16 {
                let comm = &samples[a] * &samples[b] - &samples[b] * &samples[a];
                residual = residual.max(comm.iter().map(|x| x.abs()).fold(0.0, f64::max));
            }
        }
    }
    Ok(IntegratedCoefficient {
        matrix: g_int,
        interval: (t0, t1),
        commutativity_residual: residual,
    })
}

/// Eigenvalues {0, -i zeta, +i zeta} of the two-level coefficient matrix,
/// with zeta = sqrt(Delta'^2 + Omega'^2). The flag marks the degenerate
/// zeta ~ 0 case.
pub fn eigenvalues_two_level(delta_p: f64, omega_p: f64) -> ([Complex64; 3], bool) {
    let zeta = delta_p.hypot(omega_p);
    (
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -zeta),
            Complex64::new(0.0, zeta),
        ],
        zeta < DEGENERACY_TOL,
    )
}

/// The superevolution matrix exp(G) with its spectrum.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// sqrt(Delta'^2 + Omega'^2) for the two-level case.
    pub zeta: Option<f64>,
    /// Set when the Sylvester path was abandoned for a degenerate spectrum.
    pub diagnostic: Option<&'static str>,
}

impl Propagator {
    pub fn apply(&self, s: &CoherenceVector) -> Result<CoherenceVector> {
        if s.as_vector().len() != self.matrix.ncols() {
            return Err(Error::Domain(format!(
                "propagator is {}x{}, state has {} components",
                self.matrix.nrows(),
                self.matrix.ncols(),
                s.as_vector().len()
            )));
        }
        CoherenceVector::new(s.dim(), &self.matrix * s.as_vector())
    }

    /// Max entry of R^T R - I.
    pub fn orthogonality_residual(&self) -> f64 {
        let d = self.matrix.ncols();
        (self.matrix.transpose() * &self.matrix - DMatrix::identity(d, d))
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().lu().determinant()
    }
}

/// exp(G) by Sylvester's formula: sum_j e^{lambda_j} prod_{k != j}
/// (G - lambda_k I) / (lambda_j - lambda_k). Falls back to a
/// scaling-and-squaring series when the spectrum is (near-)degenerate.
pub fn sylvester_expm(g: &DMatrix<f64>) -> Result<Propagator> {
    if g.nrows() != g.ncols() {
        return Err(Error::Domain("matrix exponential requires a square matrix".into()));
    }
    let d = g.nrows();
    let eigenvalues: Vec<Complex64> = g.complex_eigenvalues().iter().copied().collect();

    let mut min_gap = f64::INFINITY;
    for i in 0..d {
        for j in (i + 1)..d {
            min_gap = min_gap.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }

    if min_gap <= DEGENERACY_TOL {
        let max_entry = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let matrix = if max_entry < DEGENERACY_TOL {
            DMatrix::identity(d, d)
        } else {
            expm_series(g)
        };
        return Ok(Propagator {
            matrix,
            eigenvalues,
            zeta: None,
            diagnostic: Some("sylvester-degenerate"),
        });
    }

    let gc = g.map(|x| Complex64::new(x, 0.0));
    let identity = DMatrix::<Complex64>::identity(d, d);
    let mut sum = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        let mut term = identity.clone();
        for (k, &lk) in eigenvalues.iter().enumerate() {
            if k == j {
                continue;
            }
            term *= (&gc - &identity * lk) / (eigenvalues[j] - lk);
        }
        sum += term * eigenvalues[j].exp();
    }

    let imag_residual = sum.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag_residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "Sylvester sum has imaginary residual {imag_residual:.3e}"
        )));
    }
    Ok(Propagator {
        matrix: sum.map(|c| c.re),
        eigenvalues,
        zeta: None,
        diagnostic: None,
    })
}

/// Taylor-series matrix exponential with scaling and squaring (40 terms).
fn expm_series(g: &DMatrix<f64>) -> DMatrix<f64> {
    let d = g.nrows();
    let norm = g.iter().map(|x| x.abs()).fold(0.0, f64::max) * d as f64;
    let scalings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = g / 2f64.powi(scalings as i32);
    let mut term = DMatrix::<f64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=40 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..scalings {
        sum = &sum * &sum;
    }
    sum
}

/// Sign convention for the two-level closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// Matches direct integration of dS/dt = g S.
    #[default]
    Ode,
    /// The published closed form; global negation of the ODE result.
    Published,
}

/// Closed-form two-level solution for integrated drive (Delta', Omega').
///
/// For the canonical ground/excited starts this evaluates the trigonometric
/// closed form; any other start goes through the Sylvester exponential of
/// the integrated two-level coefficient matrix. zeta = 0 returns the start
/// unchanged.
pub fn closed_form_two_level(
    delta_p: f64,
    omega_p: f64,
    s0: &CoherenceVector,
    convention: SignConvention,
) -> Result<CoherenceVector> {
    if s0.dim() != 2 {
        return Err(Error::Domain("closed form is for two-level states".into()));
    }
    let zeta = delta_p.hypot(omega_p);
    if zeta < DEGENERACY_TOL {
        return Ok(s0.clone());
    }

    let v = s0.as_vector();
    let canonical = (v[0] == 0.0 && v[1] == 0.0 && v[2].abs() == 1.0).then(|| v[2]);
    let ode = match canonical {
        Some(s3) => {
            // Trig closed form for the ground start, scaled by +-1; the ODE
            // convention is the global negation of the published vector.
            let z2 = zeta * zeta;
            let published_ground = DVector::from_row_slice(&[
                delta_p * omega_p * (1.0 - zeta.cos()) / z2,
                omega_p * zeta.sin() / zeta,
                -delta_p * delta_p / z2 - omega_p * omega_p * zeta.cos() / z2,
            ]);
            -published_ground * s3
        }
        None => {
            let g = crate::dynamics::two_level_g(omega_p, delta_p);
            &sylvester_expm(&g)?.matrix * v
        }
    };
    let out = match convention {
        SignConvention::Ode => ode,
        SignConvention::Published => -ode,
    };
    CoherenceVector::new(2, out)
}

/// Analytic propagator over [t0, t1] for a driven system. Refuses when the
/// sampled commutator residual exceeds `tolerance` (use the RK4 integrator
/// for non-commuting drives).
pub fn superevolution(
    system: &BlochSystem,
    t0: f64,
    t1: f64,
    tolerance: f64,
) -> Result<Propagator> {
    // Surface coefficient errors once up front; afterwards g is evaluated
    // through an infallible closure for the quadrature.
    system.g_matrix(t0)?;
    let gfun = |t: f64| {
        system
            .g_matrix(t)
            .unwrap_or_else(|_| DMatrix::zeros(system.basis().len(), system.basis().len()))
    };
    let integrated = integrate_coefficient(&gfun, t0, t1)?;
    if integrated.commutativity_residual > tolerance {
        return Err(Error::NonCommuting {
            residual: integrated.commutativity_residual,
            tolerance,
        });
    }
    let mut prop = sylvester_expm(&integrated.matrix)?;
    if system.basis().dim() == 2 {
        // zeta from the integrated matrix entries: G = [[0, D', 0],
        // [-D', 0, -O'], [0, O', 0]].
        let delta_p = integrated.matrix[(0, 1)];
        let omega_p = integrated.matrix[(2, 1)];
        prop.zeta = Some(delta_p.hypot(omega_p));
    }
    Ok(prop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::two_level_g;
    use crate::pulse::{DetuningSpec, PulseProfile};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn integrated_resonant_gaussian() {
        let pulse = PulseProfile::Gaussian {
            omega0: 1.0,
            tau: 5.0,
            sigma: 1.0,
        };
        let gfun = |t: f64| two_level_g(pulse.amplitude(t), 0.0);
        let g = integrate_coefficient(&gfun, 0.0, 10.0).unwrap();
        let area = pulse.area(0.0, 10.0).unwrap();
        assert_abs_diff_eq!(g.matrix[(1, 2)], -area, epsilon = 1e-11);
        assert_abs_diff_eq!(g.matrix[(2, 1)], area, epsilon = 1e-11);
        assert_abs_diff_eq!(g.matrix[(0, 1)], 0.0, epsilon = 1e-12);
        assert!(g.commutativity_residual < 1e-14);
        assert!(g.antisymmetry_residual() < 1e-11);
    }

    #[test]
    fn zero_coefficient_integrates_to_zero() {
        let gfun = |_t: f64| DMatrix::<f64>::zeros(3, 3);
        let g = integrate_coefficient(&gfun, 0.0, 5.0).unwrap();
        assert_eq!(g.matrix, DMatrix::zeros(3, 3));
        assert_eq!(g.commutativity_residual, 0.0);
    }

    #[test]
    fn detuned_time_varying_drive_is_noncommuting() {
        let pulse = PulseProfile::Gaussian {
            omega0: 1.0,
            tau: 5.0,
            sigma: 1.0,
        };
        let gfun = |t: f64| two_level_g(pulse.amplitude(t), 0.5);
        let g = integrate_coefficient(&gfun, 0.0, 10.0).unwrap();
        assert!(g.commutativity_residual > 1e-3);
    }

    #[test]
    fn two_level_eigenvalues() {
        let ([l1, l2, l3], degenerate) = eigenvalues_two_level(0.0, PI.sqrt());
        assert!(!degenerate);
        assert_eq!(l1, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(l2.im, -1.7724539, epsilon = 1e-6);
        assert_abs_diff_eq!(l3.im, 1.7724539, epsilon = 1e-6);

        let ([_, l2, l3], _) = eigenvalues_two_level(3.0, 4.0);
        assert_abs_diff_eq!(l2.im, -5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l3.im, 5.0, epsilon = 1e-15);

        let (vals, degenerate) = eigenvalues_two_level(0.0, 0.0);
        assert!(degenerate);
        assert!(vals.iter().all(|l| l.norm() == 0.0));
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let p = sylvester_expm(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(p.matrix, DMatrix::identity(3, 3));
        assert_eq!(p.diagnostic, Some("sylvester-degenerate"));
    }

    #[test]
    fn resonant_rotation_block() {
        let a = PI.sqrt();
        let p = sylvester_expm(&two_level_g(a, 0.0)).unwrap();
        assert!(p.diagnostic.is_none());
        let expected = [
            [1.0, 0.0, 0.0],
            [0.0, a.cos(), -a.sin()],
            [0.0, a.sin(), a.cos()],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(p.matrix[(i, j)], expected[i][j], epsilon = 1e-12);
            }
        }
        assert!(p.orthogonality_residual() < 1e-12);
        assert_abs_diff_eq!(p.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_resonant_published_convention() {
        let s0 = CoherenceVector::from_slice(2, &[0.0, 0.0, 1.0]).unwrap();
        for omega_p in [0.5, 1.0, PI.sqrt(), 2.7] {
            let s = closed_form_two_level(0.0, omega_p, &s0, SignConvention::Published).unwrap();
            assert_abs_diff_eq!(s.component(0), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(s.component(1), omega_p.sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(s.component(2), -omega_p.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_pure_detuning_keeps_populations() {
        let s0 = CoherenceVector::from_slice(2, &[0.0, 0.0, 1.0]).unwrap();
        let s = closed_form_two_level(1.3, 0.0, &s0, SignConvention::Published).unwrap();
        assert_abs_diff_eq!(s.component(0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.component(1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.component(2), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_zero_drive_is_identity() {
        let s0 = CoherenceVector::from_slice(2, &[0.0, 0.0, -1.0]).unwrap();
        let s = closed_form_two_level(0.0, 0.0, &s0, SignConvention::Ode).unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn conventions_are_global_negations() {
        let s0 = CoherenceVector::from_slice(2, &[0.0, 0.0, 1.0]).unwrap();
        let a = closed_form_two_level(0.7, 1.1, &s0, SignConvention::Ode).unwrap();
        let b = closed_form_two_level(0.7, 1.1, &s0, SignConvention::Published).unwrap();
        for j in 0..3 {
            assert_abs_diff_eq!(a.component(j), -b.component(j), epsilon = 1e-15);
        }
    }

    #[test]
    fn superevolution_identity_for_empty_interval() {
        let system = BlochSystem::two_level(
            PulseProfile::Gaussian {
                omega0: 1.0,
                tau: 5.0,
                sigma: 1.0,
            },
            DetuningSpec::new(0.0).unwrap(),
        )
        .unwrap();
        let p = superevolution(&system, 4.0, 4.0, COMMUTATIVITY_TOL).unwrap();
        assert_eq!(p.matrix, DMatrix::identity(3, 3));
    }

    #[test]
    fn superevolution_refuses_noncommuting_drive() {
        let system = BlochSystem::two_level(
            PulseProfile::Gaussian {
                omega0: 1.0,
                tau: 5.0,
                sigma: 1.0,
            },
            DetuningSpec::new(0.5).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            superevolution(&system, 0.0, 10.0, COMMUTATIVITY_TOL),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn constant_detuned_drive_still_commutes() {
        let system = BlochSystem::two_level(
            PulseProfile::Constant { omega0: 0.8 },
            DetuningSpec::new(0.6).unwrap(),
        )
        .unwrap();
        let p = superevolution(&system, 0.0, 2.0, COMMUTATIVITY_TOL).unwrap();
        assert!(p.orthogonality_residual() < 1e-10);
        // Omega' = 1.6, Delta' = 1.2 over [0, 2] gives zeta = 2.
        assert_abs_diff_eq!(p.zeta.unwrap(), 2.0, epsilon = 1e-10);
    }
}
