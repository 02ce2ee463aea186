//! Coherence-vector equation of motion dS/dt = g(t) S.
//!
//! The coefficient matrix is built from the Hamiltonian expansion
//! coefficients h_j(t) = Tr(H(t) s_j) and the structure constants,
//! g_kl = sum_j f_jlk h_j. For the two-level RWA drive this reproduces the
//! familiar antisymmetric Bloch matrix with Delta and Omega(t) entries.
//! Integration is fixed-step RK4.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::config::{InitialState, NamedState, SimulationConfig};
use crate::error::{Error, Result};
use crate::generators::{GeneratorBasis, StructureConstants};
use crate::pulse::{DetuningSpec, PulseProfile};

/// Real vector of generator expectation values S_j = Tr(rho s_j).
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    dim: usize,
    data: DVector<f64>,
}

impl CoherenceVector {
    pub fn new(dim: usize, data: DVector<f64>) -> Result<Self> {
        if data.len() != dim * dim - 1 {
            return Err(Error::Domain(format!(
                "coherence vector for N = {dim} needs {} components, got {}",
                dim * dim - 1,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant("coherence vector has non-finite components".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_slice(dim: usize, s: &[f64]) -> Result<Self> {
        Self::new(dim, DVector::from_row_slice(s))
    }

    /// Ground state |0><0| of an N-level system.
    pub fn ground(dim: usize, basis: &GeneratorBasis) -> Result<Self> {
        density_to_coherence(&DensityMatrix::pure(0, dim)?, basis)
    }

    /// Excited state |1><1|.
    pub fn excited(dim: usize, basis: &GeneratorBasis) -> Result<Self> {
        density_to_coherence(&DensityMatrix::pure(1, dim)?, basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn component(&self, j: usize) -> f64 {
        self.data[j]
    }
}

/// Complex N x N density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace, diagonal in [0, 1].
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Domain("density matrix must be square".into()));
        }
        let herm = (&data - data.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::Invariant(format!(
                "density matrix not Hermitian: residual {herm:.3e}"
            )));
        }
        let tr = data.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Invariant(format!("density matrix trace {tr} != 1")));
        }
        for i in 0..data.nrows() {
            let p = data[(i, i)].re;
            if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::Invariant(format!(
                    "population rho_{i}{i} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(Self { data })
    }

    fn new_unchecked(data: DMatrix<Complex64>) -> Self {
        Self { data }
    }

    /// Pure state |level><level|.
    pub fn pure(level: usize, dim: usize) -> Result<Self> {
        if level >= dim {
            return Err(Error::Domain(format!(
                "level {level} out of range for dimension {dim}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(level, level)] = Complex64::new(1.0, 0.0);
        Ok(Self { data: m })
    }

    /// Maximally mixed state I/N.
    pub fn mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain("dimension must be >= 2".into()));
        }
        let m = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        Ok(Self { data: m })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        self.data[(m, n)]
    }

    /// Smallest eigenvalue; negative values mean the matrix is not a state.
    pub fn min_eigenvalue(&self) -> f64 {
        self.data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

/// S_j = Tr(rho s_j).
pub fn density_to_coherence(rho: &DensityMatrix, basis: &GeneratorBasis) -> Result<CoherenceVector> {
    if rho.dim() != basis.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: rho is {}, basis is {}",
            rho.dim(),
            basis.dim()
        )));
    }
    let mut out = DVector::zeros(basis.len());
    for j in 0..basis.len() {
        let tr: Complex64 = (rho.matrix() * basis.generator(j)).trace();
        if tr.im.abs() > 1e-12 {
            return Err(Error::Numerical(format!(
                "expectation value S_{j} has imaginary part {:.3e}",
                tr.im
            )));
        }
        out[j] = tr.re;
    }
    CoherenceVector::new(basis.dim(), out)
}

/// rho = I/N + (1/2) sum_j S_j s_j. Trace is 1 by construction. The second
/// return value is false when the reconstruction is not positive
/// semidefinite, i.e. the coherence vector does not represent a physical
/// state.
pub fn coherence_to_density(
    s: &CoherenceVector,
    basis: &GeneratorBasis,
) -> Result<(DensityMatrix, bool)> {
    if s.dim() != basis.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: S is for N = {}, basis is {}",
            s.dim(),
            basis.dim()
        )));
    }
    let dim = basis.dim();
    let mut m = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
    for j in 0..basis.len() {
        m += basis.generator(j) * Complex64::new(0.5 * s.component(j), 0.0);
    }
    let rho = DensityMatrix::new_unchecked(m);
    let positive = rho.min_eigenvalue() >= -1e-10;
    Ok((rho, positive))
}

/// Hamiltonian expansion coefficients h_j(t) = Tr(H(t) s_j) (hbar = 1).
pub struct HamiltonianCoeffs {
    basis: GeneratorBasis,
    source: CoeffSource,
    /// Sum of level frequencies omega_k from the identity part of H. It
    /// contributes a global phase only and never enters the dynamics.
    pub level_frequency_sum: f64,
}

enum CoeffSource {
    TwoLevelRwa {
        pulse: PulseProfile,
        detuning: DetuningSpec,
    },
    General(Arc<dyn Fn(f64) -> DMatrix<Complex64> + Send + Sync>),
}

impl HamiltonianCoeffs {
    /// The RWA drive H(t) = (1/2) Omega(t) (|0><1| + |1><0|) + Delta |1><1|.
    pub fn two_level_rwa(
        pulse: PulseProfile,
        detuning: DetuningSpec,
        basis: &GeneratorBasis,
    ) -> Result<Self> {
        if basis.dim() != 2 {
            return Err(Error::Domain(
                "the built-in RWA drive is two-level; supply H(t) for general N".into(),
            ));
        }
        pulse.validate()?;
        Ok(Self {
            basis: basis.clone(),
            source: CoeffSource::TwoLevelRwa { pulse, detuning },
            level_frequency_sum: 0.0,
        })
    }

    /// Caller-supplied Hermitian H(t) for an N-level system.
    pub fn general<F>(h: F, basis: &GeneratorBasis) -> Self
    where
        F: Fn(f64) -> DMatrix<Complex64> + Send + Sync + 'static,
    {
        Self {
            basis: basis.clone(),
            source: CoeffSource::General(Arc::new(h)),
            level_frequency_sum: 0.0,
        }
    }

    fn hamiltonian(&self, t: f64) -> Result<DMatrix<Complex64>> {
        match &self.source {
            CoeffSource::TwoLevelRwa { pulse, detuning } => {
                let omega = pulse.amplitude(t);
                let mut h = DMatrix::zeros(2, 2);
                h[(0, 1)] = Complex64::new(0.5 * omega, 0.0);
                h[(1, 0)] = Complex64::new(0.5 * omega, 0.0);
                h[(1, 1)] = Complex64::new(detuning.delta, 0.0);
                Ok(h)
            }
            CoeffSource::General(f) => {
                let h = f(t);
                if h.nrows() != self.basis.dim() || h.ncols() != self.basis.dim() {
                    return Err(Error::Domain(format!(
                        "H(t) is {}x{}, basis dimension is {}",
                        h.nrows(),
                        h.ncols(),
                        self.basis.dim()
                    )));
                }
                let herm = (&h - h.adjoint())
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                if herm > 1e-10 {
                    return Err(Error::Domain(format!(
                        "supplied Hamiltonian is not Hermitian: residual {herm:.3e}"
                    )));
                }
                Ok(h)
            }
        }
    }

    /// h_j(t) for all j, computed by tracing H(t) against the basis.
    pub fn values(&self, t: f64) -> Result<DVector<f64>> {
        let h = self.hamiltonian(t)?;
        let mut out = DVector::zeros(self.basis.len());
        for j in 0..self.basis.len() {
            let tr: Complex64 = (&h * self.basis.generator(j)).trace();
            out[j] = tr.re;
        }
        Ok(out)
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }
}

/// g_kl = sum_j f_jlk h_j. Antisymmetric for real h.
pub fn adjoint_matrix(h: &DVector<f64>, f: &StructureConstants) -> DMatrix<f64> {
    let d = f.len();
    let mut g = DMatrix::zeros(d, d);
    for ((j, l, k), fv) in f.nonzero() {
        g[(k, l)] += fv * h[j];
    }
    g
}

/// The explicit two-level coefficient matrix with rows
/// [[0, Delta, 0], [-Delta, 0, -Omega], [0, Omega, 0]]. Kept as an
/// independent route for cross-checking the structure-constant path.
pub fn two_level_g(omega: f64, delta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[0.0, delta, 0.0, -delta, 0.0, -omega, 0.0, omega, 0.0],
    )
}

/// A driven N-level system: basis, structure constants, and coefficients,
/// bundled so g(t) can be evaluated at any time.
pub struct BlochSystem {
    structure: StructureConstants,
    coeffs: HamiltonianCoeffs,
}

impl BlochSystem {
    pub fn two_level(pulse: PulseProfile, detuning: DetuningSpec) -> Result<Self> {
        let basis = GeneratorBasis::new(2)?;
        let structure = StructureConstants::compute(&basis)?;
        let coeffs = HamiltonianCoeffs::two_level_rwa(pulse, detuning, &basis)?;
        Ok(Self { structure, coeffs })
    }

    pub fn n_level<F>(basis: GeneratorBasis, h: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<Complex64> + Send + Sync + 'static,
    {
        let structure = StructureConstants::compute(&basis)?;
        let coeffs = HamiltonianCoeffs::general(h, &basis);
        Ok(Self { structure, coeffs })
    }

    pub fn basis(&self) -> &GeneratorBasis {
        self.coeffs.basis()
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.structure
    }

    pub fn g_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(adjoint_matrix(&self.coeffs.values(t)?, &self.structure))
    }
}

/// One classical RK4 update for dS/dt = g(t) S.
pub fn rk4_step<G>(s: &DVector<f64>, gfun: &G, t: f64, dt: f64) -> Result<DVector<f64>>
where
    G: Fn(f64) -> Result<DMatrix<f64>>,
{
    if dt <= 0.0 {
        return Err(Error::Domain(format!("rk4 step size must be positive, got {dt}")));
    }
    let k1 = gfun(t)? * s;
    let k2 = gfun(t + 0.5 * dt)? * (s + &k1 * (0.5 * dt));
    let k3 = gfun(t + 0.5 * dt)? * (s + &k2 * (0.5 * dt));
    let k4 = gfun(t + dt)? * (s + &k3 * dt);
    let next = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    if next.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite state after RK4 step at t = {t}, dt = {dt}"
        )));
    }
    Ok(next)
}

/// Sampled solution of the equation of motion.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    norm_drift: f64,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> CoherenceVector {
        CoherenceVector::new(self.dim, self.states.last().expect("nonempty").clone())
            .expect("trajectory samples are valid")
    }

    /// Max |  ||S(t)|| - ||S(0)||  | over the recorded samples.
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }
}

/// Resolve the configured initial state into a coherence vector.
pub fn initial_coherence(cfg: &SimulationConfig, basis: &GeneratorBasis) -> Result<CoherenceVector> {
    let dim = basis.dim();
    match &cfg.initial_state {
        InitialState::Named(NamedState::Ground) => CoherenceVector::ground(dim, basis),
        InitialState::Named(NamedState::Excited) => CoherenceVector::excited(dim, basis),
        InitialState::Named(NamedState::Mixed) => density_to_coherence(&DensityMatrix::mixed(dim)?, basis),
        InitialState::Vector(v) => {
            let s = CoherenceVector::from_slice(dim, v)?;
            let (_, positive) = coherence_to_density(&s, basis)?;
            if !positive {
                return Err(Error::Invariant(format!(
                    "initial coherence vector (norm {:.4}) does not represent a positive \
                     density matrix; use {{\"unchecked\": [...]}} to force it",
                    s.norm()
                )));
            }
            Ok(s)
        }
        InitialState::Unchecked { unchecked } => CoherenceVector::from_slice(dim, unchecked),
    }
}

/// Integrate a two-level configuration with fixed-step RK4.
pub fn integrate(cfg: &SimulationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.n != 2 {
        return Err(Error::Domain(format!(
            "the built-in RWA drive is two-level; got N = {} (use integrate_system \
             with a caller-supplied Hamiltonian)",
            cfg.n
        )));
    }
    let system = BlochSystem::two_level(cfg.pulse.clone(), cfg.delta)?;
    let s0 = initial_coherence(cfg, system.basis())?;
    integrate_system(&system, &s0, cfg.window, cfg.dt, cfg.decimation)
}

/// Integrate dS/dt = g(t) S for any system over [t0, t1], recording every
/// `decimation`-th step (and always the endpoint).
pub fn integrate_system(
    system: &BlochSystem,
    s0: &CoherenceVector,
    window: (f64, f64),
    dt: f64,
    decimation: usize,
) -> Result<Trajectory> {
    let (t0, t1) = window;
    if t1 < t0 {
        return Err(Error::Config(vec![format!(
            "window inverted: [{t0}, {t1}]"
        )]));
    }
    if dt <= 0.0 {
        return Err(Error::Config(vec![format!("dt must be positive, got {dt}")]));
    }
    let decimation = decimation.max(1);
    let gfun = |t: f64| system.g_matrix(t);
    let dim = system.basis().dim();

    let mut times = vec![t0];
    let mut states = vec![s0.as_vector().clone()];
    if t1 == t0 {
        return Ok(Trajectory {
            dim,
            times,
            states,
            norm_drift: 0.0,
        });
    }

    let span = t1 - t0;
    let n_full = (span / dt + 1e-9).floor() as usize;
    let tail = span - n_full as f64 * dt;

    let norm0 = s0.norm();
    let mut drift = 0.0f64;
    let mut s = s0.as_vector().clone();
    let mut t = t0;
    for i in 0..n_full {
        s = rk4_step(&s, &gfun, t, dt)?;
        t = t0 + (i + 1) as f64 * dt;
        drift = drift.max((s.norm() - norm0).abs());
        if (i + 1) % decimation == 0 {
            times.push(t);
            states.push(s.clone());
        }
    }
    if tail > 1e-12 * span.max(1.0) {
        s = rk4_step(&s, &gfun, t, tail)?;
        t = t1;
        drift = drift.max((s.norm() - norm0).abs());
    }
    if *times.last().unwrap() != t {
        times.push(t);
        states.push(s);
    }
    Ok(Trajectory {
        dim,
        times,
        states,
        norm_drift: drift,
    })
}

/// Rescale a configuration to reduced time t' = t / sigma (Gaussian pulses
/// only; sigma is the pulse width). Integrating the rescaled configuration
/// reproduces the original trajectory at corresponding grid points.
pub fn to_reduced_time(cfg: &SimulationConfig) -> Result<SimulationConfig> {
    let PulseProfile::Gaussian { omega0, tau, sigma } = cfg.pulse else {
        return Err(Error::Domain(
            "reduced-time scaling requires a Gaussian pulse".into(),
        ));
    };
    if sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let mut out = cfg.clone();
    out.pulse = PulseProfile::Gaussian {
        omega0: omega0 * sigma,
        tau: tau / sigma,
        sigma: 1.0,
    };
    out.delta = DetuningSpec::new(cfg.delta.delta * sigma)?;
    out.window = (cfg.window.0 / sigma, cfg.window.1 / sigma);
    out.dt = cfg.dt / sigma;
    Ok(out)
}
