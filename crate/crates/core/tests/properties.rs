//! Randomized property tests for the library invariants: pulse-area algebra,
//! coefficient-matrix structure, propagator group/orthogonality properties,
//! linearity of the flow, and the logic layer.

use atomlogic::{
    adjoint_matrix, closed_form_two_level, integrate_system, lsm_step, run_parity,
    sylvester_expm, two_level_g, BlochSystem, CoherenceVector, DetuningSpec, GeneratorBasis,
    HamiltonianCoeffs, LsmSpec, ParityMode, PulseProfile, SignConvention, StructureConstants,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

/// Antisymmetric 3x3 matrix (G s = w x s) from an axis vector.
fn cross_matrix(w: [f64; 3]) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0],
    )
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Composite Simpson on a fixed grid: an oracle independent of both the erf
/// closed form and the adaptive quadrature.
fn simpson_oracle(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

fn gaussian_strategy() -> impl Strategy<Value = PulseProfile> {
    (0.1..2.0f64, -2.0..2.0f64, 0.5..2.0f64)
        .prop_map(|(omega0, tau, sigma)| PulseProfile::Gaussian { omega0, tau, sigma })
}

proptest! {
    #[test]
    fn pulse_area_is_additive(
        pulse in gaussian_strategy(),
        t0 in -10.0..0.0f64,
        mid in 0.0..5.0f64,
        t1 in 5.0..10.0f64,
    ) {
        let whole = pulse.area(t0, t1).unwrap();
        let split = pulse.area(t0, mid).unwrap() + pulse.area(mid, t1).unwrap();
        prop_assert!((whole - split).abs() < 1e-11, "{whole} vs {split}");
    }

    #[test]
    fn gaussian_area_matches_quadrature_oracle(
        pulse in gaussian_strategy(),
        a in -5.0..0.0f64,
        b in 0.0..5.0f64,
    ) {
        let closed = pulse.area(a, b).unwrap();
        let oracle = simpson_oracle(|t| pulse.amplitude(t), a, b, 16384);
        prop_assert!((closed - oracle).abs() < 1e-10, "{closed} vs {oracle}");
    }

    #[test]
    fn coefficient_routes_agree(omega in -3.0..3.0f64, delta in -3.0..3.0f64) {
        let basis = GeneratorBasis::new(2).unwrap();
        let f = StructureConstants::compute(&basis).unwrap();
        let coeffs = HamiltonianCoeffs::two_level_rwa(
            PulseProfile::Constant { omega0: omega },
            DetuningSpec { delta },
            &basis,
        )
        .unwrap();
        let via_structure = adjoint_matrix(&coeffs.values(0.0).unwrap(), &f);
        let explicit = two_level_g(omega, delta);
        prop_assert!(max_abs(&(via_structure - explicit)) < 1e-14);
    }

    #[test]
    fn three_level_coefficient_is_antisymmetric(
        re in proptest::array::uniform3(-1.0..1.0f64),
        im in proptest::array::uniform3(-1.0..1.0f64),
        diag in proptest::array::uniform3(-1.0..1.0f64),
    ) {
        let basis = GeneratorBasis::new(3).unwrap();
        let f = StructureConstants::compute(&basis).unwrap();
        let coeffs = HamiltonianCoeffs::general(
            move |_| {
                let mut h = DMatrix::zeros(3, 3);
                let pairs = [(0, 1), (0, 2), (1, 2)];
                for (k, &(m, n)) in pairs.iter().enumerate() {
                    h[(m, n)] = Complex64::new(re[k], im[k]);
                    h[(n, m)] = Complex64::new(re[k], -im[k]);
                }
                for (k, d) in diag.iter().enumerate() {
                    h[(k, k)] = Complex64::new(*d, 0.0);
                }
                h
            },
            &basis,
        );
        let g = adjoint_matrix(&coeffs.values(0.0).unwrap(), &f);
        prop_assert!(max_abs(&(&g + g.transpose())) < 1e-12);
    }

    #[test]
    fn expm_is_a_rotation(w in proptest::array::uniform3(-2.0..2.0f64)) {
        let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        prop_assume!(theta > 1e-3);
        let p = sylvester_expm(&cross_matrix(w)).unwrap();
        prop_assert!(p.orthogonality_residual() < 1e-11);
        prop_assert!((p.determinant() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn expm_group_property_on_commuting_inputs(
        w in proptest::array::uniform3(-1.0..1.0f64),
        a in 0.2..1.5f64,
        b in 0.2..1.5f64,
    ) {
        let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        prop_assume!(theta > 1e-2);
        let g = cross_matrix(w);
        let whole = sylvester_expm(&(&g * (a + b))).unwrap().matrix;
        let split = sylvester_expm(&(&g * a)).unwrap().matrix
            * sylvester_expm(&(&g * b)).unwrap().matrix;
        prop_assert!(max_abs(&(whole - split)) < 1e-12);
    }

    #[test]
    fn closed_form_matches_expm(delta_p in -3.0..3.0f64, omega_p in -3.0..3.0f64) {
        prop_assume!(delta_p.hypot(omega_p) > 1e-3);
        for s3 in [1.0, -1.0] {
            let s0 = CoherenceVector::from_slice(2, &[0.0, 0.0, s3]).unwrap();
            let trig = closed_form_two_level(delta_p, omega_p, &s0, SignConvention::Ode).unwrap();
            let prop = sylvester_expm(&two_level_g(omega_p, delta_p)).unwrap();
            let direct = prop.apply(&s0).unwrap();
            for j in 0..3 {
                prop_assert!(
                    (trig.component(j) - direct.component(j)).abs() < 1e-12,
                    "component {j}: {} vs {}",
                    trig.component(j),
                    direct.component(j)
                );
            }
        }
    }

    #[test]
    fn parity_matches_fold_xor(bits in "[01]{0,200}", start in 0u8..2) {
        let (state, outputs, transcript) =
            run_parity(&bits, start, ParityMode::Logical).unwrap();
        let ones = bits.bytes().filter(|&b| b == b'1').count();
        let expected = start ^ (ones % 2) as u8;
        prop_assert_eq!(state, expected);
        // Even number of 1-bits from an even start reads "even parity".
        if start == 0 {
            prop_assert_eq!(state == 0, ones % 2 == 0);
        }
        // The running parity is a prefix fold.
        let mut acc = start;
        for (out, r) in outputs.iter().zip(&transcript) {
            prop_assert_eq!(r.present_state, acc);
            prop_assert_eq!(r.present_output, acc);
            acc ^= r.present_input;
            prop_assert_eq!(*out, acc);
            prop_assert_eq!(r.next_state, acc);
        }
    }

    #[test]
    fn moore_outputs_ignore_input(
        s in proptest::array::uniform2(-2.0..2.0f64),
        u1 in -5.0..5.0f64,
        u2 in -5.0..5.0f64,
        a in proptest::array::uniform4(-1.0..1.0f64),
    ) {
        let spec = LsmSpec {
            a: DMatrix::from_row_slice(2, 2, &a),
            b: DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            c: DMatrix::identity(2, 2),
            d: DMatrix::zeros(2, 1),
        };
        let s = DVector::from_row_slice(&s);
        let (_, y1) = lsm_step(&spec, &s, &DVector::from_row_slice(&[u1])).unwrap();
        let (_, y2) = lsm_step(&spec, &s, &DVector::from_row_slice(&[u2])).unwrap();
        prop_assert_eq!(y1, y2);
    }
}

proptest! {
    // Trajectory-level properties integrate thousands of RK4 steps per case;
    // keep the case count moderate.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_is_linear(
        sa in proptest::array::uniform3(-1.0..1.0f64),
        sb in proptest::array::uniform3(-1.0..1.0f64),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        pulse in gaussian_strategy(),
        delta in -1.0..1.0f64,
    ) {
        let system = BlochSystem::two_level(pulse, DetuningSpec { delta }).unwrap();
        let window = (0.0, 2.0);
        let dt = 1e-2;
        let run = |s: &[f64]| -> DVector<f64> {
            let s0 = CoherenceVector::from_slice(2, s).unwrap();
            integrate_system(&system, &s0, window, dt, usize::MAX)
                .unwrap()
                .final_state()
                .as_vector()
                .clone()
        };
        let combined: Vec<f64> = sa
            .iter()
            .zip(&sb)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let lhs = run(&combined);
        let rhs = run(&sa) * alpha + run(&sb) * beta;
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn norm_is_conserved(
        pulse in gaussian_strategy(),
        delta in -1.0..1.0f64,
        s3 in -1.0..1.0f64,
    ) {
        let system = BlochSystem::two_level(pulse, DetuningSpec { delta }).unwrap();
        let norm_xy = (1.0 - s3 * s3).sqrt();
        let s0 = CoherenceVector::from_slice(2, &[norm_xy, 0.0, s3]).unwrap();
        let traj = integrate_system(&system, &s0, (0.0, 10.0), 5e-3, 16).unwrap();
        prop_assert!(traj.norm_drift() < 1e-9, "drift {}", traj.norm_drift());
    }
}
