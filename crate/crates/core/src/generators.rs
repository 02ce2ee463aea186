//! Generator basis of su(N) and its structure constants.
//!
//! For N = 2 the basis is the three Pauli matrices; for larger N the
//! generalized Gell-Mann construction is used: symmetric and antisymmetric
//! combinations of level projectors plus the diagonal generators. All
//! generators are Hermitian, traceless, and orthonormal in the sense
//! Tr(s_i s_j) = 2 delta_ij. The ordering (symmetric block, antisymmetric
//! block, diagonal block, each lexicographic in the level pair) is part of
//! the public contract: coefficient-matrix indices depend on it.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the orthonormality check Tr(s_i s_j) = 2 delta_ij.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

/// Which slot of the generalized Gell-Mann construction a generator occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// |m><n| + |n><m| with m < n.
    Symmetric { m: usize, n: usize },
    /// -i(|m><n| - |n><m|) with m < n.
    Antisymmetric { m: usize, n: usize },
    /// sqrt(2/(l(l+1))) (sum_{k<l} |k><k| - l |l><l|).
    Diagonal { level: usize },
}

/// The projector |m><n| as a dense complex matrix.
pub fn projector(m: usize, n: usize, dim: usize) -> Result<DMatrix<Complex64>> {
    if m >= dim || n >= dim {
        return Err(Error::Domain(format!(
            "projector indices ({m}, {n}) out of range for dimension {dim}"
        )));
    }
    let mut p = DMatrix::zeros(dim, dim);
    p[(m, n)] = Complex64::new(1.0, 0.0);
    Ok(p)
}

/// The N^2 - 1 Hermitian generators of su(N).
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<DMatrix<Complex64>>,
    labels: Vec<GeneratorKind>,
}

impl GeneratorBasis {
    /// Build the basis for an N-level system. For N = 2 this yields exactly
    /// (sigma_x, sigma_y, sigma_z).
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!(
                "generator basis requires N >= 2, got {dim}"
            )));
        }
        let mut generators = Vec::with_capacity(dim * dim - 1);
        let mut labels = Vec::with_capacity(dim * dim - 1);

        for m in 0..dim {
            for n in (m + 1)..dim {
                generators.push(projector(m, n, dim)? + projector(n, m, dim)?);
                labels.push(GeneratorKind::Symmetric { m, n });
            }
        }
        let i = Complex64::i();
        for m in 0..dim {
            for n in (m + 1)..dim {
                generators.push((projector(m, n, dim)? - projector(n, m, dim)?) * (-i));
                labels.push(GeneratorKind::Antisymmetric { m, n });
            }
        }
        for l in 1..dim {
            let norm = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
            let mut d = DMatrix::<Complex64>::zeros(dim, dim);
            for k in 0..l {
                d[(k, k)] = Complex64::new(norm, 0.0);
            }
            d[(l, l)] = Complex64::new(-norm * l as f64, 0.0);
            generators.push(d);
            labels.push(GeneratorKind::Diagonal { level: l });
        }

        let basis = Self {
            dim,
            generators,
            labels,
        };
        debug_assert!(basis.orthonormality_residual() < ORTHONORMALITY_TOL);
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, N^2 - 1.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn generator(&self, j: usize) -> &DMatrix<Complex64> {
        &self.generators[j]
    }

    pub fn generators(&self) -> &[DMatrix<Complex64>] {
        &self.generators
    }

    pub fn label(&self, j: usize) -> GeneratorKind {
        self.labels[j]
    }

    /// Largest deviation of Tr(s_i s_j) from 2 delta_ij over all pairs.
    pub fn orthonormality_residual(&self) -> f64 {
        let d = self.len();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let tr: Complex64 = (&self.generators[i] * &self.generators[j]).trace();
                let expected = if i == j { 2.0 } else { 0.0 };
                worst = worst.max((tr.re - expected).abs()).max(tr.im.abs());
            }
        }
        worst
    }

    /// Largest |Tr(s_j)| and max deviation from Hermiticity over the basis.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in &self.generators {
            worst = worst.max(s.trace().norm());
            let diff = s - s.adjoint();
            worst = worst.max(diff.iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
        worst
    }
}

enum FStorage {
    Dense(Vec<f64>),
    Sparse(HashMap<(usize, usize, usize), f64>),
}

/// The totally antisymmetric structure constants f_ijk of su(N), defined by
/// [s_i, s_j] = 2i sum_k f_ijk s_k. Levi-Civita for N = 2.
pub struct StructureConstants {
    dim: usize,
    d: usize,
    storage: FStorage,
}

/// Entries of f below this magnitude are treated as exact zeros in storage.
const F_ZERO_CUTOFF: f64 = 1e-13;

impl StructureConstants {
    /// f_ijk = Tr([s_i, s_j] s_k) / (4i). Dense storage for N <= 4, sparse
    /// above (the tensor density falls off quickly with N).
    pub fn compute(basis: &GeneratorBasis) -> Result<Self> {
        if basis.orthonormality_residual() >= ORTHONORMALITY_TOL {
            return Err(Error::Invariant(format!(
                "basis is not orthonormal: residual {:.3e}",
                basis.orthonormality_residual()
            )));
        }
        let d = basis.len();
        let mut dense = vec![0.0; d * d * d];
        for i in 0..d {
            for j in (i + 1)..d {
                let si = basis.generator(i);
                let sj = basis.generator(j);
                let comm = si * sj - sj * si;
                for k in 0..d {
                    let tr: Complex64 = (&comm * basis.generator(k)).trace();
                    // Tr([s_i, s_j] s_k) is purely imaginary for Hermitian
                    // generators; the real part is roundoff.
                    let f = tr.im / 4.0;
                    if tr.re.abs() > 1e-10 {
                        return Err(Error::Numerical(format!(
                            "structure constant ({i},{j},{k}) has real residual {:.3e}",
                            tr.re
                        )));
                    }
                    let f = if f.abs() < F_ZERO_CUTOFF { 0.0 } else { f };
                    dense[(i * d + j) * d + k] = f;
                    dense[(j * d + i) * d + k] = -f;
                }
            }
        }
        let storage = if basis.dim() <= 4 {
            FStorage::Dense(dense)
        } else {
            let mut map = HashMap::new();
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let f = dense[(i * d + j) * d + k];
                        if f != 0.0 {
                            map.insert((i, j, k), f);
                        }
                    }
                }
            }
            FStorage::Sparse(map)
        };
        Ok(Self {
            dim: basis.dim(),
            d,
            storage,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side length of the tensor, N^2 - 1.
    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        match &self.storage {
            FStorage::Dense(v) => v[(i * self.d + j) * self.d + k],
            FStorage::Sparse(m) => m.get(&(i, j, k)).copied().unwrap_or(0.0),
        }
    }

    /// Nonzero entries as ((i, j, k), value) pairs.
    pub fn nonzero(&self) -> Vec<((usize, usize, usize), f64)> {
        let mut out = Vec::new();
        for i in 0..self.d {
            for j in 0..self.d {
                for k in 0..self.d {
                    let f = self.get(i, j, k);
                    if f != 0.0 {
                        out.push(((i, j, k), f));
                    }
                }
            }
        }
        out
    }

    /// Max violation of total antisymmetry over adjacent-index swaps.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                for k in 0..self.d {
                    let f = self.get(i, j, k);
                    worst = worst.max((f + self.get(j, i, k)).abs());
                    worst = worst.max((f + self.get(i, k, j)).abs());
                }
            }
        }
        worst
    }

    /// Max entry of [s_i, s_j] - 2i sum_k f_ijk s_k over all pairs.
    pub fn reconstruction_residual(&self, basis: &GeneratorBasis) -> f64 {
        let two_i = Complex64::new(0.0, 2.0);
        let mut worst = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                let si = basis.generator(i);
                let sj = basis.generator(j);
                let comm = si * sj - sj * si;
                let mut rebuilt = DMatrix::<Complex64>::zeros(self.dim, self.dim);
                for k in 0..self.d {
                    let f = self.get(i, j, k);
                    if f != 0.0 {
                        rebuilt += basis.generator(k) * (two_i * f);
                    }
                }
                let diff = comm - rebuilt;
                worst = worst.max(diff.iter().map(|c| c.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}
