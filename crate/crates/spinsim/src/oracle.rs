//! Exact (non-Trotterized) evolution via dense Hermitian matrix
//! exponentials, used as the validation oracle for Trotter error and
//! backend correctness.
//!
//! The exponential goes through a cyclic complex Jacobi eigendecomposition
//! rather than scaling-and-squaring; every matrix here is Hermitian and at
//! most 2^N × 2^N for small N, so a few sweeps suffice.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::chain::{ChainSpec, SliceControls};
use crate::error::{invalid, Error, Result};

/// Dense Hermitian operator in the computational basis (site 0 = MSB).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    pub dim: usize,
    /// Row-major `dim × dim`.
    pub matrix: Vec<Complex64>,
}

/// `H = Σ_k (Jx X_k X_{k+1} + Jy Y_k Y_{k+1} + Jz Z_k Z_{k+1}) + Σ_j u_j Z_j`.
pub fn build_hamiltonian(chain: &ChainSpec, u_row: &[f64]) -> Result<DenseHamiltonian> {
    if u_row.len() != chain.n_sites {
        return Err(invalid("control row length must equal n_sites"));
    }
    let n = chain.n_sites;
    let dim = 1usize << n;
    let mut h = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mask = |site: usize| 1usize << (n - 1 - site);
    for col in 0..dim {
        // drift terms on each edge
        for k in 0..n - 1 {
            let (ma, mb) = (mask(k), mask(k + 1));
            let flipped = col ^ ma ^ mb;
            let equal_bits = ((col & ma) != 0) == ((col & mb) != 0);
            // X_k X_{k+1}|col⟩ flips both bits
            h[flipped * dim + col] += Complex64::new(chain.jx, 0.0);
            // Y_k Y_{k+1}|col⟩ flips both bits with sign -1 when bits agree
            let ysign = if equal_bits { -1.0 } else { 1.0 };
            h[flipped * dim + col] += Complex64::new(chain.jy * ysign, 0.0);
            // Z_k Z_{k+1} is diagonal
            let zsign = if equal_bits { 1.0 } else { -1.0 };
            h[col * dim + col] += Complex64::new(chain.jz * zsign, 0.0);
        }
        // on-site Z controls
        for (j, &u) in u_row.iter().enumerate() {
            let sign = if col & mask(j) == 0 { 1.0 } else { -1.0 };
            h[col * dim + col] += Complex64::new(u * sign, 0.0);
        }
    }
    Ok(DenseHamiltonian { dim, matrix: h })
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues and the unitary of column eigenvectors
/// such that `A = V Λ V†`.
pub fn hermitian_eigen(a: &[Complex64], dim: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    if a.len() != dim * dim {
        return Err(invalid("matrix shape mismatch"));
    }
    let mut m = a.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    let norm: f64 = sqrt(m.iter().map(|e| e.norm_sqr()).sum());
    let tol = 1e-14 * norm.max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in p + 1..dim {
                off += m[p * dim + q].norm_sqr();
            }
        }
        if sqrt(2.0 * off) < tol {
            let eigenvalues = (0..dim).map(|i| m[i * dim + i].re).collect();
            return Ok((eigenvalues, v));
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = m[p * dim + q];
                let r = apq.norm();
                if r < tol / (dim as f64) {
                    continue;
                }
                let app = m[p * dim + p].re;
                let aqq = m[q * dim + q].re;
                // phase factor turning the 2x2 block real symmetric
                let phase = apq / r; // e^{iφ}
                // real Jacobi angle for [[app, r], [r, aqq]]
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    -1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                // plane rotation G: G[p][p]=c, G[p][q]=-s,
                // G[q][p]=s·conj(phase), G[q][q]=c·conj(phase)
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(-s, 0.0);
                let gqp = s * phase.conj();
                let gqq = c * phase.conj();
                // m ← m G (columns p, q)
                for i in 0..dim {
                    let mip = m[i * dim + p];
                    let miq = m[i * dim + q];
                    m[i * dim + p] = mip * gpp + miq * gqp;
                    m[i * dim + q] = mip * gpq + miq * gqq;
                }
                // m ← G† m (rows p, q)
                for j in 0..dim {
                    let mpj = m[p * dim + j];
                    let mqj = m[q * dim + j];
                    m[p * dim + j] = gpp.conj() * mpj + gqp.conj() * mqj;
                    m[q * dim + j] = gpq.conj() * mpj + gqq.conj() * mqj;
                }
                // v ← v G
                for i in 0..dim {
                    let vip = v[i * dim + p];
                    let viq = v[i * dim + q];
                    v[i * dim + p] = vip * gpp + viq * gqp;
                    v[i * dim + q] = vip * gpq + viq * gqq;
                }
            }
        }
    }
    Err(Error::Numeric(alloc::string::String::from(
        "Jacobi eigendecomposition did not converge",
    )))
}

/// `U = exp(-i H t)` via eigendecomposition: `V e^{-iλt} V†`.
pub fn expm_unitary(h: &DenseHamiltonian, t: f64) -> Result<Vec<Complex64>> {
    let dim = h.dim;
    let (eigenvalues, v) = hermitian_eigen(&h.matrix, dim)?;
    let phases: Vec<Complex64> = eigenvalues
        .iter()
        .map(|lambda| {
            let arg = -lambda * t;
            Complex64::new(cos(arg), sin(arg))
        })
        .collect();
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += v[i * dim + k] * phases[k] * v[j * dim + k].conj();
            }
            u[i * dim + j] = acc;
        }
    }
    Ok(u)
}

/// Exact evolution under piecewise-constant controls: the ordered product of
/// slice propagators, slice 1 applied first (rightmost factor).
pub fn exact_evolution(
    chain: &ChainSpec,
    controls: &SliceControls,
    horizon: f64,
) -> Result<Vec<Complex64>> {
    if horizon <= 0.0 || !horizon.is_finite() {
        return Err(invalid("horizon must be positive and finite"));
    }
    if controls.n_sites() != chain.n_sites {
        return Err(invalid("controls site count does not match chain"));
    }
    let dim = 1usize << chain.n_sites;
    let dt = horizon / controls.n_slices() as f64;
    let mut total = identity(dim);
    for l in 0..controls.n_slices() {
        let h = build_hamiltonian(chain, controls.row(l))?;
        let step = expm_unitary(&h, dt)?;
        total = matmul(&step, &total, dim);
    }
    Ok(total)
}

pub fn identity(dim: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    m
}

/// `a · b` for row-major square matrices.
pub fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

/// `m · x` for a row-major square matrix and column vector.
pub fn matvec(m: &[Complex64], x: &[Complex64], dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|i| (0..dim).map(|j| m[i * dim + j] * x[j]).sum())
        .collect()
}

/// Max-norm of `U†U - I`, the unitarity defect.
pub fn unitarity_defect(u: &[Complex64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += u[k * dim + i].conj() * u[k * dim + j];
            }
            if i == j {
                acc -= Complex64::new(1.0, 0.0);
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn two_site_z_field_hamiltonian() {
        let chain = ChainSpec::new(2, 0.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&chain, &[1.0, -1.0]).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h.matrix[i * 4 + i].re).collect();
        assert_eq!(diag, alloc::vec![0.0, 2.0, -2.0, 0.0]);
        let off: f64 = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| h.matrix[r * 4 + c].norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let chain = ChainSpec::new(3, 1.0, 0.8, 0.2).unwrap();
        let h = build_hamiltonian(&chain, &[0.3, -0.7, 1.1]).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let a = h.matrix[r * 8 + c];
                let b = h.matrix[c * 8 + r].conj();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn zero_hamiltonian_is_zero() {
        let chain = ChainSpec::new(2, 0.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&chain, &[0.0, 0.0]).unwrap();
        assert!(h.matrix.iter().all(|e| *e == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn expm_at_zero_time_is_identity() {
        let chain = ChainSpec::new(2, 1.0, 1.0, 0.2).unwrap();
        let h = build_hamiltonian(&chain, &[0.1, -0.2]).unwrap();
        let u = expm_unitary(&h, 0.0).unwrap();
        for (a, b) in u.iter().zip(identity(4)) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn expm_single_qubit_z() {
        // H = Z on one site: exp(-iZ t) = diag(e^{-it}, e^{+it})
        let h = DenseHamiltonian {
            dim: 2,
            matrix: alloc::vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        };
        let u = expm_unitary(&h, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!((u[0] - Complex64::new(0.0, -1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((u[3] - Complex64::new(0.0, 1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u[1].norm() + u[2].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn expm_inverse_property() {
        let chain = ChainSpec::new(3, 1.0, 1.0, 0.2).unwrap();
        let h = build_hamiltonian(&chain, &[0.4, -1.3, 0.9]).unwrap();
        let fwd = expm_unitary(&h, 0.7).unwrap();
        let bwd = expm_unitary(&h, -0.7).unwrap();
        let prod = matmul(&fwd, &bwd, 8);
        for (a, b) in prod.iter().zip(identity(8)) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        assert!(unitarity_defect(&fwd, 8) < 1e-10);
    }

    #[test]
    fn constant_controls_collapse_to_single_exponential() {
        let chain = ChainSpec::new(2, 1.0, 1.0, 0.2).unwrap();
        let row = [0.3, -0.4];
        let controls = SliceControls::new(4, 2, alloc::vec![0.3, -0.4, 0.3, -0.4, 0.3, -0.4, 0.3, -0.4]).unwrap();
        let piecewise = exact_evolution(&chain, &controls, 2.0).unwrap();
        let h = build_hamiltonian(&chain, &row).unwrap();
        let direct = expm_unitary(&h, 2.0).unwrap();
        for (a, b) in piecewise.iter().zip(&direct) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_slice_equals_expm() {
        let chain = ChainSpec::new(3, 1.0, 1.0, 0.2).unwrap();
        let controls = SliceControls::zeros(1, 3);
        let evo = exact_evolution(&chain, &controls, 2.0).unwrap();
        let h = build_hamiltonian(&chain, &[0.0; 3]).unwrap();
        let direct = expm_unitary(&h, 2.0).unwrap();
        for (a, b) in evo.iter().zip(&direct) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }
}
