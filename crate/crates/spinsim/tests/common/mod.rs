//! Shared helpers for integration tests: an independent dense-matrix path
//! for gates and circuits, built from Kronecker products of Pauli matrices
//! rather than the library's in-place kernels.
//!
//! Each test binary compiles this module independently and uses a different
//! subset of it, so unused-item lints are suppressed.
#![allow(dead_code)]

use num_complex::Complex64;
use rand_core::RngCore;
use spinsim::{Circuit, GateDescriptor, GateKind};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2x2 Pauli matrices plus the identity.
pub fn pauli(name: char) -> [Complex64; 4] {
    match name {
        'I' => [ONE, ZERO, ZERO, ONE],
        'X' => [ZERO, ONE, ONE, ZERO],
        'Y' => [ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO],
        'Z' => [ONE, ZERO, ZERO, c(-1.0, 0.0)],
        _ => panic!("unknown Pauli"),
    }
}

/// Kronecker product of per-site 2x2 matrices, site 0 leftmost (most
/// significant bit), matching the library's basis convention.
pub fn kron_sites(factors: &[[Complex64; 4]]) -> Vec<Complex64> {
    let mut out = vec![ONE];
    let mut dim = 1usize;
    for f in factors {
        let nd = dim * 2;
        let mut next = vec![ZERO; nd * nd];
        for i in 0..dim {
            for j in 0..dim {
                let v = out[i * dim + j];
                for a in 0..2 {
                    for b in 0..2 {
                        next[(i * 2 + a) * nd + (j * 2 + b)] = v * f[a * 2 + b];
                    }
                }
            }
        }
        out = next;
        dim = nd;
    }
    out
}

/// Embed a Pauli string like `"IXX"` over `n` sites as a dense matrix.
pub fn pauli_string(labels: &str) -> Vec<Complex64> {
    let factors: Vec<[Complex64; 4]> = labels.chars().map(pauli).collect();
    kron_sites(&factors)
}

pub fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

/// Dense unitary of one gate: `cos(φ/2) I − i sin(φ/2) P` where `P` is the
/// gate's Pauli string (valid because `P² = I` for every gate kind here).
pub fn gate_matrix(gate: &GateDescriptor, n_qubits: usize) -> Vec<Complex64> {
    let mut labels: Vec<char> = vec!['I'; n_qubits];
    let p = match gate.kind {
        GateKind::Rz => 'Z',
        GateKind::Rxx => 'X',
        GateKind::Ryy => 'Y',
        GateKind::Rzz => 'Z',
    };
    labels[gate.target] = p;
    if let Some(b) = gate.partner {
        labels[b] = p;
    }
    let s: String = labels.into_iter().collect();
    let pm = pauli_string(&s);
    let dim = 1usize << n_qubits;
    let (cos_h, sin_h) = ((gate.angle / 2.0).cos(), (gate.angle / 2.0).sin());
    let mut out = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let ident = if i == j { ONE } else { ZERO };
            out[i * dim + j] = ident * cos_h - c(0.0, 1.0) * sin_h * pm[i * dim + j];
        }
    }
    out
}

/// Dense unitary of a whole circuit: ordered product of gate matrices,
/// first gate rightmost.
pub fn circuit_matrix(circuit: &Circuit) -> Vec<Complex64> {
    let dim = 1usize << circuit.n_qubits;
    let mut total: Vec<Complex64> = (0..dim * dim)
        .map(|i| if i % (dim + 1) == 0 { ONE } else { ZERO })
        .collect();
    for g in &circuit.gates {
        total = matmul(&gate_matrix(g, circuit.n_qubits), &total, dim);
    }
    total
}

/// Largest entry-wise magnitude of `a - b`.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Uniform f64 in [0, 1).
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform f64 in [lo, hi).
pub fn uniform_in(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(rng)
}
