//! Density-matrix backend for the depolarizing noise model.
//!
//! The per-qubit channel `E(ρ) = (1-p)ρ + p I/2` is implemented through its
//! Kraus set `{√(1-3p/4) I, √(p/4) X, √(p/4) Y, √(p/4) Z}`, reduced to its
//! closed-form action on matrix entries so one application touches a single
//! qubit of an N-qubit ρ directly. Noise is applied to every qubit after
//! each complete Trotter layer (drift plus control sub-layers).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::chain::Circuit;
use crate::error::{invalid, Result};
use crate::state::{GateDescriptor, StateVector};

/// Per-qubit depolarizing probability, applied after each Trotter layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub p: f64,
}

impl NoiseSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("depolarizing probability must be in [0, 1]"));
        }
        Ok(NoiseSpec { p })
    }
}

/// Mixed state of `n_qubits` sites, stored as a row-major 2^n × 2^n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    elems: Vec<Complex64>,
}

impl DensityMatrix {
    /// ρ = |ψ⟩⟨ψ|.
    pub fn from_pure(state: &StateVector) -> Self {
        let dim = state.dim();
        let amps = state.amplitudes();
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                elems[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        DensityMatrix { n_qubits: state.n_qubits(), elems }
    }

    /// Maximally mixed state I / 2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        let w = 1.0 / dim as f64;
        for r in 0..dim {
            elems[r * dim + r] = Complex64::new(w, 0.0);
        }
        DensityMatrix { n_qubits, elems }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elems[row * self.dim() + col]
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elems
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|r| self.elems[r * dim + r]).sum()
    }

    /// tr(ρ²); 1 for pure states, 1/2^n for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_{rc} ρ_{rc} ρ_{cr} = Σ |ρ_{rc}|² for Hermitian ρ
        self.elems.iter().map(|e| e.norm_sqr()).sum()
    }

    fn dagger_in_place(&mut self) {
        let dim = self.dim();
        for r in 0..dim {
            self.elems[r * dim + r] = self.elems[r * dim + r].conj();
            for c in r + 1..dim {
                let a = self.elems[r * dim + c].conj();
                let b = self.elems[c * dim + r].conj();
                self.elems[r * dim + c] = b;
                self.elems[c * dim + r] = a;
            }
        }
    }

    /// Left-multiply by the gate unitary: ρ ← Uρ, applying the statevector
    /// gate action to every column.
    fn left_multiply(&mut self, gate: &GateDescriptor) -> Result<()> {
        let dim = self.dim();
        for c in 0..dim {
            let column: Vec<Complex64> = (0..dim).map(|r| self.elems[r * dim + c]).collect();
            let mut col = StateVector::from_raw(self.n_qubits, column);
            col.apply_gate(gate)?;
            for (r, amp) in col.amplitudes().iter().enumerate() {
                self.elems[r * dim + c] = *amp;
            }
        }
        Ok(())
    }

    /// ρ ← UρU†.
    pub fn apply_gate(&mut self, gate: &GateDescriptor) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if gate.angle == 0.0 {
            return Ok(());
        }
        // UρU† = (U (Uρ)†)†
        self.left_multiply(gate)?;
        self.dagger_in_place();
        self.left_multiply(gate)?;
        self.dagger_in_place();
        Ok(())
    }

    /// Single-qubit depolarizing channel on `qubit`.
    ///
    /// With m the qubit's bit mask and b_r, b_c the qubit bits of an entry's
    /// row/column index, the Kraus sum collapses to
    /// `ρ'[r][c] = (1-p/2) ρ[r][c] + (p/2) ρ[r^m][c^m]` when `b_r = b_c` and
    /// `ρ'[r][c] = (1-p) ρ[r][c]` otherwise.
    pub fn apply_depolarizing(&mut self, qubit: usize, p: f64) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(invalid("qubit index out of range"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("depolarizing probability must be in [0, 1]"));
        }
        if p == 0.0 {
            return Ok(());
        }
        let dim = self.dim();
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        for r in 0..dim {
            for c in 0..dim {
                let br = r & mask != 0;
                let bc = c & mask != 0;
                if br != bc {
                    self.elems[r * dim + c] *= 1.0 - p;
                } else if !br {
                    // handle the (r,c)/(r^m,c^m) pair once, from the bit-0 side
                    let lo = r * dim + c;
                    let hi = (r | mask) * dim + (c | mask);
                    let a = self.elems[lo];
                    let b = self.elems[hi];
                    self.elems[lo] = (1.0 - p / 2.0) * a + (p / 2.0) * b;
                    self.elems[hi] = (1.0 - p / 2.0) * b + (p / 2.0) * a;
                }
            }
        }
        Ok(())
    }

    /// Run a layered circuit with per-qubit depolarizing noise after each
    /// complete layer.
    pub fn run_noisy_circuit(&mut self, circuit: &Circuit, noise: &NoiseSpec) -> Result<()> {
        if circuit.n_qubits != self.n_qubits {
            return Err(invalid("circuit qubit count does not match state"));
        }
        let mut next_gate = 0usize;
        for layer in 1..=circuit.layers {
            while next_gate < circuit.gates.len() && circuit.gates[next_gate].layer_index == layer {
                self.apply_gate(&circuit.gates[next_gate])?;
                next_gate += 1;
            }
            for q in 0..self.n_qubits {
                self.apply_depolarizing(q, noise.p)?;
            }
        }
        // gates with out-of-range layer markers would be silently dropped
        if next_gate != circuit.gates.len() {
            return Err(invalid("circuit gates are not grouped by layer_index 1..=layers"));
        }
        Ok(())
    }

    /// F = ⟨ψ|ρ|ψ⟩ against a pure target, clamped to [0, 1].
    pub fn fidelity_against_pure(&self, target: &StateVector) -> Result<f64> {
        if target.n_qubits() != self.n_qubits {
            return Err(invalid("state dimensions differ"));
        }
        let dim = self.dim();
        let amps = target.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                acc += amps[r].conj() * self.elems[r * dim + c] * amps[c];
            }
        }
        Ok(acc.re.clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{compile, ChainSpec, SliceControls};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn plus() -> StateVector {
        StateVector::from_amplitudes(
            1,
            vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn from_pure_examples() {
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(1, "0").unwrap());
        assert_eq!(rho.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(rho.get(1, 1), Complex64::new(0.0, 0.0));

        let rho = DensityMatrix::from_pure(&plus());
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(rho.get(r, c).re, 0.5, epsilon = 1e-15);
            }
        }
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);

        let rho = DensityMatrix::from_pure(&StateVector::basis_state(3, "100").unwrap());
        assert_eq!(rho.get(4, 4), Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gate_on_maximally_mixed_is_identity() {
        let mut rho = DensityMatrix::maximally_mixed(2);
        let before = rho.clone();
        rho.apply_gate(&GateDescriptor::rxx(0, 1, 1.234, 1)).unwrap();
        for (a, b) in rho.elements().iter().zip(before.elements()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rz_pi_maps_plus_to_minus() {
        // RZ(π)|+⟩ ∝ |−⟩, so the projector flips its off-diagonal sign
        let mut rho = DensityMatrix::from_pure(&plus());
        rho.apply_gate(&GateDescriptor::rz(0, PI, 1)).unwrap();
        assert_abs_diff_eq!(rho.get(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(0, 1).re, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(0, 1).im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn gate_then_inverse_restores_state() {
        let psi = StateVector::from_amplitudes(
            2,
            vec![
                Complex64::new(0.5, 0.1),
                Complex64::new(-0.2, 0.4),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.1, -0.6),
            ],
        )
        .unwrap();
        let base = DensityMatrix::from_pure(&psi);
        let g = GateDescriptor::ryy(0, 1, 0.77, 1);
        let mut rho = base.clone();
        rho.apply_gate(&g).unwrap();
        rho.apply_gate(&g.inverse()).unwrap();
        for (a, b) in rho.elements().iter().zip(base.elements()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn depolarizing_edge_cases() {
        let base = DensityMatrix::from_pure(&plus());
        let mut rho = base.clone();
        rho.apply_depolarizing(0, 0.0).unwrap();
        assert_eq!(rho, base);

        let mut rho = base.clone();
        rho.apply_depolarizing(0, 1.0).unwrap();
        assert_abs_diff_eq!(rho.get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.get(0, 1).norm(), 0.0, epsilon = 1e-15);

        assert!(base.clone().apply_depolarizing(0, 1.5).is_err());
        assert!(base.clone().apply_depolarizing(0, -0.1).is_err());
        assert!(base.clone().apply_depolarizing(1, 0.5).is_err());
    }

    #[test]
    fn depolarizing_purity_on_ground_state() {
        let mut rho = DensityMatrix::from_pure(&StateVector::basis_state(1, "0").unwrap());
        let p = 1e-3;
        rho.apply_depolarizing(0, p).unwrap();
        let expected = (1.0 - p / 2.0) * (1.0 - p / 2.0) + (p / 2.0) * (p / 2.0);
        assert_abs_diff_eq!(rho.purity(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn noiseless_noisy_run_matches_pure_run() {
        let chain = ChainSpec::new(3, 1.0, 1.0, 0.2).unwrap();
        let controls =
            SliceControls::new(4, 3, (0..12).map(|k| 0.2 * k as f64 - 1.0).collect()).unwrap();
        let circuit = compile(&chain, &controls, 2.0).unwrap();

        let mut psi = StateVector::basis_state(3, "100").unwrap();
        psi.run_circuit(&circuit).unwrap();
        let pure = DensityMatrix::from_pure(&psi);

        let mut rho = DensityMatrix::from_pure(&StateVector::basis_state(3, "100").unwrap());
        rho.run_noisy_circuit(&circuit, &NoiseSpec::new(0.0).unwrap()).unwrap();

        for (a, b) in rho.elements().iter().zip(pure.elements()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn empty_layer_full_depolarization() {
        let circuit = Circuit { n_qubits: 1, gates: vec![], layers: 1, dt: 1.0 };
        let mut rho = DensityMatrix::from_pure(&StateVector::basis_state(1, "0").unwrap());
        rho.run_noisy_circuit(&circuit, &NoiseSpec::new(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(rho.get(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_against_pure_examples() {
        let x = StateVector::basis_state(2, "01").unwrap();
        let rho = DensityMatrix::from_pure(&x);
        assert_abs_diff_eq!(rho.fidelity_against_pure(&x).unwrap(), 1.0, epsilon = 1e-15);

        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(mixed.fidelity_against_pure(&x).unwrap(), 0.25, epsilon = 1e-15);

        let rho = DensityMatrix::from_pure(&StateVector::basis_state(3, "100").unwrap());
        let tar = StateVector::basis_state(3, "001").unwrap();
        assert_eq!(rho.fidelity_against_pure(&tar).unwrap(), 0.0);

        assert!(mixed.fidelity_against_pure(&tar).is_err());
    }
}
