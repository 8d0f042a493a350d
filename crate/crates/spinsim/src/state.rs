//! Statevector backend: gate application, fidelity, and site populations.
//!
//! Gates act in place on amplitude pairs/quadruples, so one gate costs
//! `O(2^N)` regardless of kind; the full unitary is never materialized.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::chain::Circuit;
use crate::error::{invalid, Result};

/// Rotation gates the compiler emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rz,
    Rxx,
    Ryy,
    Rzz,
}

impl GateKind {
    /// Mnemonic used by the circuit text format.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rz => "RZ",
            GateKind::Rxx => "RXX",
            GateKind::Ryy => "RYY",
            GateKind::Rzz => "RZZ",
        }
    }
}

/// One gate of a compiled circuit.
///
/// `RZ(φ) = exp(-i φ Z/2)`; `RXX/RYY/RZZ(φ) = exp(-i φ P⊗P/2)`.
/// `layer_index` is the 1-based Trotter slice the gate belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDescriptor {
    pub kind: GateKind,
    pub target: usize,
    /// Second qubit for the two-qubit kinds, `None` for `RZ`.
    pub partner: Option<usize>,
    pub angle: f64,
    pub layer_index: usize,
}

impl GateDescriptor {
    pub fn rz(qubit: usize, angle: f64, layer_index: usize) -> Self {
        GateDescriptor { kind: GateKind::Rz, target: qubit, partner: None, angle, layer_index }
    }

    pub fn rxx(a: usize, b: usize, angle: f64, layer_index: usize) -> Self {
        GateDescriptor { kind: GateKind::Rxx, target: a, partner: Some(b), angle, layer_index }
    }

    pub fn ryy(a: usize, b: usize, angle: f64, layer_index: usize) -> Self {
        GateDescriptor { kind: GateKind::Ryy, target: a, partner: Some(b), angle, layer_index }
    }

    pub fn rzz(a: usize, b: usize, angle: f64, layer_index: usize) -> Self {
        GateDescriptor { kind: GateKind::Rzz, target: a, partner: Some(b), angle, layer_index }
    }

    pub(crate) fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(invalid("gate qubit index out of range"));
        }
        match (self.kind, self.partner) {
            (GateKind::Rz, None) => Ok(()),
            (GateKind::Rz, Some(_)) => Err(invalid("RZ takes exactly one qubit")),
            (_, None) => Err(invalid("two-qubit gate needs a partner qubit")),
            (_, Some(b)) if b >= n_qubits => Err(invalid("gate qubit index out of range")),
            (_, Some(b)) if b == self.target => Err(invalid("two-qubit gate needs distinct qubits")),
            _ => Ok(()),
        }
    }

    /// Gate with the opposite rotation angle.
    pub fn inverse(&self) -> Self {
        GateDescriptor { angle: -self.angle, ..*self }
    }
}

/// Normalized pure state of `n_qubits` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state named by a ket label, leftmost character
    /// is site 0.
    pub fn basis_state(n_qubits: usize, bitstring: &str) -> Result<Self> {
        if n_qubits == 0 {
            return Err(invalid("need at least one qubit"));
        }
        if bitstring.len() != n_qubits {
            return Err(invalid("bitstring length must equal n_qubits"));
        }
        let mut index = 0usize;
        for ch in bitstring.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                _ => return Err(invalid("bitstring characters must be 0 or 1")),
            }
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Build from raw amplitudes, normalizing; errors on a zero vector.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(invalid("amplitude vector length must be 2^n_qubits"));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(invalid("amplitudes must have positive finite norm"));
        }
        let scale = 1.0 / sqrt(norm_sq);
        let amplitudes = amplitudes.into_iter().map(|a| a * scale).collect();
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Unnormalized constructor for internal linear-algebra use; gate
    /// application is linear and does not require a unit vector.
    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        StateVector { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(invalid("state dimensions differ"));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Bit mask selecting site `j` in a basis index (site 0 = MSB).
    fn site_mask(&self, site: usize) -> usize {
        1 << (self.n_qubits - 1 - site)
    }

    /// Apply one rotation gate in place.
    pub fn apply_gate(&mut self, gate: &GateDescriptor) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if gate.angle == 0.0 {
            return Ok(());
        }
        let half = 0.5 * gate.angle;
        let (c, s) = (cos(half), sin(half));
        match gate.kind {
            GateKind::Rz => {
                let mask = self.site_mask(gate.target);
                let lo = Complex64::new(c, -s); // e^{-iφ/2}
                let hi = Complex64::new(c, s);
                for (idx, amp) in self.amplitudes.iter_mut().enumerate() {
                    *amp *= if idx & mask == 0 { lo } else { hi };
                }
            }
            GateKind::Rzz => {
                let ma = self.site_mask(gate.target);
                let mb = self.site_mask(gate.partner.unwrap());
                let even = Complex64::new(c, -s);
                let odd = Complex64::new(c, s);
                for (idx, amp) in self.amplitudes.iter_mut().enumerate() {
                    let parity = ((idx & ma) != 0) != ((idx & mb) != 0);
                    *amp *= if parity { odd } else { even };
                }
            }
            GateKind::Rxx | GateKind::Ryy => {
                let ma = self.site_mask(gate.target);
                let mb = self.site_mask(gate.partner.unwrap());
                // exp(-iφ XX/2): (a, b) -> (c a - i s b, c b - i s a) on the
                // index pairs swapped by XX. YY differs only by the sign of
                // the coupling on the equal-bit pair.
                let is = Complex64::new(0.0, s);
                let (k_eq, k_ne) = match gate.kind {
                    GateKind::Rxx => (-is, -is),
                    GateKind::Ryy => (is, -is),
                    _ => unreachable!(),
                };
                for idx in 0..self.amplitudes.len() {
                    if idx & ma != 0 || idx & mb != 0 {
                        continue;
                    }
                    let i00 = idx;
                    let i01 = idx | mb;
                    let i10 = idx | ma;
                    let i11 = idx | ma | mb;
                    let (a00, a11) = (self.amplitudes[i00], self.amplitudes[i11]);
                    self.amplitudes[i00] = c * a00 + k_eq * a11;
                    self.amplitudes[i11] = c * a11 + k_eq * a00;
                    let (a01, a10) = (self.amplitudes[i01], self.amplitudes[i10]);
                    self.amplitudes[i01] = c * a01 + k_ne * a10;
                    self.amplitudes[i10] = c * a10 + k_ne * a01;
                }
            }
        }
        Ok(())
    }

    /// Apply every gate of `circuit` in list order.
    pub fn run_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits != self.n_qubits {
            return Err(invalid("circuit qubit count does not match state"));
        }
        for gate in &circuit.gates {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// |⟨a|b⟩|².
    pub fn fidelity_pure(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability of finding site `j` in |1⟩, for every site.
    pub fn site_populations(&self) -> Vec<f64> {
        let mut pops = vec![0.0; self.n_qubits];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let w = amp.norm_sqr();
            for (site, pop) in pops.iter_mut().enumerate() {
                if idx & (1 << (self.n_qubits - 1 - site)) != 0 {
                    *pop += w;
                }
            }
        }
        pops
    }

    /// Ket label of the dominant basis state, for diagnostics.
    pub fn dominant_label(&self) -> String {
        let (idx, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .unwrap();
        (0..self.n_qubits)
            .map(|site| if idx & (1 << (self.n_qubits - 1 - site)) != 0 { '1' } else { '0' })
            .collect()
    }
}
