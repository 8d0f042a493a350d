//! Terminal-infidelity objective `J(θ) = 1 - F(θ)` with an optional
//! control-effort penalty, evaluated on the statevector backend or, when a
//! noise model is present, on the density-matrix backend.

use crate::chain::{compile, ChainSpec, Circuit};
use crate::density::{DensityMatrix, NoiseSpec};
use crate::error::{invalid, Result};
use crate::params::Scheme;
use crate::state::StateVector;

/// Everything needed to evaluate `J` at a parameter vector.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    pub chain: ChainSpec,
    pub scheme: Scheme,
    /// Total evolution time `T`.
    pub horizon: f64,
    pub psi_in: StateVector,
    pub psi_tar: StateVector,
    /// Depolarizing noise; `None` selects the pure-state backend.
    pub noise: Option<NoiseSpec>,
    /// Weight of the rectangle-rule effort penalty `λ Δt Σ u²`; 0 disables.
    pub lambda_reg: f64,
}

impl ObjectiveSpec {
    pub fn new(
        chain: ChainSpec,
        scheme: Scheme,
        horizon: f64,
        psi_in: StateVector,
        psi_tar: StateVector,
    ) -> Result<Self> {
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(invalid("horizon must be positive and finite"));
        }
        if psi_in.n_qubits() != chain.n_sites || psi_tar.n_qubits() != chain.n_sites {
            return Err(invalid("state dimension does not match chain"));
        }
        Ok(ObjectiveSpec { chain, scheme, horizon, psi_in, psi_tar, noise: None, lambda_reg: 0.0 })
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_regularization(mut self, lambda: f64) -> Self {
        self.lambda_reg = lambda;
        self
    }

    /// Compile the circuit the objective would simulate at `params`.
    pub fn compile(&self, params: &[f64]) -> Result<Circuit> {
        let controls = self.scheme.unpack(params, self.chain.n_sites)?;
        compile(&self.chain, &controls, self.horizon)
    }

    /// Terminal fidelity `F(θ)` under the configured backend.
    pub fn terminal_fidelity(&self, params: &[f64]) -> Result<f64> {
        if params.iter().any(|v| !v.is_finite()) {
            return Err(invalid("parameters must be finite"));
        }
        let circuit = self.compile(params)?;
        match &self.noise {
            None => {
                let mut psi = self.psi_in.clone();
                psi.run_circuit(&circuit)?;
                psi.fidelity_pure(&self.psi_tar)
            }
            Some(noise) => {
                let mut rho = DensityMatrix::from_pure(&self.psi_in);
                rho.run_noisy_circuit(&circuit, noise)?;
                rho.fidelity_against_pure(&self.psi_tar)
            }
        }
    }

    /// `J(θ) = 1 - F(θ) + λ Δt Σ_{l,j} u_j(t_l)²`.
    pub fn objective(&self, params: &[f64]) -> Result<f64> {
        let infidelity = 1.0 - self.terminal_fidelity(params)?;
        if self.lambda_reg == 0.0 {
            return Ok(infidelity);
        }
        let controls = self.scheme.unpack(params, self.chain.n_sites)?;
        let dt = self.horizon / controls.n_slices() as f64;
        Ok(infidelity + self.lambda_reg * controls.effort(dt))
    }
}
