//! XXZ chain definition and compilation of piecewise-constant controls into
//! a layered Trotter circuit.
//!
//! Each of the `L` layers is one first-order Trotter slice: the drift factor
//! as `RXX`/`RYY`/`RZZ` on every edge (left to right, in that order per
//! edge), then one `RZ` per site for the control factor. Drift acts before
//! controls within a layer. Zero-angle gates are emitted so the
//! `3(N-1) + N` gates-per-layer count holds for any couplings; the backends
//! short-circuit them.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::state::GateDescriptor;

/// Nearest-neighbor XXZ chain with couplings in energy units (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, jx: f64, jy: f64, jz: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(invalid("chain needs at least 2 sites"));
        }
        if !(jx.is_finite() && jy.is_finite() && jz.is_finite()) {
            return Err(invalid("couplings must be finite"));
        }
        Ok(ChainSpec { n_sites, jx, jy, jz })
    }
}

/// Control field values per slice and site: `u[l][j]` is the on-site Z field
/// on site `j` during slice `l`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceControls {
    n_slices: usize,
    n_sites: usize,
    values: Vec<f64>,
}

impl SliceControls {
    pub fn new(n_slices: usize, n_sites: usize, values: Vec<f64>) -> Result<Self> {
        if n_slices == 0 {
            return Err(invalid("need at least one slice"));
        }
        if values.len() != n_slices * n_sites {
            return Err(invalid("control matrix shape mismatch"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("control values must be finite"));
        }
        Ok(SliceControls { n_slices, n_sites, values })
    }

    pub fn zeros(n_slices: usize, n_sites: usize) -> Self {
        SliceControls {
            n_slices,
            n_sites,
            values: alloc::vec![0.0; n_slices * n_sites],
        }
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn row(&self, slice: usize) -> &[f64] {
        &self.values[slice * self.n_sites..(slice + 1) * self.n_sites]
    }

    pub fn get(&self, slice: usize, site: usize) -> f64 {
        self.values[slice * self.n_sites + site]
    }

    /// Rectangle-rule control effort, `Δt Σ_{l,j} u[l][j]²`.
    pub fn effort(&self, dt: f64) -> f64 {
        dt * self.values.iter().map(|u| u * u).sum::<f64>()
    }
}

/// Layered gate list produced by [`compile`]. Gate order is application
/// order; `layer_index` runs 1..=layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<GateDescriptor>,
    pub layers: usize,
    pub dt: f64,
}

impl Circuit {
    /// Line-oriented text form used by golden tests: one gate per line,
    /// `layer kind q0 [q1] angle`, angle at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            match g.partner {
                Some(b) => {
                    let _ = writeln!(out, "{} {} {} {} {:.16e}", g.layer_index, g.kind.name(), g.target, b, g.angle);
                }
                None => {
                    let _ = writeln!(out, "{} {} {} {:.16e}", g.layer_index, g.kind.name(), g.target, g.angle);
                }
            }
        }
        out
    }
}

/// Drift factor of one slice: for each edge `(k, k+1)` left to right,
/// `RXX(2 Jx Δt)`, `RYY(2 Jy Δt)`, `RZZ(2 Jz Δt)`.
pub fn drift_layer(chain: &ChainSpec, dt: f64, layer_index: usize) -> Vec<GateDescriptor> {
    let mut gates = Vec::with_capacity(3 * (chain.n_sites - 1));
    for k in 0..chain.n_sites - 1 {
        gates.push(GateDescriptor::rxx(k, k + 1, 2.0 * chain.jx * dt, layer_index));
        gates.push(GateDescriptor::ryy(k, k + 1, 2.0 * chain.jy * dt, layer_index));
        gates.push(GateDescriptor::rzz(k, k + 1, 2.0 * chain.jz * dt, layer_index));
    }
    gates
}

/// Control factor of one slice: `RZ(2 u[j] Δt)` on each site.
pub fn control_layer(u_row: &[f64], dt: f64, layer_index: usize) -> Vec<GateDescriptor> {
    u_row
        .iter()
        .enumerate()
        .map(|(j, &u)| GateDescriptor::rz(j, 2.0 * u * dt, layer_index))
        .collect()
}

/// Compile the full first-order Trotter circuit over horizon `T`:
/// `L` layers of drift-then-control with `Δt = T / L`.
pub fn compile(chain: &ChainSpec, controls: &SliceControls, horizon: f64) -> Result<Circuit> {
    if horizon <= 0.0 || !horizon.is_finite() {
        return Err(invalid("horizon must be positive and finite"));
    }
    if controls.n_sites() != chain.n_sites {
        return Err(invalid("controls site count does not match chain"));
    }
    let layers = controls.n_slices();
    let dt = horizon / layers as f64;
    let per_layer = 3 * (chain.n_sites - 1) + chain.n_sites;
    let mut gates = Vec::with_capacity(layers * per_layer);
    for l in 0..layers {
        let layer_index = l + 1;
        gates.extend(drift_layer(chain, dt, layer_index));
        gates.extend(control_layer(controls.row(l), dt, layer_index));
    }
    Ok(Circuit { n_qubits: chain.n_sites, gates, layers, dt })
}
