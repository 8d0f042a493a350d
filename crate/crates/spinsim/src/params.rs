//! Control parameterizations: the global harmonic scheme and the local
//! site-wise scheme, with packing, bounds, and seeded initialization.
//!
//! Packing layout is normative and pinned by golden tests:
//! - global: `[C_0 .. C_{L-1}, d_1 .. d_{L-2}]`, endpoints `d_0 = di` and
//!   `d_{L-1} = df` are anchored and never part of the vector;
//! - local: row-major `[θ_{0,0} .. θ_{0,N-1}, θ_{1,0}, ...]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::chain::SliceControls;
use crate::error::{invalid, Result};

/// Harmonic control profile `u(C, d, j) = ½ C (j - d)²`.
pub fn harmonic_profile(c: f64, d: f64, site: usize) -> f64 {
    let x = site as f64 - d;
    0.5 * c * x * x
}

/// Shared time series `C(t_l)`, `d(t_l)` with anchored endpoints; `2L - 2`
/// free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalScheme {
    pub n_slices: usize,
    /// Anchor positions: `d(t_0) = di`, `d(t_{L-1}) = df`.
    pub di: f64,
    pub df: f64,
    /// `C(t_l) ∈ [-c_bound, c_bound]`.
    pub c_bound: f64,
    /// Initialization range for `C(t_l)`.
    pub c_init: (f64, f64),
}

impl GlobalScheme {
    /// Default bounds (`C ∈ [-3, 3]`) and init (`C ~ U(-0.5, 0.5)`).
    pub fn new(n_slices: usize, di: f64, df: f64) -> Result<Self> {
        if n_slices < 2 {
            return Err(invalid("global scheme needs at least 2 slices"));
        }
        Ok(GlobalScheme { n_slices, di, df, c_bound: 3.0, c_init: (-0.5, 0.5) })
    }

    /// `d(t_l) ∈ [di - 1, df + 1]` for the interior values.
    pub fn d_bounds(&self) -> (f64, f64) {
        (self.di - 1.0, self.df + 1.0)
    }
}

/// Independent angle per site per slice; `N·L` parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalScheme {
    pub n_slices: usize,
    pub n_sites: usize,
    /// `θ_{l,j} ∈ [-bound, bound]`.
    pub bound: f64,
    /// Initialization range for every angle.
    pub init: (f64, f64),
}

impl LocalScheme {
    /// Default bounds (`±2π`) and init (`U(-0.5, 0.5)`).
    pub fn new(n_slices: usize, n_sites: usize) -> Result<Self> {
        if n_slices == 0 || n_sites == 0 {
            return Err(invalid("local scheme needs positive L and N"));
        }
        Ok(LocalScheme { n_slices, n_sites, bound: 2.0 * PI, init: (-0.5, 0.5) })
    }
}

/// Either control parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Global(GlobalScheme),
    Local(LocalScheme),
}

/// Flat parameter vector tagged with the scheme that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub scheme: Scheme,
}

impl Scheme {
    /// Number of free parameters: `NL` local, `2L - 2` global.
    pub fn param_count(&self) -> usize {
        match self {
            Scheme::Global(g) => 2 * g.n_slices - 2,
            Scheme::Local(l) => l.n_slices * l.n_sites,
        }
    }

    pub fn n_slices(&self) -> usize {
        match self {
            Scheme::Global(g) => g.n_slices,
            Scheme::Local(l) => l.n_slices,
        }
    }

    /// Element-wise box bounds in packing order.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Scheme::Global(g) => {
                let count = self.param_count();
                let mut lower = vec![-g.c_bound; count];
                let mut upper = vec![g.c_bound; count];
                let (dlo, dhi) = g.d_bounds();
                for i in g.n_slices..count {
                    lower[i] = dlo;
                    upper[i] = dhi;
                }
                (lower, upper)
            }
            Scheme::Local(l) => {
                let count = self.param_count();
                (vec![-l.bound; count], vec![l.bound; count])
            }
        }
    }

    /// Deterministic seeded initialization: random `C` plus a linear `d`
    /// ramp for the global scheme, i.i.d. uniform angles for the local one.
    pub fn initial_params(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = match self {
            Scheme::Global(g) => {
                let n = g.n_slices;
                let mut values = Vec::with_capacity(2 * n - 2);
                for _ in 0..n {
                    values.push(uniform(&mut rng, g.c_init.0, g.c_init.1));
                }
                let step = (g.df - g.di) / (n - 1) as f64;
                for l in 1..n - 1 {
                    values.push(g.di + l as f64 * step);
                }
                values
            }
            Scheme::Local(l) => (0..l.n_slices * l.n_sites)
                .map(|_| uniform(&mut rng, l.init.0, l.init.1))
                .collect(),
        };
        ParamVector { values, scheme: *self }
    }

    /// Expand a flat parameter vector into per-slice, per-site fields.
    pub fn unpack(&self, values: &[f64], n_sites: usize) -> Result<SliceControls> {
        if values.len() != self.param_count() {
            return Err(invalid("parameter vector length does not match scheme"));
        }
        match self {
            Scheme::Global(g) => {
                let n = g.n_slices;
                let mut u = Vec::with_capacity(n * n_sites);
                for l in 0..n {
                    let c = values[l];
                    let d = if l == 0 {
                        g.di
                    } else if l == n - 1 {
                        g.df
                    } else {
                        values[n + l - 1]
                    };
                    for j in 0..n_sites {
                        u.push(harmonic_profile(c, d, j));
                    }
                }
                SliceControls::new(n, n_sites, u)
            }
            Scheme::Local(l) => {
                if n_sites != l.n_sites {
                    return Err(invalid("site count does not match local scheme"));
                }
                SliceControls::new(l.n_slices, l.n_sites, values.to_vec())
            }
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    // 53-bit mantissa draw in [0, 1)
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * unit
}
