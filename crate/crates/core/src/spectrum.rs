//! Free-fermion dispersion and the Wick coefficient sequences of the
//! periodic transverse-field Ising ring
//! `H = -lambda * sum sx_i sx_{i+1} - sum sz_i`.
//!
//! All two-point functions are built from
//!
//! ```text
//! Lambda_k = sqrt(1 + lambda^2 + 2 lambda cos k)
//! L_n      = (2/N) sum_{k in grid} cos(k n) / Lambda_k
//! G_n      = L_n + lambda L_{n+1},     L_{-n} = L_n
//! ```
//!
//! with the momentum grid fixed by [`GridConvention`].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Largest chain accepted by [`wick_coefficients`].
pub const DEFAULT_MAX_SITES: usize = 8192;

/// Below this a mode energy is treated as zero.
pub const DEGENERATE_MODE_TOL: f64 = 1e-12;

/// Momentum quantization of the fermionic modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridConvention {
    /// Antiperiodic momenta `(2m+1) pi / N`, `m < N/2`, even `N`. This is the
    /// sector of the finite-ring ground state and never contains `k = pi`.
    NeveuSchwarzEven,
    /// Momenta `(2m+1) pi / N`, `m = 0..=(N-1)/2`, odd `N`; contains `k = pi`.
    PaperOdd,
}

impl GridConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            GridConvention::NeveuSchwarzEven => "ns-even",
            GridConvention::PaperOdd => "paper-odd",
        }
    }

    /// Convention whose parity constraint `n_sites` satisfies.
    pub fn for_size(n_sites: usize) -> Self {
        if n_sites % 2 == 0 {
            GridConvention::NeveuSchwarzEven
        } else {
            GridConvention::PaperOdd
        }
    }
}

impl fmt::Display for GridConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GridConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ns-even" | "neveu-schwarz-even" | "neveuschwarzeven" | "even" => {
                Ok(GridConvention::NeveuSchwarzEven)
            }
            "paper-odd" | "paperodd" | "odd" => Ok(GridConvention::PaperOdd),
            other => Err(Error::InvalidParams(format!("unknown grid convention '{other}'"))),
        }
    }
}

/// The `(N, lambda)` point of an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    n_sites: usize,
    coupling: f64,
    grid: GridConvention,
}

impl ChainParams {
    pub fn new(n_sites: usize, coupling: f64, grid: GridConvention) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 sites, got {n_sites}")));
        }
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::InvalidParams(format!(
                "coupling must be finite and non-negative, got {coupling}"
            )));
        }
        let even = n_sites % 2 == 0;
        match (grid, even) {
            (GridConvention::NeveuSchwarzEven, false) => Err(Error::InvalidParams(format!(
                "grid {grid} requires an even number of sites, got {n_sites}"
            ))),
            (GridConvention::PaperOdd, true) => Err(Error::InvalidParams(format!(
                "grid {grid} requires an odd number of sites, got {n_sites}"
            ))),
            _ => Ok(Self {
                n_sites,
                coupling,
                grid,
            }),
        }
    }

    /// Even-`N` chain on the default grid.
    pub fn even(n_sites: usize, coupling: f64) -> Result<Self> {
        Self::new(n_sites, coupling, GridConvention::NeveuSchwarzEven)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn grid(&self) -> GridConvention {
        self.grid
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.n_sites, coupling, self.grid)
    }
}

/// Mode momenta in `(0, pi]`, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    momenta: Vec<f64>,
    // Odd integers q with k = q pi / N; used for exact cosine lookups.
    numerators: Vec<usize>,
}

impl MomentumGrid {
    pub fn new(n_sites: usize, grid: GridConvention) -> Self {
        let count = match grid {
            GridConvention::NeveuSchwarzEven => n_sites / 2,
            GridConvention::PaperOdd => n_sites.div_ceil(2),
        };
        let numerators: Vec<usize> = (0..count).map(|m| 2 * m + 1).collect();
        let momenta = numerators
            .iter()
            .map(|&q| q as f64 * PI / n_sites as f64)
            .collect();
        Self {
            momenta,
            numerators,
        }
    }

    pub fn for_params(params: &ChainParams) -> Self {
        Self::new(params.n_sites, params.grid)
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

/// `Lambda_k` for a single momentum.
pub fn dispersion(params: &ChainParams, k: f64) -> Result<f64> {
    if !(k > 0.0 && k <= PI) {
        return Err(Error::MomentumOutOfRange(k));
    }
    Ok(mode_energy(params.coupling, k.cos()))
}

#[inline]
fn mode_energy(coupling: f64, cos_k: f64) -> f64 {
    // Clamp guards the k = pi, lambda = 1 zero against a tiny negative radicand.
    (1.0 + coupling * coupling + 2.0 * coupling * cos_k).max(0.0).sqrt()
}

/// `Lambda_k`, `L_n` and `G_n` for one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct WickCoefficients {
    params: ChainParams,
    dispersion: Vec<f64>,
    l_seq: Vec<f64>,
    g_seq: Vec<f64>,
}

impl WickCoefficients {
    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    /// `Lambda_k` over the momentum grid.
    pub fn dispersion(&self) -> &[f64] {
        &self.dispersion
    }

    /// `L_0 ..= L_N`.
    pub fn l_seq(&self) -> &[f64] {
        &self.l_seq
    }

    /// `L_n` for `|n| <= N`.
    pub fn l(&self, n: isize) -> f64 {
        self.l_seq[n.unsigned_abs()]
    }

    /// `G_n` for `-N <= n <= N`.
    pub fn g(&self, n: isize) -> f64 {
        let offset = self.params.n_sites as isize;
        self.g_seq[(n + offset) as usize]
    }

    /// `G_{-N} ..= G_N`.
    pub fn g_seq(&self) -> &[f64] {
        &self.g_seq
    }
}

/// Computes the Wick coefficients with the default size limit.
pub fn wick_coefficients(params: &ChainParams) -> Result<WickCoefficients> {
    wick_coefficients_with_limit(params, DEFAULT_MAX_SITES)
}

pub fn wick_coefficients_with_limit(
    params: &ChainParams,
    max_sites: usize,
) -> Result<WickCoefficients> {
    let n_sites = params.n_sites;
    if n_sites > max_sites {
        return Err(Error::SizeLimit {
            n_sites,
            max: max_sites,
        });
    }
    let lambda = params.coupling;
    let grid = MomentumGrid::for_params(params);

    // cos(q n pi / N) depends only on q n mod 2N.
    let period = 2 * n_sites;
    let cos_table: Vec<f64> = (0..period)
        .map(|j| (j as f64 * PI / n_sites as f64).cos())
        .collect();

    let mut dispersion = Vec::with_capacity(grid.len());
    let mut inv_energy = Vec::with_capacity(grid.len());
    for (&q, &k) in grid.numerators.iter().zip(&grid.momenta) {
        let energy = mode_energy(lambda, cos_table[q % period]);
        if energy < DEGENERATE_MODE_TOL {
            return Err(Error::DegenerateMode {
                momentum: k,
                value: energy,
            });
        }
        dispersion.push(energy);
        inv_energy.push(1.0 / energy);
    }

    let scale = 2.0 / n_sites as f64;
    let l_at = |n: usize| -> f64 {
        let mut acc = CompensatedSum::new();
        for (&q, &w) in grid.numerators.iter().zip(&inv_energy) {
            acc.add(cos_table[(q * n) % period] * w);
        }
        scale * acc.value()
    };
    // One extra entry: G_N needs L_{N+1}.
    let l_ext: Vec<f64> = (0..=n_sites + 1).map(l_at).collect();

    let g_seq = (-(n_sites as isize)..=n_sites as isize)
        .map(|n| l_ext[n.unsigned_abs()] + lambda * l_ext[(n + 1).unsigned_abs()])
        .collect();
    let mut l_seq = l_ext;
    l_seq.truncate(n_sites + 1);

    Ok(WickCoefficients {
        params: *params,
        dispersion,
        l_seq,
        g_seq,
    })
}
