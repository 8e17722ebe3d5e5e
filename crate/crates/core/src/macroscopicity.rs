//! Effective size, Fisher information and p-index of the ground state.
//!
//! For a pure state the quantum Fisher information of `A_n = sum_i sigma_i . n`
//! is four times its variance. The ground state is real and `U`-symmetric, so
//! the variance only has the diagonal `x`, `y`, `z` terms and its maximum sits
//! on one of the three axes; for any positive coupling that is `x`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlators::CorrelatorTable;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, fit_line};
use crate::spectrum::ChainParams;

/// Relative tie threshold (times `N`) for the axis candidates.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Even-`N` analogs of the `1000 < N < 2000` window.
pub const DEFAULT_P_INDEX_SIZES: [usize; 5] = [1024, 1280, 1536, 1792, 2048];

/// Point on the unit sphere, `theta` in `[0, pi]`, `phi` in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidParams(format!(
                "direction out of range: theta={theta}, phi={phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub(crate) fn new_unchecked(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn x() -> Self {
        Self::new_unchecked(FRAC_PI_2, 0.0)
    }

    pub fn y() -> Self {
        Self::new_unchecked(FRAC_PI_2, FRAC_PI_2)
    }

    pub fn z() -> Self {
        Self::new_unchecked(0.0, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(sin t cos p, sin t sin p, cos t)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMeasures {
    pub params: ChainParams,
    pub n_eff: f64,
    pub max_variance: f64,
    pub fisher: f64,
    pub argmax_dir: Direction,
    pub degenerate_argmax: bool,
}

/// `N * sum_n c[n]`: second moment of a total spin component on the ring.
fn ring_second_moment(n_sites: usize, corr: &[f64]) -> f64 {
    n_sites as f64 * compensated_sum(corr.iter().copied())
}

/// `(<X^2>, <Y^2>, <Z^2> - <Z>^2)`.
fn axis_variances(table: &CorrelatorTable) -> Result<[f64; 3]> {
    let (Some(yy), Some(zz), Some(mz)) = (table.yy(), table.zz(), table.mz()) else {
        return Err(Error::MissingCorrelators);
    };
    let n = table.n_sites();
    let z_mean = n as f64 * mz;
    Ok([
        ring_second_moment(n, table.xx()),
        ring_second_moment(n, yy),
        ring_second_moment(n, zz) - z_mean * z_mean,
    ])
}

/// Variance of `A_n` with the cross terms dropped (they vanish on this state).
pub fn variance_in_direction(table: &CorrelatorTable, dir: Direction) -> Result<f64> {
    let [vx, vy, vz] = axis_variances(table)?;
    let (st, ct) = dir.theta.sin_cos();
    let (sp, cp) = dir.phi.sin_cos();
    Ok(st * st * (vx * cp * cp + vy * sp * sp) + ct * ct * vz)
}

/// Best of the three critical directions and whether the top two tie.
/// Falls back to `x` when `yy`/`zz` are missing.
pub fn argmax_direction(table: &CorrelatorTable) -> (Direction, bool) {
    let Ok(vars) = axis_variances(table) else {
        return (Direction::x(), false);
    };
    // Candidates listed in lexicographic (theta, phi) order: z, x, y.
    let candidates = [(Direction::z(), vars[2]), (Direction::x(), vars[0]), (Direction::y(), vars[1])];
    let mut ranked = candidates;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let tol = DEGENERACY_TOL * table.n_sites() as f64;
    let degenerate = ranked[0].1 - ranked[1].1 < tol;
    let best = candidates
        .iter()
        .find(|c| ranked[0].1 - c.1 < tol)
        .map_or(ranked[0].0, |c| c.0);
    (best, degenerate)
}

pub fn effective_size(table: &CorrelatorTable) -> MacroMeasures {
    let n = table.n_sites() as f64;
    let n_eff = compensated_sum(table.xx().iter().copied());
    let (argmax_dir, degenerate_argmax) = argmax_direction(table);
    MacroMeasures {
        params: *table.params(),
        n_eff,
        max_variance: n * n_eff,
        fisher: 4.0 * n * n_eff,
        argmax_dir,
        degenerate_argmax,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIndex {
    pub p: f64,
    pub stderr: f64,
}

/// Slope of `log V` against `log N`.
pub fn p_index(sizes_to_maxvar: &BTreeMap<usize, f64>) -> Result<PIndex> {
    if sizes_to_maxvar.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "p-index needs at least 4 sizes, got {}",
            sizes_to_maxvar.len()
        )));
    }
    if let Some((&n, &v)) = sizes_to_maxvar.iter().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveData { x: n as f64, value: v });
    }
    let xs: Vec<f64> = sizes_to_maxvar.keys().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = sizes_to_maxvar.values().map(|v| v.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::InsufficientData("sizes must be distinct".into()))?;
    Ok(PIndex {
        p: fit.slope,
        stderr: fit.slope_stderr,
    })
}

/// Effective size of `(|+>^n + |->^n)/sqrt 2 (x) |0>^(N-n)`.
pub fn domain_wall_neff(n: usize, n_sites: usize) -> Result<f64> {
    if n > n_sites || n_sites == 0 {
        return Err(Error::WallOutOfRange { n, n_sites });
    }
    let nf = n as f64;
    Ok(nf * (nf - 1.0) / n_sites as f64 + 1.0)
}

/// Builds the domain-wall state with `|+>`/`|->` the `sigma^x` eigenstates on
/// the first `n` sites. `n = 0` is the plain `|0...0>` product.
pub fn domain_wall_state(n: usize, n_sites: usize) -> Result<Vec<Complex64>> {
    if n > n_sites || n_sites == 0 {
        return Err(Error::WallOutOfRange { n, n_sites });
    }
    if n_sites > crate::ed::MAX_ED_SITES {
        return Err(Error::OracleTooLarge {
            n_sites,
            max: crate::ed::MAX_ED_SITES,
        });
    }
    let dim = 1usize << n_sites;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    if n == 0 {
        psi[0] = Complex64::new(1.0, 0.0);
        return Ok(psi);
    }
    // |+>^n + |->^n expanded in the z basis: every pattern on the first n
    // sites, with the |-> branch contributing (-1)^{#ones}.
    let amp = (0.5f64).powf(n as f64 / 2.0);
    for (s, a) in psi.iter_mut().take(1 << n).enumerate() {
        let minus = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        *a = Complex64::new(amp * (1.0 + minus), 0.0);
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|a| *a /= norm);
    Ok(psi)
}

/// Largest axis variance of the explicit domain-wall state, over `N`.
pub fn domain_wall_neff_oracle(n: usize, n_sites: usize) -> Result<f64> {
    let psi = domain_wall_state(n, n_sites)?;
    let obs = crate::ed::observables_of_state(n_sites, &psi);
    let best = [Direction::x(), Direction::y(), Direction::z()]
        .into_iter()
        .map(|d| obs.variance_along(d))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best / n_sites as f64)
}
