//! Spin two-point functions of the ground state from Wick coefficients.
//!
//! * `<sx_1 sx_{1+n}> = det[G_{i-j-1}]_{n x n}`
//! * `<sy_1 sy_{1+n}> = det[G_{i-j+1}]_{n x n}`
//! * `<sz_1 sz_{1+n}> = G_0^2 - G_n G_{-n}`, `<sz> = G_0`
//!
//! On the even-`N` antiperiodic grid these are the exact finite-ring values
//! (the ground state is the paired BCS state of that sector).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{wick_coefficients, ChainParams, WickCoefficients};
use crate::toeplitz::{det_sweep_with, DeterminantSweep, SweepMethod, SweepOptions, ToeplitzSymbol};

/// Allowed engine-vs-exact-diagonalization discrepancy at size `N`.
pub fn conv_tol(n_sites: usize) -> f64 {
    8.0 / n_sites as f64
}

/// How the `xx` determinants were produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub method: SweepMethod,
    pub breakdown_orders: Vec<usize>,
    pub cross_checked_orders: Vec<usize>,
}

impl From<&DeterminantSweep> for SweepMeta {
    fn from(sweep: &DeterminantSweep) -> Self {
        Self {
            method: sweep.method(),
            breakdown_orders: sweep.breakdown_orders().to_vec(),
            cross_checked_orders: sweep.cross_checked_orders().to_vec(),
        }
    }
}

/// Correlators `n = 0..N-1` at one chain point.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTable {
    params: ChainParams,
    xx: Vec<f64>,
    yy: Option<Vec<f64>>,
    zz: Option<Vec<f64>>,
    mz: Option<f64>,
    sweep_meta: Option<SweepMeta>,
}

impl CorrelatorTable {
    /// Assembles a table from stored values, e.g. a cache payload.
    pub fn from_parts(
        params: ChainParams,
        xx: Vec<f64>,
        yy: Option<Vec<f64>>,
        zz: Option<Vec<f64>>,
        mz: Option<f64>,
    ) -> Result<Self> {
        let n = params.n_sites();
        let bad_len = |v: &Vec<f64>| v.len() != n;
        if bad_len(&xx) || yy.as_ref().is_some_and(bad_len) || zz.as_ref().is_some_and(bad_len) {
            return Err(Error::InvalidParams(format!("correlator arrays must have {n} entries")));
        }
        if xx[0] != 1.0 {
            return Err(Error::InvalidParams(format!("xx[0] must be 1, got {}", xx[0])));
        }
        Ok(Self {
            params,
            xx,
            yy,
            zz,
            mz,
            sweep_meta: None,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites()
    }

    pub fn xx(&self) -> &[f64] {
        &self.xx
    }

    pub fn yy(&self) -> Option<&[f64]> {
        self.yy.as_deref()
    }

    pub fn zz(&self) -> Option<&[f64]> {
        self.zz.as_deref()
    }

    pub fn mz(&self) -> Option<f64> {
        self.mz
    }

    /// `None` for closed-form or deserialized tables.
    pub fn sweep_meta(&self) -> Option<&SweepMeta> {
        self.sweep_meta.as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.yy.is_some() && self.zz.is_some() && self.mz.is_some()
    }
}

fn determinant_family(
    wick: &WickCoefficients,
    shift: isize,
    opts: &SweepOptions,
) -> Result<(Vec<f64>, DeterminantSweep)> {
    let n_sites = wick.params().n_sites();
    let symbol = ToeplitzSymbol::from_fn(n_sites - 1, |m| wick.g(m + shift))?;
    let sweep = det_sweep_with(&symbol, n_sites - 1, opts)?;
    let mut values = Vec::with_capacity(n_sites);
    values.push(1.0);
    values.extend_from_slice(sweep.values());
    Ok((values, sweep))
}

fn kronecker(n_sites: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_sites];
    v[0] = 1.0;
    v
}

// At zero coupling every Toeplitz minor vanishes identically; the recursion
// would fall back to elimination at every order.
fn field_only(wick: &WickCoefficients) -> bool {
    wick.params().coupling() == 0.0
}

/// `xx` correlators with the production sweep options.
pub fn correlator_xx(wick: &WickCoefficients) -> Result<CorrelatorTable> {
    correlator_xx_with(wick, &SweepOptions::capped())
}

pub fn correlator_xx_with(wick: &WickCoefficients, opts: &SweepOptions) -> Result<CorrelatorTable> {
    let params = *wick.params();
    let (xx, sweep_meta) = if field_only(wick) {
        (kronecker(params.n_sites()), None)
    } else {
        let (xx, sweep) = determinant_family(wick, -1, opts)?;
        (xx, Some(SweepMeta::from(&sweep)))
    };
    Ok(CorrelatorTable {
        params,
        xx,
        yy: None,
        zz: None,
        mz: None,
        sweep_meta,
    })
}

/// `<sy_1 sy_{1+n}>` for `n = 0..N-1`.
pub fn correlator_yy(wick: &WickCoefficients) -> Result<Vec<f64>> {
    correlator_yy_with(wick, &SweepOptions::capped())
}

pub fn correlator_yy_with(wick: &WickCoefficients, opts: &SweepOptions) -> Result<Vec<f64>> {
    if field_only(wick) {
        return Ok(kronecker(wick.params().n_sites()));
    }
    Ok(determinant_family(wick, 1, opts)?.0)
}

/// `(<sz_1 sz_{1+n}>, <sz>)`.
pub fn correlator_zz(wick: &WickCoefficients) -> (Vec<f64>, f64) {
    let n_sites = wick.params().n_sites();
    let mz = wick.g(0);
    let zz = (0..n_sites as isize)
        .map(|n| if n == 0 { 1.0 } else { mz * mz - wick.g(n) * wick.g(-n) })
        .collect();
    (zz, mz)
}

/// All three families plus the magnetization.
pub fn full_table(wick: &WickCoefficients) -> Result<CorrelatorTable> {
    full_table_with(wick, &SweepOptions::capped())
}

pub fn full_table_with(wick: &WickCoefficients, opts: &SweepOptions) -> Result<CorrelatorTable> {
    let mut table = correlator_xx_with(wick, opts)?;
    let (zz, mz) = correlator_zz(wick);
    table.yy = Some(correlator_yy_with(wick, opts)?);
    table.zz = Some(zz);
    table.mz = Some(mz);
    Ok(table)
}

/// Convenience: Wick coefficients and the `xx` family for one point.
pub fn xx_table(params: &ChainParams) -> Result<CorrelatorTable> {
    correlator_xx(&wick_coefficients(params)?)
}

/// Convenience: Wick coefficients and every family for one point.
pub fn complete_table(params: &ChainParams) -> Result<CorrelatorTable> {
    full_table(&wick_coefficients(params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table(n: usize, lambda: f64) -> CorrelatorTable {
        complete_table(&ChainParams::even(n, lambda).unwrap()).unwrap()
    }

    #[test]
    fn field_only_point() {
        let t = table(8, 0.0);
        assert_eq!(t.xx(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.yy().unwrap(), t.xx());
        assert_abs_diff_eq!(t.mz().unwrap(), 1.0, epsilon = 1e-12);
        for &z in t.zz().unwrap() {
            assert_abs_diff_eq!(z, 1.0, epsilon = 1e-12);
        }
        assert!(t.sweep_meta().is_none());
    }

    #[test]
    fn near_zero_coupling_goes_through_determinants() {
        let t = table(8, 1e-3);
        assert!(t.sweep_meta().is_some());
        for n in 1..4 {
            assert!(t.xx()[n].abs() < 1e-3);
        }
    }

    #[test]
    fn strong_coupling_limit() {
        let t = table(8, 1e6);
        for &c in t.xx() {
            assert_abs_diff_eq!(c, 1.0, epsilon = 1e-5);
        }
        for &c in &t.yy().unwrap()[1..] {
            assert!(c.abs() < 1e-5);
        }
        assert!(t.mz().unwrap().abs() < 1e-5);
        for &c in &t.zz().unwrap()[1..] {
            assert!(c.abs() < 1e-5);
        }
    }

    #[test]
    fn xx_bounds_and_ring_symmetry() {
        for &lambda in &[0.2, 0.7, 1.0, 1.3, 2.5] {
            let t = xx_table(&ChainParams::even(64, lambda).unwrap()).unwrap();
            assert_eq!(t.xx()[0], 1.0);
            for n in 1..64 {
                let c = t.xx()[n];
                assert!((-1e-9..=1.0 + 1e-9).contains(&c), "lambda {lambda} n {n}: {c}");
                assert_abs_diff_eq!(c, t.xx()[64 - n], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn xx_non_increasing_up_to_half_ring() {
        for &lambda in &[0.1, 0.5, 0.9, 1.0] {
            let t = xx_table(&ChainParams::even(40, lambda).unwrap()).unwrap();
            for n in 0..20 {
                assert!(t.xx()[n + 1] <= t.xx()[n] + 1e-12);
            }
        }
    }

    #[test]
    fn xx_continuous_in_coupling() {
        let step = 0.01;
        let probe = 1e-5;
        let xx = |l: f64| xx_table(&ChainParams::even(16, l).unwrap()).unwrap().xx().to_vec();
        let lambdas: Vec<f64> = (0..=300).map(|i| i as f64 * step).collect();
        let rows: Vec<Vec<f64>> = lambdas.iter().map(|&l| xx(l)).collect();
        // Local slopes from a much finer probe at every grid point.
        let probed: Vec<Vec<f64>> = lambdas.iter().map(|&l| xx(l + probe)).collect();
        for n in 1..16 {
            let max_slope = rows
                .iter()
                .zip(&probed)
                .map(|(a, b)| (b[n] - a[n]).abs() / probe)
                .fold(0.0, f64::max);
            for w in rows.windows(2) {
                assert!((w[1][n] - w[0][n]).abs() <= 10.0 * step * max_slope);
            }
        }
    }

    #[test]
    fn from_parts_validates() {
        let p = ChainParams::even(4, 0.5).unwrap();
        assert!(CorrelatorTable::from_parts(p, vec![1.0, 0.5, 0.3, 0.5], None, None, None).is_ok());
        assert!(CorrelatorTable::from_parts(p, vec![1.0, 0.5], None, None, None).is_err());
        assert!(CorrelatorTable::from_parts(p, vec![0.9, 0.5, 0.3, 0.5], None, None, None).is_err());
    }
}
