//! Finite-size scaling of `dN_eff/dlambda`: sweeps, peaks, power laws and
//! data collapse.

pub mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::xx_table;
use crate::error::{Error, Result};
use crate::macroscopicity::effective_size;
use crate::numeric::fit_line;
use crate::spectrum::{ChainParams, GridConvention};

use simplex::{minimize, SimplexOptions};

/// Inclusive arithmetic segment `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSegment {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSegment {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
            return Err(Error::InvalidGrid(format!("bad segment [{lo}, {hi}] step {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn points(&self) -> Vec<f64> {
        // Multiples of the step, not repeated addition.
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// Union of segments, sorted, points closer than `1e-12` merged.
pub fn grid_from_segments(segments: &[GridSegment]) -> Vec<f64> {
    let mut all: Vec<f64> = segments.iter().flat_map(|s| s.points()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    all
}

pub const COARSE_STEP: f64 = 0.01;
pub const FINE_STEP: f64 = 0.0005;

/// `0.01` steps on `[0, 0.8] U [1.1, 2.0]`, `0.0005` steps on `[0.8, 1.1]`.
pub fn production_grid() -> Vec<f64> {
    grid_from_segments(&[
        GridSegment { lo: 0.0, hi: 0.8, step: COARSE_STEP },
        GridSegment { lo: 0.8, hi: 1.1, step: FINE_STEP },
        GridSegment { lo: 1.1, hi: 2.0, step: COARSE_STEP },
    ])
}

/// Window around a peak on the scaling variable `x = N (lambda - center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineWindow {
    pub half_width: f64,
    pub step: f64,
}

impl Default for RefineWindow {
    fn default() -> Self {
        Self {
            half_width: 6.0,
            step: 0.025,
        }
    }
}

impl RefineWindow {
    pub fn lambdas(&self, center: f64, n_sites: usize) -> Vec<f64> {
        let count = (self.half_width / self.step + 1e-9).floor() as i64;
        let n = n_sites as f64;
        (-count..=count)
            .map(|i| center + i as f64 * self.step / n)
            .filter(|&l| l >= 0.0)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub n_sites: usize,
    pub lambdas: Vec<f64>,
    pub neff: Vec<f64>,
    pub dneff: Vec<f64>,
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidGrid("empty coupling grid".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("coupling grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Central differences inside, one-sided at the ends; zero for a single point.
pub fn differentiate(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (ys[b] - ys[a]) / (xs[b] - xs[a])
        })
        .collect()
}

impl SweepCurve {
    pub fn from_values(n_sites: usize, lambdas: Vec<f64>, neff: Vec<f64>) -> Result<Self> {
        check_grid(&lambdas)?;
        if neff.len() != lambdas.len() {
            return Err(Error::InvalidGrid("value and grid lengths differ".into()));
        }
        let dneff = differentiate(&lambdas, &neff);
        Ok(Self {
            n_sites,
            lambdas,
            neff,
            dneff,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// `N_eff` at one point from the determinant engine.
pub fn neff_at(n_sites: usize, coupling: f64, grid: GridConvention) -> Result<f64> {
    let params = ChainParams::new(n_sites, coupling, grid)?;
    Ok(effective_size(&xx_table(&params)?).n_eff)
}

/// Sweeps with a caller-supplied evaluator (e.g. a cache in front of
/// [`neff_at`]). Points run in parallel on the current rayon pool; the first
/// failing point in grid order aborts the curve.
pub fn sweep_with<F>(n_sites: usize, lambdas: &[f64], eval: F) -> Result<SweepCurve>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    check_grid(lambdas)?;
    let neff: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| {
            eval(l).map_err(|e| Error::AtPoint {
                n_sites,
                coupling: l,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    SweepCurve::from_values(n_sites, lambdas.to_vec(), neff)
}

pub fn sweep(n_sites: usize, lambdas: &[f64], grid: GridConvention) -> Result<SweepCurve> {
    sweep_with(n_sites, lambdas, |l| neff_at(n_sites, l, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakData {
    pub n_sites: usize,
    pub lambda_m: f64,
    pub peak_height: f64,
}

/// Vertex of the parabola through the discrete maximum of `dneff` and its
/// neighbours.
pub fn locate_peak(curve: &SweepCurve) -> Result<PeakData> {
    let d = &curve.dneff;
    let mut best = 0;
    for (i, &v) in d.iter().enumerate() {
        if v > d[best] {
            best = i;
        }
    }
    if best == 0 || best + 1 == d.len() {
        return Err(Error::PeakOnBoundary {
            n_sites: curve.n_sites,
            lambda: curve.lambdas.get(best).copied().unwrap_or(f64::NAN),
        });
    }
    let x1 = curve.lambdas[best];
    let (h0, h2) = (curve.lambdas[best - 1] - x1, curve.lambdas[best + 1] - x1);
    let (dy0, dy2) = (d[best - 1] - d[best], d[best + 1] - d[best]);
    let det = h0 * h2 * (h0 - h2);
    let a = (dy0 * h2 - dy2 * h0) / det;
    let b = (dy2 * h0 * h0 - dy0 * h2 * h2) / det;
    let (lambda_m, peak_height) = if a < 0.0 {
        (x1 - b / (2.0 * a), d[best] - b * b / (4.0 * a))
    } else {
        (x1, d[best])
    };
    Ok(PeakData {
        n_sites: curve.n_sites,
        lambda_m,
        peak_height,
    })
}

/// Power law `y = amplitude * N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub amplitude: f64,
    pub stderr: f64,
    pub r_squared: f64,
}

fn log_log_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, value)) = points.iter().find(|(x, y)| !(*y > 0.0) || !(*x > 0.0)) {
        return Err(Error::NonPositiveData { x, value });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::InsufficientData("abscissae must be distinct".into()))?;
    Ok(FitResult {
        exponent: fit.slope,
        amplitude: fit.intercept.exp(),
        stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
    })
}

/// Ordinary least squares on `(ln N, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    log_log_fit(points)
}

/// `1 - lambda_m(N)` against `N`; the exponent comes out negative.
pub fn fit_peak_positions(peaks: &[PeakData]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = peaks.iter().map(|p| (p.n_sites as f64, 1.0 - p.lambda_m)).collect();
    fit_power_law(&pts)
}

pub fn fit_peak_heights(peaks: &[PeakData]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = peaks.iter().map(|p| (p.n_sites as f64, p.peak_height)).collect();
    fit_power_law(&pts)
}

/// Slope of `ln dneff` against `ln(1 - lambda)` on `[lo, hi]`; a divergence
/// `(1 - lambda)^-a` is reported as `-a`.
pub fn asymptotic_divergence_fit(curve: &SweepCurve, window: (f64, f64), lambda_m: f64) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidGrid(format!("empty window [{lo}, {hi}]")));
    }
    if hi > lambda_m - 10.0 / curve.n_sites as f64 {
        return Err(Error::WindowTooClose { lo, hi, lambda_m });
    }
    let pts: Vec<(f64, f64)> = curve
        .lambdas
        .iter()
        .zip(&curve.dneff)
        .filter(|(&l, _)| l >= lo - 1e-12 && l <= hi + 1e-12)
        .map(|(&l, &d)| (1.0 - l, d))
        .collect();
    log_log_fit(&pts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub b: f64,
    pub nu_inverse: f64,
    pub nu: f64,
    pub residual: f64,
    /// Median rescaled curve `(x, Q(x))`.
    pub q_curve: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

/// Points on the common rescaled axis.
pub const COLLAPSE_SAMPLES: usize = 200;

/// One curve on the scaling axes `x = N^nu_inv (lambda - lambda_m)`,
/// `y = (dneff - peak_height) / N^b`.
pub fn rescale(curve: &SweepCurve, peak: &PeakData, b: f64, nu_inv: f64) -> (Vec<f64>, Vec<f64>) {
    let n = curve.n_sites as f64;
    let sx = n.powf(nu_inv);
    let sy = n.powf(b);
    let xs = curve.lambdas.iter().map(|l| sx * (l - peak.lambda_m)).collect();
    let ys = curve.dneff.iter().map(|d| (d - peak.peak_height) / sy).collect();
    (xs, ys)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i >= xs.len() {
        return ys[xs.len() - 1];
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

fn match_peaks<'a>(curves: &[SweepCurve], peaks: &'a [PeakData]) -> Result<Vec<&'a PeakData>> {
    if curves.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "collapse needs at least 3 curves, got {}",
            curves.len()
        )));
    }
    curves
        .iter()
        .map(|c| {
            peaks
                .iter()
                .find(|p| p.n_sites == c.n_sites)
                .ok_or_else(|| Error::InsufficientData(format!("no peak for N={}", c.n_sites)))
        })
        .collect()
}

/// Spread of the rescaled curves: mean over pairs of the mean squared
/// difference on a common grid, divided by the mean square of the curves.
pub fn collapse(curves: &[SweepCurve], peaks: &[PeakData], b: f64, nu_inv: f64) -> Result<CollapseResult> {
    let matched = match_peaks(curves, peaks)?;
    collapse_matched(curves, &matched, b, nu_inv)
}

fn collapse_matched(curves: &[SweepCurve], peaks: &[&PeakData], b: f64, nu_inv: f64) -> Result<CollapseResult> {
    let rescaled: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .zip(peaks)
        .map(|(c, p)| rescale(c, p, b, nu_inv))
        .collect();
    let lo = rescaled.iter().map(|(x, _)| x[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = rescaled.iter().map(|(x, _)| x[x.len() - 1]).fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        return Err(Error::NoOverlap);
    }
    let grid: Vec<f64> = (0..COLLAPSE_SAMPLES)
        .map(|i| lo + (hi - lo) * i as f64 / (COLLAPSE_SAMPLES - 1) as f64)
        .collect();
    let sampled: Vec<Vec<f64>> = rescaled
        .iter()
        .map(|(x, y)| grid.iter().map(|&g| interpolate(x, y, g)).collect())
        .collect();

    let m = sampled.len();
    let mut spread = 0.0;
    let mut pairs = 0usize;
    for i in 0..m {
        for j in i + 1..m {
            spread += sampled[i]
                .iter()
                .zip(&sampled[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / grid.len() as f64;
            pairs += 1;
        }
    }
    spread /= pairs as f64;
    let scale = sampled
        .iter()
        .map(|s| s.iter().map(|v| v * v).sum::<f64>() / grid.len() as f64)
        .sum::<f64>()
        / m as f64;
    let residual = if scale > 0.0 { spread / scale } else { spread };

    let q_curve = grid
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let mut col: Vec<f64> = sampled.iter().map(|s| s[k]).collect();
            col.sort_by(f64::total_cmp);
            let median = if m % 2 == 1 {
                col[m / 2]
            } else {
                0.5 * (col[m / 2 - 1] + col[m / 2])
            };
            (x, median)
        })
        .collect();
    Ok(CollapseResult {
        b,
        nu_inverse: nu_inv,
        nu: 1.0 / nu_inv,
        residual,
        q_curve,
        iterations: 0,
        converged: true,
    })
}

pub const COLLAPSE_START: (f64, f64) = (2.0, 1.0);

/// Simplex search over `(b, nu_inv)` from [`COLLAPSE_START`]. A run that
/// exhausts the iteration budget returns its best point with
/// `converged = false`.
pub fn optimize_collapse(curves: &[SweepCurve], peaks: &[PeakData]) -> Result<CollapseResult> {
    optimize_collapse_with(curves, peaks, &SimplexOptions::default())
}

pub fn optimize_collapse_with(
    curves: &[SweepCurve],
    peaks: &[PeakData],
    opts: &SimplexOptions,
) -> Result<CollapseResult> {
    let matched = match_peaks(curves, peaks)?;
    // Fails early with NoOverlap when even the start point has no common range.
    collapse_matched(curves, &matched, COLLAPSE_START.0, COLLAPSE_START.1)?;
    let objective = |p: &[f64]| {
        if p[1] <= 0.0 {
            return f64::INFINITY;
        }
        collapse_matched(curves, &matched, p[0], p[1]).map_or(f64::INFINITY, |c| c.residual)
    };
    let found = minimize(objective, &[COLLAPSE_START.0, COLLAPSE_START.1], opts);
    let mut result = collapse_matched(curves, &matched, found.x[0], found.x[1])?;
    result.iterations = found.iterations;
    result.converged = found.converged;
    Ok(result)
}

/// Everything the scaling analysis reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub peaks: Vec<PeakData>,
    pub peak_position_fit: FitResult,
    pub peak_height_fit: FitResult,
    pub collapse: CollapseResult,
    /// `collapse.b - peak_height_fit.exponent`.
    pub height_collapse_gap: f64,
    pub asymptotic: Option<FitResult>,
}

/// Coarse sweep, then a window `lambda_coarse + x / N` around the coarse
/// peak. Returns the coarse curve, the refined curve and the refined peak.
pub fn refine_peak<F>(
    n_sites: usize,
    coarse_grid: &[f64],
    window: &RefineWindow,
    eval: F,
) -> Result<(SweepCurve, SweepCurve, PeakData)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let coarse = sweep_with(n_sites, coarse_grid, &eval)?;
    let rough = locate_peak(&coarse)?;
    let fine = sweep_with(n_sites, &window.lambdas(rough.lambda_m, n_sites), &eval)?;
    let peak = locate_peak(&fine)?;
    Ok((coarse, fine, peak))
}

/// Fits and collapse from refined curves (one per size, ascending `N`).
pub fn analyze(refined: &[SweepCurve], peaks: &[PeakData], asymptotic: Option<FitResult>) -> Result<ScalingReport> {
    let peak_position_fit = fit_peak_positions(peaks)?;
    let peak_height_fit = fit_peak_heights(peaks)?;
    let collapse = optimize_collapse(refined, peaks)?;
    Ok(ScalingReport {
        peaks: peaks.to_vec(),
        peak_position_fit,
        peak_height_fit,
        height_collapse_gap: collapse.b - peak_height_fit.exponent,
        collapse,
        asymptotic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn production_grid_shape() {
        let g = production_grid();
        assert_eq!(g[0], 0.0);
        assert_abs_diff_eq!(*g.last().unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(g.len(), 81 + 600 + 90);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_point_and_difference() {
        let c = sweep(8, &[0.0], GridConvention::NeveuSchwarzEven).unwrap();
        assert_eq!(c.neff, vec![1.0]);
        let c = sweep(12, &[0.5, 0.51], GridConvention::NeveuSchwarzEven).unwrap();
        let slope = (c.neff[1] - c.neff[0]) / (0.51 - 0.5);
        assert_abs_diff_eq!(c.dneff[0], slope, epsilon = 1e-12);
        assert_abs_diff_eq!(c.dneff[1], slope, epsilon = 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_grids_and_names_failing_point() {
        assert!(sweep(8, &[0.5, 0.5], GridConvention::NeveuSchwarzEven).is_err());
        assert!(sweep(8, &[], GridConvention::NeveuSchwarzEven).is_err());
        let err = sweep_with(8, &[0.1, 0.2, 0.3], |l| {
            if l > 0.15 {
                Err(Error::InvalidParams("boom".into()))
            } else {
                Ok(1.0)
            }
        })
        .unwrap_err();
        match err {
            Error::AtPoint { n_sites, coupling, .. } => {
                assert_eq!(n_sites, 8);
                assert_eq!(coupling, 0.2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn peak_exact_on_parabola() {
        for grid in [vec![0.8, 0.85, 0.88, 0.93, 1.0], (0..40).map(|i| 0.5 + i as f64 * 0.013).collect()] {
            let n = grid.len();
            let curve = SweepCurve {
                n_sites: 8,
                dneff: grid.iter().map(|l| 5.0 - (l - 0.9).powi(2)).collect(),
                neff: vec![0.0; n],
                lambdas: grid,
            };
            let p = locate_peak(&curve).unwrap();
            assert_abs_diff_eq!(p.lambda_m, 0.9, epsilon = 1e-12);
            assert_abs_diff_eq!(p.peak_height, 5.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn peak_on_boundary_rejected() {
        let curve = SweepCurve::from_values(8, vec![0.0, 0.1, 0.2, 0.3], vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert!(matches!(locate_peak(&curve), Err(Error::PeakOnBoundary { .. })));
    }

    #[test]
    fn power_law_exact() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0].iter().map(|&n| (n, 3.0 * n * n)).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert_abs_diff_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.amplitude, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        let mut bad = pts.clone();
        bad[2].1 = -1.0;
        assert!(matches!(fit_power_law(&bad), Err(Error::NonPositiveData { .. })));
        assert!(fit_power_law(&pts[..3]).is_err());
    }

    #[test]
    fn asymptotic_fit_exact_and_guarded() {
        let lambdas: Vec<f64> = (0..200).map(|i| 0.8 + i as f64 * 0.001).collect();
        let curve = SweepCurve {
            n_sites: 4096,
            neff: vec![0.0; lambdas.len()],
            dneff: lambdas.iter().map(|l| (1.0 - l).powf(-1.89)).collect(),
            lambdas,
        };
        let fit = asymptotic_divergence_fit(&curve, (0.9, 0.98), 0.9999).unwrap();
        assert_abs_diff_eq!(fit.exponent, -1.89, epsilon = 1e-10);
        assert!(matches!(
            asymptotic_divergence_fit(&curve, (0.9, 0.9985), 0.9999),
            Err(Error::WindowTooClose { .. })
        ));
    }

    fn synthetic(b: f64, nu_inv: f64) -> (Vec<SweepCurve>, Vec<PeakData>) {
        let q = |x: f64| -1.0 / (1.0 + 0.3 * x * x) + 0.05 * x;
        let mut curves = Vec::new();
        let mut peaks = Vec::new();
        for &n in &[64usize, 128, 256, 512] {
            let nf = n as f64;
            let lambda_m = 1.0 - 0.5 / (nf * nf);
            let height = 2.0 * nf.powf(b);
            let lambdas: Vec<f64> = (-240..=240).map(|i| lambda_m + i as f64 * 0.025 / nf.powf(nu_inv)).collect();
            let dneff = lambdas
                .iter()
                .map(|l| height + nf.powf(b) * q(nf.powf(nu_inv) * (l - lambda_m)))
                .collect();
            curves.push(SweepCurve {
                n_sites: n,
                neff: vec![0.0; lambdas.len()],
                lambdas,
                dneff,
            });
            peaks.push(PeakData {
                n_sites: n,
                lambda_m,
                peak_height: height,
            });
        }
        (curves, peaks)
    }

    #[test]
    fn synthetic_collapse_is_exact_at_truth() {
        let (curves, peaks) = synthetic(1.89, 1.0);
        let at_truth = collapse(&curves, &peaks, 1.89, 1.0).unwrap();
        assert!(at_truth.residual < 1e-20, "{}", at_truth.residual);
        let off = collapse(&curves, &peaks, 1.5, 1.0).unwrap();
        assert!(off.residual > at_truth.residual);
    }

    #[test]
    fn optimizer_recovers_synthetic_exponents() {
        let (curves, peaks) = synthetic(1.89, 1.0);
        let c = optimize_collapse(&curves, &peaks).unwrap();
        assert!(c.converged);
        assert_abs_diff_eq!(c.b, 1.89, epsilon = 1e-3);
        assert_abs_diff_eq!(c.nu_inverse, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn disjoint_curves_have_no_overlap() {
        let (mut curves, peaks) = synthetic(1.89, 1.0);
        for l in &mut curves[0].lambdas {
            *l += 10.0;
        }
        assert!(matches!(collapse(&curves, &peaks, 1.89, 1.0), Err(Error::NoOverlap)));
        assert!(collapse(&curves[..2], &peaks, 1.89, 1.0).is_err());
    }

    #[test]
    fn refined_window_is_centered() {
        let w = RefineWindow::default().lambdas(0.99, 100);
        assert_eq!(w.len(), 481);
        assert_abs_diff_eq!(w[240], 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(w[480] - w[0], 0.12, epsilon = 1e-12);
    }

    #[test]
    fn tfim_peak_moves_toward_one_and_grows() {
        let window = RefineWindow::default();
        let eval = |n: usize| move |l: f64| neff_at(n, l, GridConvention::NeveuSchwarzEven);
        let (_, _, p64) = refine_peak(64, &production_grid(), &window, eval(64)).unwrap();
        let (_, _, p128) = refine_peak(128, &production_grid(), &window, eval(128)).unwrap();
        assert!(p64.lambda_m < 1.0 && p128.lambda_m < 1.0);
        assert!(p128.lambda_m > p64.lambda_m);
        assert!(p128.peak_height > p64.peak_height);
    }
}
