//! Leading principal minors of non-symmetric Toeplitz matrices.
//!
//! `T^(n)_{ij} = c_{i-j}` for `0 <= i, j < n`. Two routes are provided:
//!
//! * [`det_single`] – row-pivoted Gaussian elimination of one order, `O(n^3)`.
//!   This is the trusted path.
//! * [`det_sweep`] – every order `1..=M` in `O(M^2)` total by the two-sided
//!   Levinson recursion. With `x_n` (first entry 1) and `y_n` (last entry 1)
//!   solving `T^(n) x_n = e_n e_1` and `T^(n) y_n = e_n e_n`, the pivot
//!   `e_n = D_n / D_{n-1}` obeys
//!
//!   ```text
//!   f = sum_j c_{n-j} x_j,   b = sum_j c_{-(j+1)} y_j
//!   e_{n+1} = e_n - f b / e_n
//!   x_{n+1} = [x_n; 0] - (f / e_n) [0; y_n]
//!   y_{n+1} = [0; y_n] - (b / e_n) [x_n; 0]
//!   ```
//!
//! A pivot below `tol_pivot` (relative to the largest symbol entry) stops the
//! recursion; such orders are evaluated by pivoted elimination until two
//! consecutive well-conditioned orders allow the vectors to be re-seeded from
//! an explicit factorization.

use crate::error::{Error, Result};

/// Coefficients `c_m`, `m = -M..M-1`, of a Toeplitz family up to order `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSymbol {
    coeffs: Vec<f64>,
    max_order: usize,
    scale: f64,
}

impl ToeplitzSymbol {
    /// Samples `coeff(m)` for `m` in `-max_order..max_order`.
    pub fn from_fn(max_order: usize, coeff: impl Fn(isize) -> f64) -> Result<Self> {
        let m = max_order as isize;
        Self::from_coeffs(max_order, (-m..m).map(coeff).collect())
    }

    /// `coeffs[i]` holds `c_{i - max_order}`.
    pub fn from_coeffs(max_order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::InvalidParams("Toeplitz symbol needs max_order >= 1".into()));
        }
        if coeffs.len() != 2 * max_order {
            return Err(Error::InvalidParams(format!(
                "expected {} coefficients, got {}",
                2 * max_order,
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite symbol entry {bad}")));
        }
        let scale = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        Ok(Self {
            coeffs,
            max_order,
            scale,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    #[inline]
    pub fn coeff(&self, m: isize) -> f64 {
        self.coeffs[(m + self.max_order as isize) as usize]
    }

    /// Largest entry magnitude; the reference scale for pivot tests.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Dense row-major `n x n` matrix.
    pub fn matrix(&self, n: usize) -> Vec<f64> {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(self.coeff(i as isize - j as isize));
            }
        }
        a
    }

    /// Product of row norms of `T^(n)`.
    pub fn hadamard_bound(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.coeff(i as isize - j as isize).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_order {
            Err(Error::OrderOutOfRange {
                order: n,
                max_order: self.max_order,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SweepMethod {
    PivotedElimination,
    FastRecursion,
}

/// Determinants `D_1..=D_upto` and how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantSweep {
    values: Vec<f64>,
    method: SweepMethod,
    breakdown_orders: Vec<usize>,
    cross_checked_orders: Vec<usize>,
}

impl DeterminantSweep {
    /// `values()[n - 1] = D_n`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn upto(&self) -> usize {
        self.values.len()
    }

    pub fn method(&self) -> SweepMethod {
        self.method
    }

    /// Orders evaluated by pivoted elimination because the recursion stalled.
    pub fn breakdown_orders(&self) -> &[usize] {
        &self.breakdown_orders
    }

    pub fn cross_checked_orders(&self) -> &[usize] {
        &self.cross_checked_orders
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Tuning of [`det_sweep_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Pivot magnitude, relative to the symbol scale, below which the
    /// recursion is abandoned for that order.
    pub tol_pivot: f64,
    /// Cross-check every `stride`-th order; `None` means `ceil(upto / 16)`.
    pub cross_check_stride: Option<usize>,
    /// Skip cross-checks above this order.
    pub cross_check_max_order: Option<usize>,
    /// Absolute agreement required at a cross-checked order.
    pub cross_check_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol_pivot: 1e-10,
            cross_check_stride: None,
            cross_check_max_order: None,
            cross_check_tol: 1e-8,
        }
    }
}

impl SweepOptions {
    /// Cross-checks limited to orders `<= 128`, so a sweep over thousands of
    /// orders stays quadratic overall.
    pub fn capped() -> Self {
        Self {
            cross_check_max_order: Some(128),
            ..Self::default()
        }
    }

    /// No cross-checks at all.
    pub fn unchecked() -> Self {
        Self {
            cross_check_max_order: Some(0),
            ..Self::default()
        }
    }

    fn stride(&self, upto: usize) -> usize {
        self.cross_check_stride
            .unwrap_or_else(|| upto.div_ceil(16))
            .max(1)
    }
}

/// Determinant of `T^(n)` by row-pivoted elimination.
pub fn det_single(symbol: &ToeplitzSymbol, n: usize) -> Result<f64> {
    symbol.check_order(n)?;
    Ok(LuFactors::new(symbol.matrix(n), n).det())
}

/// `D_1..=D_upto` by pivoted elimination at every order, `O(upto^4)`.
pub fn det_single_sweep(symbol: &ToeplitzSymbol, upto: usize) -> Result<DeterminantSweep> {
    symbol.check_order(upto)?;
    let values = (1..=upto)
        .map(|n| det_single(symbol, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeterminantSweep {
        values,
        method: SweepMethod::PivotedElimination,
        breakdown_orders: Vec::new(),
        cross_checked_orders: Vec::new(),
    })
}

/// `D_1..=D_upto` by the fast recursion with default options.
pub fn det_sweep(symbol: &ToeplitzSymbol, upto: usize) -> Result<DeterminantSweep> {
    det_sweep_with(symbol, upto, &SweepOptions::default())
}

pub fn det_sweep_with(
    symbol: &ToeplitzSymbol,
    upto: usize,
    opts: &SweepOptions,
) -> Result<DeterminantSweep> {
    symbol.check_order(upto)?;
    let lo_pivot = opts.tol_pivot * symbol.scale();
    let hi_pivot = if opts.tol_pivot > 0.0 {
        symbol.scale() / opts.tol_pivot
    } else {
        f64::INFINITY
    };

    let mut values = Vec::with_capacity(upto);
    let mut breakdown_orders = Vec::new();
    let mut x = vec![0.0; upto];
    let mut y = vec![0.0; upto];
    // Running determinant as sign * exp(log_abs); individual minors may pass
    // far below the f64 range in the middle of a long chain.
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    let c0 = symbol.coeff(0);
    let mut pivot = c0;
    let mut seeded = c0.abs() >= lo_pivot;

    for order in 1..=upto {
        if order == 1 && seeded {
            x[0] = 1.0;
            y[0] = 1.0;
            sign = c0.signum();
            log_abs = c0.abs().ln();
            values.push(c0);
            continue;
        }
        if seeded {
            let n = order - 1;
            let mut f = 0.0;
            let mut b = 0.0;
            for j in 0..n {
                f += symbol.coeff((n - j) as isize) * x[j];
                b += symbol.coeff(-(j as isize) - 1) * y[j];
            }
            let next = pivot - f * b / pivot;
            if next.abs() >= lo_pivot && next.abs().is_finite() {
                let alpha = -f / pivot;
                let beta = -b / pivot;
                // Descending so that x[j] and y[j-1] are still the old values.
                for j in (0..=n).rev() {
                    let xo = if j < n { x[j] } else { 0.0 };
                    let yo = if j > 0 { y[j - 1] } else { 0.0 };
                    x[j] = xo + alpha * yo;
                    y[j] = yo + beta * xo;
                }
                pivot = next;
                sign *= pivot.signum();
                log_abs += pivot.abs().ln();
                values.push(sign * log_abs.exp());
                continue;
            }
            seeded = false;
        }

        // Fallback: explicit factorization, then try to re-seed from it.
        let lu = LuFactors::new(symbol.matrix(order), order);
        let det = lu.det();
        values.push(det);
        breakdown_orders.push(order);
        sign = det.signum();
        log_abs = det.abs().ln();

        let prev = if order == 1 { 1.0 } else { values[order - 2] };
        if det == 0.0 || prev == 0.0 {
            continue;
        }
        let ratio = det / prev;
        if !(ratio.abs() >= lo_pivot && ratio.abs() <= hi_pivot) {
            continue;
        }
        let mut rhs = vec![0.0; order];
        rhs[0] = 1.0;
        let Some(first) = lu.solve(&rhs) else { continue };
        rhs[0] = 0.0;
        rhs[order - 1] = 1.0;
        let Some(last) = lu.solve(&rhs) else { continue };
        let (x0, yl) = (first[0], last[order - 1]);
        if x0 == 0.0 || yl == 0.0 {
            continue;
        }
        for j in 0..order {
            x[j] = first[j] / x0;
            y[j] = last[j] / yl;
        }
        pivot = 1.0 / x0;
        seeded = true;
    }

    let mut cross_checked_orders = Vec::new();
    let stride = opts.stride(upto);
    let cap = opts.cross_check_max_order.unwrap_or(upto);
    for order in (stride..=upto.min(cap)).step_by(stride) {
        if breakdown_orders.binary_search(&order).is_ok() {
            continue;
        }
        let reference = det_single(symbol, order)?;
        let fast = values[order - 1];
        if !((fast - reference).abs() <= opts.cross_check_tol) {
            return Err(Error::CrossCheckFailure {
                order,
                fast,
                reference,
            });
        }
        cross_checked_orders.push(order);
    }

    Ok(DeterminantSweep {
        values,
        method: SweepMethod::FastRecursion,
        breakdown_orders,
        cross_checked_orders,
    })
}

/// Row-pivoted LU factorization of a dense row-major matrix.
struct LuFactors {
    a: Vec<f64>,
    n: usize,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl LuFactors {
    fn new(mut a: Vec<f64>, n: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].abs());
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best == 0.0 {
                singular = true;
                break;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let pivot = pivot_row[k];
            for row in tail.chunks_exact_mut(n) {
                let factor = row[k] / pivot;
                row[k] = factor;
                if factor != 0.0 {
                    for (r, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= factor * u;
                    }
                }
            }
        }
        Self {
            a,
            n,
            perm,
            sign,
            singular,
        }
    }

    fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..self.n).fold(self.sign, |acc, k| acc * self.a[k * self.n + k])
    }

    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        if self.singular {
            return None;
        }
        let n = self.n;
        let mut z: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.a[i * n + j] * z[j]).sum();
            z[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.a[i * n + j] * z[j]).sum();
            z[i] = (z[i] - s) / self.a[i * n + i];
        }
        z.iter().all(|v| v.is_finite()).then_some(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{wick_coefficients, ChainParams};
    use proptest::prelude::*;

    fn kronecker(max_order: usize, at: isize) -> ToeplitzSymbol {
        ToeplitzSymbol::from_fn(max_order, |m| if m == at { 1.0 } else { 0.0 }).unwrap()
    }

    // Laplace expansion along the first row; exponential, tiny n only.
    fn cofactor_det(a: &[f64], n: usize) -> f64 {
        if n == 1 {
            return a[0];
        }
        let mut total = 0.0;
        for col in 0..n {
            let mut minor = Vec::with_capacity((n - 1) * (n - 1));
            for i in 1..n {
                for j in 0..n {
                    if j != col {
                        minor.push(a[i * n + j]);
                    }
                }
            }
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * a[col] * cofactor_det(&minor, n - 1);
        }
        total
    }

    fn xx_symbol(n_sites: usize, lambda: f64) -> ToeplitzSymbol {
        let w = wick_coefficients(&ChainParams::even(n_sites, lambda).unwrap()).unwrap();
        ToeplitzSymbol::from_fn(n_sites - 1, |m| w.g(m - 1)).unwrap()
    }

    #[test]
    fn identity_and_shift() {
        assert_eq!(det_single(&kronecker(8, 0), 5).unwrap(), 1.0);
        assert_eq!(det_single(&kronecker(8, 1), 3).unwrap(), 0.0);
    }

    #[test]
    fn single_matches_cofactor_expansion() {
        let symbol = xx_symbol(12, 0.8);
        for n in 1..=6 {
            let brute = cofactor_det(&symbol.matrix(n), n);
            assert!((det_single(&symbol, n).unwrap() - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_sweep_has_no_breakdowns() {
        let sweep = det_sweep(&kronecker(100, 0), 100).unwrap();
        assert!(sweep.values().iter().all(|&d| d == 1.0));
        assert!(sweep.breakdown_orders().is_empty());
        assert_eq!(sweep.method(), SweepMethod::FastRecursion);
    }

    #[test]
    fn shift_sweep_falls_back_everywhere() {
        let sweep = det_sweep(&kronecker(10, 1), 10).unwrap();
        assert!(sweep.values().iter().all(|&d| d == 0.0));
        assert_eq!(sweep.breakdown_orders(), (1..=10).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn reseeds_after_isolated_singular_minor() {
        // c_0 = 0 makes D_1 vanish while the 2x2 and larger minors do not.
        let symbol = ToeplitzSymbol::from_fn(20, |m| match m {
            0 => 0.0,
            1 => 0.7,
            -1 => 0.9,
            2 => 0.2,
            -2 => -0.3,
            _ => 0.05 / (1.0 + m.abs() as f64),
        })
        .unwrap();
        let sweep = det_sweep(&symbol, 20).unwrap();
        assert_eq!(sweep.breakdown_orders()[0], 1);
        assert!(sweep.breakdown_orders().len() < 20);
        for n in 1..=20 {
            let reference = det_single(&symbol, n).unwrap();
            assert!((sweep.value(n) - reference).abs() < 1e-10, "order {n}");
        }
    }

    #[test]
    fn tfim_symbol_agrees_at_every_order() {
        let symbol = xx_symbol(256, 0.9);
        let fast = det_sweep(&symbol, 255).unwrap();
        let slow = det_single_sweep(&symbol, 255).unwrap();
        for n in 1..=255 {
            assert!((fast.value(n) - slow.value(n)).abs() < 1e-8, "order {n}");
        }
        assert_eq!(fast.cross_checked_orders().len(), 15);
    }

    #[test]
    fn hadamard_bound_holds() {
        let symbol = xx_symbol(64, 1.1);
        let sweep = det_sweep(&symbol, 63).unwrap();
        for n in 1..=63 {
            assert!(sweep.value(n).abs() <= symbol.hadamard_bound(n) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn order_bounds_checked() {
        let symbol = kronecker(4, 0);
        assert!(matches!(det_single(&symbol, 0), Err(Error::OrderOutOfRange { .. })));
        assert!(matches!(det_sweep(&symbol, 5), Err(Error::OrderOutOfRange { .. })));
        assert!(ToeplitzSymbol::from_fn(2, |_| f64::NAN).is_err());
    }

    #[test]
    fn cross_check_failure_surfaces() {
        // An impossible tolerance trips the sampled comparison.
        let symbol = xx_symbol(32, 0.7);
        let opts = SweepOptions {
            cross_check_tol: -1.0,
            ..SweepOptions::default()
        };
        assert!(matches!(
            det_sweep_with(&symbol, 31, &opts),
            Err(Error::CrossCheckFailure { .. })
        ));
    }

    #[test]
    fn capped_options_skip_high_orders() {
        let symbol = xx_symbol(512, 0.95);
        let sweep = det_sweep_with(&symbol, 511, &SweepOptions::capped()).unwrap();
        assert!(sweep.cross_checked_orders().iter().all(|&n| n <= 128));
        let none = det_sweep_with(&symbol, 511, &SweepOptions::unchecked()).unwrap();
        assert!(none.cross_checked_orders().is_empty());
        assert_eq!(sweep.values(), none.values());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn sweep_equals_pivoted_elimination(
            order in 1usize..=64,
            raw in proptest::collection::vec(-1.0f64..1.0, 128),
        ) {
            let symbol = ToeplitzSymbol::from_fn(order, |m| raw[(m + 64) as usize]).unwrap();
            let opts = SweepOptions { cross_check_max_order: Some(0), ..SweepOptions::default() };
            let fast = det_sweep_with(&symbol, order, &opts).unwrap();
            for n in 1..=order {
                let reference = det_single(&symbol, n).unwrap();
                // Random symbols can have minors of size ~n!, compare relatively there.
                let scale = reference.abs().max(1.0);
                prop_assert!((fast.value(n) - reference).abs() <= 1e-8 * scale,
                    "order {} fast {} ref {}", n, fast.value(n), reference);
            }
        }

        #[test]
        fn sweep_is_deterministic(lambda in 0.05f64..2.5) {
            let symbol = xx_symbol(48, lambda);
            let a = det_sweep(&symbol, 47).unwrap();
            let b = det_sweep(&symbol, 47).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
