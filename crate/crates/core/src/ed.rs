//! Brute-force exact diagonalization of the periodic ring for `N <= 14`.
//!
//! Basis state `s` has bit `i` set when site `i` is in `|1>` (the `sz = -1`
//! eigenstate). `H = -lambda sum_i sx_i sx_{i+1} - sum_i sz_i` with
//! `sx_{N} = sx_0`. Every quantity the free-fermion engine produces can be
//! checked against the observables here.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::macroscopicity::Direction;
use crate::spectrum::ChainParams;

pub const MAX_ED_SITES: usize = 14;

/// Largest chain that [`Solver::Auto`] hands to the dense eigensolver.
pub const AUTO_DENSE_MAX_SITES: usize = 8;

/// Ground-state search tolerance (relative residual).
const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Dense for `N <= AUTO_DENSE_MAX_SITES`, Lanczos above.
    Auto,
    /// Full symmetric eigendecomposition; `N <= 10`.
    Dense,
    /// Lanczos with full reorthogonalization.
    Lanczos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateSolution {
    params: ChainParams,
    energy: f64,
    amplitudes: Vec<f64>,
    parity: i8,
    gap: f64,
    residual: f64,
}

impl GroundStateSolution {
    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Eigenvalue of `U = prod sz_i`.
    pub fn parity(&self) -> i8 {
        self.parity
    }

    /// Distance to the next level of the same `U` sector.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `||H psi - E psi||`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn complex_amplitudes(&self) -> Vec<Complex64> {
        self.amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect()
    }
}

#[inline]
fn parity_sign(s: usize) -> f64 {
    if s.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn bond_masks(n_sites: usize) -> impl Iterator<Item = usize> {
    (0..n_sites).map(move |i| (1 << i) | (1 << ((i + 1) % n_sites)))
}

/// `out = H v`.
pub fn apply_hamiltonian(n_sites: usize, coupling: f64, v: &[f64], out: &mut [f64]) {
    let masks: Vec<usize> = bond_masks(n_sites).collect();
    for (s, o) in out.iter_mut().enumerate() {
        let z = n_sites as f64 - 2.0 * s.count_ones() as f64;
        let mut acc = -z * v[s];
        for &m in &masks {
            acc -= coupling * v[s ^ m];
        }
        *o = acc;
    }
}

fn dense_hamiltonian(n_sites: usize, coupling: f64) -> DMatrix<f64> {
    let dim = 1usize << n_sites;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        h[(s, s)] = -(n_sites as f64 - 2.0 * s.count_ones() as f64);
        for m in bond_masks(n_sites) {
            h[(s ^ m, s)] -= coupling;
        }
    }
    h
}

fn check_size(params: &ChainParams) -> Result<()> {
    if params.n_sites() > MAX_ED_SITES {
        return Err(Error::OracleTooLarge {
            n_sites: params.n_sites(),
            max: MAX_ED_SITES,
        });
    }
    Ok(())
}

pub fn ground_state(params: &ChainParams) -> Result<GroundStateSolution> {
    ground_state_with(params, Solver::Auto)
}

pub fn ground_state_with(params: &ChainParams, solver: Solver) -> Result<GroundStateSolution> {
    check_size(params)?;
    let solver = match solver {
        Solver::Auto if params.n_sites() <= AUTO_DENSE_MAX_SITES => Solver::Dense,
        Solver::Auto => Solver::Lanczos,
        other => other,
    };
    let (energy, mut amplitudes, gap) = match solver {
        Solver::Dense => {
            if params.n_sites() > 10 {
                return Err(Error::OracleTooLarge {
                    n_sites: params.n_sites(),
                    max: 10,
                });
            }
            dense_ground_state(params)?
        }
        _ => lanczos_ground_state(params)?,
    };
    if gap < 1e-10 {
        return Err(Error::DegenerateGroundState { gap });
    }

    // Sign convention: largest-magnitude amplitude positive.
    let mut lead = 0;
    for (i, a) in amplitudes.iter().enumerate() {
        if a.abs() > amplitudes[lead].abs() {
            lead = i;
        }
    }
    if amplitudes[lead] < 0.0 {
        amplitudes.iter_mut().for_each(|a| *a = -*a);
    }

    let n_sites = params.n_sites();
    let mut hv = vec![0.0; amplitudes.len()];
    apply_hamiltonian(n_sites, params.coupling(), &amplitudes, &mut hv);
    let energy_rq: f64 = hv.iter().zip(&amplitudes).map(|(h, a)| h * a).sum();
    let residual = hv
        .iter()
        .zip(&amplitudes)
        .map(|(h, a)| (h - energy_rq * a).powi(2))
        .sum::<f64>()
        .sqrt();
    let parity_value: f64 = amplitudes
        .iter()
        .enumerate()
        .map(|(s, a)| parity_sign(s) * a * a)
        .sum();
    debug_assert!((energy_rq - energy).abs() <= 1e-8 * energy.abs().max(1.0));
    Ok(GroundStateSolution {
        params: *params,
        energy: energy_rq,
        amplitudes,
        parity: if parity_value >= 0.0 { 1 } else { -1 },
        gap,
        residual,
    })
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn project_even(v: &[f64]) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(s, &x)| if parity_sign(s) > 0.0 { x } else { 0.0 })
        .collect()
}

/// Lowest level of the `U = +1` sector from a full decomposition.
/// Quasi-degenerate parity doublets (strong coupling) are split by projection.
fn dense_ground_state(params: &ChainParams) -> Result<(f64, Vec<f64>, f64)> {
    let h = dense_hamiltonian(params.n_sites(), params.coupling());
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = eig.eigenvalues.iter().fold(1.0f64, |acc, e| acc.max(e.abs()));
    let cluster_tol = 1e-8 * scale;

    // Walk clusters of (near-)equal eigenvalues; keep the even-sector content.
    let mut even_levels: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    let mut i = 0;
    while i < order.len() && even_levels.len() < 2 {
        let e0 = eig.eigenvalues[order[i]];
        let mut j = i;
        while j < order.len() && eig.eigenvalues[order[j]] - e0 <= cluster_tol {
            j += 1;
        }
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for &col in &order[i..j] {
            let mut v = project_even(eig.eigenvectors.column(col).as_slice());
            for b in &basis {
                let overlap: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= overlap * y);
            }
            if normalize(&mut v) > 1e-6 {
                basis.push(v);
            }
        }
        if !basis.is_empty() {
            let mean = order[i..j].iter().map(|&c| eig.eigenvalues[c]).sum::<f64>() / (j - i) as f64;
            even_levels.push((mean, basis));
        }
        i = j;
    }
    let (energy, mut states) = even_levels
        .first()
        .cloned()
        .ok_or(Error::DegenerateGroundState { gap: 0.0 })?;
    if states.len() > 1 {
        return Err(Error::DegenerateGroundState { gap: 0.0 });
    }
    let gap = even_levels.get(1).map_or(f64::INFINITY, |(e, _)| e - energy);
    Ok((energy, states.remove(0), gap))
}

/// Lanczos with full reorthogonalization, seeded with equal amplitudes on
/// every even-parity basis state so the Krylov space stays in `U = +1`.
fn lanczos_ground_state(params: &ChainParams) -> Result<(f64, Vec<f64>, f64)> {
    let n_sites = params.n_sites();
    let coupling = params.coupling();
    let dim = 1usize << n_sites;
    let sector_dim = dim / 2;
    let max_steps = sector_dim.min(400);

    let mut q: Vec<f64> = (0..dim).map(|s| if parity_sign(s) > 0.0 { 1.0 } else { 0.0 }).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for step in 0..max_steps {
        apply_hamiltonian(n_sites, coupling, &basis[step], &mut w);
        let alpha: f64 = w.iter().zip(&basis[step]).map(|(a, b)| a * b).sum();
        alphas.push(alpha);
        // Full reorthogonalization, twice for stability.
        for _ in 0..2 {
            for b in &basis {
                let overlap: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= overlap * y);
            }
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let m = alphas.len();
        let exhausted = beta < 1e-12 * alpha.abs().max(1.0) || m == max_steps;

        if m >= 2 && (m % 5 == 0 || exhausted) {
            let t = DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    alphas[i]
                } else if i + 1 == j {
                    betas[i]
                } else if j + 1 == i {
                    betas[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut idx: Vec<usize> = (0..m).collect();
            idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let (i0, i1) = (idx[0], idx[1]);
            let theta0 = eig.eigenvalues[i0];
            let theta1 = eig.eigenvalues[i1];
            let scale = theta0.abs().max(1.0);
            let res0 = beta * eig.eigenvectors[(m - 1, i0)].abs();
            let res1 = beta * eig.eigenvectors[(m - 1, i1)].abs();
            if exhausted || (res0 <= 0.1 * EIGEN_TOL * scale && res1 <= 1e-6 * scale) {
                let mut ritz = vec![0.0; dim];
                for (k, b) in basis.iter().enumerate() {
                    let c = eig.eigenvectors[(k, i0)];
                    ritz.iter_mut().zip(b).for_each(|(r, x)| *r += c * x);
                }
                normalize(&mut ritz);
                let mut hv = vec![0.0; dim];
                apply_hamiltonian(n_sites, coupling, &ritz, &mut hv);
                let true_res = hv
                    .iter()
                    .zip(&ritz)
                    .map(|(h, r)| (h - theta0 * r).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let candidate = (theta0, ritz, theta1 - theta0);
                if true_res <= EIGEN_TOL * scale {
                    return Ok(candidate);
                }
                best = Some(candidate);
                if exhausted {
                    break;
                }
            }
        }
        if exhausted {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    match best {
        Some((e, v, _)) => {
            let mut hv = vec![0.0; dim];
            apply_hamiltonian(n_sites, coupling, &v, &mut hv);
            let residual = hv.iter().zip(&v).map(|(h, r)| (h - e * r).powi(2)).sum::<f64>().sqrt();
            Err(Error::EigenNotConverged { residual })
        }
        None => Err(Error::EigenNotConverged {
            residual: f64::INFINITY,
        }),
    }
}

/// `sigma^a` acting on a single site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `(sum_i sigma^a_i) |psi>`.
pub fn apply_total(n_sites: usize, pauli: Pauli, psi: &[Complex64]) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (s, &amp) in psi.iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        for site in 0..n_sites {
            let bit = 1usize << site;
            let up = s & bit == 0;
            match pauli {
                Pauli::X => out[s ^ bit] += amp,
                Pauli::Y => out[s ^ bit] += if up { i * amp } else { -i * amp },
                Pauli::Z => out[s] += if up { amp } else { -amp },
            }
        }
    }
    out
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Expectation values of an `N`-site state used throughout the oracle checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSuite {
    pub n_sites: usize,
    /// `<sx_0 sx_n>`, `n = 0..N-1`.
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub zz: Vec<f64>,
    /// `<sz_0>`.
    pub mz: f64,
    /// `<X>`, `<Y>`, `<Z>` for the total spin components.
    pub mean: [f64; 3],
    /// `Re <S_a S_b>`; symmetric.
    pub second_moments: [[f64; 3]; 3],
}

impl ObservableSuite {
    pub fn x2(&self) -> f64 {
        self.second_moments[0][0]
    }

    pub fn y2(&self) -> f64 {
        self.second_moments[1][1]
    }

    pub fn z2(&self) -> f64 {
        self.second_moments[2][2]
    }

    pub fn z_mean(&self) -> f64 {
        self.mean[2]
    }

    /// `<Z^2> - <Z>^2`.
    pub fn mz_variance(&self) -> f64 {
        self.z2() - self.z_mean().powi(2)
    }

    /// `<S_a S_b + S_b S_a>`.
    pub fn anticommutator(&self, a: usize, b: usize) -> f64 {
        2.0 * self.second_moments[a][b]
    }

    /// Covariance `C_ab = <{S_a, S_b}>/2 - <S_a><S_b>`.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for (a, row) in c.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                *entry = self.second_moments[a][b] - self.mean[a] * self.mean[b];
            }
        }
        c
    }

    /// Full variance of `A_n = sum_i sigma_i . n`, every cross term included.
    pub fn variance_along(&self, dir: Direction) -> f64 {
        let n = dir.unit_vector();
        let c = self.covariance();
        let mut v = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                v += n[a] * c[a][b] * n[b];
            }
        }
        v
    }

    /// `<X^2>/N`, the effective size along `x`.
    pub fn neff_x(&self) -> f64 {
        self.x2() / self.n_sites as f64
    }
}

/// Evaluates every observable of `psi` by explicit contraction.
pub fn observables_of_state(n_sites: usize, psi: &[Complex64]) -> ObservableSuite {
    assert_eq!(psi.len(), 1 << n_sites, "state dimension must be 2^N");
    let applied = [
        apply_total(n_sites, Pauli::X, psi),
        apply_total(n_sites, Pauli::Y, psi),
        apply_total(n_sites, Pauli::Z, psi),
    ];
    let mut mean = [0.0; 3];
    let mut second_moments = [[0.0; 3]; 3];
    for a in 0..3 {
        mean[a] = inner(psi, &applied[a]).re;
        for b in 0..3 {
            second_moments[a][b] = inner(&applied[a], &applied[b]).re;
        }
    }

    let sign = |s: usize, site: usize| if s & (1 << site) == 0 { 1.0 } else { -1.0 };
    let mut xx = vec![0.0; n_sites];
    let mut yy = vec![0.0; n_sites];
    let mut zz = vec![0.0; n_sites];
    xx[0] = 1.0;
    yy[0] = 1.0;
    zz[0] = 1.0;
    for n in 1..n_sites {
        let mask = 1 | (1 << n);
        let (mut cx, mut cy, mut cz) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
        for (s, &amp) in psi.iter().enumerate() {
            let partner = psi[s ^ mask].conj() * amp;
            let signs = sign(s, 0) * sign(s, n);
            cx += partner;
            // sy_0 sy_n |s> = -(-1)^{b_0 + b_n} |s ^ mask>
            cy -= partner * signs;
            cz += amp.norm_sqr() * signs;
        }
        xx[n] = cx.re;
        yy[n] = cy.re;
        zz[n] = cz;
    }
    let mz = psi.iter().enumerate().map(|(s, a)| a.norm_sqr() * sign(s, 0)).sum();
    ObservableSuite {
        n_sites,
        xx,
        yy,
        zz,
        mz,
        mean,
        second_moments,
    }
}

pub fn observable_suite(gs: &GroundStateSolution) -> ObservableSuite {
    observables_of_state(gs.n_sites(), &gs.complex_amplitudes())
}

/// `(|0...0> + |1...1>)/sqrt 2`.
pub fn ghz_state(n_sites: usize) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n_sites];
    psi[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[(1 << n_sites) - 1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi
}

/// Variance of `A_n` on a `(theta, phi)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionScan {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// `surface[i][j]` at `(thetas[i], phis[j])`.
    pub surface: Vec<Vec<f64>>,
    pub argmax: Direction,
    pub max_variance: f64,
}

impl DirectionScan {
    pub fn theta_step(&self) -> f64 {
        self.thetas[1] - self.thetas[0]
    }

    pub fn phi_step(&self) -> f64 {
        self.phis[1] - self.phis[0]
    }
}

/// `theta_i = i pi / n_theta` (poles included), `phi_j = 2 pi j / n_phi`.
pub fn scan_directions(suite: &ObservableSuite, n_theta: usize, n_phi: usize) -> Result<DirectionScan> {
    if n_theta < 8 || n_phi < 16 {
        return Err(Error::InvalidGrid(format!(
            "direction grid must be at least 8x16, got {n_theta}x{n_phi}"
        )));
    }
    use std::f64::consts::PI;
    let thetas: Vec<f64> = (0..=n_theta).map(|i| i as f64 * PI / n_theta as f64).collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| j as f64 * 2.0 * PI / n_phi as f64).collect();
    let mut surface = Vec::with_capacity(thetas.len());
    let mut best = (f64::NEG_INFINITY, Direction::z());
    for &theta in &thetas {
        let row: Vec<f64> = phis
            .iter()
            .map(|&phi| suite.variance_along(Direction::new_unchecked(theta, phi)))
            .collect();
        for (&phi, &v) in phis.iter().zip(&row) {
            if v > best.0 {
                best = (v, Direction::new_unchecked(theta, phi));
            }
        }
        surface.push(row);
    }
    Ok(DirectionScan {
        thetas,
        phis,
        surface,
        argmax: best.1,
        max_variance: best.0,
    })
}

pub fn direction_scan(gs: &GroundStateSolution, n_theta: usize, n_phi: usize) -> Result<DirectionScan> {
    scan_directions(&observable_suite(gs), n_theta, n_phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn gs(n: usize, lambda: f64, solver: Solver) -> GroundStateSolution {
        ground_state_with(&ChainParams::even(n, lambda).unwrap(), solver).unwrap()
    }

    #[test]
    fn field_only_ground_state() {
        let g = gs(4, 0.0, Solver::Dense);
        assert_abs_diff_eq!(g.energy(), -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.amplitudes()[0], 1.0, epsilon = 1e-12);
        assert_eq!(g.parity(), 1);
        let obs = observable_suite(&g);
        assert_abs_diff_eq!(obs.z_mean(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(obs.z2(), 16.0, epsilon = 1e-12);
        for n in 1..4 {
            assert_abs_diff_eq!(obs.xx[n], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ising_limit_is_symmetric_cat() {
        let lambda = 1e6;
        for solver in [Solver::Dense, Solver::Lanczos] {
            let g = gs(4, lambda, solver);
            assert_abs_diff_eq!(g.energy() / lambda, -4.0, epsilon = 1e-5);
            assert_eq!(g.parity(), 1);
            // (|++++> + |----> )/sqrt 2 has amplitude 1/(2 sqrt 2) on even states.
            let target = 1.0 / (2.0 * 2f64.sqrt());
            for (s, &a) in g.amplitudes().iter().enumerate() {
                let expected = if s.count_ones() % 2 == 0 { target } else { 0.0 };
                assert_abs_diff_eq!(a, expected, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn energy_is_sum_over_antiperiodic_modes() {
        use crate::spectrum::{dispersion, MomentumGrid};
        for n in [4, 6, 8, 10, 12] {
            for &lambda in &[0.3, 1.0, 2.5] {
                let p = ChainParams::even(n, lambda).unwrap();
                let modes: f64 = MomentumGrid::for_params(&p)
                    .momenta()
                    .iter()
                    .map(|&k| dispersion(&p, k).unwrap())
                    .sum();
                assert_abs_diff_eq!(ground_state(&p).unwrap().energy(), -2.0 * modes, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ghz_variance() {
        for n in [3, 6, 9] {
            let obs = observables_of_state(n, &ghz_state(n));
            assert_abs_diff_eq!(obs.mz_variance(), (n * n) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn dense_and_lanczos_agree() {
        for n in [4, 6, 8, 10] {
            for &lambda in &[0.3, 1.0, 1.7] {
                let d = gs(n, lambda, Solver::Dense);
                let l = gs(n, lambda, Solver::Lanczos);
                assert_abs_diff_eq!(d.energy(), l.energy(), epsilon = 1e-9);
                assert_abs_diff_eq!(d.gap(), l.gap(), epsilon = 1e-6);
                let (od, ol) = (observable_suite(&d), observable_suite(&l));
                for k in 0..n {
                    assert_abs_diff_eq!(od.xx[k], ol.xx[k], epsilon = 1e-8);
                    assert_abs_diff_eq!(od.yy[k], ol.yy[k], epsilon = 1e-8);
                    assert_abs_diff_eq!(od.zz[k], ol.zz[k], epsilon = 1e-8);
                }
                assert_abs_diff_eq!(od.mz, ol.mz, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn symmetric_sector_and_small_residual() {
        for n in [4, 6, 8, 10, 12, 14] {
            for &lambda in &[0.2, 1.0, 3.0] {
                let g = gs(n, lambda, Solver::Auto);
                assert_eq!(g.parity(), 1);
                assert!(g.residual() <= 1e-9, "N={n} lambda={lambda}: {}", g.residual());
                assert!(g.gap() > 1e-10);
                let norm: f64 = g.amplitudes().iter().map(|a| a * a).sum();
                assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_zeros() {
        for n in [4, 8] {
            for &lambda in &[0.5, 1.0, 2.0] {
                let obs = observable_suite(&gs(n, lambda, Solver::Auto));
                assert!(obs.mean[0].abs() < 1e-10);
                assert!(obs.mean[1].abs() < 1e-10);
                assert!(obs.anticommutator(0, 2).abs() < 1e-10);
                assert!(obs.anticommutator(1, 2).abs() < 1e-10);
                assert!(obs.anticommutator(0, 1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scan_finds_x_axis() {
        let scan = direction_scan(&gs(8, 0.5, Solver::Auto), 16, 32).unwrap();
        assert!((scan.argmax.theta() - FRAC_PI_2).abs() <= scan.theta_step());
        let phi = scan.argmax.phi();
        assert!(phi.min(2.0 * PI - phi) <= scan.phi_step());
    }

    #[test]
    fn scan_ties_on_equator_without_coupling() {
        let scan = direction_scan(&gs(8, 0.0, Solver::Auto), 8, 16).unwrap();
        let equator = scan.thetas.iter().position(|&t| (t - FRAC_PI_2).abs() < 1e-12).unwrap();
        for &v in &scan.surface[equator] {
            assert_abs_diff_eq!(v, scan.max_variance, epsilon = 1e-10);
        }
    }

    #[test]
    fn scan_monotone_from_pole_to_equator() {
        let scan = direction_scan(&gs(12, 1.0, Solver::Auto), 32, 64).unwrap();
        let half = scan.thetas.iter().position(|&t| t > FRAC_PI_2 + 1e-12).unwrap();
        for i in 1..half {
            assert!(scan.surface[i][0] >= scan.surface[i - 1][0]);
        }
    }

    #[test]
    fn rejects_coarse_grid_and_large_chains() {
        let g = gs(4, 0.5, Solver::Auto);
        assert!(direction_scan(&g, 4, 16).is_err());
        assert!(matches!(
            ground_state(&ChainParams::even(16, 0.5).unwrap()),
            Err(Error::OracleTooLarge { .. })
        ));
        assert!(ground_state_with(&ChainParams::even(12, 0.5).unwrap(), Solver::Dense).is_err());
    }
}
