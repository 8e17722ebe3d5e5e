//! The subcommands. Each writes its files into the output directory and
//! reports whether every check passed.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use anyhow::Context;
use isingmacro::correlators::{complete_table, xx_table, CorrelatorTable};
use isingmacro::ed;
use isingmacro::macroscopicity::{argmax_direction, domain_wall_neff, domain_wall_neff_oracle, effective_size, Direction};
use isingmacro::scaling::{
    asymptotic_divergence_fit, fit_peak_heights, fit_peak_positions, locate_peak, optimize_collapse, refine_peak,
    rescale, sweep_with, FitResult, PeakData, SweepCurve,
};
use isingmacro::spectrum::wick_coefficients;
use isingmacro::toeplitz::{det_single_sweep, det_sweep, ToeplitzSymbol};
use isingmacro::{ChainParams, GridConvention, ENGINE_VERSION};
use serde::Serialize;
use serde_json::json;

use crate::cache::{canonical_lambda, Cache, CacheKey};
use crate::config::{config_error, ensure_dir, RunConfig};
use crate::format::g12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

/// `N_eff` evaluator with the optional correlator cache in front.
pub struct Engine {
    grid: GridConvention,
    cache: Option<Cache>,
    store_failed: AtomicBool,
}

impl Engine {
    pub fn new(grid: GridConvention, cache_dir: Option<&Path>) -> anyhow::Result<Self> {
        let cache = cache_dir
            .map(|d| Cache::open(d).with_context(|| format!("opening cache {}", d.display())))
            .transpose()?;
        Ok(Self {
            grid,
            cache,
            store_failed: AtomicBool::new(false),
        })
    }

    pub fn table(&self, n_sites: usize, lambda: f64) -> isingmacro::Result<CorrelatorTable> {
        let lambda = canonical_lambda(lambda);
        let params = ChainParams::new(n_sites, lambda, self.grid)?;
        let Some(cache) = &self.cache else {
            return xx_table(&params);
        };
        let key = CacheKey::new(n_sites, lambda, self.grid);
        if let Some(xx) = cache.load(&key) {
            return CorrelatorTable::from_parts(params, xx, None, None, None);
        }
        let table = xx_table(&params)?;
        if let Err(e) = cache.store(&key, lambda, table.xx()) {
            if !self.store_failed.swap(true, Ordering::Relaxed) {
                eprintln!("warning: cache write failed in {}: {e}", cache.dir().display());
            }
        }
        Ok(table)
    }

    pub fn neff(&self, n_sites: usize, lambda: f64) -> isingmacro::Result<f64> {
        Ok(effective_size(&self.table(n_sites, lambda)?).n_eff)
    }
}

pub const CURVE_HEADER: [&str; 4] = ["lambda", "neff", "neff_over_n", "dneff"];

pub fn write_curve(path: &Path, curve: &SweepCurve) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(CURVE_HEADER)?;
    let n = curve.n_sites as f64;
    for i in 0..curve.len() {
        w.write_record([
            g12(curve.lambdas[i]),
            g12(curve.neff[i]),
            g12(curve.neff[i] / n),
            g12(curve.dneff[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve back, keeping the stored derivative column.
pub fn read_curve(path: &Path, n_sites: usize) -> anyhow::Result<SweepCurve> {
    let mut r = csv::Reader::from_path(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != CURVE_HEADER {
        return Err(config_error(format!("{}: unexpected header", path.display())));
    }
    let mut curve = SweepCurve {
        n_sites,
        lambdas: Vec::new(),
        neff: Vec::new(),
        dneff: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> anyhow::Result<f64> {
            rec[i]
                .parse()
                .map_err(|e| config_error(format!("{}: bad number '{}': {e}", path.display(), &rec[i])))
        };
        curve.lambdas.push(num(0)?);
        curve.neff.push(num(1)?);
        curve.dneff.push(num(3)?);
    }
    if curve.lambdas.windows(2).any(|w| !(w[1] > w[0])) || curve.is_empty() {
        return Err(config_error(format!("{}: couplings must be strictly increasing", path.display())));
    }
    Ok(curve)
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut f = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn canonical_grid(cfg: &RunConfig) -> anyhow::Result<Vec<f64>> {
    let grid: Vec<f64> = cfg.lambda_grid()?.into_iter().map(canonical_lambda).collect();
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config_error("couplings collide after rounding to 12 significant digits"));
    }
    Ok(grid)
}

fn write_run_json(cfg: &RunConfig, command: &str, started: Instant, outputs: &[PathBuf]) -> anyhow::Result<()> {
    let names: Vec<String> = outputs
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    write_json(
        &cfg.output_dir.join("run.json"),
        &json!({
            "command": command,
            "engine_version": ENGINE_VERSION,
            "config": cfg,
            "wall_time_seconds": started.elapsed().as_secs_f64(),
            "outputs": names,
        }),
    )
}

pub fn cmd_sweep(cfg: &RunConfig) -> anyhow::Result<Status> {
    let started = Instant::now();
    ensure_dir(&cfg.output_dir)?;
    let grid = canonical_grid(cfg)?;
    let engine = Engine::new(cfg.grid, cfg.cache_dir.as_deref())?;
    let mut outputs = Vec::new();
    for &n in &cfg.sizes {
        let t = Instant::now();
        let curve = sweep_with(n, &grid, |l| engine.neff(n, l))?;
        let path = cfg.output_dir.join(format!("sweep_N{n}.csv"));
        write_curve(&path, &curve)?;
        eprintln!("N={n}: {} points in {:.2}s", curve.len(), t.elapsed().as_secs_f64());
        outputs.push(path);
    }
    write_run_json(cfg, "sweep", started, &outputs)?;
    Ok(Status::Passed)
}

#[derive(Debug, Clone, Default)]
pub struct ScalingOptions {
    /// Read `sweep_N<k>.csv` / `refined_N<k>.csv` from here instead of computing.
    pub from: Option<PathBuf>,
    pub collapse_sizes: Option<Vec<usize>>,
    pub asymptotic_size: Option<usize>,
    pub asymptotic_window: (f64, f64),
}

pub const DEFAULT_ASYMPTOTIC_WINDOW: (f64, f64) = (0.90, 0.98);

pub fn cmd_scaling(cfg: &RunConfig, opts: &ScalingOptions) -> anyhow::Result<Status> {
    let started = Instant::now();
    ensure_dir(&cfg.output_dir)?;
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 4 {
        return Err(config_error("scaling needs at least 4 distinct sizes"));
    }
    let collapse_sizes = opts.collapse_sizes.clone().unwrap_or_else(|| sizes.clone());
    if let Some(&n) = collapse_sizes.iter().find(|n| !sizes.contains(n)) {
        return Err(config_error(format!("collapse size {n} is not among the sizes")));
    }
    let asymptotic_size = opts.asymptotic_size.unwrap_or(*sizes.last().unwrap());
    if !sizes.contains(&asymptotic_size) {
        return Err(config_error(format!("asymptotic size {asymptotic_size} is not among the sizes")));
    }

    let mut coarse = BTreeMap::new();
    let mut refined = BTreeMap::new();
    let mut peaks = BTreeMap::new();
    let mut outputs = Vec::new();
    match &opts.from {
        Some(dir) => {
            for &n in &sizes {
                let fine = read_curve(&dir.join(format!("refined_N{n}.csv")), n)?;
                let sweep_path = dir.join(format!("sweep_N{n}.csv"));
                if sweep_path.exists() {
                    coarse.insert(n, read_curve(&sweep_path, n)?);
                }
                peaks.insert(n, locate_peak(&fine)?);
                refined.insert(n, fine);
            }
        }
        None => {
            let grid = canonical_grid(cfg)?;
            let engine = Engine::new(cfg.grid, cfg.cache_dir.as_deref())?;
            for &n in &sizes {
                let t = Instant::now();
                let (c, f, p) = refine_peak(n, &grid, &cfg.refine, |l| engine.neff(n, l))?;
                eprintln!("N={n}: lambda_m = {} in {:.2}s", g12(p.lambda_m), t.elapsed().as_secs_f64());
                coarse.insert(n, c);
                refined.insert(n, f);
                peaks.insert(n, p);
            }
        }
    }
    for (&n, curve) in &coarse {
        let path = cfg.output_dir.join(format!("sweep_N{n}.csv"));
        write_curve(&path, curve)?;
        outputs.push(path);
    }
    for (&n, curve) in &refined {
        let path = cfg.output_dir.join(format!("refined_N{n}.csv"));
        write_curve(&path, curve)?;
        outputs.push(path);
    }

    let asymptotic: Result<FitResult, String> = match coarse.get(&asymptotic_size) {
        Some(curve) => asymptotic_divergence_fit(curve, opts.asymptotic_window, peaks[&asymptotic_size].lambda_m)
            .map_err(|e| e.to_string()),
        None => Err(format!("no coarse sweep for N={asymptotic_size}")),
    };
    if let Err(e) = &asymptotic {
        eprintln!("warning: asymptotic fit skipped: {e}");
    }

    let all_peaks: Vec<PeakData> = peaks.values().copied().collect();
    let collapse_curves: Vec<SweepCurve> = collapse_sizes.iter().map(|n| refined[n].clone()).collect();
    let collapse_peaks: Vec<PeakData> = collapse_sizes.iter().map(|n| peaks[n]).collect();
    let position_fit = fit_peak_positions(&all_peaks)?;
    let height_fit = fit_peak_heights(&all_peaks)?;
    let collapse = optimize_collapse(&collapse_curves, &collapse_peaks)?;

    let peaks_path = cfg.output_dir.join("peaks.csv");
    let mut w = csv::Writer::from_path(&peaks_path)?;
    w.write_record(["N", "lambda_m", "peak_height"])?;
    for p in &all_peaks {
        w.write_record([p.n_sites.to_string(), g12(p.lambda_m), g12(p.peak_height)])?;
    }
    w.flush()?;
    outputs.push(peaks_path);

    let collapse_path = cfg.output_dir.join("collapse.csv");
    let mut w = csv::Writer::from_path(&collapse_path)?;
    w.write_record(["x", "y", "N"])?;
    for (curve, peak) in collapse_curves.iter().zip(&collapse_peaks) {
        let (xs, ys) = rescale(curve, peak, collapse.b, collapse.nu_inverse);
        for (x, y) in xs.iter().zip(&ys) {
            w.write_record([g12(*x), g12(*y), curve.n_sites.to_string()])?;
        }
    }
    w.flush()?;
    outputs.push(collapse_path);

    let fits_path = cfg.output_dir.join("fits.json");
    write_json(
        &fits_path,
        &json!({
            "engine_version": ENGINE_VERSION,
            "peak_position_fit": position_fit,
            "peak_height_fit": height_fit,
            "collapse": {
                "b": collapse.b,
                "nu_inverse": collapse.nu_inverse,
                "nu": collapse.nu,
                "residual": collapse.residual,
                "iterations": collapse.iterations,
                "converged": collapse.converged,
                "sizes": collapse_sizes,
                "q_curve": collapse.q_curve,
            },
            "height_collapse_gap": collapse.b - height_fit.exponent,
            "asymptotic": {
                "n_sites": asymptotic_size,
                "window": [opts.asymptotic_window.0, opts.asymptotic_window.1],
                "fit": asymptotic.as_ref().ok(),
                "error": asymptotic.as_ref().err(),
            },
        }),
    )?;
    outputs.push(fits_path);
    write_run_json(cfg, "scaling", started, &outputs)?;

    println!(
        "1 - lambda_m ~ N^{:.4}   peak height ~ N^{:.4}   collapse b = {:.4}, nu = {:.4}{}",
        position_fit.exponent,
        height_fit.exponent,
        collapse.b,
        collapse.nu,
        if collapse.converged { "" } else { " (not converged)" }
    );
    if let Ok(fit) = &asymptotic {
        println!("dN_eff/dlambda ~ (1 - lambda)^{:.4} at N = {asymptotic_size}", fit.exponent);
    }
    Ok(Status::Passed)
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub max_n: usize,
    pub lambdas: Vec<f64>,
    pub tol_scale: f64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_VALIDATE_LAMBDAS: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 3.0];

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn cmd_validate(opts: &ValidateOptions) -> anyhow::Result<Status> {
    if opts.max_n > ed::MAX_ED_SITES || opts.max_n < 4 {
        return Err(config_error(format!(
            "max N must lie in 4..={}, got {}",
            ed::MAX_ED_SITES,
            opts.max_n
        )));
    }
    if opts.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(config_error("couplings must be finite and non-negative"));
    }
    ensure_dir(&opts.output_dir)?;
    let path = opts.output_dir.join("validate.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["N", "lambda", "xx", "yy", "zz", "mz", "neff", "tolerance", "argmax_ok", "pass"])?;
    println!(
        "{:>3} {:>7} {:>10} {:>10} {:>10} {:>10} {:>10} {:>7} status",
        "N", "lambda", "xx", "yy", "zz", "mz", "neff", "argmax"
    );
    let mut all_ok = true;
    for n in (4..=opts.max_n).step_by(2) {
        for &lambda in &opts.lambdas {
            let params = ChainParams::even(n, lambda)?;
            let table = complete_table(&params)?;
            let gs = ed::ground_state(&params)?;
            let obs = ed::observable_suite(&gs);
            let d = [
                max_abs_diff(table.xx(), &obs.xx),
                max_abs_diff(table.yy().unwrap_or_default(), &obs.yy),
                max_abs_diff(table.zz().unwrap_or_default(), &obs.zz),
                (table.mz().unwrap_or(f64::NAN) - obs.mz).abs(),
                (effective_size(&table).n_eff - obs.neff_x()).abs(),
            ];
            let tol = opts.tol_scale / n as f64;
            let scan = ed::scan_directions(&obs, 16, 32)?;
            let (dir, degenerate) = argmax_direction(&table);
            let argmax_ok = if lambda == 0.0 {
                let equator = scan.thetas.iter().position(|&t| (t - FRAC_PI_2).abs() < 1e-12);
                degenerate
                    && equator.is_some_and(|i| {
                        scan.surface[i].iter().all(|&v| (v - scan.max_variance).abs() <= 1e-9 * n as f64)
                    })
            } else {
                let phi = scan.argmax.phi();
                dir == Direction::x()
                    && !degenerate
                    && (scan.argmax.theta() - FRAC_PI_2).abs() <= scan.theta_step() + 1e-12
                    && phi.min(2.0 * PI - phi) <= scan.phi_step() + 1e-12
            };
            let pass = argmax_ok && d.iter().all(|&x| x <= tol);
            all_ok &= pass;
            let mut record = vec![n.to_string(), g12(lambda)];
            record.extend(d.iter().map(|&x| g12(x)));
            record.extend([g12(tol), argmax_ok.to_string(), pass.to_string()]);
            w.write_record(&record)?;
            println!(
                "{n:>3} {:>7} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>7} {}",
                g12(lambda),
                d[0],
                d[1],
                d[2],
                d[3],
                d[4],
                if argmax_ok { "x" } else { "WRONG" },
                if pass { "ok" } else { "FAIL" }
            );
        }
    }
    w.flush()?;
    Ok(if all_ok { Status::Passed } else { Status::Failed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchSymbol {
    /// `xx` symbol of the chain at `N = 2 * order`, `lambda = 0.9`.
    Tfim,
    /// Identity matrix; every determinant is 1.
    Identity,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub orders: Vec<usize>,
    pub symbol: BenchSymbol,
    pub output_dir: PathBuf,
}

pub const BENCH_REQUIRED_SPEEDUP: f64 = 20.0;
pub const BENCH_SPEEDUP_ORDER: usize = 1024;

pub fn cmd_bench(opts: &BenchOptions) -> anyhow::Result<Status> {
    if opts.orders.contains(&0) {
        return Err(config_error("orders must be positive"));
    }
    ensure_dir(&opts.output_dir)?;
    let path = opts.output_dir.join("bench.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["order", "naive_seconds", "fast_seconds", "speedup", "max_deviation", "pass"])?;
    println!(
        "{:>6} {:>12} {:>12} {:>9} {:>12} status",
        "order", "naive [s]", "fast [s]", "speedup", "deviation"
    );
    let mut all_ok = true;
    for &order in &opts.orders {
        let symbol = match opts.symbol {
            BenchSymbol::Tfim => {
                let wick = wick_coefficients(&ChainParams::even(2 * order, 0.9)?)?;
                ToeplitzSymbol::from_fn(order, |m| wick.g(m - 1))?
            }
            BenchSymbol::Identity => ToeplitzSymbol::from_fn(order, |m| if m == 0 { 1.0 } else { 0.0 })?,
        };
        let t = Instant::now();
        let naive = det_single_sweep(&symbol, order)?;
        let naive_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let fast = det_sweep(&symbol, order)?;
        let fast_s = t.elapsed().as_secs_f64();

        let deviation = match opts.symbol {
            BenchSymbol::Tfim => fast
                .cross_checked_orders()
                .iter()
                .map(|&k| (fast.value(k) - naive.value(k)).abs())
                .fold(0.0, f64::max),
            BenchSymbol::Identity => fast
                .values()
                .iter()
                .chain(naive.values())
                .map(|v| (v - 1.0).abs())
                .fold(0.0, f64::max),
        };
        let speedup = naive_s / fast_s.max(f64::MIN_POSITIVE);
        let mut pass = deviation <= 1e-8;
        if order >= BENCH_SPEEDUP_ORDER {
            pass &= speedup >= BENCH_REQUIRED_SPEEDUP;
        }
        all_ok &= pass;
        w.write_record([
            order.to_string(),
            g12(naive_s),
            g12(fast_s),
            g12(speedup),
            g12(deviation),
            pass.to_string(),
        ])?;
        println!(
            "{order:>6} {naive_s:>12.4} {fast_s:>12.4} {speedup:>8.1}x {deviation:>12.2e} {}",
            if pass { "ok" } else { "FAIL" }
        );
    }
    w.flush()?;
    Ok(if all_ok { Status::Passed } else { Status::Failed })
}

pub fn cmd_domain_wall(n_sites: usize, output_dir: &Path) -> anyhow::Result<Status> {
    if n_sites == 0 {
        return Err(config_error("N must be positive"));
    }
    ensure_dir(output_dir)?;
    let with_oracle = n_sites <= ed::MAX_ED_SITES;
    let path = output_dir.join(format!("domain_wall_N{n_sites}.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["n", "neff", "oracle"])?;
    let mut all_ok = true;
    for n in 0..=n_sites {
        let closed = domain_wall_neff(n, n_sites)?;
        let oracle = if with_oracle {
            let o = domain_wall_neff_oracle(n, n_sites)?;
            all_ok &= (o - closed).abs() <= 1e-12;
            g12(o)
        } else {
            String::new()
        };
        w.write_record([n.to_string(), g12(closed), oracle.clone()])?;
        println!("{n:>5} {:>16} {oracle:>16}", g12(closed));
    }
    w.flush()?;
    Ok(if all_ok { Status::Passed } else { Status::Failed })
}
