//! Nelder–Mead minimization for a handful of parameters.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop once every vertex is within this distance of the best (per coordinate).
    pub x_tol: f64,
    /// ...and every function value is within this of the best.
    pub f_tol: f64,
    /// Relative size of the initial simplex along each axis.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            x_tol: 1e-7,
            f_tol: 1e-16,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `start` with the standard reflection/expansion/
/// contraction/shrink moves (coefficients 1, 2, 1/2, 1/2).
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, start: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let dim = start.len();
    let mut vertices: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] = if v[i] != 0.0 { v[i] * (1.0 + opts.initial_step) } else { 0.00025 };
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        vertices = order.iter().map(|&i| vertices[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread_x = vertices[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread_f = values[1..].iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        if spread_x <= opts.x_tol && spread_f <= opts.f_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| vertices[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&vertices[dim])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let f_r = f(&reflected);
        if f_r < values[0] {
            let expanded = along(2.0);
            let f_e = f(&expanded);
            if f_e < f_r {
                vertices[dim] = expanded;
                values[dim] = f_e;
            } else {
                vertices[dim] = reflected;
                values[dim] = f_r;
            }
            continue;
        }
        if f_r < values[dim - 1] {
            vertices[dim] = reflected;
            values[dim] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[dim] {
            let c = along(0.5);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = along(-0.5);
            let fc = f(&c);
            (c, fc)
        };
        if f_c < values[dim].min(f_r) {
            vertices[dim] = contracted;
            values[dim] = f_c;
            continue;
        }
        for i in 1..=dim {
            let shrunk: Vec<f64> = vertices[i]
                .iter()
                .zip(&vertices[0])
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            values[i] = f(&shrunk);
            vertices[i] = shrunk;
        }
    }
    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    SimplexResult {
        x: vertices[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let opts = SimplexOptions {
            max_iter: 2000,
            ..SimplexOptions::default()
        };
        let r = minimize(rosen, &[-1.2, 1.0], &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn reports_non_convergence() {
        let r = minimize(|p: &[f64]| p[0] * p[0] + p[1] * p[1], &[3.0, 4.0], &SimplexOptions {
            max_iter: 3,
            ..SimplexOptions::default()
        });
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert!(r.value < 25.0);
    }
}
