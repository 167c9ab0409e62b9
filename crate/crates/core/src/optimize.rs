//! Classical optimizers for variational ground- and excited-state searches.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::config_err;
use crate::math::sqrt;
use crate::Result;

/// Optimizer family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NelderMead,
    /// Quasi-Newton (BFGS) directions with a backtracking line search on
    /// analytic gradients.
    GradientLineSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Per-start iteration cap.
    pub max_iterations: usize,
    /// Convergence tolerance on the cost.
    pub tolerance: f64,
    /// Gradient sup-norm below which the gradient method stops.
    pub gradient_tolerance: f64,
    /// Number of starts; the first uses the supplied initial point.
    pub restarts: usize,
    pub seed: u64,
    /// Random starts are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            max_iterations: 20_000,
            tolerance: 1e-8,
            gradient_tolerance: 1e-8,
            restarts: 8,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(config_err!("optimizer tolerance must be positive"));
        }
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(config_err!("optimizer needs at least one iteration and one start"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// False when every start hit the iteration cap; `x` is then the best
    /// point seen.
    pub converged: bool,
}

/// Minimizes `f` by Nelder-Mead with dimension-adapted coefficients.
/// The simplex is rebuilt around the best vertex until a rebuild no longer
/// improves the cost.
pub fn nelder_mead<F>(f: &mut F, x0: &[f64], max_iterations: usize, tol: f64) -> OptimizeResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        let value = f(x0);
        return OptimizeResult {
            x: Vec::new(),
            value,
            iterations: 0,
            evaluations: 1,
            converged: true,
        };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n > 1 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut evals = 0usize;
    let mut iters = 0usize;
    let mut best_x = x0.to_vec();
    let mut best_f = f(x0);
    evals += 1;
    let mut step = 0.2;
    let mut converged = false;
    while iters < max_iterations {
        let start_f = best_f;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += step;
            let fv = f(&v);
            evals += 1;
            simplex.push((v, fv));
        }
        let mut local_converged = false;
        while iters < max_iterations {
            iters += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(v, _)| {
                    v.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.abs() <= tol * 1e-2 && size <= sqrt(tol) {
                local_converged = true;
                break;
            }
            let mut centroid = vec![0.0; n];
            for (v, _) in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / nf;
                }
            }
            let along = |t: f64, worst: &[f64]| -> Vec<f64> {
                centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
            };
            let worst = simplex[n].0.clone();
            let fw = simplex[n].1;
            let xr = along(alpha, &worst);
            let fr = f(&xr);
            evals += 1;
            if fr < simplex[0].1 {
                let xe = along(alpha * beta, &worst);
                let fe = f(&xe);
                evals += 1;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < fw {
                let xc = along(alpha * gamma, &worst);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma, &worst);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < fw.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let x_best = simplex[0].0.clone();
            for (v, fv) in simplex[1..].iter_mut() {
                for (x, b) in v.iter_mut().zip(&x_best) {
                    *x = b + delta * (*x - b);
                }
                *fv = f(v);
                evals += 1;
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        if local_converged && start_f - best_f <= tol {
            converged = true;
            break;
        }
        step = (step * 0.5).max(1e-3);
    }
    OptimizeResult {
        x: best_x,
        value: best_f,
        iterations: iters,
        evaluations: evals,
        converged,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with an Armijo backtracking line search. `fg` returns the cost and
/// its gradient.
pub fn bfgs<G>(fg: &mut G, x0: &[f64], max_iterations: usize, tol: f64, gtol: f64) -> OptimizeResult
where
    G: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = fg(&x);
    let mut evals = 1;
    let mut h = identity(n);
    let mut stalls = 0;
    let mut converged = false;
    let mut iters = 0;
    while iters < max_iterations {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= gtol {
            converged = true;
            break;
        }
        iters += 1;
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&d, &g);
        if slope >= 0.0 {
            h = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fn_, gn) = fg(&xn);
            evals += 1;
            if fn_ <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            if h != identity(n) {
                h = identity(n);
                continue;
            }
            converged = true;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        stalls = if fx - fn_ <= tol * 1e-3 { stalls + 1 } else { 0 };
        x = xn;
        fx = fn_;
        g = gn;
        if stalls >= 5 {
            converged = true;
            break;
        }
    }
    OptimizeResult {
        x,
        value: fx,
        iterations: iters,
        evaluations: evals,
        converged,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// Runs the configured method from `x0` and from `restarts - 1` seeded random
/// points, keeping the best result. `fg` is required for the gradient method.
pub fn minimize<F, G>(f: &mut F, fg: Option<&mut G>, x0: &[f64], config: &OptimizerConfig) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut fg = fg;
    if config.method == Method::GradientLineSearch && fg.is_none() {
        return Err(config_err!("gradient method needs a gradient"));
    }
    let mut best: Option<OptimizeResult> = None;
    let mut total_evals = 0;
    let mut any_converged = false;
    for start in 0..config.restarts {
        let init: Vec<f64> = if start == 0 {
            x0.to_vec()
        } else {
            (0..x0.len())
                .map(|_| rng.random_range(-config.init_scale..=config.init_scale))
                .collect()
        };
        let r = match config.method {
            Method::NelderMead => nelder_mead(f, &init, config.max_iterations, config.tolerance),
            Method::GradientLineSearch => bfgs(
                fg.as_mut().expect("checked"),
                &init,
                config.max_iterations,
                config.tolerance,
                config.gradient_tolerance,
            ),
        };
        total_evals += r.evaluations;
        any_converged |= r.converged;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one start");
    best.evaluations = total_evals;
    best.converged = any_converged;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    fn rosenbrock_grad(x: &[f64]) -> (f64, Vec<f64>) {
        let n = x.len();
        let mut g = vec![0.0; n];
        for i in 0..n - 1 {
            g[i] += -400.0 * x[i] * (x[i + 1] - x[i] * x[i]) - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * (x[i + 1] - x[i] * x[i]);
        }
        (rosenbrock(x), g)
    }

    #[test]
    fn nelder_mead_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let r = nelder_mead(&mut f, &[0.0, 0.0], 5000, 1e-12);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let mut f = rosenbrock;
        let r = nelder_mead(&mut f, &[-1.2, 1.0], 20000, 1e-14);
        assert!(r.value < 1e-10, "{}", r.value);
    }

    #[test]
    fn bfgs_rosenbrock() {
        let mut g = rosenbrock_grad;
        let r = bfgs(&mut g, &[-1.2, 1.0, 0.5, -0.3], 2000, 1e-14, 1e-10);
        assert!(r.value < 1e-16, "{}", r.value);
    }

    #[test]
    fn restarts_escape_local_minimum() {
        // double well with the deeper minimum near x = -1
        let mut f = |x: &[f64]| (x[0] * x[0] - 1.0).powi(2) + 0.3 * x[0];
        let config = OptimizerConfig {
            restarts: 6,
            init_scale: 2.0,
            seed: 3,
            ..OptimizerConfig::default()
        };
        let r = minimize(&mut f, None::<&mut fn(&[f64]) -> (f64, Vec<f64>)>, &[1.0], &config).unwrap();
        assert!(r.x[0] < 0.0);
    }

    #[test]
    fn gradient_method_requires_gradient() {
        let mut f = |x: &[f64]| x[0] * x[0];
        let config = OptimizerConfig {
            method: Method::GradientLineSearch,
            ..OptimizerConfig::default()
        };
        let none = None::<&mut fn(&[f64]) -> (f64, Vec<f64>)>;
        assert!(minimize(&mut f, none, &[1.0], &config).is_err());
        let bad = OptimizerConfig {
            tolerance: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
