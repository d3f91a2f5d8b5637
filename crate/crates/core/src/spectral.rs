//! Shifted power iteration for nonnegative irreducible operators.

use crate::error::{Error, Result};

/// Stopping rule shared by every Perron-type iteration in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Relative tolerance on successive eigenvalue estimates and on the residual.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tolerance: 1e-12,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PowerResult {
    pub eigenvalue: f64,
    /// Sup-norm normalized, entries > 0 for an irreducible operator.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iteration on `shift * I + M`, where `apply(x, y)` writes `M x` into `y`.
///
/// The eigenvalue estimate is the Rayleigh quotient of the shifted operator
/// minus the shift. Converged once three successive estimates agree and the
/// residual `||(M + shift) x - rho x||_inf` is below tolerance, relative to
/// the shifted and unshifted eigenvalue respectively.
pub(crate) fn power_iterate<F>(
    dim: usize,
    shift: f64,
    apply: F,
    opts: &SpectralOptions,
    what: &'static str,
) -> Result<PowerResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut x = vec![1.0; dim];
    let mut y = vec![0.0; dim];
    let mut history = [f64::NAN; 3];
    for iter in 1..=opts.max_iterations {
        apply(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let xx: f64 = x.iter().map(|a| a * a).sum();
        let rho = xy / xx;
        let residual = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - rho * a).abs())
            .fold(0.0, f64::max);

        history = [history[1], history[2], rho];
        let scale = rho.abs().max(f64::MIN_POSITIVE);
        let stable = (history[2] - history[1]).abs() <= opts.tolerance * scale
            && (history[1] - history[0]).abs() <= opts.tolerance * scale;

        let norm = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NoConvergence {
                what,
                iterations: iter,
            });
        }
        let unshifted = (rho - shift).abs().max(1e-6 * scale);
        if stable && residual <= opts.tolerance * unshifted {
            // x is the converged vector; y/norm would be one more step
            let xmax = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let vector = x.iter().map(|v| v / xmax).collect();
            return Ok(PowerResult {
                eigenvalue: rho - shift,
                vector,
                iterations: iter,
            });
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: opts.max_iterations,
    })
}
