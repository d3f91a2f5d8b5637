//! The Ruelle transfer operator `λ_φ f(x) = Σ_{σy = x} e^{φ(y)} f(y)` on
//! locally constant functions, its matrix on depth-`m` value tables, and
//! Ruelle–Perron–Frobenius eigendata.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kms::MarkovMeasure;
use crate::locfun::LocallyConstantFunction;
use crate::sft::{BlockIndex, TransitionMatrix};
use crate::spectral::{power_iterate, SpectralOptions};

/// `λ_φ` for a locally constant potential `φ`.
#[derive(Debug, Clone)]
pub struct RuelleOperator {
    potential: LocallyConstantFunction,
}

impl RuelleOperator {
    pub fn new(potential: &LocallyConstantFunction) -> Self {
        RuelleOperator {
            potential: potential.to_real(),
        }
    }

    /// `λ_A`, the operator with zero potential.
    pub fn unweighted(matrix: Arc<TransitionMatrix>) -> Self {
        RuelleOperator {
            potential: LocallyConstantFunction::constant_real(matrix, 0.0),
        }
    }

    pub fn potential(&self) -> &LocallyConstantFunction {
        &self.potential
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        self.potential.matrix()
    }

    /// `λ_φ(f)`, of depth `max(depth φ, depth f, 2) − 1`.
    pub fn apply(&self, f: &LocallyConstantFunction) -> Result<LocallyConstantFunction> {
        let matrix = self.matrix();
        if **matrix != **f.matrix() {
            return Err(Error::MatrixMismatch);
        }
        let phi = &self.potential;
        let depth = phi.depth().max(f.depth()).max(2) - 1;
        let mut buf = Vec::with_capacity(depth + 1);
        LocallyConstantFunction::from_fn_real(matrix.clone(), depth, |x| {
            let mut acc = 0.0;
            for j in 0..matrix.size() {
                if !matrix.allows(j, x[0]) {
                    continue;
                }
                buf.clear();
                buf.push(j);
                buf.extend_from_slice(x);
                acc += phi.at_prefix(&buf).exp() * f.at_prefix(&buf);
            }
            acc
        })
    }

    pub fn apply_n(&self, f: &LocallyConstantFunction, n: usize) -> Result<LocallyConstantFunction> {
        let mut g = f.to_real();
        for _ in 0..n {
            g = self.apply(&g)?;
        }
        Ok(g)
    }

    /// The matrix of `λ_φ` acting on depth-`depth` value tables.
    pub fn build_matrix(&self, depth: usize) -> Result<TransferMatrix> {
        let minimum = self.potential.depth().max(2);
        if depth < minimum {
            return Err(Error::DepthTooSmall {
                requested: depth,
                minimum,
            });
        }
        let matrix = self.matrix();
        let index = BlockIndex::new(matrix, depth);
        let mut rows = Vec::with_capacity(index.size());
        let mut eta = Vec::with_capacity(depth);
        matrix.visit_words(depth, |_, nu| {
            let mut row = Vec::new();
            for j in 0..matrix.size() {
                if !matrix.allows(j, nu[0]) {
                    continue;
                }
                eta.clear();
                eta.push(j);
                eta.extend_from_slice(&nu[..depth - 1]);
                row.push((index.rank(matrix, &eta), self.potential.at_prefix(&eta).exp()));
            }
            rows.push(row);
        });
        Ok(TransferMatrix {
            matrix: matrix.clone(),
            depth,
            rows,
        })
    }

    /// `r_φ` alone, skipping the eigenmeasure.
    pub fn spectral_radius(&self, opts: &SpectralOptions) -> Result<f64> {
        let t = self.build_matrix(self.potential.depth().max(2))?;
        let shift = t.max_row_sum();
        let right = power_iterate(
            t.dim(),
            shift,
            |x, y| t.apply_table_into(x, y),
            opts,
            "transfer operator eigenvalue",
        )?;
        Ok(right.eigenvalue)
    }

    /// Ruelle–Perron–Frobenius eigendata `(r_φ, g_φ, ν_φ)` with `ν_φ(1) = 1`
    /// and `ν_φ(g_φ) = 1`.
    pub fn rpf(&self, opts: &SpectralOptions) -> Result<RpfData> {
        let depth = self.potential.depth().max(2);
        let t = self.build_matrix(depth)?;
        let shift = t.max_row_sum();
        let right = power_iterate(
            t.dim(),
            shift,
            |x, y| t.apply_table_into(x, y),
            opts,
            "transfer operator eigenfunction",
        )?;
        let left = power_iterate(
            t.dim(),
            shift,
            |x, y| t.apply_transpose_into(x, y),
            opts,
            "transfer operator eigenmeasure",
        )?;
        // two-sided Rayleigh quotient: second order in the vector errors
        let t_right = t.apply_table(&right.vector);
        let numerator: f64 = left.vector.iter().zip(&t_right).map(|(u, v)| u * v).sum();
        let denominator: f64 = left.vector.iter().zip(&right.vector).map(|(u, v)| u * v).sum();
        let eigenvalue = numerator / denominator;
        let total: f64 = left.vector.iter().sum();
        let base: Vec<f64> = left.vector.iter().map(|w| w / total).collect();
        let pairing: f64 = base.iter().zip(&right.vector).map(|(w, g)| w * g).sum();
        let g: Vec<f64> = right.vector.iter().map(|g| g / pairing).collect();
        let eigenfunction = LocallyConstantFunction::from_values(
            self.matrix().clone(),
            depth,
            crate::locfun::Values::Real(g),
        )?;
        let measure = MarkovMeasure::from_eigendata(
            self.matrix().clone(),
            depth,
            base,
            self.potential.clone(),
            eigenvalue,
        )?;
        Ok(RpfData {
            eigenvalue,
            eigenfunction,
            measure,
            iterations: right.iterations + left.iterations,
        })
    }

    /// Relative sup-norm gap between `λ_φⁿ(a)` and `λ_Aⁿ(a·e^{φⁿ})`,
    /// normalized by `max(1, ‖λ_φⁿ(a)‖∞)`.
    pub fn power_identity_check(&self, a: &LocallyConstantFunction, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("power identity needs n ≥ 1".into()));
        }
        let lhs = self.apply_n(a, n)?;
        let weight = self.potential.birkhoff(n)?.exp();
        let rhs = RuelleOperator::unweighted(self.matrix().clone()).apply_n(&a.mul(&weight)?, n)?;
        Ok(lhs.sup_distance(&rhs)? / lhs.sup_norm().max(1.0))
    }

    /// Gaps `‖λ_φⁿ(a)/r_φⁿ − ν_φ(a)·g_φ‖∞` for `n = 1..=n_max`.
    pub fn convergence_profile(
        &self,
        a: &LocallyConstantFunction,
        n_max: usize,
        rpf: &RpfData,
    ) -> Result<ConvergenceProfile> {
        let target = rpf.eigenfunction.scale(rpf.measure.expectation(a)?);
        let mut u = a.to_real();
        let mut gaps = Vec::with_capacity(n_max);
        for _ in 0..n_max {
            u = self.apply(&u)?.scale(1.0 / rpf.eigenvalue);
            gaps.push(u.sup_distance(&target)?);
        }
        Ok(ConvergenceProfile {
            gaps,
            scale: target.sup_norm().max(1.0),
        })
    }
}

/// `λ_φ` as a sparse nonnegative matrix on depth-`m` value tables. Row `ν`
/// has an entry `e^{φ(η)}` at column `η` exactly when `η = j·ν₁…ν_{m−1}`
/// is admissible.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    matrix: Arc<TransitionMatrix>,
    depth: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransferMatrix {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .iter()
            .find(|(c, _)| *c == col)
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|(_, w)| w).sum()).collect()
    }

    fn max_row_sum(&self) -> f64 {
        self.row_sums().into_iter().fold(0.0, f64::max)
    }

    fn apply_table_into(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            let mut acc = 0.0;
            for &(c, w) in row {
                acc += w * x[c];
            }
            *yi = acc;
        }
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (row, xi) in self.rows.iter().zip(x) {
            for &(c, w) in row {
                y[c] += w * xi;
            }
        }
    }

    /// `T · values`.
    pub fn apply_table(&self, values: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_table_into(values, &mut y);
        y
    }

    /// `values · T`.
    pub fn apply_transpose(&self, values: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_transpose_into(values, &mut y);
        y
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }
}

#[derive(Debug, Clone)]
pub struct RpfData {
    pub eigenvalue: f64,
    pub eigenfunction: LocallyConstantFunction,
    pub measure: MarkovMeasure,
    pub iterations: usize,
}

impl RpfData {
    /// `‖λ_φ(g) − r g‖∞`.
    pub fn eigenfunction_residual(&self, op: &RuelleOperator) -> Result<f64> {
        let lg = op.apply(&self.eigenfunction)?;
        lg.sup_distance(&self.eigenfunction.scale(self.eigenvalue))
    }

    /// `max |ν(λ_φ χ_μ) − r ν(χ_μ)|` over cylinders of length ≤ `depth`.
    pub fn duality_residual(&self, op: &RuelleOperator, depth: usize) -> Result<f64> {
        let matrix = op.matrix().clone();
        let mut worst = 0.0_f64;
        for len in 0..=depth {
            for word in crate::sft::admissible_words(&matrix, len) {
                let chi = LocallyConstantFunction::indicator(matrix.clone(), &word)?;
                let lhs = self.measure.expectation(&op.apply(&chi)?)?;
                let rhs = self.eigenvalue * self.measure.mass(&word)?;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        Ok(worst)
    }

    /// `ν(g)`, which is 1 up to rounding.
    pub fn normalization(&self) -> Result<f64> {
        self.measure.expectation(&self.eigenfunction)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceProfile {
    pub gaps: Vec<f64>,
    /// `max(1, ‖ν(a)·g‖∞)`; gaps below `scale · 1e-12` count as converged.
    pub scale: f64,
}

impl ConvergenceProfile {
    fn floor(&self) -> f64 {
        1e-12 * self.scale
    }

    /// Index of the smallest gap; past it, only rounding drift remains.
    fn settled_at(&self) -> Option<usize> {
        self.gaps
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }

    /// Geometric decay rate over the last stretch of gaps (up to the smallest
    /// one) well above the rounding floor; `None` when fewer than two such
    /// gaps exist.
    pub fn tail_ratio(&self) -> Option<f64> {
        let floor = self.floor() * 1e3;
        let end = self.settled_at()?;
        let last = self.gaps[..=end].iter().rposition(|&g| g > floor)?;
        let first = self.gaps[..=last]
            .iter()
            .rposition(|&g| g <= floor)
            .map_or(0, |i| i + 1)
            .max(last.saturating_sub(10));
        if last == first {
            return None;
        }
        Some((self.gaps[last] / self.gaps[first]).powf(1.0 / (last - first) as f64))
    }

    /// The gaps reached the rounding floor, and the observed rate on the way
    /// there (if any) is at most `max_ratio`.
    pub fn decays_geometrically(&self, max_ratio: f64) -> bool {
        let reached = self
            .settled_at()
            .is_some_and(|i| self.gaps[i] <= self.floor() * 10.0);
        reached && self.tail_ratio().is_none_or(|r| r <= max_ratio)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locfun::Values;
    use crate::sft::Word;

    fn a() -> Arc<TransitionMatrix> {
        Arc::new(TransitionMatrix::full_shift(2))
    }

    fn b() -> Arc<TransitionMatrix> {
        Arc::new(TransitionMatrix::golden_mean())
    }

    fn rb() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn apply_examples() {
        let one = LocallyConstantFunction::constant(a(), 1);
        let out = RuelleOperator::unweighted(a()).apply(&one).unwrap();
        assert_eq!(out.depth(), 1);
        assert_eq!(out.values(), &Values::Real(vec![2.0, 2.0]));

        let one = LocallyConstantFunction::constant(b(), 1);
        let out = RuelleOperator::unweighted(b()).apply(&one).unwrap();
        assert_eq!(out.values(), &Values::Real(vec![2.0, 1.0]));

        let chi = LocallyConstantFunction::indicator(b(), &Word::parse("1").unwrap()).unwrap();
        let out = RuelleOperator::unweighted(b()).apply(&chi).unwrap();
        assert_eq!(out.values(), &Values::Real(vec![1.0, 1.0]));
    }

    #[test]
    fn build_matrix_examples() {
        let t = RuelleOperator::unweighted(a()).build_matrix(2).unwrap();
        assert_eq!(t.dim(), 4);
        assert!(t.row_sums().iter().all(|&s| s == 2.0));
        assert!(matches!(
            RuelleOperator::unweighted(a()).build_matrix(1),
            Err(Error::DepthTooSmall { minimum: 2, .. })
        ));
        let phi = LocallyConstantFunction::from_symbol_table_real(b(), &[0.3, -0.7]).unwrap();
        let t = RuelleOperator::new(&phi).build_matrix(2).unwrap();
        // row ν = 12, column η = 11: weight e^{φ(1)}
        assert_eq!(t.entry(1, 0), 0.3f64.exp());
        // row ν = 11, column η = 21: weight e^{φ(2)}
        assert_eq!(t.entry(0, 2), (-0.7f64).exp());
        assert_eq!(t.entry(0, 1), 0.0);
    }

    #[test]
    fn spectral_radius_of_golden_transfer_matrix() {
        let rpf = RuelleOperator::unweighted(b()).rpf(&SpectralOptions::default()).unwrap();
        assert!((rpf.eigenvalue - rb()).abs() < 1e-12);
    }

    #[test]
    fn rpf_full_shift_is_uniform() {
        let op = RuelleOperator::unweighted(a());
        let rpf = op.rpf(&SpectralOptions::default()).unwrap();
        assert!((rpf.eigenvalue - 2.0).abs() < 1e-12);
        assert!(rpf.eigenfunction.sup_distance(&LocallyConstantFunction::constant(a(), 1)).unwrap() < 1e-12);
        for len in 1..6 {
            for w in crate::sft::admissible_words(&a(), len) {
                let m = rpf.measure.mass(&w).unwrap();
                assert!((m - 0.5f64.powi(len as i32)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rpf_cross_value_golden_side() {
        // φ = (1 − c₂)·log 2 on the golden mean shift has r_φ = 2
        let c2 = LocallyConstantFunction::from_symbol_table(b(), &[1, 0]).unwrap();
        let one = LocallyConstantFunction::constant(b(), 1);
        let phi = one.sub(&c2).unwrap().scale(2f64.ln());
        let op = RuelleOperator::new(&phi);
        let rpf = op.rpf(&SpectralOptions::default()).unwrap();
        assert!((rpf.eigenvalue - 2.0).abs() < 1e-12);
        assert!(rpf.eigenfunction_residual(&op).unwrap() < 1e-11);
        assert!((rpf.normalization().unwrap() - 1.0).abs() < 1e-12);
        assert!(rpf.duality_residual(&op, 4).unwrap() < 1e-11);
    }

    #[test]
    fn power_identity_trivial_cases() {
        let one = LocallyConstantFunction::constant(a(), 1);
        let op = RuelleOperator::unweighted(a());
        assert_eq!(op.power_identity_check(&one, 3).unwrap(), 0.0);
        let phi = LocallyConstantFunction::from_symbol_table_real(b(), &[0.4, -1.1]).unwrap();
        let f = LocallyConstantFunction::from_symbol_table_real(b(), &[2.0, 3.0]).unwrap();
        assert_eq!(RuelleOperator::new(&phi).power_identity_check(&f, 1).unwrap(), 0.0);
    }

    #[test]
    fn convergence_profiles() {
        let op = RuelleOperator::unweighted(a());
        let rpf = op.rpf(&SpectralOptions::default()).unwrap();
        let one = LocallyConstantFunction::constant(a(), 1);
        let prof = op.convergence_profile(&one, 10, &rpf).unwrap();
        assert!(prof.gaps.iter().all(|&g| g < 1e-12));

        let op = RuelleOperator::unweighted(b());
        let rpf = op.rpf(&SpectralOptions::default()).unwrap();
        let chi = LocallyConstantFunction::indicator(b(), &Word::parse("1").unwrap()).unwrap();
        let prof = op.convergence_profile(&chi, 60, &rpf).unwrap();
        // |second eigenvalue| / r_B = (r_B − 1)/r_B = 1/r_B²
        let expected = 1.0 / (rb() * rb());
        assert!((prof.tail_ratio().unwrap() - expected).abs() < 1e-3);
        assert!(prof.decays_geometrically(0.5));
    }
}
