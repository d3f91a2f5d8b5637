//! KMS states for generalized gauge actions, represented by their
//! restriction to the diagonal: a Markov measure on cylinder sets.
//!
//! A state `ν` on `C(X_A)` with `ν ∘ λ_φ = β ν` for `φ = (1 − f) log β` is the
//! diagonal part of a `log β`-KMS state for the action generated by `f`, and
//! conversely. Everything here is checked through that eigen-equation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::locfun::LocallyConstantFunction;
use crate::ruelle::{RpfData, RuelleOperator};
use crate::sft::{admissible_words, perron, BlockIndex, TransitionMatrix, Word};
use crate::spectral::SpectralOptions;

/// Cylinder masses of a probability measure on `X_A`.
///
/// Masses of words of length `m` (the base depth) are stored. Longer words
/// follow `mass(jμ) = e^{φ(jμ)} / r · mass(μ)`, the eigen-equation
/// `ν ∘ λ_φ = r ν` applied to the cylinder `U_{jμ}`; shorter words are sums
/// over their one-symbol extensions.
#[derive(Debug, Clone)]
pub struct MarkovMeasure {
    matrix: Arc<TransitionMatrix>,
    base_depth: usize,
    base: Vec<f64>,
    potential: LocallyConstantFunction,
    eigenvalue: f64,
}

impl MarkovMeasure {
    pub fn from_eigendata(
        matrix: Arc<TransitionMatrix>,
        base_depth: usize,
        base: Vec<f64>,
        potential: LocallyConstantFunction,
        eigenvalue: f64,
    ) -> Result<Self> {
        if base_depth == 0 || potential.depth() > base_depth {
            return Err(Error::DepthTooSmall {
                requested: base_depth,
                minimum: potential.depth(),
            });
        }
        if **potential.matrix() != *matrix {
            return Err(Error::MatrixMismatch);
        }
        if base.len() != matrix.word_count(base_depth) {
            return Err(Error::InvalidArgument(format!(
                "base table has {} entries for depth {}",
                base.len(),
                base_depth
            )));
        }
        if !(eigenvalue > 0.0) {
            return Err(Error::InvalidArgument(format!("eigenvalue {eigenvalue} must be > 0")));
        }
        Ok(MarkovMeasure {
            matrix,
            base_depth,
            base,
            potential: potential.to_real(),
            eigenvalue,
        })
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn base_depth(&self) -> usize {
        self.base_depth
    }

    /// The `r` in the extension rule.
    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn mass(&self, word: &Word) -> Result<f64> {
        let w = word.symbols();
        if !self.matrix.is_admissible(w) {
            return Err(Error::NotAdmissible(word.to_string()));
        }
        let m = self.base_depth;
        if w.len() >= m {
            let tail = &w[w.len() - m..];
            let index = BlockIndex::new(&self.matrix, m);
            let mut mass = self.base[index.rank(&self.matrix, tail)];
            for i in (0..w.len() - m).rev() {
                mass *= self.potential.at_prefix(&w[i..]).exp() / self.eigenvalue;
            }
            Ok(mass)
        } else {
            let level = self.level(w.len());
            let index = BlockIndex::new(&self.matrix, w.len());
            Ok(level[index.rank(&self.matrix, w)])
        }
    }

    /// Masses of all admissible words of length `depth`, in table order.
    pub fn level(&self, depth: usize) -> Vec<f64> {
        let m = self.base_depth;
        let mut current = self.base.clone();
        if depth >= m {
            for len in m..depth {
                let shorter = BlockIndex::new(&self.matrix, len);
                let mut next = Vec::with_capacity(self.matrix.word_count(len + 1));
                self.matrix.visit_words(len + 1, |_, w| {
                    let parent = current[shorter.rank(&self.matrix, &w[1..])];
                    next.push(self.potential.at_prefix(w).exp() / self.eigenvalue * parent);
                });
                current = next;
            }
            current
        } else {
            for len in (depth..m).rev() {
                current = self.sum_children(&current, len);
            }
            current
        }
    }

    /// Parent masses at length `len` from child masses at length `len + 1`.
    fn sum_children(&self, children: &[f64], len: usize) -> Vec<f64> {
        let mut parents = vec![0.0; self.matrix.word_count(len)];
        let index = BlockIndex::new(&self.matrix, len);
        self.matrix.visit_words(len + 1, |i, w| {
            parents[index.rank(&self.matrix, &w[..len])] += children[i];
        });
        parents
    }

    /// Tables for lengths `0..=depth`. Shorter tables are built by summing the
    /// deepest one, so `Σ_j mass(μj) = mass(μ)` holds exactly in floating
    /// point when summed in table order.
    pub fn mass_tables(&self, depth: usize) -> Vec<Vec<f64>> {
        let mut tables = vec![self.level(depth)];
        for len in (0..depth).rev() {
            let parents = self.sum_children(tables.last().expect("nonempty"), len);
            tables.push(parents);
        }
        tables.reverse();
        tables
    }

    /// `(word, mass)` for every admissible word of length `1..=depth`.
    pub fn mass_entries(&self, depth: usize) -> Vec<(Word, f64)> {
        let tables = self.mass_tables(depth);
        let mut out = Vec::new();
        for (len, table) in tables.iter().enumerate().skip(1) {
            for (w, m) in admissible_words(&self.matrix, len).into_iter().zip(table) {
                out.push((w, *m));
            }
        }
        out
    }

    /// `∫ g dν = Σ_{w ∈ B_depth(g)} g(w)·ν(U_w)`.
    pub fn expectation(&self, g: &LocallyConstantFunction) -> Result<f64> {
        if **g.matrix() != *self.matrix {
            return Err(Error::MatrixMismatch);
        }
        let masses = self.level(g.depth());
        let values = g.values().to_real();
        Ok(values.iter().zip(&masses).map(|(v, m)| v * m).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmsOptions {
    pub spectral: SpectralOptions,
    /// Target `|F(β)|` for the root solve.
    pub root_tolerance: f64,
    pub max_bisections: usize,
    /// Hard upper bound for bracket expansion.
    pub beta_limit: f64,
}

impl Default for KmsOptions {
    fn default() -> Self {
        KmsOptions {
            spectral: SpectralOptions::default(),
            root_tolerance: 1e-10,
            max_bisections: 200,
            beta_limit: 1e6,
        }
    }
}

/// `φ = (1 − f)·log β`.
pub fn potential_for(f: &LocallyConstantFunction, beta: f64) -> LocallyConstantFunction {
    f.map_real(|x| (1.0 - x) * beta.ln())
}

/// `f = 1 − φ / log β`, inverse of [`potential_for`].
pub fn gauge_for(phi: &LocallyConstantFunction, beta: f64) -> LocallyConstantFunction {
    let l = beta.ln();
    phi.map_real(|x| 1.0 - x / l)
}

/// The diagonal of the unique KMS state of the gauge action:
/// `mass(μ) = r^{−|μ|}·v_{μ_last}` with `Av = rv`, `Σ_j v_j = r`.
pub fn gauge_kms(matrix: &Arc<TransitionMatrix>, opts: &SpectralOptions) -> Result<MarkovMeasure> {
    let p = perron(matrix, opts)?;
    let total: f64 = p.right_vector.iter().sum();
    let base = p.right_vector.iter().map(|v| v / total).collect();
    MarkovMeasure::from_eigendata(
        matrix.clone(),
        1,
        base,
        LocallyConstantFunction::constant_real(matrix.clone(), 0.0),
        p.eigenvalue,
    )
}

/// Eigenmeasure of `λ_{(1−f) log β}`; a KMS diagonal only when `β = β_f`.
pub fn kms_measure(f: &LocallyConstantFunction, beta: f64, opts: &SpectralOptions) -> Result<MarkovMeasure> {
    if !(beta > 1.0) {
        return Err(Error::InvalidArgument(format!("β = {beta} must exceed 1")));
    }
    Ok(RuelleOperator::new(&potential_for(f, beta)).rpf(opts)?.measure)
}

/// `max |ν(λ_φ χ_μ) − β·ν(χ_μ)|` over cylinders with `|μ| ≤ depth_bound`,
/// where `φ = (1 − f) log β`.
pub fn kms_condition_check(
    f: &LocallyConstantFunction,
    beta: f64,
    measure: &MarkovMeasure,
    depth_bound: usize,
) -> Result<f64> {
    let matrix = f.matrix().clone();
    let op = RuelleOperator::new(&potential_for(f, beta));
    let mut worst = 0.0_f64;
    for len in 0..=depth_bound {
        let masses = measure.level(len);
        for (word, mass) in admissible_words(&matrix, len).iter().zip(masses) {
            let chi = LocallyConstantFunction::indicator(matrix.clone(), word)?;
            let lhs = measure.expectation(&op.apply(&chi)?)?;
            worst = worst.max((lhs - beta * mass).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct KmsSolution {
    pub gauge: LocallyConstantFunction,
    pub beta: f64,
    pub potential: LocallyConstantFunction,
    pub measure: MarkovMeasure,
    pub rpf: RpfData,
    pub bisections: usize,
}

impl KmsSolution {
    /// The inverse temperature `log β`.
    pub fn log_beta(&self) -> f64 {
        self.beta.ln()
    }
}

/// `F(β) = log r_{(1−f) log β} − log β`.
pub fn beta_equation(f: &LocallyConstantFunction, beta: f64, opts: &SpectralOptions) -> Result<f64> {
    let r = RuelleOperator::new(&potential_for(f, beta)).spectral_radius(opts)?;
    Ok(r.ln() - beta.ln())
}

/// Finds the unique `β_f > 1` admitting a `log β_f`-KMS state for the action
/// generated by `f`, by bisection on `F(β)`.
///
/// Without a bracket, `f` must be strictly positive; the search starts from
/// `[1 + 10⁻⁶, r_A^c]` with `c = ⌈max f / min f⌉` and doubles the upper end
/// until `F` changes sign or `β` exceeds `opts.beta_limit`.
pub fn solve_beta(
    f: &LocallyConstantFunction,
    bracket: Option<(f64, f64)>,
    opts: &KmsOptions,
) -> Result<KmsSolution> {
    let (lo, hi) = match bracket {
        Some((lo, hi)) if lo > 1.0 && hi > lo => (lo, hi),
        Some((lo, hi)) => {
            return Err(Error::InvalidArgument(format!(
                "bracket [{lo}, {hi}] must satisfy 1 < lo < hi"
            )))
        }
        None => {
            let (min, max) = (f.min_value(), f.max_value());
            if !(min > 0.0) {
                return Err(Error::NoBracket { lo: 1.0, hi: f64::INFINITY });
            }
            let r = perron(f.matrix(), &opts.spectral)?.eigenvalue;
            (1.0 + 1e-6, r.powf((max / min).ceil()))
        }
    };
    let eval = |beta: f64| beta_equation(f, beta, &opts.spectral);
    let tol = opts.root_tolerance;

    let f_lo = eval(lo)?;
    let (mut lo, mut hi) = (lo, hi);
    let mut f_hi = eval(hi)?;
    let root = if f_lo.abs() <= tol {
        Some(lo)
    } else if f_lo < 0.0 {
        return Err(Error::NoBracket { lo, hi });
    } else {
        while f_hi > tol {
            if hi * 2.0 > opts.beta_limit {
                return Err(Error::NoBracket { lo, hi });
            }
            lo = hi;
            hi *= 2.0;
            f_hi = eval(hi)?;
        }
        (f_hi.abs() <= tol).then_some(hi)
    };

    let mut bisections = 0;
    let beta = match root {
        Some(beta) => beta,
        None => loop {
            if bisections == opts.max_bisections {
                return Err(Error::NoConvergence {
                    what: "β bisection",
                    iterations: bisections,
                });
            }
            bisections += 1;
            let mid = 0.5 * (lo + hi);
            let f_mid = eval(mid)?;
            if f_mid.abs() <= tol {
                break mid;
            }
            if f_mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        },
    };

    let potential = potential_for(f, beta);
    let rpf = RuelleOperator::new(&potential).rpf(&opts.spectral)?;
    Ok(KmsSolution {
        gauge: f.clone(),
        beta,
        potential,
        measure: rpf.measure.clone(),
        rpf,
        bisections,
    })
}

/// `∫ g dν`.
pub fn expectation(measure: &MarkovMeasure, g: &LocallyConstantFunction) -> Result<f64> {
    measure.expectation(g)
}
