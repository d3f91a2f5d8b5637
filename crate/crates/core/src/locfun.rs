//! Locally constant functions on `X_A`.
//!
//! A depth-`m` function depends only on the first `m` coordinates and is
//! stored as a table over the admissible `m`-words in lexicographic order.
//! These are the computable members of the Hölder class used for
//! potentials, gauge functions and cocycles.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sft::{BlockIndex, TransitionMatrix, Word};

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Int(Vec<i64>),
    Real(Vec<f64>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Int(v) => v.len(),
            Values::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn get(&self, i: usize) -> f64 {
        match self {
            Values::Int(v) => v[i] as f64,
            Values::Real(v) => v[i],
        }
    }

    pub fn to_real(&self) -> Vec<f64> {
        match self {
            Values::Int(v) => v.iter().map(|&x| x as f64).collect(),
            Values::Real(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Int,
    Real,
}

#[derive(Debug, Clone, Copy)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone)]
pub struct LocallyConstantFunction {
    matrix: Arc<TransitionMatrix>,
    index: Arc<BlockIndex>,
    values: Values,
}

impl PartialEq for LocallyConstantFunction {
    fn eq(&self, other: &Self) -> bool {
        self.depth() == other.depth() && *self.matrix == *other.matrix && self.values == other.values
    }
}

impl LocallyConstantFunction {
    /// Builds a depth-`depth` function from a table aligned with
    /// [`crate::sft::admissible_words`].
    pub fn from_values(matrix: Arc<TransitionMatrix>, depth: usize, values: Values) -> Result<Self> {
        if depth == 0 {
            return Err(Error::DepthTooSmall {
                requested: 0,
                minimum: 1,
            });
        }
        let index = Arc::new(BlockIndex::new(&matrix, depth));
        if values.len() != index.size() {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, depth {} needs {}",
                values.len(),
                depth,
                index.size()
            )));
        }
        Ok(LocallyConstantFunction {
            matrix,
            index,
            values,
        })
    }

    pub fn from_fn_int<F: FnMut(&[usize]) -> i64>(
        matrix: Arc<TransitionMatrix>,
        depth: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut v = Vec::new();
        matrix.visit_words(depth, |_, w| v.push(f(w)));
        Self::from_values(matrix, depth, Values::Int(v))
    }

    pub fn from_fn_real<F: FnMut(&[usize]) -> f64>(
        matrix: Arc<TransitionMatrix>,
        depth: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut v = Vec::new();
        matrix.visit_words(depth, |_, w| v.push(f(w)));
        Self::from_values(matrix, depth, Values::Real(v))
    }

    /// Depth-1 integer function `x ↦ table[x₁]`.
    pub fn from_symbol_table(matrix: Arc<TransitionMatrix>, table: &[i64]) -> Result<Self> {
        if table.len() != matrix.size() {
            return Err(Error::InvalidArgument(format!(
                "symbol table has {} entries for {} symbols",
                table.len(),
                matrix.size()
            )));
        }
        Self::from_values(matrix, 1, Values::Int(table.to_vec()))
    }

    pub fn from_symbol_table_real(matrix: Arc<TransitionMatrix>, table: &[f64]) -> Result<Self> {
        if table.len() != matrix.size() {
            return Err(Error::InvalidArgument(format!(
                "symbol table has {} entries for {} symbols",
                table.len(),
                matrix.size()
            )));
        }
        Self::from_values(matrix, 1, Values::Real(table.to_vec()))
    }

    pub fn constant(matrix: Arc<TransitionMatrix>, value: i64) -> Self {
        let n = matrix.size();
        Self::from_values(matrix, 1, Values::Int(vec![value; n])).expect("depth 1 table")
    }

    pub fn constant_real(matrix: Arc<TransitionMatrix>, value: f64) -> Self {
        let n = matrix.size();
        Self::from_values(matrix, 1, Values::Real(vec![value; n])).expect("depth 1 table")
    }

    /// Characteristic function of the cylinder `U_μ`; the empty word gives 1.
    pub fn indicator(matrix: Arc<TransitionMatrix>, word: &Word) -> Result<Self> {
        if !matrix.is_admissible(word.symbols()) {
            return Err(Error::NotAdmissible(word.to_string()));
        }
        let depth = word.len().max(1);
        let mu = word.symbols().to_vec();
        Self::from_fn_int(matrix, depth, |w| (w[..mu.len()] == mu[..]) as i64)
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn depth(&self) -> usize {
        self.index.len()
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn kind(&self) -> ValueKind {
        match self.values {
            Values::Int(_) => ValueKind::Int,
            Values::Real(_) => ValueKind::Real,
        }
    }

    pub fn is_int(&self) -> bool {
        self.kind() == ValueKind::Int
    }

    /// Value at the depth-prefix of `word`, without admissibility checks.
    #[inline]
    pub(crate) fn at_prefix(&self, word: &[usize]) -> f64 {
        let d = self.depth();
        self.values.get(self.index.rank(&self.matrix, &word[..d]))
    }

    #[inline]
    pub(crate) fn at_prefix_int(&self, word: &[usize]) -> i64 {
        let d = self.depth();
        match &self.values {
            Values::Int(v) => v[self.index.rank(&self.matrix, &word[..d])],
            Values::Real(_) => unreachable!("integer access on real function"),
        }
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        if word.len() < self.depth() {
            return Err(Error::WordTooShort {
                len: word.len(),
                depth: self.depth(),
            });
        }
        if !self.matrix.is_admissible(word) {
            return Err(Error::NotAdmissible(Word::from(word).to_string()));
        }
        Ok(())
    }

    pub fn evaluate(&self, word: &Word) -> Result<f64> {
        self.check_word(word.symbols())?;
        Ok(self.at_prefix(word.symbols()))
    }

    pub fn evaluate_int(&self, word: &Word) -> Result<i64> {
        self.check_word(word.symbols())?;
        match self.values {
            Values::Int(_) => Ok(self.at_prefix_int(word.symbols())),
            Values::Real(_) => Err(Error::InvalidArgument("function is real-valued".into())),
        }
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.matrix, &other.matrix) || *self.matrix == *other.matrix {
            Ok(())
        } else {
            Err(Error::MatrixMismatch)
        }
    }

    /// The same function as a table over words of length `depth`.
    pub fn promote(&self, depth: usize) -> Result<Self> {
        if depth < self.depth() {
            return Err(Error::DepthTooSmall {
                requested: depth,
                minimum: self.depth(),
            });
        }
        if depth == self.depth() {
            return Ok(self.clone());
        }
        let values = match &self.values {
            Values::Int(_) => {
                let mut v = Vec::new();
                self.matrix.visit_words(depth, |_, w| v.push(self.at_prefix_int(w)));
                Values::Int(v)
            }
            Values::Real(_) => {
                let mut v = Vec::new();
                self.matrix.visit_words(depth, |_, w| v.push(self.at_prefix(w)));
                Values::Real(v)
            }
        };
        Self::from_values(self.matrix.clone(), depth, values)
    }

    /// Pointwise `self op other` at the larger of the two depths.
    pub fn pointwise(&self, other: &Self, op: BinaryOp) -> Result<Self> {
        self.same_space(other)?;
        let depth = self.depth().max(other.depth());
        let matrix = self.matrix.clone();
        if self.is_int() && other.is_int() {
            Self::from_fn_int(matrix, depth, |w| {
                let (a, b) = (self.at_prefix_int(w), other.at_prefix_int(w));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                }
            })
        } else {
            Self::from_fn_real(matrix, depth, |w| {
                let (a, b) = (self.at_prefix(w), other.at_prefix(w));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                }
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.pointwise(other, BinaryOp::Add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.pointwise(other, BinaryOp::Sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.pointwise(other, BinaryOp::Mul)
    }

    /// Applies `f` to every table entry; the result is real.
    pub fn map_real<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        let v = (0..self.values.len()).map(|i| f(self.values.get(i))).collect();
        LocallyConstantFunction {
            matrix: self.matrix.clone(),
            index: self.index.clone(),
            values: Values::Real(v),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_real(|x| s * x)
    }

    /// `b^f`, pointwise.
    pub fn exp_base(&self, base: f64) -> Result<Self> {
        if !(base > 0.0) {
            return Err(Error::InvalidArgument(format!("exponent base {base} must be > 0")));
        }
        Ok(match &self.values {
            Values::Int(v) => {
                let v = v.iter().map(|&k| base.powi(k as i32)).collect();
                LocallyConstantFunction {
                    matrix: self.matrix.clone(),
                    index: self.index.clone(),
                    values: Values::Real(v),
                }
            }
            Values::Real(_) => self.map_real(|x| base.powf(x)),
        })
    }

    /// `e^f`, pointwise.
    pub fn exp(&self) -> Self {
        self.map_real(f64::exp)
    }

    pub fn to_real(&self) -> Self {
        match self.values {
            Values::Real(_) => self.clone(),
            Values::Int(_) => self.map_real(|x| x),
        }
    }

    /// `f ∘ σ`, one level deeper.
    pub fn compose_shift(&self) -> Self {
        let depth = self.depth() + 1;
        let matrix = self.matrix.clone();
        match self.values {
            Values::Int(_) => Self::from_fn_int(matrix, depth, |w| self.at_prefix_int(&w[1..])),
            Values::Real(_) => Self::from_fn_real(matrix, depth, |w| self.at_prefix(&w[1..])),
        }
        .expect("depth ≥ 2")
    }

    /// Birkhoff sum `fⁿ = Σ_{i<n} f ∘ σⁱ`, of depth `depth(f) + n − 1`.
    pub fn birkhoff(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Birkhoff sum needs n ≥ 1".into()));
        }
        let d = self.depth();
        let depth = d + n - 1;
        let matrix = self.matrix.clone();
        match self.values {
            Values::Int(_) => Self::from_fn_int(matrix, depth, |w| {
                (0..n).map(|i| self.at_prefix_int(&w[i..])).sum()
            }),
            Values::Real(_) => Self::from_fn_real(matrix, depth, |w| {
                (0..n).map(|i| self.at_prefix(&w[i..])).sum()
            }),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.values.len())
            .map(|i| self.values.get(i).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        (0..self.values.len())
            .map(|i| self.values.get(i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        (0..self.values.len())
            .map(|i| self.values.get(i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `‖self − other‖∞` compared at the common depth.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.same_space(other)?;
        let depth = self.depth().max(other.depth());
        let mut worst = 0.0_f64;
        self.matrix.visit_words(depth, |_, w| {
            worst = worst.max((self.at_prefix(w) - other.at_prefix(w)).abs());
        });
        Ok(worst)
    }

    /// The same function at the smallest depth that reproduces it exactly.
    pub fn reduce(&self) -> Self {
        let mut current = self.clone();
        while current.depth() > 1 {
            let d = current.depth() - 1;
            let mut candidate = vec![f64::NAN; self.matrix.word_count(d)];
            let mut ok = true;
            let shorter = BlockIndex::new(&self.matrix, d);
            current.matrix.visit_words(current.depth(), |i, w| {
                let j = shorter.rank(&current.matrix, &w[..d]);
                let v = current.values.get(i);
                if candidate[j].is_nan() {
                    candidate[j] = v;
                } else if candidate[j] != v {
                    ok = false;
                }
            });
            if !ok {
                break;
            }
            let values = match current.values {
                Values::Int(_) => Values::Int(candidate.iter().map(|&x| x as i64).collect()),
                Values::Real(_) => Values::Real(candidate),
            };
            current = Self::from_values(self.matrix.clone(), d, values).expect("sized by word_count");
        }
        current
    }

    /// `(word, value)` pairs in table order.
    pub fn entries(&self) -> Vec<(Word, f64)> {
        let mut out = Vec::with_capacity(self.values.len());
        self.matrix
            .visit_words(self.depth(), |i, w| out.push((Word::from(w), self.values.get(i))));
        out
    }
}
