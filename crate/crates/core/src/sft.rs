//! One-sided topological Markov shifts: transition matrices, admissible
//! words, periodic points, Perron eigendata, entropy and zeta functions.
//!
//! Symbols are stored 0-based and printed 1-based, so the word `21` is the
//! symbol sequence `[1, 0]` internally. Words of a fixed length are always
//! ordered lexicographically; that order is the canonical index of every
//! value table in the crate.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, MatrixError, Result};
use crate::spectral::{power_iterate, SpectralOptions};

/// A validated 0/1 matrix that is irreducible and not a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl TransitionMatrix {
    pub fn validate(rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n < 2 {
            return Err(MatrixError::TooSmall(n));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    value => {
                        return Err(MatrixError::NotZeroOne {
                            row: i,
                            col: j,
                            value,
                        })
                    }
                }
            }
        }
        let m = TransitionMatrix { n, entries };
        for i in 0..n {
            if !(0..n).any(|j| m.allows(i, j)) {
                return Err(MatrixError::NotIrreducible(format!("row {} is zero", i + 1)));
            }
            if !(0..n).any(|j| m.allows(j, i)) {
                return Err(MatrixError::NotIrreducible(format!("column {} is zero", i + 1)));
            }
        }
        let forward = m.reachable_from(0, false);
        let backward = m.reachable_from(0, true);
        if let Some(s) = (0..n).find(|&s| !forward[s] || !backward[s]) {
            return Err(MatrixError::NotIrreducible(format!(
                "symbols 1 and {} are not mutually reachable",
                s + 1
            )));
        }
        let is_perm = (0..n).all(|i| {
            (0..n).filter(|&j| m.allows(i, j)).count() == 1
                && (0..n).filter(|&j| m.allows(j, i)).count() == 1
        });
        if is_perm {
            return Err(MatrixError::IsPermutation);
        }
        Ok(m)
    }

    /// The full shift on `n` symbols.
    pub fn full_shift(n: usize) -> Self {
        Self::validate(&vec![vec![1; n]; n]).expect("full shift is valid for n >= 2")
    }

    /// `[[1,1],[1,0]]`: the shift forbidding the word `22`.
    pub fn golden_mean() -> Self {
        Self::validate(&[vec![1, 1], vec![1, 0]]).expect("golden mean matrix is valid")
    }

    fn reachable_from(&self, start: usize, transpose: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..self.n {
                let edge = if transpose { self.allows(j, i) } else { self.allows(i, j) };
                if edge && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    /// Alphabet size N.
    pub fn size(&self) -> usize {
        self.n
    }

    /// `A(i, j) = 1`, 0-based.
    #[inline]
    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.allows(i, j) as i64).collect())
            .collect()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.allows(i, j))
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.n) && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Calls `visit(index, word)` for every admissible word of length `k`, in
    /// lexicographic order.
    pub fn visit_words<F: FnMut(usize, &[usize])>(&self, k: usize, mut visit: F) {
        if k == 0 {
            visit(0, &[]);
            return;
        }
        let mut buf = Vec::with_capacity(k);
        let mut index = 0;
        self.visit_rec(k, &mut buf, &mut index, &mut visit);
    }

    fn visit_rec<F: FnMut(usize, &[usize])>(
        &self,
        k: usize,
        buf: &mut Vec<usize>,
        index: &mut usize,
        visit: &mut F,
    ) {
        if buf.len() == k {
            visit(*index, buf);
            *index += 1;
            return;
        }
        for s in 0..self.n {
            if buf.last().is_none_or(|&p| self.allows(p, s)) {
                buf.push(s);
                self.visit_rec(k, buf, index, visit);
                buf.pop();
            }
        }
    }

    /// `|B_k|`, the number of admissible words of length `k`.
    pub fn word_count(&self, k: usize) -> usize {
        if k == 0 {
            return 1;
        }
        let mut counts = vec![1usize; self.n];
        for _ in 1..k {
            counts = (0..self.n)
                .map(|i| self.successors(i).map(|j| counts[j]).sum())
                .collect();
        }
        counts.iter().sum()
    }

    fn int_matrix(&self) -> Vec<Vec<BigInt>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| BigInt::from(self.allows(i, j) as u8))
                    .collect()
            })
            .collect()
    }
}

/// A finite word over `{0, …, N-1}` (printed as `{1, …, N}`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// Parses `"121"` or `"1,2,10"` (1-based symbols). `""` and `"∅"` are the
    /// empty word.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "∅" {
            return Ok(Word::empty());
        }
        let parts: Vec<&str> = if text.contains(',') {
            text.split(',').map(str::trim).collect()
        } else {
            text.split("").filter(|s| !s.is_empty()).collect()
        };
        parts
            .into_iter()
            .map(|p| match p.parse::<usize>() {
                Ok(s) if s >= 1 => Ok(s - 1),
                _ => Err(Error::Format(format!("bad symbol {p:?} in word {text:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Symbols joined without separator for alphabets of size ≤ 9,
    /// comma-separated otherwise.
    pub fn to_key(&self, alphabet: usize) -> String {
        let sep = if alphabet <= 9 { "" } else { "," };
        self.0
            .iter()
            .map(|s| (s + 1).to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let alphabet = self.0.iter().max().map_or(0, |m| m + 1);
        write!(f, "{}", self.to_key(alphabet))
    }
}

impl From<&[usize]> for Word {
    fn from(s: &[usize]) -> Self {
        Word(s.to_vec())
    }
}

/// Lexicographic rank of admissible words of one fixed length.
#[derive(Debug, Clone)]
pub struct BlockIndex {
    len: usize,
    /// `paths[l][s]`: admissible words of length `l` starting with `s`.
    paths: Vec<Vec<usize>>,
    size: usize,
}

impl BlockIndex {
    pub fn new(matrix: &TransitionMatrix, len: usize) -> Self {
        let n = matrix.size();
        let mut paths = vec![vec![0usize; n]; len + 1];
        if len >= 1 {
            paths[1] = vec![1; n];
        }
        for l in 2..=len {
            for s in 0..n {
                paths[l][s] = matrix.successors(s).map(|t| paths[l - 1][t]).sum();
            }
        }
        let size = if len == 0 { 1 } else { paths[len].iter().sum() };
        BlockIndex { len, paths, size }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of admissible words of this length.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Rank of an admissible word of exactly this length. The caller
    /// guarantees admissibility; see [`BlockIndex::checked_rank`].
    #[inline]
    pub fn rank(&self, matrix: &TransitionMatrix, word: &[usize]) -> usize {
        debug_assert_eq!(word.len(), self.len);
        let mut r = 0;
        for (i, &s) in word.iter().enumerate() {
            let remaining = self.len - i;
            for t in 0..s {
                if i == 0 || matrix.allows(word[i - 1], t) {
                    r += self.paths[remaining][t];
                }
            }
        }
        r
    }

    pub fn checked_rank(&self, matrix: &TransitionMatrix, word: &[usize]) -> Result<usize> {
        if word.len() != self.len || !matrix.is_admissible(word) {
            return Err(Error::NotAdmissible(Word::from(word).to_string()));
        }
        Ok(self.rank(matrix, word))
    }
}

/// All admissible words of length `k`, lexicographically ordered.
pub fn admissible_words(matrix: &TransitionMatrix, k: usize) -> Vec<Word> {
    let mut out = Vec::with_capacity(matrix.word_count(k));
    matrix.visit_words(k, |_, w| out.push(Word::from(w)));
    out
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(BigInt::zero(), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// `Per_n = trace(A^n)`, the number of points of period `n` of the two-sided
/// shift, in exact arithmetic.
pub fn periodic_point_count(matrix: &TransitionMatrix, n: usize) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidArgument("period must be ≥ 1".into()));
    }
    Ok(periodic_point_counts(matrix, n).pop().expect("n ≥ 1"))
}

/// `[Per_1, …, Per_n]`.
pub fn periodic_point_counts(matrix: &TransitionMatrix, n: usize) -> Vec<BigInt> {
    let a = matrix.int_matrix();
    let mut power = a.clone();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        if k > 1 {
            power = mat_mul(&power, &a);
        }
        out.push((0..a.len()).fold(BigInt::zero(), |acc, i| acc + &power[i][i]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMode {
    /// Every admissible word `w` of length `p` with `A(w_p, w_1) = 1`.
    All,
    /// One representative (the least rotation) per primitive periodic orbit
    /// of least period `p`.
    PrimitiveOrbits,
}

/// Cyclic admissible words of length `p`.
pub fn enumerate_cycles(matrix: &TransitionMatrix, p: usize, mode: CycleMode) -> Vec<Word> {
    if p == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    matrix.visit_words(p, |_, w| {
        if !matrix.allows(w[p - 1], w[0]) {
            return;
        }
        match mode {
            CycleMode::All => out.push(Word::from(w)),
            CycleMode::PrimitiveOrbits => {
                // keep w iff it is strictly smaller than all its nontrivial rotations
                let is_lyndon = (1..p).all(|r| {
                    let rotated = w[r..].iter().chain(&w[..r]);
                    w.iter().lt(rotated)
                });
                if is_lyndon {
                    out.push(Word::from(w));
                }
            }
        }
    });
    out
}

/// How a Perron vector was scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Largest entry equals 1.
    SupNorm,
    /// Scaled so that `u · v = 1` against the right vector.
    DualToRight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub eigenvalue: f64,
    pub right_vector: Vec<f64>,
    pub left_vector: Vec<f64>,
    pub right_normalization: Normalization,
    pub left_normalization: Normalization,
    /// Iterations of the right-vector solve plus the left-vector solve.
    pub iterations: usize,
}

impl PerronData {
    /// `(‖Av − rv‖∞, ‖uA − ru‖∞)`.
    pub fn residuals(&self, matrix: &TransitionMatrix) -> (f64, f64) {
        let n = matrix.size();
        let r = self.eigenvalue;
        let right = (0..n)
            .map(|i| {
                let av: f64 = matrix.successors(i).map(|j| self.right_vector[j]).sum();
                (av - r * self.right_vector[i]).abs()
            })
            .fold(0.0, f64::max);
        let left = (0..n)
            .map(|j| {
                let ua: f64 = (0..n)
                    .filter(|&i| matrix.allows(i, j))
                    .map(|i| self.left_vector[i])
                    .sum();
                (ua - r * self.left_vector[j]).abs()
            })
            .fold(0.0, f64::max);
        (right, left)
    }
}

/// Perron eigendata by power iteration on `I + A`.
pub fn perron(matrix: &TransitionMatrix, opts: &SpectralOptions) -> Result<PerronData> {
    let n = matrix.size();
    let right = power_iterate(
        n,
        1.0,
        |x, y| {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = matrix.successors(i).map(|j| x[j]).sum();
            }
        },
        opts,
        "Perron right vector",
    )?;
    let left = power_iterate(
        n,
        1.0,
        |x, y| {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = (0..n).filter(|&i| matrix.allows(i, j)).map(|i| x[i]).sum();
            }
        },
        opts,
        "Perron left vector",
    )?;
    let pairing: f64 = left.vector.iter().zip(&right.vector).map(|(a, b)| a * b).sum();
    Ok(PerronData {
        eigenvalue: right.eigenvalue,
        right_vector: right.vector,
        left_vector: left.vector.iter().map(|u| u / pairing).collect(),
        right_normalization: Normalization::SupNorm,
        left_normalization: Normalization::DualToRight,
        iterations: right.iterations + left.iterations,
    })
}

/// Topological entropy `log r_A`.
pub fn entropy(matrix: &TransitionMatrix, opts: &SpectralOptions) -> Result<f64> {
    Ok(perron(matrix, opts)?.eigenvalue.ln())
}

/// Taylor coefficients of `ζ_A(z) = exp(Σ Per_n zⁿ / n)` together with the
/// rational form `1 / det(I − zA)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaSeries {
    /// Coefficients of `z^0 … z^K`, built from the periodic point counts.
    pub coefficients: Vec<BigInt>,
    /// Coefficients of the polynomial `det(I − zA)`, constant term first.
    pub denominator: Vec<BigInt>,
}

impl ZetaSeries {
    /// Expansion of `1 / det(I − zA)` to `z^K`.
    pub fn rational_coefficients(&self, terms: usize) -> Vec<BigInt> {
        let q = &self.denominator;
        let mut s: Vec<BigInt> = Vec::with_capacity(terms + 1);
        for n in 0..=terms {
            if n == 0 {
                s.push(BigInt::one());
                continue;
            }
            let mut acc = BigInt::zero();
            for k in 1..q.len().min(n + 1) {
                acc -= &q[k] * &s[n - k];
            }
            s.push(acc);
        }
        s
    }

    /// Whether both constructions agree on every computed coefficient.
    pub fn representations_agree(&self) -> bool {
        self.rational_coefficients(self.coefficients.len() - 1) == self.coefficients
    }

    /// Human-readable rational form, e.g. `1/(1 - z - z^2)`.
    pub fn rational_form(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.denominator.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = match (k, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => "z".to_string(),
                (1, false) => format!("{mag}z"),
                (_, true) => format!("z^{k}"),
                (_, false) => format!("{mag}z^{k}"),
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
                out.push_str(&body);
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        format!("1/({out})")
    }
}

/// Exact zeta data up to `z^terms`.
///
/// The series side uses `n·z_n = Σ_{k=1}^{n} Per_k · z_{n−k}` (the derivative
/// of `exp` of the log-series). The rational side evaluates `det(I − zA)` at
/// `z = 0, …, N` with fraction-free elimination and interpolates; it never
/// touches the traces.
pub fn zeta_series(matrix: &TransitionMatrix, terms: usize) -> Result<ZetaSeries> {
    if terms == 0 {
        return Err(Error::InvalidArgument("zeta series needs at least one term".into()));
    }
    let per = periodic_point_counts(matrix, terms);
    let mut coefficients = vec![BigInt::one()];
    for n in 1..=terms {
        let acc = (1..=n).fold(BigInt::zero(), |acc, k| acc + &per[k - 1] * &coefficients[n - k]);
        let (q, r) = num_integer::Integer::div_rem(&acc, &BigInt::from(n));
        debug_assert!(r.is_zero(), "zeta coefficients are integers");
        coefficients.push(q);
    }
    Ok(ZetaSeries {
        coefficients,
        denominator: det_i_minus_za(matrix),
    })
}

/// Coefficients of `det(I − zA)`.
fn det_i_minus_za(matrix: &TransitionMatrix) -> Vec<BigInt> {
    let n = matrix.size();
    let a = matrix.int_matrix();
    let points: Vec<BigInt> = (0..=n).map(|z| BigInt::from(z as i64)).collect();
    let values: Vec<BigInt> = points
        .iter()
        .map(|z| {
            let m: Vec<Vec<BigInt>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let id = if i == j { BigInt::one() } else { BigInt::zero() };
                            id - z * &a[i][j]
                        })
                        .collect()
                })
                .collect();
            bareiss_det(m)
        })
        .collect();
    // Newton divided differences, then expand to monomial coefficients
    let mut dd: Vec<BigRational> = values.iter().cloned().map(BigRational::from_integer).collect();
    for level in 1..=n {
        for i in (level..=n).rev() {
            let denom = BigRational::from_integer(&points[i] - &points[i - level]);
            dd[i] = (&dd[i] - &dd[i - 1]) / denom;
        }
    }
    let mut poly: Vec<BigRational> = vec![BigRational::zero(); n + 1];
    for i in (0..=n).rev() {
        // poly = poly * (z - x_i) + dd[i]
        let xi = BigRational::from_integer(points[i].clone());
        let mut next = vec![BigRational::zero(); n + 1];
        for k in 0..=n {
            if k < n {
                next[k + 1] += &poly[k];
            }
            next[k] -= &poly[k] * &xi;
        }
        next[0] += &dd[i];
        poly = next;
    }
    let mut coeffs: Vec<BigInt> = poly
        .into_iter()
        .map(|c| {
            debug_assert!(c.is_integer());
            c.to_integer()
        })
        .collect();
    while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
        coeffs.pop();
    }
    coeffs
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Ratio of consecutive zeta coefficients, an estimate of `r_A`.
pub fn coefficient_growth(series: &ZetaSeries) -> Option<f64> {
    let c = &series.coefficients;
    let (a, b) = (c.get(c.len().checked_sub(2)?)?, c.last()?);
    Some(b.to_f64()? / a.to_f64()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> TransitionMatrix {
        TransitionMatrix::golden_mean()
    }

    fn a() -> TransitionMatrix {
        TransitionMatrix::full_shift(2)
    }

    fn keys(words: &[Word]) -> Vec<String> {
        words.iter().map(|w| w.to_key(2)).collect()
    }

    #[test]
    fn validate_accepts_golden_mean() {
        assert!(TransitionMatrix::validate(&[vec![1, 1], vec![1, 0]]).is_ok());
    }

    #[test]
    fn validate_rejections() {
        let v = |rows: &[Vec<i64>]| TransitionMatrix::validate(rows).unwrap_err();
        assert!(matches!(v(&[vec![1, 0], vec![0, 1]]), MatrixError::NotIrreducible(_)));
        assert_eq!(v(&[vec![0, 1], vec![1, 0]]), MatrixError::IsPermutation);
        assert_eq!(v(&[vec![1]]), MatrixError::TooSmall(1));
        assert!(matches!(v(&[vec![1, 1], vec![1]]), MatrixError::NotSquare { row: 1, .. }));
        assert!(matches!(
            v(&[vec![1, 2], vec![1, 1]]),
            MatrixError::NotZeroOne { value: 2, .. }
        ));
        assert!(matches!(v(&[vec![1, 1], vec![0, 0]]), MatrixError::NotIrreducible(_)));
        // strongly connected check, not just nonzero rows/columns
        assert!(matches!(
            v(&[vec![1, 1, 0], vec![1, 1, 0], vec![0, 1, 1]]),
            MatrixError::NotIrreducible(_)
        ));
    }

    #[test]
    fn admissible_words_examples() {
        assert_eq!(keys(&admissible_words(&b(), 2)), ["11", "12", "21"]);
        assert_eq!(keys(&admissible_words(&a(), 2)), ["11", "12", "21", "22"]);
        assert_eq!(admissible_words(&b(), 0), vec![Word::empty()]);
    }

    #[test]
    fn block_index_matches_enumeration_order() {
        for m in [a(), b(), TransitionMatrix::validate(&[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]]).unwrap()] {
            for k in 1..7 {
                let idx = BlockIndex::new(&m, k);
                let words = admissible_words(&m, k);
                assert_eq!(idx.size(), words.len());
                for (i, w) in words.iter().enumerate() {
                    assert_eq!(idx.rank(&m, &w.0), i);
                }
            }
        }
    }

    #[test]
    fn periodic_counts() {
        assert_eq!(periodic_point_count(&a(), 3).unwrap(), BigInt::from(8));
        assert_eq!(periodic_point_count(&b(), 2).unwrap(), BigInt::from(3));
        assert_eq!(periodic_point_count(&b(), 5).unwrap(), BigInt::from(11));
        assert!(periodic_point_count(&b(), 0).is_err());
    }

    #[test]
    fn cycles() {
        assert_eq!(keys(&enumerate_cycles(&b(), 1, CycleMode::All)), ["1"]);
        assert_eq!(keys(&enumerate_cycles(&a(), 1, CycleMode::All)), ["1", "2"]);
        assert_eq!(keys(&enumerate_cycles(&b(), 2, CycleMode::PrimitiveOrbits)), ["12"]);
        assert_eq!(keys(&enumerate_cycles(&b(), 2, CycleMode::All)), ["11", "12", "21"]);
    }

    #[test]
    fn perron_values() {
        let opts = SpectralOptions::default();
        let pa = perron(&a(), &opts).unwrap();
        assert!((pa.eigenvalue - 2.0).abs() < 1e-12);
        let pb = perron(&b(), &opts).unwrap();
        assert!((pb.eigenvalue - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let (r, l) = pb.residuals(&b());
        assert!(r < 1e-12 * pb.eigenvalue && l < 1e-12 * pb.eigenvalue);
        assert!(pb.right_vector.iter().chain(&pb.left_vector).all(|&x| x > 0.0));
        let ones = TransitionMatrix::full_shift(3);
        assert!((perron(&ones, &opts).unwrap().eigenvalue - 3.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_values() {
        let opts = SpectralOptions::default();
        assert!((entropy(&a(), &opts).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((entropy(&b(), &opts).unwrap() - 0.48121182505960347).abs() < 1e-12);
        assert!((entropy(&TransitionMatrix::full_shift(3), &opts).unwrap() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zeta_examples() {
        let za = zeta_series(&a(), 3).unwrap();
        assert_eq!(za.rational_form(), "1/(1 - 2z)");
        assert_eq!(za.coefficients, [1, 2, 4, 8].map(BigInt::from));
        let zb = zeta_series(&b(), 3).unwrap();
        assert_eq!(zb.rational_form(), "1/(1 - z - z^2)");
        assert_eq!(zb.coefficients, [1, 1, 2, 3].map(BigInt::from));
        assert!(zb.representations_agree());
        assert!(zeta_series(&b(), 0).is_err());
    }

    #[test]
    fn zeta_growth_is_perron_value() {
        let za = zeta_series(&a(), 12).unwrap();
        assert_eq!(coefficient_growth(&za), Some(2.0));
        let zb = zeta_series(&b(), 40).unwrap();
        assert!((coefficient_growth(&zb).unwrap() - 1.618033988749895).abs() < 1e-12);
    }

    #[test]
    fn word_parse_and_format() {
        assert_eq!(Word::parse("21").unwrap(), Word(vec![1, 0]));
        assert_eq!(Word::parse("1,10").unwrap(), Word(vec![0, 9]));
        assert_eq!(Word(vec![0, 9]).to_key(10), "1,10");
        assert_eq!(Word::parse("").unwrap(), Word::empty());
        assert!(Word::parse("0").is_err());
    }
}
