//! Continuous orbit equivalence between Markov shifts, realized by
//! substitution codes.
//!
//! A [`CoeWitness`] bundles a code `h` with the time-change functions
//! `k₁, l₁` (on the source) and `k₂, l₂` (on the target) satisfying
//!
//! ```text
//! σ_B^{k₁(x)}(h(σ_A x)) = σ_B^{l₁(x)}(h(x))
//! σ_A^{k₂(y)}(h⁻¹(σ_B y)) = σ_A^{l₂(y)}(h⁻¹(y))
//! ```
//!
//! Both identities are checked on finite truncations by
//! [`verify_equivalence`]. The cocycles `cᵢ = lᵢ − kᵢ` drive the
//! entropy-limit sequences `E_n = φ(r^{−cⁿ})`, and the strong variant
//! (`c₁ = 1 + b − b∘σ`) is decided exactly over the integers.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kms::{gauge_kms, MarkovMeasure};
use crate::locfun::{LocallyConstantFunction, Values};
use crate::ruelle::RuelleOperator;
use crate::sft::{enumerate_cycles, perron, BlockIndex, CycleMode, TransitionMatrix, Word};
use crate::spectral::SpectralOptions;

/// A one-block substitution `h(x) = τ(x₁)τ(x₂)…`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionCode {
    source: Arc<TransitionMatrix>,
    target: Arc<TransitionMatrix>,
    tau: Vec<Word>,
}

/// Outcome of decoding a target word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub source: Word,
    /// Trailing symbols that could still start more than one image.
    pub remainder: Word,
}

impl SubstitutionCode {
    pub fn new(source: Arc<TransitionMatrix>, target: Arc<TransitionMatrix>, tau: Vec<Word>) -> Result<Self> {
        if tau.len() != source.size() {
            return Err(Error::InvalidArgument(format!(
                "substitution has {} images for {} source symbols",
                tau.len(),
                source.size()
            )));
        }
        for (a, image) in tau.iter().enumerate() {
            if image.is_empty() {
                return Err(Error::InvalidArgument(format!("image of symbol {} is empty", a + 1)));
            }
            if image.symbols().iter().any(|&s| s >= target.size()) || !target.is_admissible(image.symbols()) {
                return Err(Error::NotAdmissible(format!("image {image} of symbol {}", a + 1)));
            }
        }
        for a in 0..source.size() {
            for b in source.successors(a) {
                let last = *tau[a].symbols().last().expect("nonempty");
                if !target.allows(last, tau[b].symbols()[0]) {
                    return Err(Error::NotAdmissible(format!(
                        "image {}{} of source pair {}{}",
                        tau[a],
                        tau[b],
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(SubstitutionCode { source, target, tau })
    }

    pub fn source(&self) -> &Arc<TransitionMatrix> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TransitionMatrix> {
        &self.target
    }

    pub fn image(&self, symbol: usize) -> &Word {
        &self.tau[symbol]
    }

    pub fn images(&self) -> &[Word] {
        &self.tau
    }

    pub fn max_image_len(&self) -> usize {
        self.tau.iter().map(Word::len).max().unwrap_or(0)
    }

    /// No image is a prefix of another (nor are two images equal).
    pub fn is_prefix_free(&self) -> bool {
        self.tau.iter().enumerate().all(|(a, u)| {
            self.tau
                .iter()
                .enumerate()
                .all(|(b, v)| a == b || !v.symbols().starts_with(u.symbols()))
        })
    }

    /// `decode(apply(w)) = w` with empty remainder for every source word of
    /// length at most `depth`.
    pub fn verify_injective(&self, depth: usize) -> bool {
        if !self.is_prefix_free() {
            return false;
        }
        let mut image = Vec::new();
        let mut decoded = Vec::new();
        (1..=depth).all(|len| {
            let mut ok = true;
            self.source.visit_words(len, |_, w| {
                if !ok {
                    return;
                }
                image.clear();
                self.apply_into(w, &mut image);
                decoded.clear();
                ok = matches!(self.decode_into(&image, &mut decoded), Ok(n) if n == image.len())
                    && decoded == w;
            });
            ok
        })
    }

    fn apply_into(&self, w: &[usize], out: &mut Vec<usize>) {
        for &a in w {
            out.extend_from_slice(self.tau[a].symbols());
        }
    }

    /// Appends decoded source symbols to `out`; returns how many target
    /// symbols were consumed.
    fn decode_into(&self, v: &[usize], out: &mut Vec<usize>) -> Result<usize> {
        let mut pos = 0;
        while pos < v.len() {
            let rest = &v[pos..];
            let prev = out.last().copied();
            let mut found = None;
            let mut pending = false;
            for (a, image) in self.tau.iter().enumerate() {
                let image = image.symbols();
                if prev.is_some_and(|p| !self.source.allows(p, a)) {
                    continue;
                }
                if rest.starts_with(image) {
                    if found.is_some() {
                        return Err(Error::NotDecodable(format!("{} is ambiguous", Word::from(v))));
                    }
                    found = Some(a);
                } else if image.starts_with(rest) {
                    pending = true;
                }
            }
            match (found, pending) {
                (Some(a), false) => {
                    out.push(a);
                    pos += self.tau[a].len();
                }
                (None, true) => break,
                (Some(_), true) => {
                    return Err(Error::NotDecodable(format!("{} is ambiguous", Word::from(v))));
                }
                (None, false) => {
                    return Err(Error::NotDecodable(format!(
                        "{} has no preimage at position {}",
                        Word::from(v),
                        pos + 1
                    )));
                }
            }
        }
        Ok(pos)
    }
}

/// `τ(w₁)…τ(w_k)`.
pub fn apply_code(code: &SubstitutionCode, w: &Word) -> Result<Word> {
    if w.symbols().iter().any(|&s| s >= code.source.size()) || !code.source.is_admissible(w.symbols()) {
        return Err(Error::NotAdmissible(w.to_string()));
    }
    let mut out = Vec::new();
    code.apply_into(w.symbols(), &mut out);
    if !code.target.is_admissible(&out) {
        return Err(Error::NotAdmissible(Word(out).to_string()));
    }
    Ok(Word(out))
}

/// The longest source word whose image is a prefix of `v` and is forced by
/// `v`, plus the unconsumed tail.
pub fn decode(code: &SubstitutionCode, v: &Word) -> Result<Decoded> {
    if v.symbols().iter().any(|&s| s >= code.target.size()) || !code.target.is_admissible(v.symbols()) {
        return Err(Error::NotAdmissible(v.to_string()));
    }
    let mut out = Vec::new();
    let used = code.decode_into(v.symbols(), &mut out)?;
    Ok(Decoded {
        source: Word(out),
        remainder: Word::from(&v.symbols()[used..]),
    })
}

/// A substitution code together with its time-change functions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeWitness {
    code: SubstitutionCode,
    k1: LocallyConstantFunction,
    l1: LocallyConstantFunction,
    k2: LocallyConstantFunction,
    l2: LocallyConstantFunction,
}

impl CoeWitness {
    pub fn new(
        code: SubstitutionCode,
        k1: LocallyConstantFunction,
        l1: LocallyConstantFunction,
        k2: LocallyConstantFunction,
        l2: LocallyConstantFunction,
    ) -> Result<Self> {
        for (name, f, m) in [
            ("k1", &k1, &code.source),
            ("l1", &l1, &code.source),
            ("k2", &k2, &code.target),
            ("l2", &l2, &code.target),
        ] {
            if **f.matrix() != **m {
                return Err(Error::MatrixMismatch);
            }
            if !f.is_int() {
                return Err(Error::InvalidArgument(format!("{name} must be integer-valued")));
            }
            if f.min_value() < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be nonnegative")));
            }
        }
        Ok(CoeWitness { code, k1, l1, k2, l2 })
    }

    pub fn code(&self) -> &SubstitutionCode {
        &self.code
    }

    pub fn k1(&self) -> &LocallyConstantFunction {
        &self.k1
    }

    pub fn l1(&self) -> &LocallyConstantFunction {
        &self.l1
    }

    pub fn k2(&self) -> &LocallyConstantFunction {
        &self.k2
    }

    pub fn l2(&self) -> &LocallyConstantFunction {
        &self.l2
    }

    /// Largest depth among the four time-change functions.
    pub fn max_depth(&self) -> usize {
        [&self.k1, &self.l1, &self.k2, &self.l2]
            .iter()
            .map(|f| f.depth())
            .max()
            .unwrap_or(1)
    }

    /// Smallest depth accepted by [`verify_equivalence`].
    pub fn min_verification_depth(&self) -> usize {
        self.max_depth() + self.code.max_image_len() + 2
    }
}

/// The worked example: `A` the full 2-shift, `B` the golden mean shift,
/// `τ(1) = 1`, `τ(2) = 21`, `k₁ ≡ 0`, `l₁ = (1, 2)`, `k₂ = (0, 1)`,
/// `l₂ = (1, 1)`.
pub fn golden_example() -> CoeWitness {
    let a = Arc::new(TransitionMatrix::full_shift(2));
    let b = Arc::new(TransitionMatrix::golden_mean());
    let code = SubstitutionCode::new(a.clone(), b.clone(), vec![Word(vec![0]), Word(vec![1, 0])])
        .expect("fixture code is valid");
    let table = |m: &Arc<TransitionMatrix>, t: &[i64]| {
        LocallyConstantFunction::from_symbol_table(m.clone(), t).expect("fixture table")
    };
    CoeWitness::new(
        code,
        table(&a, &[0, 0]),
        table(&a, &[1, 2]),
        table(&b, &[0, 1]),
        table(&b, &[1, 1]),
    )
    .expect("fixture witness is valid")
}

/// `h = id` on `matrix` with `k ≡ 0`, `l ≡ 1` on both sides.
pub fn identity_witness(matrix: Arc<TransitionMatrix>) -> CoeWitness {
    let tau = (0..matrix.size()).map(|s| Word(vec![s])).collect();
    let code = SubstitutionCode::new(matrix.clone(), matrix.clone(), tau).expect("identity code");
    let zero = LocallyConstantFunction::constant(matrix.clone(), 0);
    let one = LocallyConstantFunction::constant(matrix, 1);
    CoeWitness::new(code, zero.clone(), one.clone(), zero, one).expect("identity witness")
}

/// Which of the two time-change identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `k₁, l₁` on the source shift.
    First,
    /// `k₂, l₂` on the target shift.
    Second,
}

impl Side {
    pub fn from_index(i: u8) -> Result<Side> {
        match i {
            1 => Ok(Side::First),
            2 => Ok(Side::Second),
            _ => Err(Error::InvalidArgument(format!("side must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Side::First => 1,
            Side::Second => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The two sides disagree on their common prefix.
    Mismatch { left: Word, right: Word },
    /// A shift consumed the whole truncation, leaving nothing to compare.
    EmptyOverlap,
    /// A target word fell outside the image of the code.
    NotDecodable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub side: Side,
    /// The source word `x` (the second identity is checked at `y = h(x)`).
    pub word: Word,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "identity {} at {}: ", self.side.index(), self.word)?;
        match &self.kind {
            ViolationKind::Mismatch { left, right } => write!(f, "{left} ≠ {right}"),
            ViolationKind::EmptyOverlap => write!(f, "empty overlap"),
            ViolationKind::NotDecodable => write!(f, "not decodable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub depth: usize,
    pub words_checked: usize,
    pub injective: bool,
    pub violation_count: usize,
    /// At most [`EquivalenceReport::MAX_LISTED`] violations, in word order.
    pub violations: Vec<Violation>,
}

impl EquivalenceReport {
    pub const MAX_LISTED: usize = 64;

    pub fn passed(&self) -> bool {
        self.injective && self.violation_count == 0
    }
}

fn compare(left: &[usize], right: &[usize]) -> Option<ViolationKind> {
    let n = left.len().min(right.len());
    if n == 0 {
        Some(ViolationKind::EmptyOverlap)
    } else if left[..n] != right[..n] {
        Some(ViolationKind::Mismatch {
            left: Word::from(&left[..n]),
            right: Word::from(&right[..n]),
        })
    } else {
        None
    }
}

fn tail(w: &[usize], k: i64) -> &[usize] {
    &w[(k as usize).min(w.len())..]
}

/// Second identity at `y`, with `k₂(y)`, `l₂(y)` given.
fn check_second(code: &SubstitutionCode, y: &[usize], k: i64, l: i64, buf: &mut [Vec<usize>; 2]) -> Option<ViolationKind> {
    let [dy, dsy] = buf;
    dy.clear();
    dsy.clear();
    if code.decode_into(y, dy).is_err() || code.decode_into(&y[1..], dsy).is_err() {
        return Some(ViolationKind::NotDecodable);
    }
    compare(tail(dsy, k), tail(dy, l))
}

/// Checks both time-change identities for every source word `x` of length
/// `depth`: the first at `x`, the second at `y = h(x)`. Each side is
/// truncated to what the window determines and compared on the common
/// prefix, which must be nonempty. A pass certifies the window only.
pub fn verify_equivalence(witness: &CoeWitness, depth: usize) -> Result<EquivalenceReport> {
    let minimum = witness.min_verification_depth();
    if depth < minimum {
        return Err(Error::DepthTooSmall {
            requested: depth,
            minimum,
        });
    }
    let code = &witness.code;
    let mut report = EquivalenceReport {
        depth,
        words_checked: 0,
        injective: code.verify_injective(depth.min(12)),
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut hx = Vec::new();
    let mut hsx = Vec::new();
    let mut buf = [Vec::new(), Vec::new()];
    code.source.visit_words(depth, |_, x| {
        report.words_checked += 1;
        hx.clear();
        code.apply_into(x, &mut hx);
        hsx.clear();
        code.apply_into(&x[1..], &mut hsx);
        let mut record = |side, kind| {
            report.violation_count += 1;
            if report.violations.len() < EquivalenceReport::MAX_LISTED {
                report.violations.push(Violation {
                    side,
                    word: Word::from(x),
                    kind,
                });
            }
        };
        let k1 = witness.k1.at_prefix_int(x);
        let l1 = witness.l1.at_prefix_int(x);
        if let Some(kind) = compare(tail(&hsx, k1), tail(&hx, l1)) {
            record(Side::First, kind);
        }
        let k2 = witness.k2.at_prefix_int(&hx);
        let l2 = witness.l2.at_prefix_int(&hx);
        if let Some(kind) = check_second(code, &hx, k2, l2, &mut buf) {
            record(Side::Second, kind);
        }
    });
    Ok(report)
}

/// Depth-1 `k₂, l₂` found symbol by symbol: for each target symbol the pair
/// with the least `k + l` (then least `k`) in `0..=max_value` passing the
/// second identity on all images of source words of length `depth`.
/// `None` if some symbol admits no such pair; the search is not complete
/// beyond depth 1.
pub fn search_inverse_times(
    code: &SubstitutionCode,
    max_value: i64,
    depth: usize,
) -> Option<(LocallyConstantFunction, LocallyConstantFunction)> {
    let n = code.target.size();
    let mut images: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    code.source.visit_words(depth.max(2), |_, x| {
        let mut hx = Vec::new();
        code.apply_into(x, &mut hx);
        images[hx[0]].push(hx);
    });
    let mut pairs: Vec<(i64, i64)> = (0..=max_value)
        .flat_map(|k| (0..=max_value).map(move |l| (k, l)))
        .collect();
    pairs.sort_by_key(|&(k, l)| (k + l, k));
    let mut buf = [Vec::new(), Vec::new()];
    let mut k2 = vec![0; n];
    let mut l2 = vec![0; n];
    for s in 0..n {
        if images[s].is_empty() {
            continue;
        }
        let &(k, l) = pairs
            .iter()
            .find(|&&(k, l)| images[s].iter().all(|y| check_second(code, y, k, l, &mut buf).is_none()))?;
        k2[s] = k;
        l2[s] = l;
    }
    let target = code.target.clone();
    Some((
        LocallyConstantFunction::from_symbol_table(target.clone(), &k2).ok()?,
        LocallyConstantFunction::from_symbol_table(target, &l2).ok()?,
    ))
}

/// An integer cocycle `c = l − k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle(LocallyConstantFunction);

impl Cocycle {
    pub fn new(f: LocallyConstantFunction) -> Result<Self> {
        if !f.is_int() {
            return Err(Error::InvalidArgument("cocycle must be integer-valued".into()));
        }
        Ok(Cocycle(f))
    }

    pub fn function(&self) -> &LocallyConstantFunction {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.depth()
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        self.0.matrix()
    }

    /// `cⁿ = Σ_{i<n} c∘σⁱ`.
    pub fn birkhoff(&self, n: usize) -> Result<LocallyConstantFunction> {
        self.0.birkhoff(n)
    }

    /// `Σ_{i<p} c(σⁱ x)` for the periodic point `x = (w)^∞` of period `p = |w|`.
    pub fn cycle_sum(&self, cycle: &Word) -> i64 {
        let w = cycle.symbols();
        let p = w.len();
        let d = self.depth();
        let mut window = vec![0; d];
        (0..p)
            .map(|i| {
                for (j, slot) in window.iter_mut().enumerate() {
                    *slot = w[(i + j) % p];
                }
                self.0.at_prefix_int(&window)
            })
            .sum()
    }
}

impl From<Cocycle> for LocallyConstantFunction {
    fn from(c: Cocycle) -> Self {
        c.0
    }
}

pub fn cocycle(witness: &CoeWitness, side: Side) -> Cocycle {
    let (k, l) = match side {
        Side::First => (&witness.k1, &witness.l1),
        Side::Second => (&witness.k2, &witness.l2),
    };
    Cocycle(l.sub(k).expect("same matrix by construction"))
}

/// A function `b` with `c = κ + b − b∘σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coboundary {
    matrix: Arc<TransitionMatrix>,
    depth: usize,
    kappa: Rational64,
    values: Vec<Rational64>,
}

impl Coboundary {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn kappa(&self) -> Rational64 {
        self.kappa
    }

    /// Values in table order over words of length [`Coboundary::depth`].
    pub fn values(&self) -> &[Rational64] {
        &self.values
    }

    /// `b` as an integer function, when every value is an integer.
    pub fn to_int_function(&self) -> Option<LocallyConstantFunction> {
        let ints = self
            .values
            .iter()
            .map(|v| v.is_integer().then(|| v.to_integer()))
            .collect::<Option<Vec<_>>>()?;
        LocallyConstantFunction::from_values(self.matrix.clone(), self.depth, Values::Int(ints)).ok()
    }

    pub fn to_real_function(&self) -> LocallyConstantFunction {
        let reals = self
            .values
            .iter()
            .map(|v| *v.numer() as f64 / *v.denom() as f64)
            .collect();
        LocallyConstantFunction::from_values(self.matrix.clone(), self.depth, Values::Real(reals))
            .expect("sized by word count")
    }
}

/// The higher-block graph of a depth-`m` cocycle (`m ≥ 2`): vertices are
/// words of length `m − 1`, each word `w` of length `m` is an edge from
/// `w₁…w_{m−1}` to `w₂…w_m` carrying `c(w)`.
struct BlockGraph {
    vertex_depth: usize,
    vertices: usize,
    /// (from, to, c, word) in table order of the edge words.
    edges: Vec<(usize, usize, i64, Vec<usize>)>,
}

impl BlockGraph {
    fn new(c: &LocallyConstantFunction) -> Self {
        let c = if c.depth() < 2 {
            c.promote(2).expect("promotion to a larger depth")
        } else {
            c.clone()
        };
        let matrix = c.matrix().clone();
        let m = c.depth();
        let index = BlockIndex::new(&matrix, m - 1);
        let mut edges = Vec::with_capacity(matrix.word_count(m));
        matrix.visit_words(m, |_, w| {
            edges.push((
                index.rank(&matrix, &w[..m - 1]),
                index.rank(&matrix, &w[1..]),
                c.at_prefix_int(w),
                w.to_vec(),
            ));
        });
        BlockGraph {
            vertex_depth: m - 1,
            vertices: index.size(),
            edges,
        }
    }

    /// Directed BFS from vertex 0; entry `v` holds the edge reaching `v`.
    fn out_tree(&self) -> Vec<Option<usize>> {
        let mut out_edges = vec![Vec::new(); self.vertices];
        for (e, &(from, _, _, _)) in self.edges.iter().enumerate() {
            out_edges[from].push(e);
        }
        let mut parent = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &e in &out_edges[u] {
                let v = self.edges[e].1;
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(e);
                    queue.push_back(v);
                }
            }
        }
        parent
    }

    /// Edges of a directed path from `start` to vertex 0.
    fn path_to_root(&self, start: usize) -> Vec<usize> {
        let mut in_edges = vec![Vec::new(); self.vertices];
        for (e, &(_, to, _, _)) in self.edges.iter().enumerate() {
            in_edges[to].push(e);
        }
        // BFS backwards from the root; next[v] is the first edge on v's way to it
        let mut next = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &e in &in_edges[v] {
                let u = self.edges[e].0;
                if !seen[u] {
                    seen[u] = true;
                    next[u] = Some(e);
                    queue.push_back(u);
                }
            }
        }
        let mut path = Vec::new();
        let mut v = start;
        while v != 0 {
            let e = next[v].expect("strongly connected");
            path.push(e);
            v = self.edges[e].1;
        }
        path
    }

    fn tree_path(&self, parent: &[Option<usize>], v: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut v = v;
        while let Some(e) = parent[v] {
            path.push(e);
            v = self.edges[e].0;
        }
        path.reverse();
        path
    }

    /// Symbols of the periodic point traced by a closed walk.
    fn walk_word(&self, walk: &[usize]) -> Word {
        Word(walk.iter().map(|&e| self.edges[e].3[0]).collect())
    }
}

/// Solves `c = κ + b − b∘σ` exactly. `b` has depth `max(m, 2) − 1` and is
/// pinned to zero on the first vertex; `None` when no solution exists.
pub fn coboundary_solve(c: &Cocycle, kappa: Rational64) -> Option<Coboundary> {
    let graph = BlockGraph::new(c.function());
    solve_on(&graph, kappa).ok().map(|values| Coboundary {
        matrix: c.matrix().clone(),
        depth: graph.vertex_depth,
        kappa,
        values,
    })
}

/// Potentials along the BFS tree, or the first violating edge together with
/// the tree.
fn solve_on(graph: &BlockGraph, kappa: Rational64) -> std::result::Result<Vec<Rational64>, (usize, Vec<Option<usize>>)> {
    let parent = graph.out_tree();
    let mut b = vec![Rational64::zero(); graph.vertices];
    let mut order: Vec<usize> = (0..graph.vertices).collect();
    let depth_of = |v: usize| graph.tree_path(&parent, v).len();
    order.sort_by_key(|&v| depth_of(v));
    for &v in &order {
        if let Some(e) = parent[v] {
            let (from, _, cw, _) = graph.edges[e];
            b[v] = b[from] + kappa - Rational64::from_integer(cw);
        }
    }
    for (e, (from, to, cw, _)) in graph.edges.iter().enumerate() {
        if Rational64::from_integer(*cw) != kappa + b[*from] - b[*to] {
            return Err((e, parent));
        }
    }
    Ok(b)
}

/// A periodic orbit whose cocycle sum differs from `κ · period`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCertificate {
    pub cycle: Word,
    pub sum: i64,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScoeDecision {
    Strong(Coboundary),
    NotStrong(CycleCertificate),
}

impl ScoeDecision {
    pub fn is_strong(&self) -> bool {
        matches!(self, ScoeDecision::Strong(_))
    }
}

/// Periods tried when looking for a shortest obstruction.
const SHORT_CYCLE_PERIODS: usize = 12;
const SHORT_CYCLE_WORD_BUDGET: usize = 1 << 20;

/// Decides whether `c = κ + b − b∘σ` has a solution; otherwise returns a
/// violating cycle. The shortest violating primitive orbit of period at most
/// 12 is preferred; failing that, a closed walk through the offending edge.
pub fn decide_coboundary(c: &Cocycle, kappa: Rational64) -> ScoeDecision {
    let graph = BlockGraph::new(c.function());
    let (bad_edge, parent) = match solve_on(&graph, kappa) {
        Ok(values) => {
            return ScoeDecision::Strong(Coboundary {
                matrix: c.matrix().clone(),
                depth: graph.vertex_depth,
                kappa,
                values,
            })
        }
        Err(found) => found,
    };
    let matrix = c.matrix();
    let violates = |w: &Word| Rational64::from_integer(c.cycle_sum(w)) != kappa * Rational64::from_integer(w.len() as i64);
    for p in 1..=SHORT_CYCLE_PERIODS {
        if matrix.word_count(p) > SHORT_CYCLE_WORD_BUDGET {
            break;
        }
        if let Some(w) = enumerate_cycles(matrix, p, CycleMode::PrimitiveOrbits)
            .into_iter()
            .find(|w| violates(w))
        {
            return ScoeDecision::NotStrong(CycleCertificate {
                sum: c.cycle_sum(&w),
                period: p,
                cycle: w,
            });
        }
    }
    // root → from (tree) → to (bad edge) → root, versus root → to (tree) → root;
    // tree edges are exact, so the two deviations differ by the bad edge's
    let (from, to, _, _) = graph.edges[bad_edge];
    let back = graph.path_to_root(to);
    let mut first = graph.tree_path(&parent, from);
    first.push(bad_edge);
    first.extend(&back);
    let mut second = graph.tree_path(&parent, to);
    second.extend(&back);
    let walk = [first, second]
        .into_iter()
        .filter(|w| !w.is_empty())
        .map(|w| graph.walk_word(&w))
        .find(|w| violates(w))
        .expect("one of the two closed walks carries the defect");
    ScoeDecision::NotStrong(CycleCertificate {
        sum: c.cycle_sum(&walk),
        period: walk.len(),
        cycle: walk,
    })
}

/// Strong continuous orbit equivalence: `c₁ = 1 + b₁ − b₁∘σ_A`.
pub fn is_scoe(witness: &CoeWitness) -> ScoeDecision {
    decide_coboundary(&cocycle(witness, Side::First), Rational64::one())
}

/// One row of an entropy-limit sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRow {
    pub n: usize,
    /// `E_n = φ(r_other^{−cⁿ})`, with `φ` the gauge KMS state of this side.
    pub e_n: f64,
    /// `−(1/n) log E_n`.
    pub entropy_estimate: f64,
    /// `r_ownⁿ · E_n`.
    pub scaled: f64,
}

/// `E_n` for `n = 1..=n_max`. Side 1 uses `c₁` on the source with base
/// `r_target`, side 2 uses `c₂` on the target with base `r_source`. Computed
/// as `E_n = r_own^{−n} φ(λ_ψⁿ 1)` with `ψ = −c · log r_other`, iterating
/// the operator with renormalization.
pub fn entropy_limit_sequence(
    witness: &CoeWitness,
    side: Side,
    n_max: usize,
    opts: &SpectralOptions,
) -> Result<Vec<EntropyRow>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let (own, other) = match side {
        Side::First => (&witness.code.source, &witness.code.target),
        Side::Second => (&witness.code.target, &witness.code.source),
    };
    let r_other = perron(other, opts)?.eigenvalue;
    let gauge = gauge_kms(own, opts)?;
    let c = cocycle(witness, side);
    let psi = c.function().to_real().scale(-r_other.ln());
    sequence_from(&RuelleOperator::new(&psi), &gauge, n_max)
}

fn sequence_from(op: &RuelleOperator, gauge: &MarkovMeasure, n_max: usize) -> Result<Vec<EntropyRow>> {
    let r_own = gauge.eigenvalue();
    let mut u = LocallyConstantFunction::constant_real(op.matrix().clone(), 1.0);
    // the accumulated normalization, both directly and as a logarithm
    let mut scale = 1.0;
    let mut log_scale = 0.0;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        u = op.apply(&u)?;
        let s = u.sup_norm();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::NoConvergence {
                what: "entropy-limit iteration",
                iterations: n,
            });
        }
        if s != 1.0 {
            u = u.scale(1.0 / s);
            scale *= s;
            log_scale += s.ln();
        }
        let mean = gauge.expectation(&u)?;
        let direct = (mean * scale, mean * scale / r_own.powi(n as i32));
        let (a_n, e_n) = if direct.1.is_normal() && direct.0.is_finite() {
            direct
        } else {
            let log_a = mean.ln() + log_scale;
            (log_a.exp(), (log_a - n as f64 * r_own.ln()).exp())
        };
        let log_e = if e_n > 0.0 {
            e_n.ln()
        } else {
            mean.ln() + log_scale - n as f64 * r_own.ln()
        };
        rows.push(EntropyRow {
            n,
            e_n,
            entropy_estimate: -log_e / n as f64,
            scaled: a_n,
        });
    }
    Ok(rows)
}

/// `a_n = r_ownⁿ · E_n` and how settled its tail is.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitConstants {
    pub values: Vec<f64>,
    pub last: f64,
    /// `max − min` of `a_n` over the final quarter of the range.
    pub oscillation: f64,
}

pub fn limit_constants(witness: &CoeWitness, side: Side, n_max: usize, opts: &SpectralOptions) -> Result<LimitConstants> {
    let rows = entropy_limit_sequence(witness, side, n_max, opts)?;
    Ok(constants_from(&rows))
}

pub fn constants_from(rows: &[EntropyRow]) -> LimitConstants {
    let values: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    let start = values.len() - values.len().div_ceil(4);
    let quarter = &values[start..];
    let hi = quarter.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = quarter.iter().copied().fold(f64::INFINITY, f64::min);
    LimitConstants {
        last: *values.last().expect("n_max ≥ 1"),
        oscillation: hi - lo,
        values,
    }
}

/// `H(y) = Σ_{|ν| = n, A(ν_n, y₁) = 1} Π w(νᵢ)` over admissible `ν`, as a
/// table over the symbol `y₁`. Exact; `None` on overflow.
pub fn weighted_follower_sum(matrix: &TransitionMatrix, weights: &[i128], n: usize) -> Option<Vec<i128>> {
    let size = matrix.size();
    // by_last[s]: weighted count of admissible words of the current length ending in s
    let mut by_last: Vec<i128> = weights.to_vec();
    for _ in 1..n {
        let mut next = vec![0i128; size];
        for (s, &w) in by_last.iter().enumerate() {
            for t in matrix.successors(s) {
                next[t] = next[t].checked_add(w.checked_mul(weights[t])?)?;
            }
        }
        by_last = next;
    }
    let mut out = vec![0i128; size];
    for (s, &w) in by_last.iter().enumerate() {
        for y in matrix.successors(s) {
            out[y] = out[y].checked_add(w)?;
        }
    }
    Some(out)
}

/// `H_n` on the golden mean shift with weight `2^{#2(ν)}`, as the values at
/// `y₁ = 1, 2`.
pub fn hn_values(n: usize) -> Result<[i128; 2]> {
    check_hn_range(n)?;
    let h = weighted_follower_sum(&TransitionMatrix::golden_mean(), &[1, 2], n).expect("no overflow for n ≤ 30");
    Ok([h[0], h[1]])
}

/// `(1/3)(2^{n+1} + (−1)ⁿ) + (1/3)(2^{n+1} + 2(−1)^{n−1}) χ_{U₁}` at
/// `y₁ = 1, 2`.
pub fn hn_closed_form(n: usize) -> Result<[i128; 2]> {
    check_hn_range(n)?;
    let p = 1i128 << (n + 1);
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    let constant = p + sign;
    let coefficient = p - 2 * sign;
    debug_assert!(constant % 3 == 0 && coefficient % 3 == 0);
    Ok([(constant + coefficient) / 3, constant / 3])
}

/// Largest absolute difference between [`hn_values`] and
/// [`hn_closed_form`]; zero when the closed form holds.
pub fn hn_check(n: usize) -> Result<i128> {
    let direct = hn_values(n)?;
    let closed = hn_closed_form(n)?;
    Ok((0..2).map(|i| (direct[i] - closed[i]).abs()).max().unwrap_or(0))
}

fn check_hn_range(n: usize) -> Result<()> {
    if (1..=30).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("n = {n} outside 1..=30")))
    }
}
