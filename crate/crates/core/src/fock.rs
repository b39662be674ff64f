//! Truncated Fock realization of the isotropic calculus: ladder operators,
//! the harmonic oscillator, Weyl quantization, the `#+-` product, squeezed
//! vacua and the rank-one vacuum projectors.
//!
//! The ladder operators are `C_j = w_j - d_j` (raising) and
//! `C_j^* = w_j + d_j` (lowering) on Hermite functions, so that
//! `C_j |m> = sqrt(2(m_j+1)) |m+e_j>` and `C_j^* |m> = sqrt(2 m_j) |m-e_j>`.

use crate::error::{CoreError, Result};
use crate::exterior::{FiberOperator, FiberSpace};
use crate::scalar::ScalarExt;
use crate::symbol::Side;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Occupation-number basis `|m>` with `|m| <= cutoff`, ordered by total
/// level and then lexicographically.
#[derive(Clone, Debug)]
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn compositions(modes: usize, total: usize) -> Vec<Vec<u32>> {
    if modes == 1 {
        return vec![vec![total as u32]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(modes - 1, total - first) {
            rest.insert(0, first as u32);
            out.push(rest);
        }
    }
    out
}

impl FockSpace {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        if modes == 0 {
            return Err(CoreError::Config("at least one oscillator mode is required".into()));
        }
        let mut states = Vec::new();
        for lvl in 0..=cutoff {
            states.extend(compositions(modes, lvl));
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(FockSpace { modes, cutoff, states, index })
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }
    pub fn level(&self, i: usize) -> usize {
        self.states[i].iter().map(|&m| m as usize).sum()
    }
    pub fn index_of(&self, m: &[u32]) -> Option<usize> {
        self.index.get(m).copied()
    }
    /// Number of states at exactly the given level.
    pub fn level_count(&self, lvl: usize) -> usize {
        (0..self.len()).filter(|&i| self.level(i) == lvl).count()
    }
}

/// Fock space tensored with a fiber; the fiber index varies fastest.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    pub fock: FockSpace,
    pub fiber: FiberSpace,
    vacuum_cutoff: usize,
}

impl ModelSpace {
    /// Model space for dimension `n`: `n - 1` modes and the form fiber
    /// `Lambda(C^{n-1}) (x) C^r`. Deformed vacua are cut at level `N - 4`.
    pub fn new(n: usize, r: usize, cutoff: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::Config(format!("n must be at least 2, got {n}")));
        }
        if cutoff < 4 {
            return Err(CoreError::TruncationTooSmall(format!("cutoff {cutoff} is below 4")));
        }
        Ok(ModelSpace { fock: FockSpace::new(n - 1, cutoff)?, fiber: FiberSpace::new(n - 1, r), vacuum_cutoff: cutoff - 4 })
    }
    /// Arbitrary Fock space and fiber; vacua are cut at the full cutoff.
    pub fn from_parts(fock: FockSpace, fiber: FiberSpace) -> Self {
        let vacuum_cutoff = fock.cutoff();
        ModelSpace { fock, fiber, vacuum_cutoff }
    }
    /// Fock space with a one-dimensional fiber.
    pub fn scalar(modes: usize, cutoff: usize) -> Result<Self> {
        Ok(ModelSpace { fock: FockSpace::new(modes, cutoff)?, fiber: FiberSpace::new(0, 1), vacuum_cutoff: cutoff })
    }
    pub fn with_vacuum_cutoff(mut self, level: usize) -> Self {
        self.vacuum_cutoff = level.min(self.fock.cutoff());
        self
    }
    pub fn vacuum_cutoff(&self) -> usize {
        self.vacuum_cutoff
    }
    pub fn n(&self) -> usize {
        self.fock.modes() + 1
    }
    pub fn cutoff(&self) -> usize {
        self.fock.cutoff()
    }
    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }
    pub fn dim(&self) -> usize {
        self.fock.len() * self.fiber.dim()
    }
    pub fn index(&self, fock: usize, fiber: usize) -> usize {
        fock * self.fiber.dim() + fiber
    }
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.fiber.dim(), idx % self.fiber.dim())
    }
    pub fn level(&self, idx: usize) -> usize {
        self.fock.level(idx / self.fiber.dim())
    }
    pub fn label(&self, idx: usize) -> String {
        let (f, a) = self.split(idx);
        format!("{:?}|{}", self.fock.state(f), self.fiber.label(a))
    }
}

/// Row-compressed complex matrix; rows sorted by column, no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix { dim, rows: vec![Vec::new(); dim] }
    }
    pub fn identity(dim: usize) -> Self {
        SparseMatrix::diagonal((0..dim).map(|_| Complex64::new(1.0, 0.0)).collect())
    }
    pub fn diagonal(d: Vec<Complex64>) -> Self {
        let rows = d.iter().enumerate().map(|(i, &v)| if v == ZERO { vec![] } else { vec![(i, v)] }).collect();
        SparseMatrix { dim: d.len(), rows }
    }
    pub fn from_triplets(dim: usize, trip: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); dim];
        for (i, j, v) in trip {
            *acc[i].entry(j).or_insert(ZERO) += v;
        }
        let rows = acc.into_iter().map(|r| r.into_iter().filter(|(_, v)| *v != ZERO).collect()).collect();
        SparseMatrix { dim, rows }
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(p) => self.rows[i][p].1,
            Err(_) => ZERO,
        }
    }
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }
    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return SparseMatrix::zeros(self.dim);
        }
        let rows = self.rows.iter().map(|r| r.iter().map(|&(j, v)| (j, v * c)).collect()).collect();
        SparseMatrix { dim: self.dim, rows }
    }
    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "sparse dimension mismatch");
        let mut rows = Vec::with_capacity(self.dim);
        for (a, b) in self.rows.iter().zip(&o.rows) {
            let mut r = Vec::with_capacity(a.len() + b.len());
            let (mut p, mut q) = (0, 0);
            while p < a.len() || q < b.len() {
                let take_a = q >= b.len() || (p < a.len() && a[p].0 < b[q].0);
                let take_b = p >= a.len() || (q < b.len() && b[q].0 < a[p].0);
                if take_a {
                    r.push(a[p]);
                    p += 1;
                } else if take_b {
                    r.push(b[q]);
                    q += 1;
                } else {
                    let v = a[p].1 + b[q].1;
                    if v != ZERO {
                        r.push((a[p].0, v));
                    }
                    p += 1;
                    q += 1;
                }
            }
            rows.push(r);
        }
        SparseMatrix { dim: self.dim, rows }
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "sparse dimension mismatch");
        let mut acc = vec![ZERO; self.dim];
        let mut touched = vec![false; self.dim];
        let mut cols: Vec<usize> = Vec::new();
        let mut rows = Vec::with_capacity(self.dim);
        for r in &self.rows {
            for &(k, a) in r {
                for &(j, b) in &o.rows[k] {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            let mut row = Vec::with_capacity(cols.len());
            for &j in &cols {
                if acc[j] != ZERO {
                    row.push((j, acc[j]));
                }
                acc[j] = ZERO;
                touched[j] = false;
            }
            cols.clear();
            rows.push(row);
        }
        SparseMatrix { dim: self.dim, rows }
    }
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        SparseMatrix::from_triplets(self.dim, self.entries().map(|(i, j, v)| (j, i, v.conj())))
    }
    /// `self (x) fiber`, fiber index fastest.
    pub fn kron(&self, fiber: &FiberOperator) -> Self {
        let fd = fiber.dim();
        let f: Vec<(usize, usize, Complex64)> = fiber.entries().map(|(a, b, v)| (a, b, v.to_c64())).collect();
        let mut rows = vec![Vec::new(); self.dim * fd];
        for (i, j, v) in self.entries() {
            for &(a, b, w) in &f {
                rows[i * fd + a].push((j * fd + b, v * w));
            }
        }
        for r in rows.iter_mut() {
            r.sort_unstable_by_key(|e| e.0);
        }
        SparseMatrix { dim: self.dim * fd, rows }
    }
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }
    /// Keep only the entries with `keep(row, col)`.
    pub fn filtered(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().copied().filter(|&(j, _)| keep(i, j)).collect())
            .collect();
        SparseMatrix { dim: self.dim, rows }
    }
}

/// Truncation bookkeeping. Column `j` of the stored matrix equals the
/// untruncated operator applied to basis state `j` whenever
/// `level(j) <= limit`. Output levels are bounded by
/// `max(level + raise, fixed)`; `raise = None` means the level-dependent
/// part is absent, `fixed = None` that there is no finite-rank part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub limit: i64,
    pub raise: Option<i64>,
    pub fixed: Option<i64>,
}

impl Truncation {
    pub fn exact(cutoff: usize, raise: i64) -> Self {
        Truncation { limit: cutoff as i64, raise: Some(raise), fixed: None }
    }
    /// Truncation data of `a o b`.
    pub fn compose(a: Truncation, b: Truncation) -> Truncation {
        let mut limit = b.limit;
        if let Some(rb) = b.raise {
            limit = limit.min(a.limit - rb);
        }
        if let Some(fb) = b.fixed {
            if fb > a.limit {
                limit = -1;
            }
        }
        let raise = match (a.raise, b.raise) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        let fixed = match (a.fixed, a.raise.zip(b.fixed).map(|(r, f)| r + f)) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        Truncation { limit, raise, fixed }
    }
    pub fn sum(a: Truncation, b: Truncation) -> Truncation {
        let m = |x: Option<i64>, y: Option<i64>| match (x, y) {
            (Some(p), Some(q)) => Some(p.max(q)),
            (p, q) => p.or(q),
        };
        Truncation { limit: a.limit.min(b.limit), raise: m(a.raise, b.raise), fixed: m(a.fixed, b.fixed) }
    }
}

/// Operator on a truncated model space with its truncation data and an
/// optional declared Heisenberg order.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub mat: SparseMatrix,
    pub trunc: Truncation,
    pub order: Option<i32>,
}

impl FockOperator {
    pub fn new(mat: SparseMatrix, trunc: Truncation) -> Self {
        FockOperator { mat, trunc, order: None }
    }
    pub fn with_order(mut self, order: i32) -> Self {
        self.order = Some(order);
        self
    }
    pub fn zero(space: &ModelSpace) -> Self {
        let c = space.cutoff() as i64;
        FockOperator::new(SparseMatrix::zeros(space.dim()), Truncation { limit: c, raise: None, fixed: None })
    }
    pub fn identity(space: &ModelSpace) -> Self {
        FockOperator::new(SparseMatrix::identity(space.dim()), Truncation::exact(space.cutoff(), 0))
    }
    /// `Id_Fock (x) op`.
    pub fn fiber(space: &ModelSpace, op: &FiberOperator) -> Self {
        FockOperator::new(SparseMatrix::identity(space.fock.len()).kron(op), Truncation::exact(space.cutoff(), 0))
    }
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }
    /// `self o o`.
    pub fn compose(&self, o: &Self) -> Self {
        FockOperator::new(self.mat.mul(&o.mat), Truncation::compose(self.trunc, o.trunc))
    }
    pub fn add(&self, o: &Self) -> Self {
        FockOperator::new(self.mat.add(&o.mat), Truncation::sum(self.trunc, o.trunc))
    }
    pub fn sub(&self, o: &Self) -> Self {
        FockOperator::new(self.mat.sub(&o.mat), Truncation::sum(self.trunc, o.trunc))
    }
    pub fn scale(&self, c: Complex64) -> Self {
        FockOperator { mat: self.mat.scale(c), trunc: self.trunc, order: self.order }
    }
    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }
    /// Fock-only operator tensored with a fiber operator.
    pub fn kron(&self, fiber: &FiberOperator) -> Self {
        FockOperator { mat: self.mat.kron(fiber), trunc: self.trunc, order: self.order }
    }
    /// Largest entry modulus over the columns inside `limit`, with the
    /// offending `(row, col)`.
    pub fn max_abs_on_interior(&self, space: &ModelSpace, limit: i64) -> (f64, Option<(usize, usize)>) {
        let mut best = (0.0, None);
        for (i, j, v) in self.mat.entries() {
            if (space.level(j) as i64) <= limit && v.norm() > best.0 {
                best = (v.norm(), Some((i, j)));
            }
        }
        best
    }
    /// `max |(self - o)_{ij}|` over interior columns, where interior is
    /// taken from the truncation data of both operands.
    pub fn interior_distance(&self, o: &Self, space: &ModelSpace) -> Result<Residual> {
        let limit = self.trunc.limit.min(o.trunc.limit);
        if limit < 0 {
            return Err(CoreError::TruncationTooSmall(format!(
                "no interior states at cutoff {}",
                space.cutoff()
            )));
        }
        let diff = FockOperator::new(self.mat.sub(&o.mat), self.trunc);
        let (max, at) = diff.max_abs_on_interior(space, limit);
        Ok(Residual { max, limit, witness: at.map(|(i, j)| (space.label(i), space.label(j))) })
    }
}

/// Result of an interior comparison.
#[derive(Clone, Debug)]
pub struct Residual {
    pub max: f64,
    /// Interior levels are `0..=limit`.
    pub limit: i64,
    /// Row and column labels of the largest deviation.
    pub witness: Option<(String, String)>,
}

/// The pair `C_j`, `C_j^*` and the linear symbols they quantize under the
/// chosen sign.
#[derive(Clone, Debug)]
pub struct LadderPair {
    pub creation: FockOperator,
    pub annihilation: FockOperator,
    pub creation_symbol: IsotropicPolySymbol,
    pub annihilation_symbol: IsotropicPolySymbol,
}

fn check_mode(space: &FockSpace, j: usize) -> Result<()> {
    if j == 0 || j > space.modes() {
        return Err(CoreError::IndexOutOfRange { index: j, max: space.modes() });
    }
    Ok(())
}

/// Fock-only raising operator `C_j`.
pub fn creation(fock: &FockSpace, j: usize) -> Result<FockOperator> {
    check_mode(fock, j)?;
    let mut trip = Vec::new();
    for i in 0..fock.len() {
        let mut m = fock.state(i).to_vec();
        m[j - 1] += 1;
        if let Some(k) = fock.index_of(&m) {
            trip.push((k, i, Complex64::new((2.0 * m[j - 1] as f64).sqrt(), 0.0)));
        }
    }
    let c = fock.cutoff() as i64;
    Ok(FockOperator::new(SparseMatrix::from_triplets(fock.len(), trip), Truncation { limit: c - 1, raise: Some(1), fixed: None }))
}

/// Fock-only lowering operator `C_j^*`.
pub fn annihilation(fock: &FockSpace, j: usize) -> Result<FockOperator> {
    check_mode(fock, j)?;
    let mut trip = Vec::new();
    for i in 0..fock.len() {
        let mut m = fock.state(i).to_vec();
        if m[j - 1] == 0 {
            continue;
        }
        let mj = m[j - 1];
        m[j - 1] -= 1;
        let k = fock.index_of(&m).expect("lower state present");
        trip.push((k, i, Complex64::new((2.0 * mj as f64).sqrt(), 0.0)));
    }
    Ok(FockOperator::new(SparseMatrix::from_triplets(fock.len(), trip), Truncation::exact(fock.cutoff(), -1)))
}

/// `C_j`, `C_j^*` on the model space (identity on the fiber), with the
/// linear symbols `eta_j -+ i eta_{n+j-1}` they quantize: the `-` symbol
/// gives `C_j` for `Side::Plus` and `C_j^*` for `Side::Minus`.
pub fn ladder_ops(space: &ModelSpace, j: usize, side: Side) -> Result<LadderPair> {
    let id = space.fiber.identity();
    let c = creation(&space.fock, j)?.kron(&id);
    let cs = annihilation(&space.fock, j)?.kron(&id);
    let modes = space.fock.modes();
    let dim = space.fiber_dim();
    let w = IsotropicPolySymbol::var(modes, dim, j)?;
    let xi = IsotropicPolySymbol::var(modes, dim, j + modes)?;
    let i = ScalarExt::i();
    let minus = w.sub(&xi.scale(&i))?;
    let plus = w.add(&xi.scale(&i))?;
    let (cre, ann) = match side {
        Side::Plus => (minus, plus),
        Side::Minus => (plus, minus),
    };
    Ok(LadderPair { creation: c, annihilation: cs, creation_symbol: cre, annihilation_symbol: ann })
}

/// `H = sum_j w_j^2 - d_j^2`, diagonal with eigenvalue `2|m| + (n-1)`.
pub fn harmonic_oscillator(space: &ModelSpace) -> FockOperator {
    shifted_oscillator(space, 0)
}

/// `H + shift`, exact diagonal.
pub fn shifted_oscillator(space: &ModelSpace, shift: i64) -> FockOperator {
    let modes = space.fock.modes() as i64;
    let d = (0..space.dim())
        .map(|idx| Complex64::new((2 * space.level(idx) as i64 + modes + shift) as f64, 0.0))
        .collect();
    FockOperator::new(SparseMatrix::diagonal(d), Truncation::exact(space.cutoff(), 0))
}

/// Polynomial in `eta' = (w_1..w_{n-1}, phi_1..phi_{n-1})` with fiber
/// operator coefficients. Monomials are exponent vectors of length
/// `2 * modes`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicPolySymbol {
    modes: usize,
    dim: usize,
    terms: BTreeMap<Vec<u16>, FiberOperator>,
}

fn falling(n: u16, k: u16) -> i64 {
    (0..k).map(|t| (n - t) as i64).product()
}

fn factorial(k: u16) -> i64 {
    (1..=k as i64).product()
}

impl IsotropicPolySymbol {
    pub fn zero(modes: usize, dim: usize) -> Self {
        IsotropicPolySymbol { modes, dim, terms: BTreeMap::new() }
    }
    pub fn constant(modes: usize, op: FiberOperator) -> Self {
        let mut s = IsotropicPolySymbol::zero(modes, op.dim());
        s.insert(vec![0; 2 * modes], op);
        s
    }
    pub fn one(modes: usize, dim: usize) -> Self {
        IsotropicPolySymbol::constant(modes, FiberOperator::identity(dim))
    }
    /// `eta_k`, `1 <= k <= 2 modes`.
    pub fn var(modes: usize, dim: usize, k: usize) -> Result<Self> {
        if k == 0 || k > 2 * modes {
            return Err(CoreError::IndexOutOfRange { index: k, max: 2 * modes });
        }
        let mut e = vec![0; 2 * modes];
        e[k - 1] = 1;
        IsotropicPolySymbol::monomial(modes, e, FiberOperator::identity(dim))
    }
    pub fn monomial(modes: usize, exps: Vec<u16>, op: FiberOperator) -> Result<Self> {
        if exps.len() != 2 * modes {
            return Err(CoreError::MalformedSymbol(format!("exponent vector {exps:?} has wrong length")));
        }
        let mut s = IsotropicPolySymbol::zero(modes, op.dim());
        s.insert(exps, op);
        Ok(s)
    }
    /// `|eta'|^2`.
    pub fn norm_sq(modes: usize, dim: usize) -> Self {
        let mut s = IsotropicPolySymbol::zero(modes, dim);
        for k in 0..2 * modes {
            let mut e = vec![0; 2 * modes];
            e[k] = 2;
            s.insert(e, FiberOperator::identity(dim));
        }
        s
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn terms(&self) -> &BTreeMap<Vec<u16>, FiberOperator> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.iter().map(|&e| e as usize).sum()).max().unwrap_or(0)
    }
    fn insert(&mut self, m: Vec<u16>, c: FiberOperator) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e = &*e + &c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }
    fn check(&self, o: &Self) -> Result<()> {
        if self.modes != o.modes || self.dim != o.dim {
            return Err(CoreError::DimensionMismatch(format!(
                "isotropic symbols over ({}, {}) and ({}, {})",
                self.modes, self.dim, o.modes, o.dim
            )));
        }
        Ok(())
    }
    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut s = self.clone();
        for (m, c) in &o.terms {
            s.insert(m.clone(), c.clone());
        }
        Ok(s)
    }
    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&ScalarExt::from_int(-1)))
    }
    pub fn scale(&self, c: &ScalarExt) -> Self {
        let mut s = IsotropicPolySymbol::zero(self.modes, self.dim);
        for (m, v) in &self.terms {
            s.insert(m.clone(), v.scale(c));
        }
        s
    }
    /// Pointwise product (coefficients multiplied in order).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut s = IsotropicPolySymbol::zero(self.modes, self.dim);
        for (ma, a) in &self.terms {
            for (mb, b) in &o.terms {
                let m = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                s.insert(m, a * b);
            }
        }
        Ok(s)
    }
}

/// `a #_+- b`, the finite bidifferential expansion
/// `sum theta^{|al|+|be|} (-1)^{|be|} / (al! be!) (d_x^al d_xi^be a)(d_xi^al d_x^be b)`
/// with `theta = +- i/2`; it matches operator composition of the Weyl
/// quantizations of the same sign.
pub fn moyal_product(a: &IsotropicPolySymbol, b: &IsotropicPolySymbol, side: Side) -> Result<IsotropicPolySymbol> {
    a.check(b)?;
    let modes = a.modes;
    let theta = &ScalarExt::frac(side.sign(), 2) * &ScalarExt::i();
    let mut out = IsotropicPolySymbol::zero(modes, a.dim);
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let prod = ca * cb;
            // alpha: d_x on a, d_xi on b; beta: d_xi on a, d_x on b
            let amax: Vec<u16> = (0..modes).map(|j| ma[j].min(mb[j + modes])).collect();
            let bmax: Vec<u16> = (0..modes).map(|j| ma[j + modes].min(mb[j])).collect();
            let bounds: Vec<u16> = amax.iter().chain(&bmax).copied().collect();
            let mut idx = vec![0u16; 2 * modes];
            loop {
                let (al, be) = idx.split_at(modes);
                let mut num: i64 = 1;
                let mut den: i64 = 1;
                let mut m = vec![0u16; 2 * modes];
                for j in 0..modes {
                    num *= falling(ma[j], al[j]) * falling(ma[j + modes], be[j]);
                    num *= falling(mb[j + modes], al[j]) * falling(mb[j], be[j]);
                    den *= factorial(al[j]) * factorial(be[j]);
                    m[j] = ma[j] - al[j] + mb[j] - be[j];
                    m[j + modes] = ma[j + modes] - be[j] + mb[j + modes] - al[j];
                }
                let k: u32 = idx.iter().map(|&e| e as u32).sum();
                let nb: u32 = be.iter().map(|&e| e as u32).sum();
                let sign = if nb % 2 == 0 { 1 } else { -1 };
                let c = &theta.pow(k) * &ScalarExt::frac(sign * num, den);
                out.insert(m, prod.scale(&c));
                if !advance(&mut idx, &bounds) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Odometer step over `0..=bounds[i]`; false once it wraps.
fn advance(idx: &mut [u16], bounds: &[u16]) -> bool {
    for (x, &b) in idx.iter_mut().zip(bounds) {
        if *x < b {
            *x += 1;
            return true;
        }
        *x = 0;
    }
    false
}
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Quantized generators: `W_j = (C_j + C_j^*)/2` and
/// `P_j = +- i (C_j - C_j^*)/2`, i.e. `w_j` and `-+ i d_j`.
fn generators(fock: &FockSpace, side: Side) -> Result<Vec<FockOperator>> {
    let modes = fock.modes();
    let half = Complex64::new(0.5, 0.0);
    let mut w = Vec::new();
    let mut p = Vec::new();
    for j in 1..=modes {
        let c = creation(fock, j)?;
        let cs = annihilation(fock, j)?;
        w.push(c.add(&cs).scale(half));
        p.push(c.sub(&cs).scale(Complex64::new(0.0, 0.5 * side.sign() as f64)));
    }
    w.extend(p);
    Ok(w)
}

/// Fock-only Weyl quantization of a monomial: the average over all
/// orderings of its factors.
fn quantize_monomial(fock: &FockSpace, gens: &[FockOperator], m: &[u16]) -> FockOperator {
    let mut factors: Vec<usize> = Vec::new();
    for (k, &e) in m.iter().enumerate() {
        factors.extend(std::iter::repeat_n(k, e as usize));
    }
    let ident = FockOperator::new(SparseMatrix::identity(fock.len()), Truncation::exact(fock.cutoff(), 0));
    if factors.is_empty() {
        return ident;
    }
    let total: i64 = factorial(factors.len() as u16);
    let mut acc: Option<FockOperator> = None;
    let mut perm = factors.clone();
    loop {
        let mut op = ident.clone();
        for &f in perm.iter().rev() {
            op = gens[f].compose(&op);
        }
        acc = Some(match acc {
            None => op,
            Some(a) => a.add(&op),
        });
        if !next_permutation(&mut perm) {
            break;
        }
    }
    // distinct orderings each stand for prod(mult!) of the k! orderings
    let mult: i64 = m.iter().map(|&e| factorial(e)).product();
    acc.expect("nonempty").scale(Complex64::new(mult as f64 / total as f64, 0.0))
}

/// Weyl quantization with kernel `int e^{+- i <xi, x - x'>} c((x+x')/2, xi) dxi`,
/// normalized so that `1 -> Id`. Supported for degree at most 4.
pub fn weyl_quantize(space: &ModelSpace, c: &IsotropicPolySymbol, side: Side) -> Result<FockOperator> {
    if c.modes() != space.fock.modes() || c.dim() != space.fiber_dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "symbol over ({}, {}) on model space ({}, {})",
            c.modes(),
            c.dim(),
            space.fock.modes(),
            space.fiber_dim()
        )));
    }
    if c.degree() > 4 {
        return Err(CoreError::DegreeTooHigh { degree: c.degree(), max: 4 });
    }
    let gens = generators(&space.fock, side)?;
    let mut out = FockOperator::zero(space);
    for (m, coeff) in c.terms() {
        let q = quantize_monomial(&space.fock, &gens, m).kron(coeff);
        out = out.add(&q);
    }
    Ok(out)
}

/// Normalized squeezed vacuum `prop exp(-sum tau_j w_j^2 / 2)` expanded in
/// Hermite functions and cut at level `cutoff`. Only even occupations
/// appear; `tau = 1` gives the ground state exactly.
#[derive(Clone, Debug)]
pub struct VacuumVector {
    pub tau: Vec<f64>,
    pub cutoff: usize,
    /// Coefficients on the Fock basis.
    pub coeffs: Vec<f64>,
    /// Squared norm of the untruncated expansion lost to the cutoff.
    pub tail: f64,
}

impl VacuumVector {
    /// `<self, o>`.
    pub fn inner(&self, o: &VacuumVector) -> f64 {
        self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a * b).sum()
    }
    /// Highest level with a nonzero coefficient.
    pub fn top_level(&self, fock: &FockSpace) -> usize {
        (0..fock.len()).filter(|&i| self.coeffs[i] != 0.0).map(|i| fock.level(i)).max().unwrap_or(0)
    }
}

/// One-mode squeezed-vacuum coefficients `c_{2k}`, unnormalized by the cutoff.
fn one_mode_coeffs(tau: f64, kmax: usize) -> Vec<f64> {
    let r = (1.0 - tau) / (1.0 + tau);
    let c0 = (2.0 * tau.sqrt() / (1.0 + tau)).sqrt();
    let mut out = vec![c0];
    let mut a = 1.0;
    for k in 1..=kmax {
        a *= ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
        out.push(c0 * r.powi(k as i32) * a);
    }
    out
}

pub fn vacuum_state(fock: &FockSpace, tau: &[f64], cutoff: usize) -> Result<VacuumVector> {
    if tau.len() != fock.modes() {
        return Err(CoreError::DimensionMismatch(format!("{} widths for {} modes", tau.len(), fock.modes())));
    }
    if let Some(&t) = tau.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
        return Err(CoreError::NonpositiveWidth(t));
    }
    let cutoff = cutoff.min(fock.cutoff());
    let per_mode: Vec<Vec<f64>> = tau.iter().map(|&t| one_mode_coeffs(t, cutoff / 2)).collect();
    let mut coeffs = vec![0.0; fock.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let m = fock.state(i);
        if fock.level(i) > cutoff || m.iter().any(|&x| x % 2 == 1) {
            continue;
        }
        *c = m.iter().enumerate().map(|(j, &x)| per_mode[j][(x / 2) as usize]).product();
    }
    let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
    let norm = norm_sq.sqrt();
    for c in coeffs.iter_mut() {
        *c /= norm;
    }
    Ok(VacuumVector { tau: tau.to_vec(), cutoff, coeffs, tail: 1.0 - norm_sq })
}

/// Which vacuum and which fiber slot a model Szego projector uses.
#[derive(Clone, Debug, PartialEq)]
pub enum SzegoKind {
    /// Ground state on the degree-0 slot.
    Classical,
    /// Ground state on the degree-`(n-1)` slot.
    Conjugate,
    /// Squeezed vacuum with widths `tau` on the degree-0 slot.
    Generalized(Vec<f64>),
    /// Squeezed vacuum with widths `tau` on the degree-`(n-1)` slot.
    GeneralizedConjugate(Vec<f64>),
}

impl SzegoKind {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, SzegoKind::Conjugate | SzegoKind::GeneralizedConjugate(_))
    }
    pub fn widths(&self, modes: usize) -> Vec<f64> {
        match self {
            SzegoKind::Generalized(t) | SzegoKind::GeneralizedConjugate(t) => t.clone(),
            _ => vec![1.0; modes],
        }
    }
    /// The classical kind on the same slot.
    pub fn classical(&self) -> SzegoKind {
        if self.is_conjugate() {
            SzegoKind::Conjugate
        } else {
            SzegoKind::Classical
        }
    }
}

/// `|v><v| (x) Pi_degree` on the model space.
#[derive(Clone, Debug)]
pub struct RankOneProjector {
    pub vacuum: VacuumVector,
    pub degree: usize,
    pub op: FockOperator,
}

fn outer(space: &ModelSpace, a: &[f64], b: &[f64], degree: usize) -> Result<FockOperator> {
    let fock = &space.fock;
    let pi = space.fiber.degree_projector(degree)?;
    let mut trip = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0.0 {
                trip.push((i, j, Complex64::new(x * y, 0.0)));
            }
        }
    }
    let top = (0..fock.len()).filter(|&i| a[i] != 0.0).map(|i| fock.level(i) as i64).max();
    let trunc = Truncation { limit: fock.cutoff() as i64, raise: None, fixed: top };
    Ok(FockOperator::new(SparseMatrix::from_triplets(fock.len(), trip), trunc).kron(&pi))
}

pub fn szego_model_projector(space: &ModelSpace, kind: &SzegoKind) -> Result<RankOneProjector> {
    let degree = if kind.is_conjugate() { space.fiber.m() } else { 0 };
    let cutoff = match kind {
        SzegoKind::Classical | SzegoKind::Conjugate => 0,
        _ => space.vacuum_cutoff(),
    };
    let vacuum = vacuum_state(&space.fock, &kind.widths(space.fock.modes()), cutoff)?;
    let op = outer(space, &vacuum.coeffs, &vacuum.coeffs, degree)?;
    Ok(RankOneProjector { vacuum, degree, op })
}

/// `Tr(P2 P1)` and `p21 = P2 P1 / Tr(P2 P1)`.
#[derive(Clone, Debug)]
pub struct Relating {
    pub trace: f64,
    pub overlap: f64,
    pub p21: FockOperator,
}

/// Traces are taken on the Fock factor.
pub fn overlap_and_relating(p1: &RankOneProjector, p2: &RankOneProjector) -> Result<Relating> {
    if p1.degree != p2.degree || p1.op.dim() != p2.op.dim() {
        return Err(CoreError::InvalidCombination("projectors live on different slots".into()));
    }
    let overlap = p1.vacuum.inner(&p2.vacuum);
    let trace = overlap * overlap;
    if trace < 1e-12 {
        return Err(CoreError::DegenerateOverlap(overlap));
    }
    let p21 = p2.op.compose(&p1.op).scale(Complex64::new(1.0 / trace, 0.0));
    Ok(Relating { trace, overlap, p21 })
}

/// `|z_to><z_from| / <z_from, z_to>` on the common slot.
pub fn transition(space: &ModelSpace, from: &RankOneProjector, to: &RankOneProjector) -> Result<FockOperator> {
    if from.degree != to.degree {
        return Err(CoreError::InvalidCombination("projectors live on different slots".into()));
    }
    let ov = from.vacuum.inner(&to.vacuum);
    if ov.abs() < 1e-6 {
        return Err(CoreError::DegenerateOverlap(ov));
    }
    Ok(outer(space, &to.vacuum.coeffs, &from.vacuum.coeffs, from.degree)?.scale(Complex64::new(1.0 / ov, 0.0)))
}
