//! The fiber `Lambda^{0,*}(C^m) (x) C^r` with `m = n - 1`: interior and wedge
//! operators, degree projectors and the normal/tangential block split.

use crate::error::{CoreError, Result};
use crate::scalar::ScalarExt;
use std::collections::BTreeMap;
use std::fmt;

/// Strictly increasing multi-index with entries in `1..=m`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FormIndex(Vec<usize>);

impl FormIndex {
    pub fn new(indices: Vec<usize>, m: usize) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(CoreError::MalformedSymbol(format!(
                    "form index {indices:?} is not strictly increasing"
                )));
            }
        }
        if let Some(&j) = indices.iter().find(|&&j| j == 0 || j > m) {
            return Err(CoreError::IndexOutOfRange { index: j, max: m });
        }
        Ok(FormIndex(indices))
    }
    pub fn empty() -> Self {
        FormIndex(Vec::new())
    }
    pub fn degree(&self) -> usize {
        self.0.len()
    }
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }
    /// Remove `j`, returning the sign `(-1)^{position of j}`.
    pub fn remove(&self, j: usize) -> Option<(i64, FormIndex)> {
        let p = self.0.binary_search(&j).ok()?;
        let mut v = self.0.clone();
        v.remove(p);
        Some((if p % 2 == 0 { 1 } else { -1 }, FormIndex(v)))
    }
    /// Prepend `j` and sort, returning the sign of the reordering.
    pub fn insert(&self, j: usize) -> Option<(i64, FormIndex)> {
        match self.0.binary_search(&j) {
            Ok(_) => None,
            Err(p) => {
                let mut v = self.0.clone();
                v.insert(p, j);
                Some((if p % 2 == 0 { 1 } else { -1 }, FormIndex(v)))
            }
        }
    }
}

impl fmt::Display for FormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        write!(f, "w")?;
        for j in &self.0 {
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

/// Parity of a spinor or of a form degree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(k: usize) -> Parity {
        if k % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
    pub fn parse(s: &str) -> Option<Parity> {
        match s {
            "even" => Some(Parity::Even),
            "odd" => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// Basis of `Lambda(C^m) (x) C^r`: degree ascending, lexicographic inside a
/// degree, the `C^r` slot varying fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSpace {
    m: usize,
    r: usize,
    forms: Vec<FormIndex>,
    lookup: BTreeMap<FormIndex, usize>,
}

fn subsets_of_size(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..=m {
            cur.push(j);
            rec(j + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, m, k, &mut Vec::new(), &mut out);
    out
}

impl FiberSpace {
    pub fn new(m: usize, r: usize) -> Self {
        let mut forms = Vec::new();
        for k in 0..=m {
            for s in subsets_of_size(m, k) {
                forms.push(FormIndex(s));
            }
        }
        let lookup = forms.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        FiberSpace { m, r, forms, lookup }
    }
    /// Number of form indices `m = n - 1`.
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn dim(&self) -> usize {
        self.forms.len() * self.r
    }
    pub fn forms(&self) -> &[FormIndex] {
        &self.forms
    }
    pub fn index_of(&self, form: &FormIndex, slot: usize) -> usize {
        self.lookup[form] * self.r + slot
    }
    pub fn form_of(&self, idx: usize) -> &FormIndex {
        &self.forms[idx / self.r]
    }
    pub fn degree_of(&self, idx: usize) -> usize {
        self.form_of(idx).degree()
    }
    pub fn label(&self, idx: usize) -> String {
        if self.r == 1 {
            self.form_of(idx).to_string()
        } else {
            format!("{}#{}", self.form_of(idx), idx % self.r + 1)
        }
    }
    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.m {
            return Err(CoreError::IndexOutOfRange { index: j, max: self.m });
        }
        Ok(())
    }

    /// Interior operator `e_j`: removes `j` with sign `(-1)^{position}`.
    pub fn interior_op(&self, j: usize) -> Result<FiberOperator> {
        self.check_index(j)?;
        let mut op = FiberOperator::zero(self.dim());
        for (fi, form) in self.forms.iter().enumerate() {
            if let Some((sign, g)) = form.remove(j) {
                let gi = self.lookup[&g];
                for s in 0..self.r {
                    op.set(gi * self.r + s, fi * self.r + s, ScalarExt::from_int(sign));
                }
            }
        }
        Ok(op)
    }

    /// Wedge operator `eps_j`: inserts `j` with the sign of sorting.
    pub fn wedge_op(&self, j: usize) -> Result<FiberOperator> {
        self.check_index(j)?;
        let mut op = FiberOperator::zero(self.dim());
        for (fi, form) in self.forms.iter().enumerate() {
            if let Some((sign, g)) = form.insert(j) {
                let gi = self.lookup[&g];
                for s in 0..self.r {
                    op.set(gi * self.r + s, fi * self.r + s, ScalarExt::from_int(sign));
                }
            }
        }
        Ok(op)
    }

    /// `Pi_q`, projection onto degree `q`.
    pub fn degree_projector(&self, q: usize) -> Result<FiberOperator> {
        if q > self.m {
            return Err(CoreError::DegreeOutOfRange { degree: q, max: self.m });
        }
        Ok(self.diagonal(|i| self.degree_of(i) == q))
    }

    /// Sum of `Pi_q` over degrees of the given parity.
    pub fn parity_projector(&self, p: Parity) -> FiberOperator {
        self.diagonal(|i| Parity::of(self.degree_of(i)) == p)
    }

    pub fn identity(&self) -> FiberOperator {
        FiberOperator::identity(self.dim())
    }

    fn diagonal(&self, pred: impl Fn(usize) -> bool) -> FiberOperator {
        let mut op = FiberOperator::zero(self.dim());
        for i in 0..self.dim() {
            if pred(i) {
                op.set(i, i, ScalarExt::one());
            }
        }
        op
    }

    /// Basis indices of the forms with degree of the given parity.
    pub fn indices_of_parity(&self, p: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&i| Parity::of(self.degree_of(i)) == p).collect()
    }

    /// Normal/tangential split of the full spinor space of the given parity.
    pub fn split_normal_tangential(&self, parity: Parity) -> SpinorSplit {
        // tangential forms keep the spinor parity; the normal part sits
        // behind dz1/sqrt2 and so has the opposite degree parity
        let tangential = self.indices_of_parity(parity);
        let normal = self.indices_of_parity(parity.flip());
        SpinorSplit { parity, tangential, normal }
    }

    /// Block layout shared by all 2x2 block symbols: even-degree tangential
    /// forms first, odd-degree second.
    pub fn block_layout(&self) -> BlockLayout {
        let first = self.indices_of_parity(Parity::Even);
        let second = self.indices_of_parity(Parity::Odd);
        BlockLayout { first, second }
    }
}

/// Ordered bases of the tangential and normal parts of a spinor space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinorSplit {
    pub parity: Parity,
    pub tangential: Vec<usize>,
    pub normal: Vec<usize>,
}

impl SpinorSplit {
    /// Block order used by the symbols: `(t, n)` for even spinors and
    /// `(n, t)` for odd ones.
    pub fn blocks(&self) -> (&[usize], &[usize]) {
        match self.parity {
            Parity::Even => (&self.tangential, &self.normal),
            Parity::Odd => (&self.normal, &self.tangential),
        }
    }
    /// Whether block 1 is the tangential part.
    pub fn first_is_tangential(&self) -> bool {
        self.parity == Parity::Even
    }
}

/// Permutation of the fiber basis into `(block 1, block 2)` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl BlockLayout {
    pub fn order(&self) -> Vec<usize> {
        self.first.iter().chain(self.second.iter()).copied().collect()
    }
    pub fn dim(&self) -> usize {
        self.first.len() + self.second.len()
    }
    /// Positions (in block order) of block `b` (0 or 1).
    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        if b == 0 {
            0..self.first.len()
        } else {
            self.first.len()..self.dim()
        }
    }
}

/// Exact sparse square matrix over the fiber basis.
#[derive(Clone, Debug)]
pub struct FiberOperator {
    dim: usize,
    rows: Vec<BTreeMap<usize, ScalarExt>>,
}

impl PartialEq for FiberOperator {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && (self - o).is_zero()
    }
}

impl FiberOperator {
    pub fn zero(dim: usize) -> Self {
        FiberOperator { dim, rows: vec![BTreeMap::new(); dim] }
    }
    pub fn identity(dim: usize) -> Self {
        let mut op = FiberOperator::zero(dim);
        for i in 0..dim {
            op.set(i, i, ScalarExt::one());
        }
        op
    }
    pub fn scalar(dim: usize, c: ScalarExt) -> Self {
        FiberOperator::identity(dim).scale(&c)
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn get(&self, i: usize, j: usize) -> ScalarExt {
        self.rows[i].get(&j).cloned().unwrap_or_else(ScalarExt::zero)
    }
    pub fn set(&mut self, i: usize, j: usize, v: ScalarExt) {
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }
    pub fn add_at(&mut self, i: usize, j: usize, v: &ScalarExt) {
        if v.is_zero() {
            return;
        }
        let e = self.rows[i].entry(j).or_insert_with(ScalarExt::zero);
        *e += v;
        if e.is_zero() {
            self.rows[i].remove(&j);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }
    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &ScalarExt)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, v)| (i, j, v)))
    }
    pub fn scale(&self, c: &ScalarExt) -> Self {
        let mut out = FiberOperator::zero(self.dim);
        if c.is_zero() {
            return out;
        }
        for (i, j, v) in self.entries() {
            out.set(i, j, v * c);
        }
        out
    }
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = FiberOperator::zero(self.dim);
        for (i, j, v) in self.entries() {
            out.set(j, i, v.conj());
        }
        out
    }
    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.dim != o.dim {
            return Err(CoreError::DimensionMismatch(format!("{} vs {}", self.dim, o.dim)));
        }
        let mut out = FiberOperator::zero(self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (&k, a) in row {
                for (&j, b) in &o.rows[k] {
                    out.add_at(i, j, &(a * b));
                }
            }
        }
        Ok(out)
    }
    /// Rows/columns re-indexed: entry `(p, q)` of the result is entry
    /// `(order[p], order[q])` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut inv = vec![usize::MAX; self.dim];
        for (p, &i) in order.iter().enumerate() {
            inv[i] = p;
        }
        let mut out = FiberOperator::zero(order.len());
        for (i, j, v) in self.entries() {
            if inv[i] != usize::MAX && inv[j] != usize::MAX {
                out.set(inv[i], inv[j], v.clone());
            }
        }
        out
    }
    /// Rectangular sub-block as a dense row-major array.
    pub fn dense(&self) -> Vec<Vec<ScalarExt>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).collect()).collect()
    }
    pub fn to_c64(&self) -> Vec<Vec<num_complex::Complex64>> {
        let mut out = vec![vec![num_complex::Complex64::new(0.0, 0.0); self.dim]; self.dim];
        for (i, j, v) in self.entries() {
            out[i][j] = v.to_c64();
        }
        out
    }
    /// Apply to a coefficient vector.
    pub fn apply(&self, x: &FiberElement) -> FiberElement {
        let mut out = vec![ScalarExt::zero(); self.dim];
        for (i, j, v) in self.entries() {
            if !x.coeffs[j].is_zero() {
                out[i] += &(v * &x.coeffs[j]);
            }
        }
        FiberElement { coeffs: out }
    }
}

impl<'a> std::ops::Add<&'a FiberOperator> for &'a FiberOperator {
    type Output = FiberOperator;
    fn add(self, o: &FiberOperator) -> FiberOperator {
        assert_eq!(self.dim, o.dim, "fiber dimension mismatch");
        let mut out = self.clone();
        for (i, j, v) in o.entries() {
            out.add_at(i, j, v);
        }
        out
    }
}
impl<'a> std::ops::Sub<&'a FiberOperator> for &'a FiberOperator {
    type Output = FiberOperator;
    fn sub(self, o: &FiberOperator) -> FiberOperator {
        assert_eq!(self.dim, o.dim, "fiber dimension mismatch");
        let mut out = self.clone();
        for (i, j, v) in o.entries() {
            out.add_at(i, j, &-v);
        }
        out
    }
}
impl<'a> std::ops::Mul<&'a FiberOperator> for &'a FiberOperator {
    type Output = FiberOperator;
    fn mul(self, o: &FiberOperator) -> FiberOperator {
        self.try_mul(o).expect("fiber dimension mismatch")
    }
}
impl std::ops::Neg for &FiberOperator {
    type Output = FiberOperator;
    fn neg(self) -> FiberOperator {
        self.scale(&ScalarExt::from_int(-1))
    }
}

/// Coefficient vector over the fiber basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberElement {
    pub coeffs: Vec<ScalarExt>,
}

impl FiberElement {
    pub fn zero(dim: usize) -> Self {
        FiberElement { coeffs: vec![ScalarExt::zero(); dim] }
    }
    pub fn basis(space: &FiberSpace, form: &FormIndex, slot: usize) -> Self {
        let mut v = FiberElement::zero(space.dim());
        v.coeffs[space.index_of(form, slot)] = ScalarExt::one();
        v
    }
    /// Degree-`q` component.
    pub fn component(&self, space: &FiberSpace, q: usize) -> FiberElement {
        let mut v = self.clone();
        for (i, c) in v.coeffs.iter_mut().enumerate() {
            if space.degree_of(i) != q {
                *c = ScalarExt::zero();
            }
        }
        v
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(v: &[usize]) -> FormIndex {
        FormIndex(v.to_vec())
    }

    #[test]
    fn interior_examples() {
        let sp = FiberSpace::new(2, 1);
        let e1 = sp.interior_op(1).unwrap();
        let e2 = sp.interior_op(2).unwrap();
        let out = e1.apply(&FiberElement::basis(&sp, &form(&[1]), 0));
        assert_eq!(out, FiberElement::basis(&sp, &FormIndex::empty(), 0));
        assert!(e1.apply(&FiberElement::basis(&sp, &form(&[2]), 0)).is_zero());
        let out = e2.apply(&FiberElement::basis(&sp, &form(&[1, 2]), 0));
        let mut expect = FiberElement::basis(&sp, &form(&[1]), 0);
        expect.coeffs[1] = ScalarExt::from_int(-1);
        assert_eq!(out, expect);
    }

    #[test]
    fn wedge_examples() {
        let sp = FiberSpace::new(2, 1);
        let w1 = sp.wedge_op(1).unwrap();
        assert_eq!(
            w1.apply(&FiberElement::basis(&sp, &FormIndex::empty(), 0)),
            FiberElement::basis(&sp, &form(&[1]), 0)
        );
        assert!(w1.apply(&FiberElement::basis(&sp, &form(&[1]), 0)).is_zero());
        assert_eq!(
            w1.apply(&FiberElement::basis(&sp, &form(&[2]), 0)),
            FiberElement::basis(&sp, &form(&[1, 2]), 0)
        );
    }

    #[test]
    fn out_of_range() {
        let sp = FiberSpace::new(2, 1);
        assert!(sp.interior_op(0).is_err());
        assert!(sp.wedge_op(3).is_err());
        assert!(sp.degree_projector(3).is_err());
    }

    #[test]
    fn projector_example() {
        let sp = FiberSpace::new(2, 1);
        let mut v = FiberElement::basis(&sp, &FormIndex::empty(), 0);
        v.coeffs[sp.index_of(&form(&[1]), 0)] = ScalarExt::one();
        let p0 = sp.degree_projector(0).unwrap();
        assert_eq!(p0.apply(&v), FiberElement::basis(&sp, &FormIndex::empty(), 0));
    }

    #[test]
    fn split_examples() {
        let sp = FiberSpace::new(1, 1);
        let s = sp.split_normal_tangential(Parity::Even);
        assert_eq!((s.tangential.len(), s.normal.len()), (1, 1));
        let sp = FiberSpace::new(2, 1);
        let s = sp.split_normal_tangential(Parity::Even);
        let t: Vec<String> = s.tangential.iter().map(|&i| sp.label(i)).collect();
        let n: Vec<String> = s.normal.iter().map(|&i| sp.label(i)).collect();
        assert_eq!(t, vec!["1", "w12"]);
        assert_eq!(n, vec!["w1", "w2"]);
        for m in 1..6 {
            let sp = FiberSpace::new(m, 2);
            for p in [Parity::Even, Parity::Odd] {
                let s = sp.split_normal_tangential(p);
                assert_eq!(s.tangential.len(), s.normal.len());
                assert_eq!(s.tangential.len() + s.normal.len(), sp.dim());
            }
        }
    }

    #[test]
    fn basis_order() {
        let sp = FiberSpace::new(3, 1);
        let labels: Vec<String> = (0..sp.dim()).map(|i| sp.label(i)).collect();
        assert_eq!(labels, vec!["1", "w1", "w2", "w3", "w12", "w13", "w23", "w123"]);
    }
}
