//! Matrix-valued polynomial and rational symbols in `xi in R^{2n}`.
//!
//! Variables are `xi_1 .. xi_{2n}` (index `k - 1`) plus a formal radius `R`
//! standing for `|xi'| = (xi_2^2 + ... + xi_{2n}^2)^{1/2}`.  Every stored
//! monomial has `R`-exponent 0 or 1; `R^2` is rewritten on the fly.

use crate::error::{CoreError, Result};
use crate::exterior::FiberOperator;
use crate::scalar::{GaussQ, ScalarExt};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Exponents of `xi_1 .. xi_{2n}` followed by the exponent of `R`.
pub type Mono = Vec<u16>;

/// Which end of the contact line a quantity refers to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "plus" | "+" => Some(Side::Plus),
            "minus" | "-" => Some(Side::Minus),
            _ => None,
        }
    }
}

fn rho_sq_power(n: usize, m: u16) -> Vec<(Mono, BigInt)> {
    let nv = 2 * n;
    let mut acc: BTreeMap<Mono, BigInt> = BTreeMap::new();
    acc.insert(vec![0; nv + 1], BigInt::one());
    for _ in 0..m {
        let mut next: BTreeMap<Mono, BigInt> = BTreeMap::new();
        for (mono, c) in &acc {
            for j in 1..nv {
                let mut e = mono.clone();
                e[j] += 2;
                *next.entry(e).or_insert_with(BigInt::zero) += c;
            }
        }
        acc = next;
    }
    acc.into_iter().collect()
}

/// Polynomial in `(xi, R)` with fiber-operator coefficients.
#[derive(Clone, Debug)]
pub struct PolySymbol {
    n: usize,
    dim: usize,
    terms: BTreeMap<Mono, FiberOperator>,
}

impl PartialEq for PolySymbol {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.dim == o.dim && self.sub(o).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl PolySymbol {
    pub fn zero(n: usize, dim: usize) -> Self {
        PolySymbol { n, dim, terms: BTreeMap::new() }
    }
    pub fn constant(n: usize, op: FiberOperator) -> Self {
        let mut p = PolySymbol::zero(n, op.dim());
        p.insert(vec![0; 2 * n + 1], op);
        p
    }
    pub fn scalar(n: usize, dim: usize, c: ScalarExt) -> Self {
        PolySymbol::constant(n, FiberOperator::scalar(dim, c))
    }
    pub fn identity(n: usize, dim: usize) -> Self {
        PolySymbol::scalar(n, dim, ScalarExt::one())
    }
    /// `xi_k * op` for `1 <= k <= 2n`.
    pub fn xi_times(n: usize, k: usize, op: FiberOperator) -> Result<Self> {
        if k == 0 || k > 2 * n {
            return Err(CoreError::IndexOutOfRange { index: k, max: 2 * n });
        }
        let mut e = vec![0; 2 * n + 1];
        e[k - 1] = 1;
        let mut p = PolySymbol::zero(n, op.dim());
        p.insert(e, op);
        Ok(p)
    }
    pub fn xi(n: usize, dim: usize, k: usize) -> Result<Self> {
        PolySymbol::xi_times(n, k, FiberOperator::identity(dim))
    }
    /// The formal radius `R` times the identity.
    pub fn radius(n: usize, dim: usize) -> Self {
        let mut e = vec![0; 2 * n + 1];
        e[2 * n] = 1;
        let mut p = PolySymbol::zero(n, dim);
        p.insert(e, FiberOperator::identity(dim));
        p
    }
    /// `xi_1^2 + ... + xi_{2n}^2`.
    pub fn xi_norm_sq(n: usize, dim: usize) -> Self {
        let mut p = PolySymbol::zero(n, dim);
        for k in 0..2 * n {
            let mut e = vec![0; 2 * n + 1];
            e[k] = 2;
            p.insert(e, FiberOperator::identity(dim));
        }
        p
    }
    pub fn from_terms(n: usize, dim: usize, terms: impl IntoIterator<Item = (Mono, FiberOperator)>) -> Result<Self> {
        let mut p = PolySymbol::zero(n, dim);
        for (m, c) in terms {
            if m.len() != 2 * n + 1 {
                return Err(CoreError::MalformedSymbol(format!("monomial {m:?} has wrong length")));
            }
            if c.dim() != dim {
                return Err(CoreError::DimensionMismatch(format!("{} vs {}", c.dim(), dim)));
            }
            p.insert(m, c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nvars(&self) -> usize {
        2 * self.n
    }
    pub fn terms(&self) -> &BTreeMap<Mono, FiberOperator> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, mono: &Mono) -> Option<&FiberOperator> {
        self.terms.get(mono)
    }

    fn add_plain(&mut self, mono: Mono, c: &FiberOperator) {
        match self.terms.get_mut(&mono) {
            Some(v) => {
                *v = &*v + c;
                if v.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(mono, c.clone());
                }
            }
        }
    }

    /// Add `c * mono`, rewriting `R^2` as `rho^2`.
    fn insert(&mut self, mut mono: Mono, c: FiberOperator) {
        let nv = 2 * self.n;
        let e = mono[nv];
        if e < 2 {
            self.add_plain(mono, &c);
            return;
        }
        mono[nv] = e % 2;
        for (rm, k) in rho_sq_power(self.n, e / 2) {
            let mut m = mono.clone();
            for (a, b) in m.iter_mut().zip(rm.iter()) {
                *a += *b;
            }
            let s = ScalarExt::from_rational(BigRational::from_integer(k));
            self.add_plain(m, &c.scale(&s));
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n != o.n || self.dim != o.dim {
            return Err(CoreError::DimensionMismatch(format!(
                "(n={}, dim={}) vs (n={}, dim={})",
                self.n, self.dim, o.n, o.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_plain(m.clone(), c);
        }
        Ok(out)
    }
    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        self.scale(&ScalarExt::from_int(-1))
    }
    pub fn scale(&self, s: &ScalarExt) -> Self {
        let mut out = PolySymbol::zero(self.n, self.dim);
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.scale(s));
        }
        out
    }
    /// Pointwise product, matrix coefficients multiplied in order.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = PolySymbol::zero(self.n, self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let prod = ca * cb;
                if prod.is_zero() {
                    continue;
                }
                let m: Mono = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
                out.insert(m, prod);
            }
        }
        Ok(out)
    }
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = PolySymbol::identity(self.n, self.dim);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }
    /// `self * op` with a constant fiber operator on the right.
    pub fn mul_op_right(&self, op: &FiberOperator) -> Result<Self> {
        self.mul(&PolySymbol::constant(self.n, op.clone()))
    }
    pub fn mul_op_left(&self, op: &FiberOperator) -> Result<Self> {
        PolySymbol::constant(self.n, op.clone()).mul(self)
    }

    /// Partial derivative in `xi_k`. Terms carrying `R` are only
    /// differentiable in `xi_1`, which `R` does not depend on.
    pub fn derivative(&self, k: usize) -> Result<Self> {
        if k == 0 || k > 2 * self.n {
            return Err(CoreError::IndexOutOfRange { index: k, max: 2 * self.n });
        }
        let mut out = PolySymbol::zero(self.n, self.dim);
        for (m, c) in &self.terms {
            if k != 1 && m[2 * self.n] > 0 {
                return Err(CoreError::MalformedSymbol(
                    "derivative of an R-dependent term in a tangential variable".into(),
                ));
            }
            let e = m[k - 1];
            if e == 0 {
                continue;
            }
            let mut mm = m.clone();
            mm[k - 1] -= 1;
            out.add_plain(mm, &c.scale(&ScalarExt::from_int(e as i64)));
        }
        Ok(out)
    }

    /// Substitute `xi_1 -> c * R`.
    pub fn subst_xi1_radius(&self, c: &ScalarExt) -> Self {
        let nv = 2 * self.n;
        let mut out = PolySymbol::zero(self.n, self.dim);
        for (m, coeff) in &self.terms {
            let e = m[0];
            let mut mm = m.clone();
            mm[0] = 0;
            mm[nv] += e;
            out.insert(mm, coeff.scale(&c.pow(e as u32)));
        }
        out
    }

    /// Multiply by `R^k`.
    pub fn times_radius_pow(&self, k: u16) -> Self {
        let nv = 2 * self.n;
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut mm = m.clone();
                mm[nv] += k;
                (mm, c.clone())
            })
            .collect();
        PolySymbol { n: self.n, dim: self.dim, terms }
    }

    /// Set every variable in `zero_vars` (1-based) to zero and `R -> c*xi_k`.
    pub fn restrict(&self, zero_vars: &[usize], radius_to: Option<(i64, usize)>) -> Self {
        let nv = 2 * self.n;
        let mut out = PolySymbol::zero(self.n, self.dim);
        for (m, coeff) in &self.terms {
            if zero_vars.iter().any(|&k| m[k - 1] > 0) {
                continue;
            }
            let mut mm = m.clone();
            let mut c = coeff.clone();
            if let Some((sign, k)) = radius_to {
                let e = mm[nv];
                mm[nv] = 0;
                mm[k - 1] += e;
                if sign < 0 && e % 2 == 1 {
                    c = -&c;
                }
            }
            out.add_plain(mm, &c);
        }
        out
    }

    /// Total degree, `R` counting as one. `None` for the zero symbol.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.iter().map(|&e| e as usize).sum()).max()
    }
    /// Degree in `xi_k` (1-based) or in `R` for `k = 2n + 1`.
    pub fn degree_in(&self, k: usize) -> usize {
        self.terms.keys().map(|m| m[k - 1] as usize).max().unwrap_or(0)
    }
    /// `(A0, A1)` with `self = A0 + A1 R`.
    pub fn radius_parts(&self) -> (Self, Self) {
        let nv = 2 * self.n;
        let mut a0 = PolySymbol::zero(self.n, self.dim);
        let mut a1 = PolySymbol::zero(self.n, self.dim);
        for (m, c) in &self.terms {
            let mut mm = m.clone();
            if m[nv] == 1 {
                mm[nv] = 0;
                a1.terms.insert(mm, c.clone());
            } else {
                a0.terms.insert(mm, c.clone());
            }
        }
        (a0, a1)
    }

    /// Floating-point screen: `true` when the value at the point is clearly
    /// nonzero relative to the size of the summands.
    fn clearly_nonzero_at(&self, xi: &[Complex64], r: Complex64) -> bool {
        let nv = 2 * self.n;
        let mut value = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        let mut scale = 0.0f64;
        for (m, c) in &self.terms {
            let mut w = r.powu(m[nv] as u32);
            for k in 0..nv {
                w *= xi[k].powu(m[k] as u32);
            }
            for (i, j, v) in c.entries() {
                let t = w * v.to_c64();
                scale += t.norm();
                value[(i, j)] += t;
            }
        }
        value.iter().any(|z| z.norm() > 1e-9 * scale.max(1e-300))
    }

    fn sample_point(&self) -> Vec<Complex64> {
        (0..2 * self.n).map(|k| Complex64::new((1.3 * k as f64 + 0.7).sin(), 0.0)).collect()
    }

    /// Exact division by `xi_1 - c R`, `None` if it leaves a remainder.
    pub fn div_xi1_linear(&self, c: &ScalarExt) -> Option<Self> {
        let mut pt = self.sample_point();
        let r = Complex64::new(pt[1..].iter().map(|z| z.re * z.re).sum::<f64>().sqrt(), 0.0);
        pt[0] = c.to_c64() * r;
        if self.clearly_nonzero_at(&pt, r) {
            return None;
        }
        let d = self.degree_in(1);
        let mut by_power: Vec<PolySymbol> = vec![PolySymbol::zero(self.n, self.dim); d + 1];
        for (m, coeff) in &self.terms {
            let mut mm = m.clone();
            let k = mm[0] as usize;
            mm[0] = 0;
            by_power[k].terms.insert(mm, coeff.clone());
        }
        if d == 0 {
            return if self.is_zero() { Some(self.clone()) } else { None };
        }
        let cr = PolySymbol::radius(self.n, self.dim).scale(c);
        let mut q: Vec<PolySymbol> = vec![PolySymbol::zero(self.n, self.dim); d];
        q[d - 1] = by_power[d].clone();
        for k in (1..d).rev() {
            q[k - 1] = by_power[k].add(&cr.mul(&q[k]).ok()?).ok()?;
        }
        let rem = by_power[0].add(&cr.mul(&q[0]).ok()?).ok()?;
        if !rem.is_zero() {
            return None;
        }
        let mut out = PolySymbol::zero(self.n, self.dim);
        for (k, qk) in q.into_iter().enumerate() {
            for (mut m, coeff) in qk.terms {
                m[0] += k as u16;
                out.add_plain(m, &coeff);
            }
        }
        Some(out)
    }

    /// Exact division of an `R`-free polynomial by `rho^2`.
    pub fn div_rho_sq(&self) -> Option<Self> {
        let nv = 2 * self.n;
        if self.terms.keys().any(|m| m[nv] != 0) {
            return None;
        }
        // a point of the cone xi_2^2 + ... + xi_{2n}^2 = 0
        let mut pt = self.sample_point();
        let rest: f64 = pt[2..].iter().map(|z| z.re * z.re).sum();
        pt[1] = Complex64::new(0.0, rest.sqrt());
        if self.clearly_nonzero_at(&pt, Complex64::new(0.0, 0.0)) {
            return None;
        }
        let mut rem = self.clone();
        let mut quo = PolySymbol::zero(self.n, self.dim);
        loop {
            // leading term: largest xi_2 exponent
            let lead = rem.terms.iter().filter(|(m, _)| m[1] >= 2).max_by_key(|(m, _)| m[1]);
            let (m, c) = match lead {
                Some((m, c)) => (m.clone(), c.clone()),
                None => break,
            };
            let mut t = m.clone();
            t[1] -= 2;
            quo.add_plain(t.clone(), &c);
            let negc = -&c;
            for j in 1..nv {
                let mut tj = t.clone();
                tj[j] += 2;
                rem.add_plain(tj, &negc);
            }
        }
        if rem.is_zero() {
            Some(quo)
        } else {
            None
        }
    }

    /// Numeric value at `xi` (length `2n`) with the radius supplied.
    pub fn eval(&self, xi: &[Complex64], r: Complex64) -> DMatrix<Complex64> {
        let nv = 2 * self.n;
        let mut out = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (m, c) in &self.terms {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..nv {
                w *= xi[k].powu(m[k] as u32);
            }
            w *= r.powu(m[nv] as u32);
            for (i, j, v) in c.entries() {
                out[(i, j)] += w * v.to_c64();
            }
        }
        out
    }
    /// Value at a real point with `R = |xi'|`.
    pub fn eval_real(&self, xi: &[f64]) -> DMatrix<Complex64> {
        let z: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&z, Complex64::new(radius_of(xi), 0.0))
    }

    /// Keep only the entries with row in `rows` and column in `cols`.
    pub fn project(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut keep_r = vec![false; self.dim];
        let mut keep_c = vec![false; self.dim];
        rows.iter().for_each(|&i| keep_r[i] = true);
        cols.iter().for_each(|&j| keep_c[j] = true);
        self.map_coeffs(|c| {
            let mut o = FiberOperator::zero(c.dim());
            for (i, j, v) in c.entries() {
                if keep_r[i] && keep_c[j] {
                    o.set(i, j, v.clone());
                }
            }
            o
        })
    }
    /// Pointwise adjoint for real `xi`.
    pub fn adjoint(&self) -> Self {
        self.map_coeffs(|c| c.adjoint())
    }
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut out = PolySymbol::zero(self.n, order.len());
        for (m, c) in &self.terms {
            out.add_plain(m.clone(), &c.permuted(order));
        }
        out
    }
    pub fn map_coeffs(&self, f: impl Fn(&FiberOperator) -> FiberOperator) -> Self {
        let mut out = PolySymbol::zero(self.n, self.dim);
        for (m, c) in &self.terms {
            out.add_plain(m.clone(), &f(c));
        }
        out
    }
}

/// `|xi'|` for a real point.
pub fn radius_of(xi: &[f64]) -> f64 {
    xi[1..].iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `num * (xi_1 - iR)^{-a} (xi_1 + iR)^{-b} R^{-c}`, kept as one reduced
/// fraction: linear factors and powers of `R` shared with the numerator are
/// cancelled.
#[derive(Clone, Debug)]
pub struct RationalBoundarySymbol {
    num: PolySymbol,
    a: u32,
    b: u32,
    c: u32,
}

impl PartialEq for RationalBoundarySymbol {
    fn eq(&self, o: &Self) -> bool {
        self.sub(o).map(|d| d.is_zero()).unwrap_or(false)
    }
}

fn i_scalar(sign: i64) -> ScalarExt {
    ScalarExt::from_gauss(GaussQ::from_ints(0, sign))
}

impl RationalBoundarySymbol {
    pub fn new(num: PolySymbol, a: u32, b: u32, c: u32) -> Self {
        RationalBoundarySymbol { num, a, b, c }.canonical()
    }
    pub fn from_poly(p: PolySymbol) -> Self {
        RationalBoundarySymbol::new(p, 0, 0, 0)
    }
    pub fn zero(n: usize, dim: usize) -> Self {
        RationalBoundarySymbol::from_poly(PolySymbol::zero(n, dim))
    }
    /// `|xi|^{-2k} Id = (xi_1 - iR)^{-k}(xi_1 + iR)^{-k}`.
    pub fn inv_xi_norm_pow(n: usize, dim: usize, k: u32) -> Self {
        RationalBoundarySymbol::new(PolySymbol::identity(n, dim), k, k, 0)
    }
    /// `R^{-k} Id`.
    pub fn inv_radius_pow(n: usize, dim: usize, k: u32) -> Self {
        RationalBoundarySymbol::new(PolySymbol::identity(n, dim), 0, 0, k)
    }

    pub fn numerator(&self) -> &PolySymbol {
        &self.num
    }
    /// `(a, b, c)`.
    pub fn pole_orders(&self) -> (u32, u32, u32) {
        (self.a, self.b, self.c)
    }
    pub fn n(&self) -> usize {
        self.num.n
    }
    pub fn dim(&self) -> usize {
        self.num.dim
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_xi1_free(&self) -> bool {
        self.a == 0 && self.b == 0 && self.num.degree_in(1) == 0
    }

    /// Cancel common factors; idempotent.
    pub fn canonical(mut self) -> Self {
        if self.num.is_zero() {
            self.a = 0;
            self.b = 0;
            self.c = 0;
            return self;
        }
        loop {
            let mut changed = false;
            while self.a > 0 {
                match self.num.div_xi1_linear(&i_scalar(1)) {
                    Some(q) => {
                        self.num = q;
                        self.a -= 1;
                        changed = true;
                    }
                    None => break,
                }
            }
            while self.b > 0 {
                match self.num.div_xi1_linear(&i_scalar(-1)) {
                    Some(q) => {
                        self.num = q;
                        self.b -= 1;
                        changed = true;
                    }
                    None => break,
                }
            }
            while self.c > 0 {
                let (a0, a1) = self.num.radius_parts();
                match a0.div_rho_sq() {
                    Some(q) => {
                        let r = PolySymbol::radius(self.num.n, self.num.dim);
                        self.num = q.mul(&r).and_then(|qr| qr.add(&a1)).expect("same shape");
                        self.c -= 1;
                        changed = true;
                    }
                    None => break,
                }
            }
            if !changed {
                return self;
            }
        }
    }

    fn lift(&self, a: u32, b: u32, c: u32) -> PolySymbol {
        let n = self.num.n;
        let dim = self.num.dim;
        let x1 = PolySymbol::xi(n, dim, 1).expect("n >= 1");
        let r = PolySymbol::radius(n, dim);
        let minus = x1.sub(&r.scale(&i_scalar(1))).expect("shape");
        let plus = x1.add(&r.scale(&i_scalar(-1))).expect("shape");
        let mut p = self.num.clone();
        for _ in self.a..a {
            p = p.mul(&minus).expect("shape");
        }
        for _ in self.b..b {
            p = p.mul(&plus).expect("shape");
        }
        for _ in self.c..c {
            p = p.mul(&r).expect("shape");
        }
        p
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.num.check(&o.num)?;
        let (a, b, c) = (self.a.max(o.a), self.b.max(o.b), self.c.max(o.c));
        let num = self.lift(a, b, c).add(&o.lift(a, b, c))?;
        Ok(RationalBoundarySymbol::new(num, a, b, c))
    }
    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }
    pub fn neg(&self) -> Self {
        self.scale(&ScalarExt::from_int(-1))
    }
    pub fn scale(&self, s: &ScalarExt) -> Self {
        RationalBoundarySymbol::new(self.num.scale(s), self.a, self.b, self.c)
    }
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let num = self.num.mul(&o.num)?;
        Ok(RationalBoundarySymbol::new(num, self.a + o.a, self.b + o.b, self.c + o.c))
    }
    pub fn mul_poly(&self, p: &PolySymbol) -> Result<Self> {
        self.mul(&RationalBoundarySymbol::from_poly(p.clone()))
    }
    pub fn mul_op_right(&self, op: &FiberOperator) -> Result<Self> {
        Ok(RationalBoundarySymbol::new(self.num.mul_op_right(op)?, self.a, self.b, self.c))
    }
    pub fn mul_op_left(&self, op: &FiberOperator) -> Result<Self> {
        Ok(RationalBoundarySymbol::new(self.num.mul_op_left(op)?, self.a, self.b, self.c))
    }
    pub fn project(&self, rows: &[usize], cols: &[usize]) -> Self {
        RationalBoundarySymbol::new(self.num.project(rows, cols), self.a, self.b, self.c)
    }
    pub fn adjoint(&self) -> Self {
        // conj(xi_1 - iR) = xi_1 + iR on real xi
        RationalBoundarySymbol::new(self.num.adjoint(), self.b, self.a, self.c)
    }
    pub fn permuted(&self, order: &[usize]) -> Self {
        RationalBoundarySymbol::new(self.num.permuted(order), self.a, self.b, self.c)
    }

    /// Degree of radial homogeneity of the leading part.
    pub fn radial_order(&self) -> Result<i64> {
        let d = self.num.degree().ok_or(CoreError::ZeroSymbol)?;
        Ok(d as i64 - (self.a + self.b + self.c) as i64)
    }

    pub fn eval(&self, xi: &[Complex64], r: Complex64) -> DMatrix<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let den = (xi[0] - i * r).powu(self.a) * (xi[0] + i * r).powu(self.b) * r.powu(self.c);
        self.num.eval(xi, r) / den
    }
    pub fn eval_real(&self, xi: &[f64]) -> DMatrix<Complex64> {
        let z: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&z, Complex64::new(radius_of(xi), 0.0))
    }

    /// Split an `xi_1`-free symbol into parts `h_k(xi') / R^k`.
    fn lift_parts(&self) -> Result<Vec<(PolySymbol, i64)>> {
        if self.num.is_zero() {
            return Err(CoreError::ZeroSymbol);
        }
        if !self.is_xi1_free() {
            return Err(CoreError::NotLiftClassifiable(
                "symbol depends on the conormal variable xi_1".into(),
            ));
        }
        let (a0, a1) = self.num.radius_parts();
        let mut out = Vec::new();
        if !a0.is_zero() {
            out.push((a0, self.c as i64));
        }
        if !a1.is_zero() {
            out.push((a1, self.c as i64 - 1));
        }
        Ok(out)
    }

    /// Classical and Heisenberg orders of `h(xi') / R^k`: `xi_{n+1}` has
    /// weight 2, the other tangential variables weight 1.
    pub fn extended_orders(&self) -> Result<OrderProfile> {
        let n = self.num.n;
        let mut mc = i64::MIN;
        let mut mh = i64::MIN;
        for (h, k) in self.lift_parts()? {
            for m in h.terms.keys() {
                let l: i64 = m.iter().map(|&e| e as i64).sum();
                let lp = m[n] as i64;
                mc = mc.max(l - k);
                mh = mh.max(l + lp - 2 * k);
            }
        }
        Ok(OrderProfile { classical: mc, plus: mh, minus: mh })
    }

    /// Leading parabolic part in Darboux coordinates
    /// `eta_0 = -2 xi_{n+1}`, `eta_j = xi_{j+1}`, `eta_{j+n-1} = xi_{j+n+1}`.
    /// `Side::Plus` is the face `eta_0 > 0`.
    pub fn heisenberg_principal(&self, side: Side) -> Result<HeisenbergSymbol> {
        let n = self.num.n;
        let parts = self.lift_parts()?;
        let ord = self.extended_orders()?.plus;
        let mut out = HeisenbergSymbol { n, side, dim: self.num.dim, terms: BTreeMap::new() };
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        for (h, k) in parts {
            for (m, c) in &h.terms {
                let l: i64 = m.iter().map(|&e| e as i64).sum();
                let lp = m[n] as i64;
                if l + lp - 2 * k != ord {
                    continue;
                }
                // xi_{n+1}^{l'} = (-1/2)^{l'} (+-1)^{l'} |eta_0|^{l'},  R^{-k} -> 2^k |eta_0|^{-k}
                let mut f = BigRational::one();
                for _ in 0..lp {
                    f = -f * &half;
                }
                if side == Side::Minus && lp % 2 == 1 {
                    f = -f;
                }
                let two = BigRational::from_integer(BigInt::from(2));
                for _ in 0..k.abs() {
                    if k > 0 {
                        f *= &two;
                    } else {
                        f *= &half;
                    }
                }
                let mut eta = vec![0u16; 2 * n - 2];
                for j in 1..n {
                    eta[j - 1] = m[j];
                    eta[j + n - 2] = m[j + n];
                }
                let key = ((lp - k) as i32, eta);
                let coeff = c.scale(&ScalarExt::from_rational(f));
                let e = out.terms.entry(key.clone()).or_insert_with(|| FiberOperator::zero(c.dim()));
                *e = &*e + &coeff;
                if e.is_zero() {
                    out.terms.remove(&key);
                }
            }
        }
        Ok(out)
    }
}

/// Classical order and the two Heisenberg orders.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OrderProfile {
    pub classical: i64,
    pub plus: i64,
    pub minus: i64,
}

/// `sum c * |eta_0|^p * eta'^beta`, keyed by `(p, beta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergSymbol {
    pub n: usize,
    pub side: Side,
    pub dim: usize,
    pub terms: BTreeMap<(i32, Vec<u16>), FiberOperator>,
}

impl HeisenbergSymbol {
    /// Parabolic order, `eta_0` weight 2, `eta'` weight 1.
    pub fn order(&self) -> Option<i64> {
        self.terms
            .keys()
            .map(|(p, b)| 2 * *p as i64 + b.iter().map(|&e| e as i64).sum::<i64>())
            .max()
    }
}

/// Bases understood by [`parabolic_expand`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ParabolicBase {
    /// `|xi'|^{-k}`
    InvRadius(u32),
    /// `|xi'|`
    Radius,
    /// `|xi'| + xi_{n+1}`
    RadiusPlusContact,
    /// `|xi'| - xi_{n+1}`
    RadiusMinusContact,
}

impl ParabolicBase {
    /// Recognize a scalar boundary symbol of one of the supported shapes.
    pub fn recognize(sym: &RationalBoundarySymbol) -> Result<ParabolicBase> {
        let n = sym.n();
        let dim = sym.dim();
        let (a, b, c) = sym.pole_orders();
        let unsupported = || CoreError::UnsupportedBase("expected |xi'|^k or |xi'| +- xi_{n+1}".into());
        if a != 0 || b != 0 {
            return Err(unsupported());
        }
        let one = PolySymbol::identity(n, dim);
        let r = PolySymbol::radius(n, dim);
        let xc = PolySymbol::xi(n, dim, n + 1)?;
        let num = sym.numerator();
        if c > 0 && *num == one {
            return Ok(ParabolicBase::InvRadius(c));
        }
        if c == 0 {
            if *num == r {
                return Ok(ParabolicBase::Radius);
            }
            if *num == r.add(&xc)? {
                return Ok(ParabolicBase::RadiusPlusContact);
            }
            if *num == r.sub(&xc)? {
                return Ok(ParabolicBase::RadiusMinusContact);
            }
        }
        Err(unsupported())
    }
}

/// One term `coeff * eta_0^{eta0_power} * |eta'|^{2 j}` (signed power of `eta_0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicTerm {
    pub coeff: BigRational,
    pub eta0_power: i32,
    pub eta_prime_sq_power: u32,
}

impl ParabolicTerm {
    pub fn order(&self) -> i64 {
        2 * self.eta0_power as i64 + 2 * self.eta_prime_sq_power as i64
    }
}

fn binom_rational(alpha: &BigRational, j: u32) -> BigRational {
    let mut out = BigRational::one();
    for i in 0..j {
        out = out * (alpha - BigRational::from_integer(BigInt::from(i)))
            / BigRational::from_integer(BigInt::from(i + 1));
    }
    out
}

/// First `depth` nonzero terms of the expansion near the face `side`
/// (`Side::Plus`: `eta_0 > 0`), in descending parabolic order. With
/// `u = 4|eta'|^2/eta_0^2`, `|xi'| = (|eta_0|/2)(1+u)^{1/2}` and
/// `xi_{n+1} = -eta_0/2`.
pub fn parabolic_expand(base: ParabolicBase, side: Side, depth: usize) -> Result<Vec<ParabolicTerm>> {
    if depth == 0 {
        return Err(CoreError::InvalidCombination("expansion depth must be at least 1".into()));
    }
    let s = BigRational::from_integer(BigInt::from(side.sign()));
    let two = BigRational::from_integer(BigInt::from(2));
    let four = BigRational::from_integer(BigInt::from(4));
    let (alpha, lead_pow, lead_coeff, shift) = match base {
        ParabolicBase::InvRadius(k) => {
            // (s eta_0/2)^{-k} (1+u)^{-k/2}
            let mut c = BigRational::one();
            for _ in 0..k {
                c = c * &two * &s;
            }
            (BigRational::new(BigInt::from(-(k as i64)), BigInt::from(2)), -(k as i32), c, None)
        }
        ParabolicBase::Radius => (BigRational::new(1.into(), 2.into()), 1, &s / &two, None),
        // (eta_0/2)(s (1+u)^{1/2} -+ 1)
        ParabolicBase::RadiusPlusContact => {
            (BigRational::new(1.into(), 2.into()), 1, &s / &two, Some(-BigRational::one() / &two))
        }
        ParabolicBase::RadiusMinusContact => {
            (BigRational::new(1.into(), 2.into()), 1, &s / &two, Some(BigRational::one() / &two))
        }
    };
    let mut out = Vec::new();
    let mut j = 0u32;
    let mut pow4 = BigRational::one();
    // the series is infinite unless alpha is a nonnegative integer, which
    // never happens for these bases
    while out.len() < depth {
        let mut c = &lead_coeff * binom_rational(&alpha, j) * &pow4;
        if j == 0 {
            if let Some(sh) = &shift {
                c += sh;
            }
        }
        if !c.is_zero() {
            out.push(ParabolicTerm { coeff: c, eta0_power: lead_pow - 2 * j as i32, eta_prime_sq_power: j });
        }
        j += 1;
        pow4 *= &four;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: usize) -> PolySymbol {
        PolySymbol::identity(n, 1)
    }

    #[test]
    fn difference_of_squares_reduces() {
        let n = 2;
        let x1 = PolySymbol::xi(n, 1, 1).unwrap();
        let r = PolySymbol::radius(n, 1);
        let a = x1.sub(&r.scale(&ScalarExt::i())).unwrap();
        let b = x1.add(&r.scale(&ScalarExt::i())).unwrap();
        assert_eq!(a.mul(&b).unwrap(), PolySymbol::xi_norm_sq(n, 1));
    }

    #[test]
    fn canonical_cancels_factors() {
        let n = 2;
        let s = RationalBoundarySymbol::new(PolySymbol::xi_norm_sq(n, 1), 1, 1, 0);
        assert_eq!(s.pole_orders(), (0, 0, 0));
        assert!(s.numerator() == &id(n));
        let r2 = PolySymbol::radius(n, 1).pow(2).unwrap();
        let s = RationalBoundarySymbol::new(r2, 0, 0, 3);
        assert_eq!(s.pole_orders(), (0, 0, 1));
        let again = s.clone().canonical();
        assert_eq!(again.pole_orders(), s.pole_orders());
    }

    #[test]
    fn radial_orders() {
        let n = 2;
        let x1 = PolySymbol::xi(n, 1, 1).unwrap();
        let s = RationalBoundarySymbol::new(x1, 1, 1, 0);
        assert_eq!(s.radial_order().unwrap(), -1);
        assert_eq!(RationalBoundarySymbol::from_poly(id(n)).radial_order().unwrap(), 0);
        assert!(RationalBoundarySymbol::zero(n, 1).radial_order().is_err());
    }

    #[test]
    fn extended_order_examples() {
        for n in 2..5 {
            let xc = PolySymbol::xi(n, 1, n + 1).unwrap();
            // l = l' = k = 1
            let s = RationalBoundarySymbol::new(xc.clone(), 0, 0, 1);
            assert_eq!(s.extended_orders().unwrap(), OrderProfile { classical: 0, plus: 0, minus: 0 });
            let s = RationalBoundarySymbol::new(xc.clone(), 0, 0, 2);
            assert_eq!(s.extended_orders().unwrap(), OrderProfile { classical: -1, plus: -2, minus: -2 });
            let s = RationalBoundarySymbol::new(xc, 0, 0, 3);
            assert_eq!(s.extended_orders().unwrap().plus, -4);
            let s = RationalBoundarySymbol::inv_radius_pow(n, 1, 1);
            assert_eq!(s.extended_orders().unwrap(), OrderProfile { classical: -1, plus: -2, minus: -2 });
        }
        let x1 = PolySymbol::xi(2, 1, 1).unwrap();
        assert!(RationalBoundarySymbol::from_poly(x1).extended_orders().is_err());
    }

    #[test]
    fn heisenberg_leading_parts() {
        let n = 3;
        let xc = PolySymbol::xi(n, 1, n + 1).unwrap();
        let s = RationalBoundarySymbol::new(xc.pow(2).unwrap(), 0, 0, 2);
        let h = s.heisenberg_principal(Side::Plus).unwrap();
        assert_eq!(h.terms.len(), 1);
        let ((p, beta), c) = h.terms.iter().next().unwrap();
        assert_eq!(*p, 0);
        assert!(beta.iter().all(|&e| e == 0));
        assert!(c.get(0, 0).is_one());
        // xi_{n+1}/R on the minus face: (-1/2)(-1) * 2 |eta_0|^0 = 1
        let s = RationalBoundarySymbol::new(xc, 0, 0, 1);
        let h = s.heisenberg_principal(Side::Minus).unwrap();
        assert!(h.terms.values().next().unwrap().get(0, 0).is_one());
        let h = s.heisenberg_principal(Side::Plus).unwrap();
        assert_eq!(h.terms.values().next().unwrap().get(0, 0), ScalarExt::from_int(-1));
    }

    #[test]
    fn parabolic_examples() {
        let t = parabolic_expand(ParabolicBase::InvRadius(2), Side::Plus, 1).unwrap();
        assert_eq!(t[0].coeff, BigRational::from_integer(4.into()));
        assert_eq!(t[0].eta0_power, -2);
        let t = parabolic_expand(ParabolicBase::RadiusPlusContact, Side::Plus, 2).unwrap();
        assert_eq!(t[0].coeff, BigRational::one());
        assert_eq!((t[0].eta0_power, t[0].eta_prime_sq_power), (-1, 1));
        let t = parabolic_expand(ParabolicBase::RadiusMinusContact, Side::Minus, 2).unwrap();
        assert_eq!(t[0].coeff, -BigRational::one());
        assert_eq!((t[0].eta0_power, t[0].eta_prime_sq_power), (-1, 1));
        assert!(parabolic_expand(ParabolicBase::Radius, Side::Plus, 0).is_err());
    }
}
