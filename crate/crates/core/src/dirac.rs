//! Symbols of the Dirac operator at the base point and the boundary symbols
//! built from them.
//!
//! Block convention for every 2x2 symbol: block 1 is the span of even-degree
//! tangential forms, block 2 the odd-degree ones. For even spinors these are
//! `(sigma^t, sigma^n)`, for odd spinors `(sigma^n, sigma^t)`.

use crate::error::{CoreError, Result};
use crate::exterior::{FiberOperator, FiberSpace, Parity};
use crate::residue::residue_at_pole;
use crate::scalar::{GaussQ, ScalarExt};
use crate::symbol::{PolySymbol, RationalBoundarySymbol, Side};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

/// Geometric data at the base point: dimension, bundle rank and the
/// holomorphic Hessian `b = b0 + i b1` of the defining function.
#[derive(Clone, Debug)]
pub struct GeometryData {
    pub n: usize,
    pub r: usize,
    pub b_re: Vec<Vec<BigRational>>,
    pub b_im: Vec<Vec<BigRational>>,
}

fn zero_matrix(n: usize) -> Vec<Vec<BigRational>> {
    vec![vec![BigRational::zero(); n]; n]
}

impl GeometryData {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::Config(format!("n must be at least 2, got {n}")));
        }
        if r < 1 {
            return Err(CoreError::Config("r must be at least 1".into()));
        }
        Ok(GeometryData { n, r, b_re: zero_matrix(n), b_im: zero_matrix(n) })
    }
    pub fn with_b(mut self, re: Vec<Vec<BigRational>>, im: Vec<Vec<BigRational>>) -> Result<Self> {
        for m in [&re, &im] {
            if m.len() != self.n || m.iter().any(|row| row.len() != self.n) {
                return Err(CoreError::Config(format!("b must be a {}x{} matrix", self.n, self.n)));
            }
        }
        self.b_re = re;
        self.b_im = im;
        Ok(self)
    }
    pub fn fiber(&self) -> FiberSpace {
        FiberSpace::new(self.n - 1, self.r)
    }
    pub fn dim(&self) -> usize {
        (1usize << (self.n - 1)) * self.r
    }

    /// Symmetric part of `B = [[b0, -b1], [-b1, -b0]]`.
    pub fn b_matrix(&self) -> Vec<Vec<BigRational>> {
        let n = self.n;
        let mut big = zero_matrix(2 * n);
        for j in 0..n {
            for k in 0..n {
                big[j][k] = self.b_re[j][k].clone();
                big[j][k + n] = -self.b_im[j][k].clone();
                big[j + n][k] = -self.b_im[j][k].clone();
                big[j + n][k + n] = -self.b_re[j][k].clone();
            }
        }
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut sym = zero_matrix(2 * n);
        for j in 0..2 * n {
            for k in 0..2 * n {
                sym[j][k] = (&big[j][k] + &big[k][j]) * &half;
            }
        }
        sym
    }

    /// `<B xi, xi>` times the identity.
    pub fn b_quadratic_form(&self) -> PolySymbol {
        let n = self.n;
        let dim = self.dim();
        let bm = self.b_matrix();
        let mut p = PolySymbol::zero(n, dim);
        for j in 0..2 * n {
            for k in 0..2 * n {
                if bm[j][k].is_zero() {
                    continue;
                }
                let mut e = vec![0u16; 2 * n + 1];
                e[j] += 1;
                e[k] += 1;
                let c = ScalarExt::from_rational(bm[j][k].clone());
                let t = PolySymbol::from_terms(n, dim, [(e, FiberOperator::scalar(dim, c))]).expect("shape");
                p = p.add(&t).expect("shape");
            }
        }
        p
    }

    /// `dd(xi'') = sum_{j=2}^n [(i xi_j + xi_{n+j}) e_{j-1} - (i xi_j - xi_{n+j}) eps_{j-1}]`.
    pub fn dd_symbol(&self) -> PolySymbol {
        let n = self.n;
        let fs = self.fiber();
        let mut p = PolySymbol::zero(n, self.dim());
        let i = ScalarExt::i();
        for j in 2..=n {
            let e = fs.interior_op(j - 1).expect("index in range");
            let eps = fs.wedge_op(j - 1).expect("index in range");
            let terms = [
                (j, e.scale(&i)),
                (n + j, e.clone()),
                (j, eps.scale(&-&i)),
                (n + j, eps.clone()),
            ];
            for (k, op) in terms {
                p = p.add(&PolySymbol::xi_times(n, k, op).expect("index")).expect("shape");
            }
        }
        p
    }

    /// `x Pi_e + y Pi_o + s12 Pi_e D Pi_o + s21 Pi_o D Pi_e` with scalar `x, y`
    /// and `D` the symbol `dd`.
    pub fn block_symbol(&self, x: &PolySymbol, y: &PolySymbol, s12: &ScalarExt, s21: &ScalarExt) -> PolySymbol {
        let fs = self.fiber();
        let pe = fs.parity_projector(Parity::Even);
        let po = fs.parity_projector(Parity::Odd);
        let dd = self.dd_symbol();
        let upper = dd.mul_op_left(&pe).and_then(|d| d.mul_op_right(&po)).expect("shape");
        let lower = dd.mul_op_left(&po).and_then(|d| d.mul_op_right(&pe)).expect("shape");
        let parts = [
            x.mul_op_right(&pe).expect("shape"),
            y.mul_op_right(&po).expect("shape"),
            upper.scale(s12),
            lower.scale(s21),
        ];
        parts.iter().fold(PolySymbol::zero(self.n, self.dim()), |acc, p| acc.add(p).expect("shape"))
    }

    fn lin(&self, c1: (i64, i64), cn1: (i64, i64)) -> PolySymbol {
        // c1 * xi_1 + cn1 * xi_{n+1}, scalar
        let n = self.n;
        let dim = self.dim();
        let a = PolySymbol::xi(n, dim, 1).expect("index").scale(&ScalarExt::from_gauss(GaussQ::from_ints(c1.0, c1.1)));
        let b = PolySymbol::xi(n, dim, n + 1)
            .expect("index")
            .scale(&ScalarExt::from_gauss(GaussQ::from_ints(cn1.0, cn1.1)));
        a.add(&b).expect("shape")
    }

    /// Principal symbol of the chiral Dirac operator.
    pub fn d1_symbol(&self, parity: Parity) -> PolySymbol {
        // i xi_1 - xi_{n+1} and -(i xi_1 + xi_{n+1})
        let p = self.lin((0, 1), (-1, 0));
        let m = self.lin((0, -1), (-1, 0));
        let one = ScalarExt::one();
        let s = match parity {
            Parity::Even => self.block_symbol(&p, &m, &one, &-&one),
            Parity::Odd => self.block_symbol(&m, &p, &-&one, &one),
        };
        s.scale(&ScalarExt::inv_sqrt2())
    }

    /// Leading symbol `2 d_1 / |xi|^2` of the inverse of the Dirac operator
    /// of the given parity (built from the opposite-parity `d_1`).
    pub fn q_minus1(&self, parity: Parity) -> RationalBoundarySymbol {
        let d = self.d1_symbol(parity.flip()).scale(&ScalarExt::from_int(2));
        RationalBoundarySymbol::new(d, 1, 1, 0)
    }

    /// Order -2 term produced by the change to boundary-adapted coordinates:
    /// `4 i xi_1 [(1-n) d_1/|xi|^4 + 2 d_1 <B xi,xi>/|xi|^6 - <B xi, d_xi d_1>/|xi|^4]`.
    pub fn q_minus2c(&self, parity: Parity) -> RationalBoundarySymbol {
        let base = self.q_minus2c_flat(parity);
        base.add(&self.q_minus2c_hessian(parity)).expect("shape")
    }

    /// The `b`-independent part `4 i (1-n) xi_1 d_1 / |xi|^4`.
    pub fn q_minus2c_flat(&self, parity: Parity) -> RationalBoundarySymbol {
        let n = self.n;
        let d = self.d1_symbol(parity.flip());
        let x1 = PolySymbol::xi(n, self.dim(), 1).expect("index");
        let c = ScalarExt::from_gauss(GaussQ::from_ints(0, 4 * (1 - n as i64)));
        RationalBoundarySymbol::new(x1.mul(&d).expect("shape").scale(&c), 2, 2, 0)
    }

    /// The part of the order -2 term that depends on `b`.
    pub fn q_minus2c_hessian(&self, parity: Parity) -> RationalBoundarySymbol {
        self.hessian_restricted(parity, &[])
    }

    /// The `b`-dependent term restricted to `xi'' = 0`, keeping `xi_1`,
    /// `xi_{n+1}` and the formal radius.
    pub fn q_minus2c_hessian_contact_plane(&self, parity: Parity) -> RationalBoundarySymbol {
        self.hessian_restricted(parity, &self.transverse_vars())
    }

    fn transverse_vars(&self) -> Vec<usize> {
        (2..=2 * self.n).filter(|&k| k != self.n + 1).collect()
    }

    fn hessian_restricted(&self, parity: Parity, zero: &[usize]) -> RationalBoundarySymbol {
        let n = self.n;
        let dim = self.dim();
        let d = self.d1_symbol(parity.flip());
        let bm = self.b_matrix();
        let quad = self.b_quadratic_form().restrict(zero, None);
        // <B xi, d_xi d_1> = sum_{k,l} B_kl xi_l (d_k d_1)
        let mut bd = PolySymbol::zero(n, dim);
        for k in 0..2 * n {
            let dk = d.derivative(k + 1).expect("R-free");
            if dk.is_zero() {
                continue;
            }
            let mk = dk.coeff(&vec![0; 2 * n + 1]).cloned().unwrap_or_else(|| FiberOperator::zero(dim));
            for l in 0..2 * n {
                if bm[k][l].is_zero() || zero.contains(&(l + 1)) {
                    continue;
                }
                let op = mk.scale(&ScalarExt::from_rational(bm[k][l].clone()));
                bd = bd.add(&PolySymbol::xi_times(n, l + 1, op).expect("index")).expect("shape");
            }
        }
        let d = d.restrict(zero, None);
        let norm = PolySymbol::xi_norm_sq(n, dim).restrict(zero, None);
        let inner = d
            .mul(&quad)
            .expect("shape")
            .scale(&ScalarExt::from_int(2))
            .sub(&norm.mul(&bd).expect("shape"))
            .expect("shape");
        let x1 = PolySymbol::xi(n, dim, 1).expect("index");
        let num = x1.mul(&inner).expect("shape").scale(&ScalarExt::from_gauss(GaussQ::from_ints(0, 4)));
        RationalBoundarySymbol::new(num, 3, 3, 0)
    }

    /// Diagonal blocks of the contour integral of the `b`-dependent term,
    /// evaluated on the contact ray of `side` (`xi'' = 0`, `R = -+ xi_{n+1}`).
    /// Both vanish identically.
    pub fn hessian_contact_residual(&self, side: Side, parity: Parity) -> Result<[PolySymbol; 2]> {
        let zero = self.transverse_vars();
        let res = residue_at_pole(&self.q_minus2c_hessian_contact_plane(parity), side)?
            .mul_op_right(&self.sigma1_dt(parity, side))?;
        let layout = self.fiber().block_layout();
        let on_ray = |blk: &[usize]| {
            let d = res.project(blk, blk);
            d.numerator().restrict(&zero, Some((-side.sign(), self.n + 1)))
        };
        Ok([on_ray(&layout.first), on_ray(&layout.second)])
    }

    /// The boundary isomorphism `sigma_1(dirac^{parity}, -+ i dt)`.
    pub fn sigma1_dt(&self, parity: Parity, side: Side) -> FiberOperator {
        sigma1_dt(&self.fiber(), parity, side)
    }

    /// Principal symbol and order -1 diagonal term of the Calderon projector.
    pub fn calderon_symbol(&self, side: Side, parity: Parity) -> Result<CalderonSymbol> {
        let sigma = self.sigma1_dt(parity, side);
        let p0 = residue_at_pole(&self.q_minus1(parity), side)?.mul_op_right(&sigma)?;
        // -i(n-1) d_{xi_1} d_1 / R composed with sigma_1
        let d = self.d1_symbol(parity.flip());
        let dd1 = d.derivative(1)?;
        let c = ScalarExt::from_gauss(GaussQ::from_ints(0, -(self.n as i64 - 1)));
        let pm1_diag = RationalBoundarySymbol::new(dd1.scale(&c), 0, 0, 1).mul_op_right(&sigma)?;
        let pm1_residue = residue_at_pole(&self.q_minus2c(parity), side)?.mul_op_right(&sigma)?;
        Ok(CalderonSymbol { side, parity, p0, pm1_diag, pm1_residue })
    }

    /// Closed block form of the principal Calderon symbol:
    /// `(1/2R)[[R -+ xi_{n+1}, +-dd], [+-dd, R +- xi_{n+1}]]` with the sign
    /// pattern fixed by side and parity.
    pub fn p0_block_form(&self, side: Side, parity: Parity) -> RationalBoundarySymbol {
        let n = self.n;
        let dim = self.dim();
        let r = PolySymbol::radius(n, dim);
        let xc = PolySymbol::xi(n, dim, n + 1).expect("index");
        let rm = r.sub(&xc).expect("shape");
        let rp = r.add(&xc).expect("shape");
        let one = ScalarExt::one();
        let (x, y, off) = match (side, parity) {
            (Side::Plus, Parity::Even) => (rm, rp, one),
            (Side::Plus, Parity::Odd) => (rp, rm, one),
            (Side::Minus, Parity::Even) => (rp, rm, -&one),
            (Side::Minus, Parity::Odd) => (rm, rp, -&one),
        };
        let num = self.block_symbol(&x, &y, &off, &off).scale(&ScalarExt::frac(1, 2));
        RationalBoundarySymbol::new(num, 0, 0, 1)
    }

    /// `p0 + p_{-1}` in the packaged form: the diagonal of the block form
    /// shifted by `-+(n-1) Id / 2R`.
    pub fn p_packaged(&self, side: Side, parity: Parity) -> RationalBoundarySymbol {
        let shift = RationalBoundarySymbol::inv_radius_pow(self.n, self.dim(), 1)
            .scale(&ScalarExt::frac(-side.sign() * (self.n as i64 - 1), 2));
        self.p0_block_form(side, parity).add(&shift).expect("shape")
    }

    /// Subelliptic boundary projector with its Szego slot.
    pub fn boundary_projector(&self, side: Side, parity: Parity) -> Result<BoundaryProjector> {
        let fs = self.fiber();
        let m = self.n - 1;
        let (block, degree, complement, conjugate) = match (side, parity, Parity::of(self.n)) {
            (Side::Plus, Parity::Even, _) => (0, 0, false, false),
            (Side::Plus, Parity::Odd, _) => (0, 0, true, false),
            (Side::Minus, Parity::Even, Parity::Even) => (1, m, true, true),
            (Side::Minus, Parity::Odd, Parity::Even) => (1, m, false, true),
            (Side::Minus, Parity::Even, Parity::Odd) => (0, m, false, true),
            (Side::Minus, Parity::Odd, Parity::Odd) => (0, m, true, true),
        };
        let slot_parity = if block == 0 { Parity::Even } else { Parity::Odd };
        if Parity::of(degree) != slot_parity {
            return Err(CoreError::InvalidCombination(format!(
                "Szego slot of degree {degree} does not sit in block {}",
                block + 1
            )));
        }
        // classical symbol away from the relevant ray
        let classical = match parity {
            Parity::Even => fs.parity_projector(Parity::Odd),
            Parity::Odd => fs.parity_projector(Parity::Even),
        };
        Ok(BoundaryProjector { side, parity, classical, slot: SzegoSlot { block, degree, complement, conjugate } })
    }

    /// `T = R' p0 + (Id - R')(Id - p0)` with the classical `R'`.
    pub fn t_classical(&self, side: Side, parity: Parity) -> Result<RationalBoundarySymbol> {
        let p0 = self.calderon_symbol(side, parity)?.p0;
        let rp = self.boundary_projector(side, parity)?.classical;
        let id = FiberOperator::identity(self.dim());
        let one = RationalBoundarySymbol::from_poly(PolySymbol::identity(self.n, self.dim()));
        let a = p0.mul_op_left(&rp)?;
        let b = one.sub(&p0)?.mul_op_left(&(&id - &rp))?;
        a.add(&b)
    }

    /// Closed block form `(1/2R)[[R +- xi_{n+1}, s dd], [-s dd, R +- xi_{n+1}]]`.
    pub fn t_block_form(&self, side: Side, parity: Parity) -> RationalBoundarySymbol {
        let n = self.n;
        let dim = self.dim();
        let r = PolySymbol::radius(n, dim);
        let xc = PolySymbol::xi(n, dim, n + 1).expect("index").scale(&ScalarExt::from_int(side.sign()));
        let diag = r.add(&xc).expect("shape");
        let s = match (side, parity) {
            (Side::Plus, Parity::Even) | (Side::Minus, Parity::Odd) => -1,
            _ => 1,
        };
        let num = self
            .block_symbol(&diag, &diag, &ScalarExt::from_int(s), &ScalarExt::from_int(-s))
            .scale(&ScalarExt::frac(1, 2));
        RationalBoundarySymbol::new(num, 0, 0, 1)
    }

    /// `((R +- xi_{n+1})^2 + |xi''|^2)^{dim/2} / (2R)^{dim}` at a real point.
    pub fn t_determinant_closed_form(&self, side: Side, xi: &[f64]) -> f64 {
        let n = self.n;
        let r = crate::symbol::radius_of(xi);
        let a = r + side.sign() as f64 * xi[n];
        let dd2: f64 = (1..2 * n).filter(|&k| k != n).map(|k| xi[k] * xi[k]).sum();
        let dim = self.dim() as i32;
        (a * a + dd2).powi(dim / 2) / (2.0 * r).powi(dim)
    }

    /// Determinant of the classical symbol of `T` at real points.
    pub fn ellipticity_report(&self, side: Side, parity: Parity, points: &[Vec<f64>]) -> Result<EllipticityReport> {
        let t = self.t_classical(side, parity)?;
        let mut min_normalized = f64::INFINITY;
        let mut max_rel_err: f64 = 0.0;
        let mut worst = None;
        for p in points {
            let m: DMatrix<Complex64> = t.eval_real(p);
            let det = m.determinant();
            let closed = self.t_determinant_closed_form(side, p);
            let rel = (det - Complex64::new(closed, 0.0)).norm() / closed.abs().max(1e-300);
            if rel > max_rel_err {
                max_rel_err = rel;
                worst = Some(p.clone());
            }
            let normalized = det.norm().powf(1.0 / self.dim() as f64);
            min_normalized = min_normalized.min(normalized);
        }
        Ok(EllipticityReport { min_normalized_det: min_normalized, max_rel_err_closed_form: max_rel_err, worst_point: worst })
    }
}

/// `sigma_1(dirac^{parity}, -+ i dt)`: `+-1/sqrt2` on tangential forms and
/// `-+1/sqrt2` on normal forms.
pub fn sigma1_dt(fs: &FiberSpace, parity: Parity, side: Side) -> FiberOperator {
    let t = fs.parity_projector(parity);
    let nrm = fs.parity_projector(parity.flip());
    (&t - &nrm).scale(&(ScalarExt::inv_sqrt2() * ScalarExt::from_int(side.sign())))
}

/// Calderon symbol through order -1.
#[derive(Clone, Debug)]
pub struct CalderonSymbol {
    pub side: Side,
    pub parity: Parity,
    pub p0: RationalBoundarySymbol,
    /// `-i(n-1) d_{xi_1} d_1 / R` composed with `sigma_1`.
    pub pm1_diag: RationalBoundarySymbol,
    /// Contour integral of the full order -2 term composed with `sigma_1`.
    pub pm1_residue: RationalBoundarySymbol,
}

/// Position and kind of the Szego projector inside a boundary projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SzegoSlot {
    /// 0 or 1.
    pub block: usize,
    /// Form degree the projector acts on.
    pub degree: usize,
    /// `Id - S` rather than `S` sits in the slot.
    pub complement: bool,
    /// Conjugate Szego projector.
    pub conjugate: bool,
}

/// Boundary projector `R'`: its classical symbol off the contact ray and
/// its Szego slot.
#[derive(Clone, Debug)]
pub struct BoundaryProjector {
    pub side: Side,
    pub parity: Parity,
    pub classical: FiberOperator,
    pub slot: SzegoSlot,
}

impl BoundaryProjector {
    /// Fiber operator with the Szego slot replaced by the scalar `s`
    /// (0 or 1), the other slot entries kept at their classical values.
    pub fn resolve(&self, fs: &FiberSpace, s: bool) -> FiberOperator {
        let mut out = self.classical.clone();
        let value = s != self.slot.complement;
        for i in 0..fs.dim() {
            if fs.degree_of(i) == self.slot.degree {
                out.set(i, i, if value { ScalarExt::one() } else { ScalarExt::zero() });
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct EllipticityReport {
    /// `min |det|^{1/dim}` over the sample.
    pub min_normalized_det: f64,
    pub max_rel_err_closed_form: f64,
    pub worst_point: Option<Vec<f64>>,
}
