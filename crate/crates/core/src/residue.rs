//! The contour integrals `(1/2 pi) \oint d xi_1` around the poles `xi_1 = +-iR`.

use crate::error::Result;
use crate::exterior::Parity;
use crate::scalar::{GaussQ, ScalarExt};
use crate::symbol::{PolySymbol, RationalBoundarySymbol, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Contour side: `Plus` encircles `+iR` counterclockwise, `Minus`
/// encircles `-iR` clockwise.
pub type ContourSide = Side;

fn binom(n: u32, k: u32) -> i64 {
    let mut out: i64 = 1;
    for i in 0..k {
        out = out * (n - i) as i64 / (i + 1) as i64;
    }
    out
}

/// `(1/2 pi) \oint_{Gamma_side} sym d xi_1`, i.e. `i Res_{+iR}` or
/// `-i Res_{-iR}`. The result is free of `xi_1`.
pub fn residue_at_pole(sym: &RationalBoundarySymbol, side: Side) -> Result<RationalBoundarySymbol> {
    let (a, b, c) = sym.pole_orders();
    let n = sym.n();
    let dim = sym.dim();
    // order of the pole on this side and of the other linear factor
    let (m, other) = match side {
        Side::Plus => (a, b),
        Side::Minus => (b, a),
    };
    if m == 0 {
        return Ok(RationalBoundarySymbol::zero(n, dim));
    }
    let s = side.sign();
    let pole = ScalarExt::from_gauss(GaussQ::from_ints(0, s));
    // the other factor at the pole: xi_1 -+ iR -> (2 s i) R
    let two_si_inv = ScalarExt::from_gauss(GaussQ::from_ints(0, 2 * s)).inv().expect("nonzero");
    let big_m = m - 1;
    let mut fact: i64 = 1;
    for k in 2..=big_m as i64 {
        fact *= k;
    }
    let mut derivs = vec![sym.numerator().clone()];
    for _ in 0..big_m {
        let next = derivs.last().expect("nonempty").derivative(1)?;
        derivs.push(next);
    }
    let mut total = PolySymbol::zero(n, dim);
    for j in 0..=big_m {
        // d^j/dxi_1^j (xi_1 - pole')^{-other} = fall(-other, j) (...)^{-other-j}
        let mut falling: i64 = 1;
        for t in 0..j as i64 {
            falling *= -(other as i64) - t;
        }
        let coeff = ScalarExt::frac(binom(big_m, j) * falling, fact)
            * two_si_inv.pow(other + j)
            * ScalarExt::from_gauss(GaussQ::from_ints(0, s));
        let term = derivs[(big_m - j) as usize].subst_xi1_radius(&pole).scale(&coeff);
        total = total.add(&term.times_radius_pow((big_m - j) as u16))?;
    }
    Ok(RationalBoundarySymbol::new(total, 0, 0, c + other + big_m))
}

/// Residue followed by right composition with the boundary isomorphism
/// `sigma_1(dirac^{parity}, -+ i dt)`.
pub fn calderon_contour(q: &RationalBoundarySymbol, side: Side, parity: Parity) -> Result<RationalBoundarySymbol> {
    let fiber_rank = 1usize << (q.n() - 1);
    let r = q.dim() / fiber_rank;
    let sigma = crate::dirac::sigma1_dt(&crate::exterior::FiberSpace::new(q.n() - 1, r), parity, side);
    residue_at_pole(q, side)?.mul_op_right(&sigma)
}

/// Trapezoid rule on the circle of radius `R/2` about `+-iR` at a real
/// tangential point `xi_prime = (xi_2, ..., xi_{2n})`, with the same
/// normalization and orientation as [`residue_at_pole`].
pub fn contour_quadrature(sym: &RationalBoundarySymbol, side: Side, xi_prime: &[f64], nodes: usize) -> DMatrix<Complex64> {
    let r: f64 = xi_prime.iter().map(|x| x * x).sum::<f64>().sqrt();
    let center = Complex64::new(0.0, side.sign() as f64 * r);
    let rad = r / 2.0;
    let mut acc = DMatrix::<Complex64>::zeros(sym.dim(), sym.dim());
    let mut point: Vec<Complex64> = std::iter::once(Complex64::new(0.0, 0.0))
        .chain(xi_prime.iter().map(|&x| Complex64::new(x, 0.0)))
        .collect();
    for k in 0..nodes {
        let th = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let e = Complex64::from_polar(1.0, th);
        point[0] = center + e * rad;
        let dz = Complex64::new(0.0, 1.0) * e * rad * (2.0 * std::f64::consts::PI / nodes as f64);
        acc += sym.eval(&point, Complex64::new(r, 0.0)) * dz;
    }
    acc * Complex64::new(side.sign() as f64 / (2.0 * std::f64::consts::PI), 0.0)
}
