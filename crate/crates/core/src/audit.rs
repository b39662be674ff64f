//! Heisenberg-order audit of the lower-order term shapes that enter the
//! contour integral. Each shape is instantiated over every monomial of the
//! required degree in `(xi_1, xi_2, xi_{n+1})`, pushed through the residue
//! on both sides, and classified with [`RationalBoundarySymbol::extended_orders`].

use crate::error::Result;
use crate::exterior::FiberOperator;
use crate::residue::residue_at_pole;
use crate::symbol::{PolySymbol, RationalBoundarySymbol, Side};
use serde::Serialize;

/// Family of term shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ShapeFamily {
    /// `h_{2j+1}(xi) / |xi|^{2(k+j)}`, `k >= 2`.
    OddOverPower,
    /// `h_{2j}(xi) / |xi|^{2(k+j)}`, `k >= 2`.
    EvenOverPower,
    /// `xi_1^l h_{2j+1}(xi) / |xi|^{2(1+j+l')}`, `2 <= l <= l'`.
    PrincipalChange,
    /// `xi_1^l h_{2m}(xi) / |xi|^{2(k+l'+m)}`, `k = 1, l >= 2` or `k >= 2`.
    ChangeEven,
    /// `xi_1^l h_{2m+1}(xi) / |xi|^{2(k+l'+m)}`, `k >= 2`.
    ChangeOdd,
}

/// One parameter tuple of a family, with the worst Heisenberg order found
/// over all monomials `h` and both contour sides.
#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub family: ShapeFamily,
    /// `(k, j, l, l')`; unused entries are zero.
    pub params: (u32, u32, u32, u32),
    pub worst_order: i64,
    /// Order of the `h = xi_{n+1}^deg` term, an upper bound for the row.
    /// It is attained when `l` is even; for odd `l` that residue vanishes.
    pub predicted: i64,
    pub monomials: usize,
}

/// Summary with the bound that every row must satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub bound: i64,
    pub max_order: i64,
}

impl AuditReport {
    pub fn passes(&self) -> bool {
        self.max_order <= self.bound && self.rows.iter().all(|r| r.worst_order <= r.predicted)
    }
}

// variables used: xi_1, xi_2, xi_{n+1} with n = 2
const N: usize = 2;
const VARS: [usize; 3] = [0, 1, 2];

fn monomials(deg: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=deg {
        for b in 0..=deg - a {
            out.push([a, b, deg - a - b]);
        }
    }
    out
}

fn shape(xi1: u32, h: [u32; 3], half_power: u32) -> Result<RationalBoundarySymbol> {
    let mut m = vec![0u16; 2 * N + 1];
    for (v, e) in VARS.iter().zip(h) {
        m[*v] += e as u16;
    }
    m[0] += xi1 as u16;
    let num = PolySymbol::from_terms(N, 1, [(m, FiberOperator::identity(1))])?;
    Ok(RationalBoundarySymbol::new(num, half_power, half_power, 0))
}

fn worst(xi1: u32, deg: u32, half_power: u32) -> Result<(i64, usize)> {
    let mut w = i64::MIN;
    let mons = monomials(deg);
    for h in &mons {
        let s = shape(xi1, *h, half_power)?;
        for side in [Side::Plus, Side::Minus] {
            let r = residue_at_pole(&s, side)?;
            if r.is_zero() {
                continue;
            }
            let o = r.extended_orders()?;
            w = w.max(o.plus).max(o.minus);
        }
    }
    Ok((w, mons.len()))
}

/// Audit all families for `k <= kmax`, `j <= jmax`, `l' <= lmax`.
pub fn audit_term_shapes(kmax: u32, jmax: u32, lmax: u32) -> Result<AuditReport> {
    let mut rows = Vec::new();
    let mut push = |family, params: (u32, u32, u32, u32), xi1, deg, hp, predicted| -> Result<()> {
        let (w, cnt) = worst(xi1, deg, hp)?;
        rows.push(AuditRow { family, params, worst_order: w, predicted, monomials: cnt });
        Ok(())
    };
    for k in 2..=kmax {
        for j in 0..=jmax {
            let k_ = k as i64;
            push(ShapeFamily::OddOverPower, (k, j, 0, 0), 0, 2 * j + 1, k + j, 4 - 4 * k_)?;
            push(ShapeFamily::EvenOverPower, (k, j, 0, 0), 0, 2 * j, k + j, 2 - 4 * k_)?;
        }
    }
    for lp in 2..=lmax {
        for l in 2..=lp {
            for j in 0..=jmax {
                let pred = -2 * l as i64 - 4 * (lp - l) as i64;
                push(ShapeFamily::PrincipalChange, (0, j, l, lp), l, 2 * j + 1, 1 + j + lp, pred)?;
            }
        }
    }
    for k in 1..=kmax {
        for lp in 1..=lmax {
            for l in 1..=lp {
                for m in 0..=jmax {
                    let (k_, l_, lp_) = (k as i64, l as i64, lp as i64);
                    if k >= 2 || l >= 2 {
                        // h = xi_{n+1}^{2m}: R power 2k + 2l' + 2m - 1 - l
                        let pred = 2 * l_ + 2 - 4 * k_ - 4 * lp_;
                        push(ShapeFamily::ChangeEven, (k, m, l, lp), l, 2 * m, k + lp + m, pred)?;
                    }
                    if k >= 2 {
                        let pred = 2 * l_ + 4 - 4 * k_ - 4 * lp_;
                        push(ShapeFamily::ChangeOdd, (k, m, l, lp), l, 2 * m + 1, k + lp + m, pred)?;
                    }
                }
            }
        }
    }
    let max_order = rows.iter().map(|r| r.worst_order).max().unwrap_or(i64::MIN);
    Ok(AuditReport { rows, bound: -4, max_order })
}
