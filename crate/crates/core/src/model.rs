//! Heisenberg model operators on the truncated Fock model: the Dirac model
//! `D_+-`, the block models of `P`, `Id - P`, `R'` and `T`, and explicit
//! inverses of `T` for classical and generalized Szego slots.
//!
//! Block 1 holds even-degree forms, block 2 odd-degree forms. Every block is
//! stored as a full-size operator supported on its (row block, column block).

use crate::dirac::{GeometryData, SzegoSlot};
use crate::error::{CoreError, Result};
use crate::exterior::Parity;
use crate::fock::{
    annihilation, creation, shifted_oscillator, szego_model_projector, transition, FockOperator, ModelSpace,
    RankOneProjector, SparseMatrix, SzegoKind, Truncation,
};
use crate::symbol::Side;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn block_parity(b: usize) -> Parity {
    if b == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

fn sigma(parity: Parity) -> f64 {
    match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    }
}

/// `Id (x) Pi_parity`.
pub fn chirality_projector(space: &ModelSpace, p: Parity) -> FockOperator {
    FockOperator::fiber(space, &space.fiber.parity_projector(p))
}

fn block_projector(space: &ModelSpace, b: usize) -> FockOperator {
    chirality_projector(space, block_parity(b))
}

/// Dirac model with its chiral parts `D^p = D Pi_p`.
#[derive(Clone, Debug)]
pub struct DiracModel {
    pub side: Side,
    pub d: FockOperator,
    pub d_even: FockOperator,
    pub d_odd: FockOperator,
}

impl DiracModel {
    pub fn chiral(&self, p: Parity) -> &FockOperator {
        match p {
            Parity::Even => &self.d_even,
            Parity::Odd => &self.d_odd,
        }
    }
}

/// `D_+ = i sum (C_j e_j - C_j^* eps_j)`, `D_- = i sum (C_j^* e_j - C_j eps_j)`.
pub fn dd_model(space: &ModelSpace, side: Side) -> Result<DiracModel> {
    let fs = &space.fiber;
    let mut d = FockOperator::zero(space);
    for j in 1..=fs.m() {
        let c = creation(&space.fock, j)?;
        let cs = annihilation(&space.fock, j)?;
        let (a, b) = match side {
            Side::Plus => (c, cs),
            Side::Minus => (cs, c),
        };
        d = d.add(&a.kron(&fs.interior_op(j)?)).sub(&b.kron(&fs.wedge_op(j)?));
    }
    let d = d.scale(Complex64::new(0.0, 1.0)).with_order(-1);
    let d_even = d.compose(&chirality_projector(space, Parity::Even));
    let d_odd = d.compose(&chirality_projector(space, Parity::Odd));
    Ok(DiracModel { side, d, d_even, d_odd })
}

/// Eigenvalue of `D^2` on `|m> (x) (degree q)`: `2|m| + 2q` for `+`,
/// `2|m| + 2(n-1-q)` for `-`.
pub fn dirac_square_eigenvalue(space: &ModelSpace, side: Side, level: usize, q: usize) -> f64 {
    let q = match side {
        Side::Plus => q,
        Side::Minus => space.fiber.m() - q,
    };
    (2 * level + 2 * q) as f64
}

/// The diagonal operator `sum C_j C_j^* + 2q` (or its `-` analogue).
pub fn dirac_square_formula(space: &ModelSpace, side: Side) -> FockOperator {
    let d = (0..space.dim())
        .map(|idx| {
            let (_, a) = space.split(idx);
            re(dirac_square_eigenvalue(space, side, space.level(idx), space.fiber.degree_of(a)))
        })
        .collect();
    FockOperator::new(SparseMatrix::diagonal(d), Truncation::exact(space.cutoff(), 0))
}

/// Basis states spanning the kernel of `D^2` restricted to chirality `p`.
pub fn dirac_kernel(space: &ModelSpace, side: Side, p: Parity) -> Vec<usize> {
    (0..space.dim())
        .filter(|&idx| {
            let deg = space.fiber.degree_of(space.split(idx).1);
            Parity::of(deg) == p && dirac_square_eigenvalue(space, side, space.level(idx), deg) == 0.0
        })
        .collect()
}

/// Pseudo-inverse of `D^p` (maps the opposite chirality to `p`), computed as
/// `(D^2)^+ Pi_p D Pi_{p'}`.
pub fn partial_inverse(space: &ModelSpace, model: &DiracModel, p: Parity) -> Result<FockOperator> {
    let side = model.side;
    let r = space.fiber.r();
    let kernel_slot = match side {
        Side::Plus => 0,
        Side::Minus => space.fiber.m(),
    };
    let found = dirac_kernel(space, side, p).len();
    let expected = if Parity::of(kernel_slot) == p { r } else { 0 };
    if found != expected {
        return Err(CoreError::KernelDetection(format!(
            "expected kernel of dimension {expected} on {} forms, found {found}",
            p.name()
        )));
    }
    let d2 = dirac_square_formula(space, side);
    let inv = d2.mat.entries().map(|(i, _, v)| (i, i, if v.norm() == 0.0 { re(0.0) } else { v.inv() }));
    let d2_pinv = FockOperator::new(SparseMatrix::from_triplets(space.dim(), inv), d2.trunc);
    let pp = chirality_projector(space, p);
    Ok(d2_pinv.compose(&pp).compose(model.chiral(p.flip())).with_order(1))
}

/// Two-by-two block operator with declared Heisenberg orders.
#[derive(Clone, Debug)]
pub struct BlockModelOperator {
    pub blocks: [[FockOperator; 2]; 2],
    pub orders: [[i32; 2]; 2],
    pub side: Side,
    pub parity: Parity,
    pub n_parity: Parity,
}

impl BlockModelOperator {
    /// Split a full operator into its blocks.
    pub fn from_full(space: &ModelSpace, op: &FockOperator, orders: [[i32; 2]; 2], side: Side, parity: Parity) -> Self {
        let fs = &space.fiber;
        let fd = fs.dim();
        let blk = |i: usize, j: usize| {
            let (pi, pj) = (block_parity(i), block_parity(j));
            let mat = op.mat.filtered(|r, c| {
                Parity::of(fs.degree_of(r % fd)) == pi && Parity::of(fs.degree_of(c % fd)) == pj
            });
            FockOperator::new(mat, op.trunc).with_order(orders[i][j])
        };
        BlockModelOperator {
            blocks: [[blk(0, 0), blk(0, 1)], [blk(1, 0), blk(1, 1)]],
            orders,
            side,
            parity,
            n_parity: Parity::of(space.n()),
        }
    }
    pub fn block(&self, i: usize, j: usize) -> &FockOperator {
        &self.blocks[i][j]
    }
    pub fn is_zero_block(&self, i: usize, j: usize) -> bool {
        self.blocks[i][j].is_zero()
    }
    /// Sum of the blocks.
    pub fn full(&self) -> FockOperator {
        let b = &self.blocks;
        b[0][0].add(&b[0][1]).add(&b[1][0]).add(&b[1][1])
    }
    /// Product keeping in each block only the contributions of highest
    /// Heisenberg order.
    pub fn graded_mul(&self, o: &Self) -> Self {
        let mut blocks: Vec<Vec<FockOperator>> = Vec::new();
        let mut orders = [[0i32; 2]; 2];
        for i in 0..2 {
            let mut row = Vec::new();
            for k in 0..2 {
                let mut terms: Vec<(i32, FockOperator)> = Vec::new();
                for j in 0..2 {
                    if self.is_zero_block(i, j) || o.is_zero_block(j, k) {
                        continue;
                    }
                    let prod = self.blocks[i][j].compose(&o.blocks[j][k]);
                    if !prod.is_zero() {
                        terms.push((self.orders[i][j] + o.orders[j][k], prod));
                    }
                }
                let (ord, op) = leading(terms, self.orders[i][0] + o.orders[0][k], &self.blocks[i][k]);
                orders[i][k] = ord;
                row.push(op.with_order(ord));
            }
            blocks.push(row);
        }
        self.rebuild(blocks, orders)
    }
    /// Sum keeping in each block only the terms of highest order.
    pub fn graded_add(&self, o: &Self) -> Self {
        let mut blocks = Vec::new();
        let mut orders = [[0i32; 2]; 2];
        for i in 0..2 {
            let mut row = Vec::new();
            for k in 0..2 {
                let mut terms = Vec::new();
                for x in [self, o] {
                    if !x.is_zero_block(i, k) {
                        terms.push((x.orders[i][k], x.blocks[i][k].clone()));
                    }
                }
                let (ord, op) = leading(terms, self.orders[i][k].max(o.orders[i][k]), &self.blocks[i][k]);
                orders[i][k] = ord;
                row.push(op.with_order(ord));
            }
            blocks.push(row);
        }
        self.rebuild(blocks, orders)
    }
    fn rebuild(&self, blocks: Vec<Vec<FockOperator>>, orders: [[i32; 2]; 2]) -> Self {
        let mut it = blocks.into_iter().map(|r| {
            let mut r = r.into_iter();
            [r.next().unwrap(), r.next().unwrap()]
        });
        BlockModelOperator {
            blocks: [it.next().unwrap(), it.next().unwrap()],
            orders,
            side: self.side,
            parity: self.parity,
            n_parity: self.n_parity,
        }
    }
    /// JSON dump: dense blocks as `[re, im]` pairs, order grid, basis labels.
    pub fn to_json(&self, space: &ModelSpace, name: &str) -> Value {
        let fd = space.fiber_dim();
        let idx_of = |b: usize| -> Vec<usize> {
            (0..space.dim())
                .filter(|&i| Parity::of(space.fiber.degree_of(i % fd)) == block_parity(b))
                .collect()
        };
        let basis = [idx_of(0), idx_of(1)];
        let mut blocks = serde_json::Map::new();
        for i in 0..2 {
            for j in 0..2 {
                let op = &self.blocks[i][j];
                let rows: Vec<Value> = basis[i]
                    .iter()
                    .map(|&r| Value::Array(basis[j].iter().map(|&c| cplx_json(op.mat.get(r, c))).collect()))
                    .collect();
                blocks.insert(format!("{}{}", i + 1, j + 1), Value::Array(rows));
            }
        }
        json!({
            "name": name,
            "side": self.side.name(),
            "parity": self.parity.name(),
            "n_parity": self.n_parity.name(),
            "n": space.n(),
            "r": space.fiber.r(),
            "cutoff": space.cutoff(),
            "orders": self.orders,
            "basis": {
                "block1": basis[0].iter().map(|&i| space.label(i)).collect::<Vec<_>>(),
                "block2": basis[1].iter().map(|&i| space.label(i)).collect::<Vec<_>>(),
            },
            "blocks": blocks,
        })
    }
}

/// Round to 12 significant digits so dumps are stable across platforms.
fn cplx_json(z: Complex64) -> Value {
    let r = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            format!("{x:.12e}").parse::<f64>().unwrap_or(x) + 0.0
        }
    };
    json!([r(z.re), r(z.im)])
}

fn leading(terms: Vec<(i32, FockOperator)>, fallback: i32, like: &FockOperator) -> (i32, FockOperator) {
    let Some(top) = terms.iter().map(|t| t.0).max() else {
        return (fallback, FockOperator::new(SparseMatrix::zeros(like.dim()), like.trunc));
    };
    let mut acc: Option<FockOperator> = None;
    for (o, op) in terms {
        if o == top {
            acc = Some(match acc {
                None => op,
                Some(a) => a.add(&op),
            });
        }
    }
    (top, acc.unwrap())
}

/// Shift `c` in the order -2 diagonal block `H + c` of the model of `T`.
pub fn t_diagonal_shift(n: usize, side: Side, parity: Parity) -> i64 {
    let m = (n - 1) as i64;
    match (side, parity, Parity::of(n)) {
        (Side::Plus, Parity::Even, _) => -m,
        (Side::Plus, Parity::Odd, _) => m,
        (Side::Minus, Parity::Even, Parity::Even) => -m,
        (Side::Minus, Parity::Odd, Parity::Even) => m,
        (Side::Minus, Parity::Even, Parity::Odd) => m,
        (Side::Minus, Parity::Odd, Parity::Odd) => -m,
    }
}

/// All model operators for one `(side, parity)` and Szego choice.
#[derive(Clone, Debug)]
pub struct ModelFamily {
    pub side: Side,
    pub parity: Parity,
    pub slot: SzegoSlot,
    pub dirac: DiracModel,
    /// Projector in the slot (classical or generalized).
    pub szego: RankOneProjector,
    /// Classical projector on the same slot.
    pub classical_szego: RankOneProjector,
    pub p: BlockModelOperator,
    pub id_minus_p: BlockModelOperator,
    pub r_prime: BlockModelOperator,
    /// `R' P + (Id - R')(Id - P)` by graded products.
    pub t: BlockModelOperator,
    /// Entrywise distance between `t` and the closed block form.
    pub t_form_residual: f64,
}

impl ModelFamily {
    /// Block holding the Szego slot.
    pub fn slot_block(&self) -> usize {
        self.slot.block
    }
    pub fn is_classical(&self) -> bool {
        self.szego.vacuum.tau.iter().all(|&t| t == 1.0)
    }
}

fn p_grid(parity: Parity) -> [[i32; 2]; 2] {
    match parity {
        Parity::Even => [[0, -1], [-1, -2]],
        Parity::Odd => [[-2, -1], [-1, 0]],
    }
}

fn flip_grid(g: [[i32; 2]; 2]) -> [[i32; 2]; 2] {
    [[g[1][1], g[0][1]], [g[1][0], g[0][0]]]
}

/// Assemble `P`, `Id - P`, `R'` and `T` on the model space.
pub fn assemble_models(space: &ModelSpace, side: Side, parity: Parity, kind: &SzegoKind) -> Result<ModelFamily> {
    let n = space.n();
    let geo = GeometryData::new(n, space.fiber.r())?;
    let bp = geo.boundary_projector(side, parity)?;
    let slot = bp.slot;
    if kind.is_conjugate() != slot.conjugate {
        return Err(CoreError::InvalidCombination(format!(
            "the {} {} slot needs the {} Szego projector",
            side.name(),
            parity.name(),
            if slot.conjugate { "conjugate" } else { "classical" }
        )));
    }
    let dirac = dd_model(space, side)?;
    let szego = szego_model_projector(space, kind)?;
    let classical_szego = szego_model_projector(space, &kind.classical())?;
    let m = (n - 1) as i64;
    let hp = shifted_oscillator(space, m);
    let hm = shifted_oscillator(space, -m);
    let pi = [block_projector(space, 0), block_projector(space, 1)];
    let d = &dirac.d;

    // P and Id - P; the order -2 diagonal block is H -+ (n-1)
    let (p_full, q_full) = {
        let (h_p, h_q) = match side {
            Side::Plus => (&hm, &hp),
            Side::Minus => (&hp, &hm),
        };
        let (hb, ib) = match parity {
            Parity::Even => (1, 0),
            Parity::Odd => (0, 1),
        };
        let p = pi[ib].add(&h_p.compose(&pi[hb])).add(d);
        let q = pi[hb].add(&h_q.compose(&pi[ib])).sub(d);
        (p, q)
    };
    let grid = p_grid(parity);
    let p = BlockModelOperator::from_full(space, &p_full, grid, side, parity);
    let id_minus_p = BlockModelOperator::from_full(space, &q_full, flip_grid(grid), side, parity);

    // R' = classical part with S or Pi_slot - S in the slot
    let mut r_full = FockOperator::fiber(space, &bp.resolve(&space.fiber, false));
    r_full = if slot.complement { r_full.sub(&szego.op) } else { r_full.add(&szego.op) };
    let r_prime = BlockModelOperator::from_full(space, &r_full, [[0, 0], [0, 0]], side, parity);
    let id_full = FockOperator::identity(space);
    let one_minus_r =
        BlockModelOperator::from_full(space, &id_full.sub(&r_full), [[0, 0], [0, 0]], side, parity);

    let t = r_prime.graded_mul(&p).graded_add(&one_minus_r.graded_mul(&id_minus_p));

    // closed form
    let s = &szego.op;
    let sg = re(sigma(parity));
    let b = slot.block;
    let refl = pi[b].sub(&s.scale(re(2.0)));
    let hd = shifted_oscillator(space, t_diagonal_shift(n, side, parity)).compose(&pi[1 - b]);
    let closed = if b == 0 {
        s.add(&refl.compose(&dirac.d_odd).scale(-sg)).add(&dirac.d_even.scale(sg)).add(&hd)
    } else {
        hd.add(&dirac.d_odd.scale(-sg)).add(&refl.compose(&dirac.d_even).scale(sg)).add(s)
    };
    let t_form_residual = t.full().interior_distance(&closed, space)?.max;
    Ok(ModelFamily { side, parity, slot, dirac, szego, classical_szego, p, id_minus_p, r_prime, t, t_form_residual })
}

/// Order grid of an inverse: minus the transposed grid of `T`, with the
/// vanishing block lowered by one.
fn inverse_grid(t: &BlockModelOperator, zero: (usize, usize)) -> [[i32; 2]; 2] {
    let mut g = [[0; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = -t.orders[j][i];
        }
    }
    g[zero.0][zero.1] -= 1;
    g
}

/// Placement of the Szego slot, which fixes the shape of the inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotLayout {
    TopLeft,
    BottomRight,
}

impl SlotLayout {
    pub fn name(self) -> &'static str {
        match self {
            SlotLayout::TopLeft => "top_left",
            SlotLayout::BottomRight => "bottom_right",
        }
    }
    fn of(block: usize) -> Self {
        if block == 0 {
            SlotLayout::TopLeft
        } else {
            SlotLayout::BottomRight
        }
    }
}

/// `U` from the classical solution formulas with the given layout, sign
/// and diagonal shift.
fn classical_formula(
    space: &ModelSpace,
    fam: &ModelFamily,
    layout: SlotLayout,
    sg: f64,
    shift: i64,
) -> Result<BlockModelOperator> {
    let dp = partial_inverse(space, &fam.dirac, Parity::Even)?;
    let dq = partial_inverse(space, &fam.dirac, Parity::Odd)?;
    let s = &fam.szego.op;
    let b = match layout {
        SlotLayout::TopLeft => 0,
        SlotLayout::BottomRight => 1,
    };
    let pb = block_projector(space, b);
    let hd = shifted_oscillator(space, shift).compose(&block_projector(space, 1 - b));
    let hat = pb.sub(s);
    let sg = re(sg);
    let full = match layout {
        SlotLayout::TopLeft => {
            let u11 = s.add(&dp.compose(&hd).compose(&dq).compose(&hat));
            u11.add(&dp.scale(sg)).add(&dq.compose(&hat).scale(-sg))
        }
        SlotLayout::BottomRight => {
            let u22 = s.add(&dq.compose(&hd).compose(&dp).compose(&hat));
            dp.compose(&hat).scale(sg).add(&dq.scale(-sg)).add(&u22)
        }
    };
    let zero = if b == 0 { (1, 1) } else { (0, 0) };
    let grid = inverse_grid(&fam.t, zero);
    Ok(BlockModelOperator::from_full(space, &full, grid, fam.side, fam.parity))
}

/// Largest interior deviation of `U T` and `T U` from the identity.
#[derive(Clone, Copy, Debug)]
pub struct CompositionResidual {
    pub left: f64,
    pub right: f64,
    /// Interior levels are `0..=limit`.
    pub limit: i64,
}

impl CompositionResidual {
    pub fn max(&self) -> f64 {
        self.left.max(self.right)
    }
}

pub fn composition_residual(space: &ModelSpace, u: &BlockModelOperator, t: &BlockModelOperator) -> Result<CompositionResidual> {
    let (uf, tf) = (u.full(), t.full());
    let id = FockOperator::identity(space);
    let l = uf.compose(&tf).interior_distance(&id, space)?;
    let r = tf.compose(&uf).interior_distance(&id, space)?;
    Ok(CompositionResidual { left: l.max, right: r.max, limit: l.limit.min(r.limit) })
}

/// Explicit inverse of `T` with a classical Szego slot.
pub fn invert_t(space: &ModelSpace, fam: &ModelFamily) -> Result<BlockModelOperator> {
    if !fam.is_classical() {
        return Err(CoreError::InvalidCombination("invert_t needs a classical Szego slot".into()));
    }
    let shift = t_diagonal_shift(space.n(), fam.side, fam.parity);
    classical_formula(space, fam, SlotLayout::of(fam.slot.block), sigma(fam.parity), shift)
}

/// One candidate assignment of the classical solution formulas.
#[derive(Clone, Debug)]
pub struct InverseCandidate {
    pub layout: SlotLayout,
    pub sign: i64,
    /// `c` in the diagonal block `H + c`.
    pub shift: i64,
    pub residual: f64,
}

impl InverseCandidate {
    pub fn label(&self) -> String {
        let h = if self.shift < 0 { "H-" } else { "H+" };
        format!("{}/{}/{}", self.layout.name(), if self.sign > 0 { "+" } else { "-" }, h)
    }
}

/// Evaluate every (layout, sign, shift) combination of the solution
/// formulas on `T`; sorted by residual, best first.
pub fn inverse_candidates(space: &ModelSpace, fam: &ModelFamily) -> Result<Vec<InverseCandidate>> {
    let m = space.n() as i64 - 1;
    let mut out = Vec::new();
    for layout in [SlotLayout::TopLeft, SlotLayout::BottomRight] {
        for sign in [1i64, -1] {
            for shift in [-m, m] {
                let u = classical_formula(space, fam, layout, sign as f64, shift)?;
                let residual = composition_residual(space, &u, &fam.t)?.max();
                out.push(InverseCandidate { layout, sign, shift, residual });
            }
        }
    }
    out.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    Ok(out)
}

/// Generalized inverse together with its rank-one corrections.
#[derive(Clone, Debug)]
pub struct GeneralizedInverse {
    pub u: BlockModelOperator,
    /// `Pi_slot (S_classical - K)`, annihilated by the classical projector.
    pub alpha: FockOperator,
    /// Correction added to the diagonal block of `U` that holds the slot.
    pub beta: FockOperator,
    /// `+1` for the derived correction, `-1` for the sign-flipped variant.
    pub correction_sign: i64,
}

/// Inverse of `T` with a generalized Szego slot; `correction_sign` selects
/// the sign of the `(Pi - K)` term inside the diagonal correction.
pub fn invert_t_generalized_with(space: &ModelSpace, fam: &ModelFamily, correction_sign: i64) -> Result<GeneralizedInverse> {
    let dp = partial_inverse(space, &fam.dirac, Parity::Even)?;
    let dq = partial_inverse(space, &fam.dirac, Parity::Odd)?;
    let z = &fam.classical_szego;
    let zp = &fam.szego;
    let k = transition(space, z, zp)?;
    let kp = transition(space, zp, z)?;
    let b = fam.slot.block;
    let pb = block_projector(space, b);
    let shift = t_diagonal_shift(space.n(), fam.side, fam.parity);
    let hd = shifted_oscillator(space, shift).compose(&block_projector(space, 1 - b));
    let sg = re(sigma(fam.parity));
    let c = re(correction_sign as f64);
    let pk = pb.sub(&k);
    let (full, beta) = if b == 0 {
        let u21 = dq.compose(&pk).scale(-sg);
        let hat11 = dp.compose(&hd).compose(&u21).scale(-sg);
        let beta = kp.compose(&pb.add(&pk.scale(c)).sub(&hat11));
        let u12 = pb.sub(&kp).compose(&dp).scale(sg);
        (hat11.add(&beta).add(&u12).add(&u21), beta)
    } else {
        let u12 = dp.compose(&pk).scale(sg);
        let hat22 = dq.compose(&hd).compose(&u12).scale(sg);
        let beta = kp.compose(&pb.add(&pk.scale(c)).sub(&hat22));
        let u21 = pb.sub(&kp).compose(&dq).scale(-sg);
        (u12.add(&u21).add(&hat22).add(&beta), beta)
    };
    let zero = if b == 0 { (1, 1) } else { (0, 0) };
    let grid = inverse_grid(&fam.t, zero);
    let u = BlockModelOperator::from_full(space, &full, grid, fam.side, fam.parity);
    let alpha = z.op.sub(&k);
    Ok(GeneralizedInverse { u, alpha, beta, correction_sign })
}

/// Generalized inverse, choosing the correction sign with the smaller
/// composition residual. Returns the residuals of both variants.
pub fn invert_t_generalized(space: &ModelSpace, fam: &ModelFamily) -> Result<(GeneralizedInverse, [f64; 2])> {
    let a = invert_t_generalized_with(space, fam, 1)?;
    let b = invert_t_generalized_with(space, fam, -1)?;
    let ra = composition_residual(space, &a.u, &fam.t)?.max();
    let rb = composition_residual(space, &b.u, &fam.t)?.max();
    Ok((if ra <= rb { a } else { b }, [ra, rb]))
}

/// Interior distance between `T_even^*` and `T_odd`, after removing the
/// expected difference of the order -2 diagonal shifts.
pub fn adjoint_symmetry_residual(space: &ModelSpace, even: &ModelFamily, odd: &ModelFamily) -> Result<(f64, i64)> {
    let n = space.n();
    let te = even.t.full();
    let to = odd.t.full();
    let adj = FockOperator::new(te.mat.adjoint(), te.trunc);
    let delta = t_diagonal_shift(n, even.side, Parity::Even) - t_diagonal_shift(n, odd.side, Parity::Odd);
    let hb = 1 - even.slot.block;
    let expected = block_projector(space, hb).scale(re(delta as f64));
    let diff = adj.sub(&to);
    // the adjoint of a truncated column is exact only when its row is interior too
    let limit = te.trunc.limit.min(to.trunc.limit) - 1;
    let d = diff.sub(&expected).mat.filtered(|i, _| (space.level(i) as i64) <= limit);
    let (max, _) = FockOperator::new(d, te.trunc).max_abs_on_interior(space, limit);
    Ok((max, delta))
}

/// Leading-order idempotence of the model of `P`: the largest interior
/// entry of the graded `P^2 - P` outside the order -2 diagonal block, and
/// the deviation of that block from `D^2 - (H -+ (n-1))`.
#[derive(Clone, Copy, Debug)]
pub struct IdempotenceDefect {
    pub off_block: f64,
    pub predicted_mismatch: f64,
    /// Size of the order -2 diagonal defect itself.
    pub defect_size: f64,
}

pub fn p_idempotence_defect(space: &ModelSpace, fam: &ModelFamily) -> Result<IdempotenceDefect> {
    let p = &fam.p;
    let sq = p.graded_mul(p);
    let hb = match fam.parity {
        Parity::Even => 1,
        Parity::Odd => 0,
    };
    let mut off = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            if (i, j) == (hb, hb) {
                continue;
            }
            if sq.orders[i][j] != p.orders[i][j] {
                return Err(CoreError::InvalidCombination(format!(
                    "graded square has order {} in block ({}, {}), expected {}",
                    sq.orders[i][j], i + 1, j + 1, p.orders[i][j]
                )));
            }
            off = off.max(sq.block(i, j).interior_distance(p.block(i, j), space)?.max);
        }
    }
    let defect = sq.block(hb, hb).sub(p.block(hb, hb));
    let pb = block_projector(space, hb);
    let predicted = dirac_square_formula(space, fam.side).compose(&pb).sub(p.block(hb, hb));
    let mismatch = defect.interior_distance(&predicted, space)?.max;
    let size = defect.interior_distance(&FockOperator::zero(space), space)?.max;
    Ok(IdempotenceDefect { off_block: off, predicted_mismatch: mismatch, defect_size: size })
}

/// Numerical rank of an operator, probed with `probe` seeded Gaussian
/// test vectors; ranks above `probe` are reported as `probe`.
pub fn numerical_rank(op: &FockOperator, tol: f64, probe: usize) -> usize {
    use rand::{Rng, SeedableRng};
    let dim = op.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut y = DMatrix::<Complex64>::zeros(dim, probe);
    for k in 0..probe {
        let x: Vec<Complex64> = (0..dim).map(|_| re(rng.sample(rand_distr::StandardNormal))).collect();
        for (i, v) in op.mat.apply(&x).into_iter().enumerate() {
            y[(i, k)] = v;
        }
    }
    let scale = (dim as f64).sqrt();
    y.singular_values().iter().filter(|&&s| s > tol * scale).count()
}

