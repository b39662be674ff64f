//! Verification suite: configuration, the individual checks, the report and
//! named dumps.

use crate::audit::audit_term_shapes;
use crate::dirac::GeometryData;
use crate::dump::{symbol_json, symbol_latex};
use crate::error::{CoreError, Result};
use crate::exterior::{FiberOperator, FiberSpace, Parity};
use crate::fock::{
    annihilation, creation, harmonic_oscillator, ladder_ops, moyal_product, overlap_and_relating,
    szego_model_projector, vacuum_state, weyl_quantize, FockOperator, FockSpace, IsotropicPolySymbol, ModelSpace,
    SzegoKind,
};
use crate::model::{
    adjoint_symmetry_residual, assemble_models, composition_residual, dd_model, dirac_square_formula,
    inverse_candidates, invert_t, invert_t_generalized, p_idempotence_defect, BlockModelOperator, SlotLayout,
};
use crate::scalar::{parse_rational, ScalarExt};
use crate::symbol::{PolySymbol, RationalBoundarySymbol, Side};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Instant;

/// How the entries of `tau` parametrize the deformed vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WidthConvention {
    /// `exp(-tau |w|^2 / 2)`.
    #[default]
    Tau,
    /// `exp(-|w|^2 / (2 mu^2))`.
    Mu,
}

impl WidthConvention {
    /// Exponent width `tau` for a configured value.
    pub fn to_tau(self, x: f64) -> f64 {
        match self {
            WidthConvention::Tau => x,
            WidthConvention::Mu => 1.0 / (x * x),
        }
    }
}

/// Real and imaginary parts of the Hessian `b`; entries are integers,
/// decimals or `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BConfig {
    pub re: Vec<Vec<Value>>,
    #[serde(default)]
    pub im: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(rename = "N", default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub b: Option<BConfig>,
    #[serde(default)]
    pub tau: Vec<f64>,
    #[serde(default)]
    pub width_convention: WidthConvention,
    #[serde(default = "default_sides")]
    pub sides: Vec<String>,
    #[serde(default = "default_parities")]
    pub parities: Vec<String>,
    /// Empty selects every check.
    #[serde(default)]
    pub checks: Vec<String>,
    /// Global numeric tolerance; it caps each check's own bound.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Per-check tolerance overrides.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_n() -> usize {
    2
}
fn default_r() -> usize {
    1
}
fn default_cutoff() -> usize {
    12
}
fn default_sides() -> Vec<String> {
    vec!["plus".into(), "minus".into()]
}
fn default_parities() -> Vec<String> {
    vec!["even".into(), "odd".into()]
}
fn default_tolerance() -> f64 {
    1e-9
}

impl Default for SuiteConfig {
    fn default() -> Self {
        parse_config("{}").expect("defaults are valid")
    }
}

/// Parse and validate a JSON configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<SuiteConfig> {
    let mut cfg: SuiteConfig =
        serde_json::from_str(text).map_err(|e| CoreError::Config(format!("invalid configuration: {e}")))?;
    if cfg.tau.is_empty() {
        cfg.tau = vec![1.0];
    }
    cfg.validate()?;
    Ok(cfg)
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CoreError::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.r < 1 {
            return Err(CoreError::Config("r must be at least 1".into()));
        }
        if self.cutoff < 4 {
            return Err(CoreError::Config(format!("N must be at least 4, got {}", self.cutoff)));
        }
        if !(self.tolerance > 0.0) || self.tolerances.values().any(|&t| !(t > 0.0)) {
            return Err(CoreError::Config("tolerances must be positive".into()));
        }
        if let Some(&t) = self.tau.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
            return Err(CoreError::Config(format!("widths must be positive, got {t}")));
        }
        self.sides()?;
        self.parities()?;
        self.geometry()?;
        for c in self.checks.iter().chain(self.tolerances.keys()) {
            if !CHECKS.iter().any(|k| k.name == c) {
                return Err(CoreError::Config(format!("unknown check '{c}'; available: {}", check_names().join(", "))));
            }
        }
        Ok(())
    }
    pub fn sides(&self) -> Result<Vec<Side>> {
        self.sides
            .iter()
            .map(|s| Side::parse(s).ok_or_else(|| CoreError::Config(format!("unknown side '{s}'"))))
            .collect()
    }
    pub fn parities(&self) -> Result<Vec<Parity>> {
        self.parities
            .iter()
            .map(|s| Parity::parse(s).ok_or_else(|| CoreError::Config(format!("unknown parity '{s}'"))))
            .collect()
    }
    /// Geometry with the configured `b`.
    pub fn geometry(&self) -> Result<GeometryData> {
        let g = GeometryData::new(self.n, self.r)?;
        let Some(b) = &self.b else { return Ok(g) };
        let conv = |m: &Vec<Vec<Value>>, what: &str| -> Result<Vec<Vec<BigRational>>> {
            if m.is_empty() && what == "im" {
                return Ok(vec![vec![BigRational::from_integer(0.into()); self.n]; self.n]);
            }
            if m.len() != self.n || m.iter().any(|row| row.len() != self.n) {
                return Err(CoreError::Config(format!("b.{what} must be a {}x{} matrix", self.n, self.n)));
            }
            m.iter()
                .map(|row| row.iter().map(|v| rational_value(v, what)).collect())
                .collect()
        };
        g.with_b(conv(&b.re, "re")?, conv(&b.im, "im")?)
    }
    /// Bound for a check: a per-check override, else the smaller of the
    /// global tolerance and the check's own bound.
    pub fn tolerance_for(&self, name: &str, own: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(own.min(self.tolerance))
    }
    pub fn widths(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| self.width_convention.to_tau(t)).collect()
    }
}

fn rational_value(v: &Value, what: &str) -> Result<BigRational> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(x) => x.to_string(),
        _ => return Err(CoreError::Config(format!("b.{what} entries must be numbers or \"p/q\" strings, got {v}"))),
    };
    parse_rational(&s).ok_or_else(|| CoreError::Config(format!("cannot parse b.{what} entry '{s}'")))
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub anchor: String,
    pub status: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub runtime_ms: u64,
    pub parameters: Value,
    /// Where the worst violation occurred; null when passing.
    pub witness: Value,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
    /// Copy with every runtime zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for c in r.checks.iter_mut() {
            c.runtime_ms = 0;
        }
        r
    }
}

struct Outcome {
    max_error: f64,
    pass: bool,
    parameters: Value,
    witness: Value,
}

impl Outcome {
    fn numeric(err: f64, tol: f64, parameters: Value, witness: Value) -> Self {
        let pass = err <= tol;
        Outcome { max_error: err, pass, parameters, witness: if pass { Value::Null } else { witness } }
    }
    fn exact(failures: Vec<String>, checked: usize, mut parameters: Value) -> Self {
        parameters["identities_checked"] = json!(checked);
        let pass = failures.is_empty();
        Outcome {
            max_error: failures.len() as f64,
            pass,
            parameters,
            witness: if pass { Value::Null } else { json!(failures.into_iter().take(5).collect::<Vec<_>>()) },
        }
    }
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    sides: Vec<Side>,
    parities: Vec<Parity>,
    tol: f64,
}

struct CheckDef {
    name: &'static str,
    anchor: &'static str,
    /// The check's own bound; 0 for exact checks.
    bound: f64,
    run: fn(&Ctx) -> Result<Outcome>,
}

const CHECKS: &[CheckDef] = &[
    CheckDef { name: "calderon_principal", anchor: "principal Calderon symbol and idempotence", bound: 0.0, run: check_calderon_principal },
    CheckDef { name: "classical_ellipticity", anchor: "determinant of the classical symbol of T", bound: 1e-10, run: check_ellipticity },
    CheckDef { name: "dd_square", anchor: "square of the tangential Dirac symbol", bound: 0.0, run: check_dd_square },
    CheckDef { name: "dirac_square", anchor: "square of the model Dirac operators", bound: 1e-10, run: check_dirac_square },
    CheckDef { name: "fiber_identities", anchor: "interior and exterior multiplication relations", bound: 0.0, run: check_fiber },
    CheckDef { name: "generalized_szego", anchor: "deformed vacuum projectors and their inverses", bound: 1e-8, run: check_generalized },
    CheckDef { name: "ladder_oscillator", anchor: "ladder commutators and the harmonic oscillator", bound: 1e-10, run: check_ladder },
    CheckDef { name: "model_adjoint_symmetry", anchor: "adjoint pairing of the even and odd models of T", bound: 1e-10, run: check_adjoint },
    CheckDef { name: "model_inverse_classical", anchor: "explicit inverses of the model of T", bound: 1e-8, run: check_inverse },
    CheckDef { name: "order_audit", anchor: "Heisenberg orders of lower-order term shapes", bound: 0.0, run: check_audit },
    CheckDef { name: "p_model_idempotence", anchor: "leading-order idempotence of the model of P", bound: 1e-8, run: check_idempotence },
    CheckDef { name: "quantization_product", anchor: "Weyl quantization of the twisted product", bound: 1e-8, run: check_quantization },
    CheckDef { name: "subprincipal_contour", anchor: "order -1 term and vanishing contour integrals", bound: 0.0, run: check_subprincipal },
    CheckDef { name: "t_block_form", anchor: "graded assembly of the model of T", bound: 1e-12, run: check_t_form },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Run the selected checks (all when `cfg.checks` is empty) concurrently
/// and collect them sorted by name.
pub fn run_verification_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let sides = cfg.sides()?;
    let parities = cfg.parities()?;
    let selected: Vec<&CheckDef> =
        CHECKS.iter().filter(|c| cfg.checks.is_empty() || cfg.checks.iter().any(|s| s == c.name)).collect();
    let mut results: Vec<CheckResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|def| {
                let ctx = Ctx {
                    cfg,
                    sides: sides.clone(),
                    parities: parities.clone(),
                    tol: if def.bound == 0.0 { 0.0 } else { cfg.tolerance_for(def.name, def.bound) },
                };
                scope.spawn(move || {
                    let start = Instant::now();
                    let out = (def.run)(&ctx);
                    let ms = start.elapsed().as_millis() as u64;
                    let out = out.unwrap_or_else(|e| Outcome {
                        max_error: f64::INFINITY,
                        pass: false,
                        parameters: json!({}),
                        witness: json!({ "error": e.to_string() }),
                    });
                    CheckResult {
                        name: def.name.into(),
                        anchor: def.anchor.into(),
                        status: if out.pass { "pass" } else { "fail" }.into(),
                        max_error: if out.max_error.is_finite() { out.max_error } else { f64::MAX },
                        tolerance: ctx.tol,
                        runtime_ms: ms,
                        parameters: out.parameters,
                        witness: out.witness,
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    results.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = results.iter().filter(|r| r.passed()).count();
    let failed = results.len() - passed;
    Ok(VerificationReport { config: cfg.clone(), checks: results, passed, failed })
}

fn check_fiber(ctx: &Ctx) -> Result<Outcome> {
    let m = ctx.cfg.n - 1;
    let fs = FiberSpace::new(m, ctx.cfg.r);
    let dim = fs.dim();
    let zero = FiberOperator::zero(dim);
    let id = FiberOperator::identity(dim);
    let mut fails = Vec::new();
    let mut checked = 0;
    let e: Vec<FiberOperator> = (1..=m).map(|j| fs.interior_op(j)).collect::<Result<_>>()?;
    let w: Vec<FiberOperator> = (1..=m).map(|j| fs.wedge_op(j)).collect::<Result<_>>()?;
    let mut expect = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            fails.push(what);
        }
    };
    for j in 0..m {
        for k in 0..m {
            expect(&(&e[j] * &e[k]) + &(&e[k] * &e[j]) == zero, format!("e_{} e_{} anticommutation", j + 1, k + 1));
            expect(&(&w[j] * &w[k]) + &(&w[k] * &w[j]) == zero, format!("eps_{} eps_{} anticommutation", j + 1, k + 1));
            let target = if j == k { &id } else { &zero };
            expect(&(&e[j] * &w[k]) + &(&w[k] * &e[j]) == *target, format!("e_{} eps_{} relation", j + 1, k + 1));
        }
        expect(w[j].adjoint() == e[j], format!("adjoint of eps_{}", j + 1));
    }
    let mut number = FiberOperator::zero(dim);
    let mut co_number = FiberOperator::zero(dim);
    for j in 0..m {
        number = &number + &(&w[j] * &e[j]);
        co_number = &co_number + &(&e[j] * &w[j]);
    }
    let mut deg = FiberOperator::zero(dim);
    let mut co_deg = FiberOperator::zero(dim);
    for a in 0..dim {
        deg.set(a, a, ScalarExt::from_int(fs.degree_of(a) as i64));
        co_deg.set(a, a, ScalarExt::from_int((m - fs.degree_of(a)) as i64));
    }
    expect(number == deg, "sum eps_j e_j = degree".into());
    expect(co_number == co_deg, "sum e_j eps_j = n - 1 - degree".into());
    Ok(Outcome::exact(fails, checked, json!({ "m": m, "r": ctx.cfg.r, "fiber_dim": dim })))
}

fn check_dd_square(ctx: &Ctx) -> Result<Outcome> {
    let g = ctx.cfg.geometry()?;
    let n = g.n;
    let dd = g.dd_symbol();
    let mut norm = PolySymbol::zero(n, g.dim());
    for k in (2..=n).chain(n + 2..=2 * n) {
        norm = norm.add(&PolySymbol::xi(n, g.dim(), k)?.pow(2)?)?;
    }
    let ok = dd.mul(&dd)? == norm;
    let fails = if ok { vec![] } else { vec![format!("dd^2 != |xi''|^2 for n = {n}")] };
    Ok(Outcome::exact(fails, 1, json!({ "n": n, "r": g.r, "terms": dd.terms().len() })))
}

fn check_calderon_principal(ctx: &Ctx) -> Result<Outcome> {
    let g = ctx.cfg.geometry()?;
    let mut fails = Vec::new();
    let mut checked = 0;
    for &side in &ctx.sides {
        for &p in &ctx.parities {
            let cs = g.calderon_symbol(side, p)?;
            checked += 2;
            if cs.p0 != g.p0_block_form(side, p) {
                fails.push(format!("{} {}: residue differs from the block form", side.name(), p.name()));
            }
            if cs.p0.mul(&cs.p0)? != cs.p0 {
                fails.push(format!("{} {}: p0 is not idempotent", side.name(), p.name()));
            }
        }
    }
    Ok(Outcome::exact(fails, checked, json!({ "n": g.n, "r": g.r })))
}

fn random_b(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<BigRational>> {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| BigRational::new(BigInt::from(rng.random_range(-9..=9)), BigInt::from(rng.random_range(1..=7))))
                .collect()
        })
        .collect()
}

fn check_subprincipal(ctx: &Ctx) -> Result<Outcome> {
    let base = ctx.cfg.geometry()?;
    let n = base.n;
    let mut fails = Vec::new();
    let mut checked = 0;
    for &side in &ctx.sides {
        for &p in &ctx.parities {
            let cs = base.calderon_symbol(side, p)?;
            let expect = RationalBoundarySymbol::inv_radius_pow(n, base.dim(), 1)
                .scale(&ScalarExt::frac(-side.sign() * (n as i64 - 1), 2));
            checked += 1;
            if cs.pm1_diag != expect {
                fails.push(format!("{} {}: order -1 diagonal term", side.name(), p.name()));
            }
        }
    }
    // the configured b and ten seeded random ones
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x5ab9);
    let mut samples = vec![base.clone()];
    for _ in 0..10 {
        samples.push(GeometryData::new(n, base.r)?.with_b(random_b(&mut rng, n), random_b(&mut rng, n))?);
    }
    for (k, g) in samples.iter().enumerate() {
        for &side in &ctx.sides {
            for &p in &ctx.parities {
                for (blk, sym) in g.hessian_contact_residual(side, p)?.iter().enumerate() {
                    checked += 1;
                    if !sym.is_zero() {
                        fails.push(format!("b sample {k}, {} {}, block {}", side.name(), p.name(), blk + 1));
                    }
                }
            }
        }
    }
    Ok(Outcome::exact(fails, checked, json!({ "n": n, "b_samples": samples.len() })))
}

fn check_audit(_ctx: &Ctx) -> Result<Outcome> {
    let rep = audit_term_shapes(4, 2, 3)?;
    let over = rep.rows.iter().filter(|r| r.worst_order > rep.bound || r.worst_order > r.predicted).count();
    let witness = rep
        .rows
        .iter()
        .find(|r| r.worst_order > rep.bound || r.worst_order > r.predicted)
        .map(|r| json!({ "family": r.family, "params": r.params, "order": r.worst_order }))
        .unwrap_or(Value::Null);
    Ok(Outcome {
        max_error: over as f64,
        pass: rep.passes(),
        parameters: json!({ "rows": rep.rows.len(), "bound": rep.bound, "max_order": rep.max_order }),
        witness,
    })
}

fn unit_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..2 * n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    p[0] = 0.0;
    let r = crate::symbol::radius_of(&p);
    p.iter_mut().for_each(|x| *x /= r);
    p
}

fn check_ellipticity(ctx: &Ctx) -> Result<Outcome> {
    let g = ctx.cfg.geometry()?;
    let n = g.n;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0xe11);
    let points: Vec<Vec<f64>> = (0..100).map(|_| unit_point(&mut rng, n)).collect();
    let mut err: f64 = 0.0;
    let mut min_det = f64::INFINITY;
    let mut witness = Value::Null;
    let mut approach_ok = true;
    let mut approach = Vec::new();
    for &side in &ctx.sides {
        for &p in &ctx.parities {
            let rep = g.ellipticity_report(side, p, &points)?;
            if rep.max_rel_err_closed_form > err {
                err = rep.max_rel_err_closed_form;
                witness = json!({ "side": side.name(), "parity": p.name(), "point": rep.worst_point });
            }
            min_det = min_det.min(rep.min_normalized_det);
            // points tending to the contact ray of this side
            let dir = unit_point(&mut rng, n);
            let mut seq = Vec::new();
            for k in 1..=8 {
                let eps = 10f64.powi(-k);
                let mut q = vec![0.0; 2 * n];
                for j in 1..2 * n {
                    if j != n {
                        q[j] = eps * dir[j];
                    }
                }
                q[n] = -(side.sign() as f64);
                let d = g.ellipticity_report(side, p, &[q])?.min_normalized_det;
                seq.push(d);
            }
            let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
            let last = *seq.last().unwrap();
            approach_ok &= decreasing && last < 1e-6;
            approach.push(json!({ "side": side.name(), "parity": p.name(), "last": last }));
        }
    }
    let mut out = Outcome::numeric(err, ctx.tol, json!({ "n": n, "points": points.len(), "min_normalized_det": min_det, "approach": approach }), witness);
    if !(min_det > 1e-6) || !approach_ok {
        out.pass = false;
        out.witness = json!({ "min_normalized_det": min_det, "approach": out.parameters["approach"].clone() });
    }
    Ok(out)
}

fn monomials(vars: usize, max_deg: u16) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        let mut next = Vec::new();
        for m in &out {
            let used: u16 = m.iter().sum();
            for e in 0..=max_deg - used {
                let mut v = m.clone();
                v.push(e);
                next.push(v);
            }
        }
        out = next;
    }
    out.sort_by_key(|m| (m.iter().sum::<u16>(), m.clone()));
    out
}

fn check_quantization(ctx: &Ctx) -> Result<Outcome> {
    let modes = ctx.cfg.n - 1;
    let space = ModelSpace::scalar(modes, ctx.cfg.cutoff)?;
    let monos = monomials(2 * modes, 3);
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut pairs = 0;
    let mut limit = i64::MAX;
    for &side in &ctx.sides {
        let syms: Vec<IsotropicPolySymbol> = monos
            .iter()
            .map(|m| IsotropicPolySymbol::monomial(modes, m.clone(), FiberOperator::identity(1)))
            .collect::<Result<_>>()?;
        let ops: Vec<FockOperator> = syms.iter().map(|s| weyl_quantize(&space, s, side)).collect::<Result<_>>()?;
        for (i, a) in syms.iter().enumerate() {
            for (j, b) in syms.iter().enumerate() {
                if a.degree() + b.degree() > 3 {
                    continue;
                }
                pairs += 1;
                let lhs = weyl_quantize(&space, &moyal_product(a, b, side)?, side)?;
                let r = lhs.interior_distance(&ops[i].compose(&ops[j]), &space)?;
                limit = limit.min(r.limit);
                if r.max > err {
                    err = r.max;
                    witness = json!({ "side": side.name(), "a": monos[i], "b": monos[j], "entry": r.witness });
                }
            }
        }
    }
    Ok(Outcome::numeric(err, ctx.tol, json!({ "n": ctx.cfg.n, "N": ctx.cfg.cutoff, "pairs": pairs, "interior_limit": limit }), witness))
}

fn check_ladder(ctx: &Ctx) -> Result<Outcome> {
    let modes = ctx.cfg.n - 1;
    let space = ModelSpace::scalar(modes, ctx.cfg.cutoff)?;
    let fock = &space.fock;
    let id = FockOperator::identity(&space);
    let zero = FockOperator::zero(&space);
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut note = |what: String, r: crate::fock::Residual| {
        if r.max > err {
            err = r.max;
            witness = json!({ "identity": what, "entry": r.witness });
        }
    };
    let c: Vec<FockOperator> = (1..=modes).map(|j| creation(fock, j)).collect::<Result<_>>()?;
    let cs: Vec<FockOperator> = (1..=modes).map(|j| annihilation(fock, j)).collect::<Result<_>>()?;
    for j in 0..modes {
        for k in 0..modes {
            let comm = c[j].compose(&cs[k]).sub(&cs[k].compose(&c[j]));
            let target = if j == k { id.scale(Complex64::new(-2.0, 0.0)) } else { zero.clone() };
            note(format!("[C_{}, C_{}^*]", j + 1, k + 1), comm.interior_distance(&target, &space)?);
        }
    }
    let h = harmonic_oscillator(&space);
    let shift = Complex64::new(modes as f64, 0.0);
    let mut lower = id.scale(-shift);
    let mut upper = id.scale(shift);
    for j in 0..modes {
        lower = lower.add(&cs[j].compose(&c[j]));
        upper = upper.add(&c[j].compose(&cs[j]));
    }
    note("H = sum C^* C - (n-1)".into(), lower.interior_distance(&h, &space)?);
    note("H = sum C C^* + (n-1)".into(), upper.interior_distance(&h, &space)?);
    for &side in &ctx.sides {
        let q = weyl_quantize(&space, &IsotropicPolySymbol::norm_sq(modes, 1), side)?;
        note(format!("quantized |eta'|^2 ({})", side.name()), q.interior_distance(&h, &space)?);
        for j in 1..=modes {
            let l = ladder_ops(&space, j, side)?;
            let qc = weyl_quantize(&space, &l.creation_symbol, side)?;
            note(format!("quantized creation symbol {j} ({})", side.name()), qc.interior_distance(&l.creation, &space)?);
        }
    }
    Ok(Outcome::numeric(err, ctx.tol, json!({ "n": ctx.cfg.n, "N": ctx.cfg.cutoff }), witness))
}

fn model_space(cfg: &SuiteConfig) -> Result<ModelSpace> {
    ModelSpace::new(cfg.n, cfg.r, cfg.cutoff)
}

fn check_dirac_square(ctx: &Ctx) -> Result<Outcome> {
    let space = model_space(ctx.cfg)?;
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut limit = i64::MAX;
    for &side in &ctx.sides {
        let d = dd_model(&space, side)?;
        let r = d.d.compose(&d.d).interior_distance(&dirac_square_formula(&space, side), &space)?;
        limit = limit.min(r.limit);
        if r.max > err {
            err = r.max;
            witness = json!({ "side": side.name(), "entry": r.witness });
        }
    }
    Ok(Outcome::numeric(err, ctx.tol, json!({ "n": ctx.cfg.n, "N": ctx.cfg.cutoff, "interior_limit": limit }), witness))
}

fn classical_kind(side: Side) -> SzegoKind {
    match side {
        Side::Plus => SzegoKind::Classical,
        Side::Minus => SzegoKind::Conjugate,
    }
}

fn generalized_kind(side: Side, tau: Vec<f64>) -> SzegoKind {
    match side {
        Side::Plus => SzegoKind::Generalized(tau),
        Side::Minus => SzegoKind::GeneralizedConjugate(tau),
    }
}

fn expected_layout(n: usize, side: Side) -> SlotLayout {
    if side == Side::Plus || n % 2 == 1 {
        SlotLayout::TopLeft
    } else {
        SlotLayout::BottomRight
    }
}

fn check_inverse(ctx: &Ctx) -> Result<Outcome> {
    let space = model_space(ctx.cfg)?;
    let n = ctx.cfg.n;
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut structural = Vec::new();
    let mut cases = Vec::new();
    for &side in &ctx.sides {
        for &p in &ctx.parities {
            let fam = assemble_models(&space, side, p, &classical_kind(side))?;
            let u = invert_t(&space, &fam)?;
            let res = composition_residual(&space, &u, &fam.t)?;
            let layout = expected_layout(n, side);
            let (zero, grid) = match layout {
                SlotLayout::TopLeft => ((1, 1), [[0, 1], [1, 1]]),
                SlotLayout::BottomRight => ((0, 0), [[1, 1], [1, 0]]),
            };
            let cands = inverse_candidates(&space, &fam)?;
            let best = &cands[0];
            let case = format!("{} {}", side.name(), p.name());
            if !u.is_zero_block(zero.0, zero.1) {
                structural.push(format!("{case}: block ({}, {}) of U is not zero", zero.0 + 1, zero.1 + 1));
            }
            if u.orders != grid {
                structural.push(format!("{case}: order grid {:?}", u.orders));
            }
            let sign = if p == Parity::Even { 1 } else { -1 };
            if best.layout != layout || best.sign != sign {
                structural.push(format!("{case}: best assignment {}", best.label()));
            }
            if res.max() > err {
                err = res.max();
                witness = json!({ "case": case, "left": res.left, "right": res.right });
            }
            cases.push(json!({
                "side": side.name(),
                "parity": p.name(),
                "left": res.left,
                "right": res.right,
                "interior_limit": res.limit,
                "zero_block": [zero.0 + 1, zero.1 + 1],
                "orders": u.orders,
                "assignment": best.label(),
                "runner_up_residual": cands.get(1).map(|c| c.residual),
            }));
        }
    }
    let mut out = Outcome::numeric(err, ctx.tol, json!({ "n": n, "N": ctx.cfg.cutoff, "cases": cases }), witness);
    if !structural.is_empty() {
        out.pass = false;
        out.witness = json!(structural);
    }
    Ok(out)
}

fn check_generalized(ctx: &Ctx) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let space = model_space(cfg)?;
    let modes = cfg.n - 1;
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut problems = Vec::new();
    let mut per_tau = Vec::new();
    let bump = |e: f64, w: Value, err: &mut f64, witness: &mut Value| {
        if e > *err {
            *err = e;
            *witness = w;
        }
    };
    // one-mode reference pair (1, 4), deep enough that the cut is invisible
    let deep = FockSpace::new(1, 160)?;
    let one = vacuum_state(&deep, &[1.0], 160)?;
    let four = vacuum_state(&deep, &[4.0], 160)?;
    let reference = one.inner(&four).powi(2);
    bump((reference - 0.8).abs(), json!({ "reference_pair": [1.0, 4.0], "trace": reference }), &mut err, &mut witness);
    for (&raw, tau) in cfg.tau.iter().zip(cfg.widths()) {
        let one_mode = {
            let v = vacuum_state(&deep, &[tau], 160)?;
            one.inner(&v).powi(2)
        };
        let closed = 2.0 * tau.sqrt() / (1.0 + tau);
        bump((one_mode - closed).abs(), json!({ "tau": tau, "one_mode_trace": one_mode }), &mut err, &mut witness);
        let mut cases = Vec::new();
        for &side in &ctx.sides {
            let widths = vec![tau; modes];
            let p1 = szego_model_projector(&space, &classical_kind(side))?;
            let p2 = szego_model_projector(&space, &generalized_kind(side, widths.clone()))?;
            let rel = overlap_and_relating(&p1, &p2)?;
            // Fock trace of S2 S1, divided by the rank of the fiber slot
            let prod = p2.op.compose(&p1.op);
            let slot_rank = space.fiber.degree_projector(p1.degree)?.nnz() as f64;
            let tr: f64 = (0..space.dim()).map(|i| prod.mat.get(i, i).re).sum::<f64>() / slot_rank;
            bump((tr - rel.trace).abs(), json!({ "tau": tau, "side": side.name(), "trace": tr }), &mut err, &mut witness);
            let back = p1.op.compose(&rel.p21).interior_distance(&p1.op, &space)?;
            bump(back.max, json!({ "tau": tau, "side": side.name(), "relating": back.witness }), &mut err, &mut witness);
            for &p in &ctx.parities {
                let fam = assemble_models(&space, side, p, &generalized_kind(side, widths.clone()))?;
                let (g, both) = invert_t_generalized(&space, &fam)?;
                let res = composition_residual(&space, &g.u, &fam.t)?;
                let case = format!("tau {tau} {} {}", side.name(), p.name());
                bump(res.max(), json!({ "case": case, "left": res.left, "right": res.right }), &mut err, &mut witness);
                let sa = fam.classical_szego.op.compose(&g.alpha).interior_distance(&FockOperator::zero(&space), &space)?;
                bump(sa.max, json!({ "case": case, "classical_projector_on_alpha": sa.max }), &mut err, &mut witness);
                let cfam = assemble_models(&space, side, p, &classical_kind(side))?;
                let uc = invert_t(&space, &cfam)?;
                for i in 0..2 {
                    for j in 0..2 {
                        if uc.is_zero_block(i, j) && !g.u.is_zero_block(i, j) {
                            problems.push(format!("{case}: zero block ({}, {}) lost", i + 1, j + 1));
                        }
                    }
                }
                let reduction = if tau == 1.0 {
                    let d = g.u.full().interior_distance(&uc.full(), &space)?.max;
                    if d > 1e-12 {
                        problems.push(format!("{case}: unit width differs from the classical inverse by {d:e}"));
                    }
                    Some(d)
                } else {
                    None
                };
                cases.push(json!({
                    "side": side.name(),
                    "parity": p.name(),
                    "left": res.left,
                    "right": res.right,
                    "correction_sign": g.correction_sign,
                    "variant_residuals": both,
                    "classical_reduction": reduction,
                }));
            }
        }
        per_tau.push(json!({ "value": raw, "tau": tau, "one_mode_trace": one_mode, "cases": cases }));
    }
    let params = json!({
        "n": cfg.n,
        "N": cfg.cutoff,
        "vacuum_cutoff": space.vacuum_cutoff(),
        "width_convention": cfg.width_convention,
        "reference_trace": reference,
        "widths": per_tau,
    });
    let mut out = Outcome::numeric(err, ctx.tol, params, witness);
    if !problems.is_empty() {
        out.pass = false;
        out.witness = json!(problems);
    }
    Ok(out)
}

fn check_adjoint(ctx: &Ctx) -> Result<Outcome> {
    let space = model_space(ctx.cfg)?;
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut shifts = Vec::new();
    for &side in &ctx.sides {
        let e = assemble_models(&space, side, Parity::Even, &classical_kind(side))?;
        let o = assemble_models(&space, side, Parity::Odd, &classical_kind(side))?;
        let (res, delta) = adjoint_symmetry_residual(&space, &e, &o)?;
        shifts.push(json!({ "side": side.name(), "diagonal_shift": delta }));
        if res > err {
            err = res;
            witness = json!({ "side": side.name() });
        }
    }
    Ok(Outcome::numeric(err, ctx.tol, json!({ "n": ctx.cfg.n, "shifts": shifts }), witness))
}

fn check_idempotence(ctx: &Ctx) -> Result<Outcome> {
    let space = model_space(ctx.cfg)?;
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    let mut cases = Vec::new();
    for &side in &ctx.sides {
        for &p in &ctx.parities {
            let fam = assemble_models(&space, side, p, &classical_kind(side))?;
            let d = p_idempotence_defect(&space, &fam)?;
            let e = d.off_block.max(d.predicted_mismatch);
            cases.push(json!({ "side": side.name(), "parity": p.name(), "off_block": d.off_block, "diagonal_defect": d.defect_size, "defect_vs_prediction": d.predicted_mismatch }));
            if e > err {
                err = e;
                witness = json!({ "side": side.name(), "parity": p.name() });
            }
        }
    }
    Ok(Outcome::numeric(err, ctx.tol, json!({ "n": ctx.cfg.n, "cases": cases }), witness))
}

fn check_t_form(ctx: &Ctx) -> Result<Outcome> {
    let space = model_space(ctx.cfg)?;
    let mut err: f64 = 0.0;
    let mut witness = Value::Null;
    for &side in &ctx.sides {
        for &p in &ctx.parities {
            let mut kinds = vec![classical_kind(side)];
            for tau in ctx.cfg.widths() {
                kinds.push(generalized_kind(side, vec![tau; ctx.cfg.n - 1]));
            }
            for kind in kinds {
                let fam = assemble_models(&space, side, p, &kind)?;
                if fam.t_form_residual > err {
                    err = fam.t_form_residual;
                    witness = json!({ "side": side.name(), "parity": p.name(), "kind": format!("{kind:?}") });
                }
            }
        }
    }
    Ok(Outcome::numeric(err, ctx.tol, json!({ "n": ctx.cfg.n, "N": ctx.cfg.cutoff }), witness))
}

/// Output format of a dump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DumpFormat {
    Json,
    Latex,
}

impl DumpFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(DumpFormat::Json),
            "latex" => Some(DumpFormat::Latex),
            _ => None,
        }
    }
}

const MODEL_KINDS: [&str; 6] = ["P", "IdMinusP", "Rprime", "T", "U", "Ugen"];

/// Every selector accepted by [`dump`].
pub fn dump_selectors() -> Vec<String> {
    let mut out: Vec<String> = ["d1_even", "d1_odd", "dd", "q_m1", "q_m1_even", "q_m1_odd", "q_m2c", "q_m2c_even", "q_m2c_odd"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for side in ["plus", "minus"] {
        for p in ["even", "odd"] {
            for k in ["p0", "pm1", "Tcl"] {
                out.push(format!("{k}_{side}_{p}"));
            }
            for k in MODEL_KINDS {
                out.push(format!("model_{k}_{side}_{p}"));
            }
        }
    }
    out.sort();
    out
}

fn unknown(name: &str) -> CoreError {
    CoreError::UnknownSelector { name: name.into(), available: dump_selectors().join(", ") }
}

fn side_parity(s: &str, p: &str) -> Option<(Side, Parity)> {
    Some((Side::parse(s)?, Parity::parse(p)?))
}

/// Render a named symbol or model operator.
pub fn dump(cfg: &SuiteConfig, selector: &str, format: DumpFormat) -> Result<String> {
    let g = cfg.geometry()?;
    let parts: Vec<&str> = selector.split('_').collect();
    let symbol: Option<RationalBoundarySymbol> = match parts.as_slice() {
        ["dd"] => Some(RationalBoundarySymbol::from_poly(g.dd_symbol())),
        ["d1", p] => Parity::parse(p).map(|p| RationalBoundarySymbol::from_poly(g.d1_symbol(p))),
        ["q", "m1"] => Some(g.q_minus1(Parity::Even)),
        ["q", "m1", p] => Parity::parse(p).map(|p| g.q_minus1(p)),
        ["q", "m2c"] => Some(g.q_minus2c(Parity::Even)),
        ["q", "m2c", p] => Parity::parse(p).map(|p| g.q_minus2c(p)),
        ["p0", s, p] => match side_parity(s, p) {
            Some((s, p)) => Some(g.calderon_symbol(s, p)?.p0),
            None => None,
        },
        ["pm1", s, p] => match side_parity(s, p) {
            Some((s, p)) => Some(g.calderon_symbol(s, p)?.pm1_diag),
            None => None,
        },
        ["Tcl", s, p] => match side_parity(s, p) {
            Some((s, p)) => Some(g.t_classical(s, p)?),
            None => None,
        },
        _ => None,
    };
    if let Some(sym) = symbol {
        return Ok(match format {
            DumpFormat::Json => serde_json::to_string_pretty(&symbol_json(selector, &sym))? + "\n",
            DumpFormat::Latex => symbol_latex(selector, &sym),
        });
    }
    let ["model", kind, s, p] = parts.as_slice() else { return Err(unknown(selector)) };
    let (Some((side, parity)), true) = (side_parity(s, p), MODEL_KINDS.contains(kind)) else {
        return Err(unknown(selector));
    };
    let space = model_space(cfg)?;
    let op = model_operator(cfg, &space, kind, side, parity)?;
    Ok(match format {
        DumpFormat::Json => serde_json::to_string_pretty(&op.to_json(&space, selector))? + "\n",
        DumpFormat::Latex => model_latex(selector, &op, &space),
    })
}

fn model_operator(cfg: &SuiteConfig, space: &ModelSpace, kind: &str, side: Side, parity: Parity) -> Result<BlockModelOperator> {
    let fam = assemble_models(space, side, parity, &classical_kind(side))?;
    Ok(match kind {
        "P" => fam.p,
        "IdMinusP" => fam.id_minus_p,
        "Rprime" => fam.r_prime,
        "T" => fam.t,
        "U" => invert_t(space, &fam)?,
        _ => {
            let tau = cfg.widths()[0];
            let gfam = assemble_models(space, side, parity, &generalized_kind(side, vec![tau; cfg.n - 1]))?;
            invert_t_generalized(space, &gfam)?.0.u
        }
    })
}

fn c_latex(z: Complex64) -> String {
    let f = |x: f64| format!("{:.6}", x).trim_end_matches('0').trim_end_matches('.').to_string();
    match (z.re.abs() < 1e-12, z.im.abs() < 1e-12) {
        (true, true) => "0".into(),
        (false, true) => f(z.re),
        (true, false) => format!("{}i", f(z.im)),
        (false, false) => format!("{}{}{}i", f(z.re), if z.im < 0.0 { "" } else { "+" }, f(z.im)),
    }
}

fn model_latex(name: &str, op: &BlockModelOperator, space: &ModelSpace) -> String {
    let fd = space.fiber_dim();
    let basis = |b: usize| -> Vec<usize> {
        (0..space.dim())
            .filter(|&i| (space.fiber.degree_of(i % fd) % 2) == b)
            .collect()
    };
    let bases = [basis(0), basis(1)];
    let label = name.replace('_', "\\_");
    let mut out = format!("% {label}, Heisenberg orders {:?}\n", op.orders);
    for i in 0..2 {
        for j in 0..2 {
            let rows: Vec<String> = bases[i]
                .iter()
                .map(|&r| bases[j].iter().map(|&c| c_latex(op.block(i, j).mat.get(r, c))).collect::<Vec<_>>().join(" & "))
                .collect();
            out.push_str(&format!(
                "\\[\n\\mathrm{{{label}}}_{{{}{}}} = \\begin{{pmatrix}} {} \\end{{pmatrix}}\n\\]\n",
                i + 1,
                j + 1,
                rows.join(" \\\\ ")
            ));
        }
    }
    out
}
