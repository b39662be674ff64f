//! JSON and LaTeX renderings of boundary symbols.

use crate::exterior::FiberOperator;
use crate::scalar::{GaussQ, Rat, ScalarExt};
use crate::symbol::RationalBoundarySymbol;
use serde_json::{json, Value};

fn scalar_json(s: &ScalarExt) -> Value {
    let [ra, ia, rb, ib] = s.parts();
    json!({ "re_a": ra.to_string(), "im_a": ia.to_string(), "re_b": rb.to_string(), "im_b": ib.to_string() })
}

fn matrix_json(op: &FiberOperator) -> Value {
    Value::Array(op.dense().iter().map(|row| Value::Array(row.iter().map(scalar_json).collect())).collect())
}

/// `{n, dim, pole_orders, terms: [{exponents, coeff}]}`; a term's value is
/// `xi^exponents R^last * coeff`, the whole divided by
/// `(xi_1 - iR)^a (xi_1 + iR)^b R^c`. Rationals are exact strings and
/// entries are `a + b sqrt2` with Gaussian rational `a`, `b`.
pub fn symbol_json(name: &str, sym: &RationalBoundarySymbol) -> Value {
    let (a, b, c) = sym.pole_orders();
    let terms: Vec<Value> = sym
        .numerator()
        .terms()
        .iter()
        .map(|(m, op)| json!({ "exponents": m, "coeff": matrix_json(op) }))
        .collect();
    json!({
        "name": name,
        "n": sym.n(),
        "dim": sym.dim(),
        "variables": variable_names(sym.n()),
        "pole_orders": [a, b, c],
        "terms": terms,
    })
}

fn variable_names(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=2 * n).map(|k| format!("xi_{k}")).collect();
    v.push("R".into());
    v
}

fn rat_latex(r: &Rat) -> String {
    match r {
        Rat::Small(p, 1) => p.to_string(),
        Rat::Small(p, q) => {
            let sign = if *p < 0 { "-" } else { "" };
            format!("{sign}\\tfrac{{{}}}{{{q}}}", p.unsigned_abs())
        }
        Rat::Big(b) => {
            if b.denom() == &1.into() {
                b.numer().to_string()
            } else {
                let sign = if b.numer() < &0.into() { "-" } else { "" };
                format!("{sign}\\tfrac{{{}}}{{{}}}", b.numer().magnitude(), b.denom())
            }
        }
    }
}

/// Terms of a sum as `(sign, magnitude)` pairs.
fn gauss_terms(g: &GaussQ, unit: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    for (r, u) in [(&g.re, ""), (&g.im, "i")] {
        if r.is_zero() {
            continue;
        }
        let neg = r.is_negative();
        let mag = rat_latex(&if neg { r.neg() } else { r.clone() });
        let suffix = format!("{u}{unit}");
        let body = if suffix.is_empty() {
            mag
        } else if mag == "1" {
            suffix
        } else {
            format!("{mag}{suffix}")
        };
        out.push((neg, body));
    }
    out
}

pub fn scalar_latex(s: &ScalarExt) -> String {
    let a = GaussQ::from_rats(s.parts()[0].clone(), s.parts()[1].clone());
    let b = GaussQ::from_rats(s.parts()[2].clone(), s.parts()[3].clone());
    let mut terms = gauss_terms(&a, "");
    terms.extend(gauss_terms(&b, "\\sqrt{2}"));
    join_terms(&terms)
}

fn join_terms(terms: &[(bool, String)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (neg, body)) in terms.iter().enumerate() {
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(body);
    }
    out
}

fn monomial_latex(m: &[u16], n: usize) -> String {
    let mut out = String::new();
    for (k, &e) in m.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let v = if k == 2 * n { "R".to_string() } else { format!("\\xi_{{{}}}", k + 1) };
        if e == 1 {
            out.push_str(&v);
        } else {
            out.push_str(&format!("{v}^{{{e}}}"));
        }
    }
    out
}

fn matrix_latex(op: &FiberOperator) -> String {
    let rows: Vec<String> = op
        .dense()
        .iter()
        .map(|row| row.iter().map(scalar_latex).collect::<Vec<_>>().join(" & "))
        .collect();
    format!("\\begin{{pmatrix}} {} \\end{{pmatrix}}", rows.join(" \\\\ "))
}

/// Display-math rendering: the numerator as a sum of monomials times
/// matrices over the factored denominator.
pub fn symbol_latex(name: &str, sym: &RationalBoundarySymbol) -> String {
    let n = sym.n();
    let (a, b, c) = sym.pole_orders();
    let mut den = Vec::new();
    for (e, f) in [(a, "(\\xi_1 - iR)"), (b, "(\\xi_1 + iR)"), (c, "R")] {
        match e {
            0 => {}
            1 => den.push(f.to_string()),
            _ => den.push(format!("{f}^{{{e}}}")),
        }
    }
    let num: Vec<String> = sym
        .numerator()
        .terms()
        .iter()
        .map(|(m, op)| {
            let mono = monomial_latex(m, n);
            if mono.is_empty() {
                matrix_latex(op)
            } else {
                format!("{mono}\\,{}", matrix_latex(op))
            }
        })
        .collect();
    let num = if num.is_empty() { "0".to_string() } else { num.join(" + ") };
    let body = if den.is_empty() { num } else { format!("\\frac{{1}}{{{}}}\\Big( {num} \\Big)", den.join(" ")) };
    let label = name.replace('_', "\\_");
    format!("% {label}\n\\[\n\\mathrm{{{label}}} = {body}\n\\]\n")
}
