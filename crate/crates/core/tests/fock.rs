use calderon_core::exterior::FiberOperator;
use calderon_core::fock::*;
use calderon_core::scalar::ScalarExt;
use calderon_core::symbol::Side;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn ladder_commutator_is_minus_two() {
    let space = ModelSpace::new(3, 1, 8).unwrap();
    for j in 1..=2 {
        for k in 1..=2 {
            let p = ladder_ops(&space, j, Side::Plus).unwrap();
            let q = ladder_ops(&space, k, Side::Plus).unwrap();
            let comm = p.creation.compose(&q.annihilation).sub(&q.annihilation.compose(&p.creation));
            let target = if j == k { FockOperator::identity(&space).scale(c(-2.0)) } else { FockOperator::zero(&space) };
            let r = comm.interior_distance(&target, &space).unwrap();
            assert!(r.max < 1e-12, "[C_{j}, C_{k}^*]: {}", r.max);
            assert!(r.limit >= 6);
        }
    }
}

#[test]
fn oscillator_from_ladders() {
    let space = ModelSpace::new(4, 2, 6).unwrap();
    let mut sum = FockOperator::zero(&space);
    for j in 1..=3 {
        let p = ladder_ops(&space, j, Side::Minus).unwrap();
        sum = sum.add(&p.annihilation.compose(&p.creation));
    }
    let h = harmonic_oscillator(&space);
    let shifted = sum.sub(&FockOperator::identity(&space).scale(c(3.0)));
    let r = shifted.interior_distance(&h, &space).unwrap();
    assert!(r.max < 1e-12);
}

#[test]
fn ladder_symbols_quantize_to_ladders() {
    let space = ModelSpace::new(3, 1, 7).unwrap();
    for side in [Side::Plus, Side::Minus] {
        for j in 1..=2 {
            let p = ladder_ops(&space, j, side).unwrap();
            let qc = weyl_quantize(&space, &p.creation_symbol, side).unwrap();
            let qa = weyl_quantize(&space, &p.annihilation_symbol, side).unwrap();
            assert!(qc.interior_distance(&p.creation, &space).unwrap().max < 1e-12);
            assert!(qa.interior_distance(&p.annihilation, &space).unwrap().max < 1e-12);
        }
    }
}

#[test]
fn quantize_unit_and_norm() {
    for modes in 1..=3 {
        let space = ModelSpace::new(modes + 1, 1, 6).unwrap();
        let dim = space.fiber_dim();
        for side in [Side::Plus, Side::Minus] {
            let one = weyl_quantize(&space, &IsotropicPolySymbol::one(modes, dim), side).unwrap();
            assert!(one.interior_distance(&FockOperator::identity(&space), &space).unwrap().max < 1e-14);
            let h = weyl_quantize(&space, &IsotropicPolySymbol::norm_sq(modes, dim), side).unwrap();
            let r = h.interior_distance(&harmonic_oscillator(&space), &space).unwrap();
            assert!(r.max < 1e-12, "modes {modes}: {}", r.max);
        }
    }
}

#[test]
fn degree_five_is_rejected() {
    let space = ModelSpace::scalar(1, 8).unwrap();
    let s = IsotropicPolySymbol::monomial(1, vec![3, 2], FiberOperator::identity(1)).unwrap();
    assert!(weyl_quantize(&space, &s, Side::Plus).is_err());
}

#[test]
fn moyal_canonical_relation() {
    // w # phi - phi # w = +- i
    let (w, p) = (IsotropicPolySymbol::var(1, 1, 1).unwrap(), IsotropicPolySymbol::var(1, 1, 2).unwrap());
    for side in [Side::Plus, Side::Minus] {
        let comm = moyal_product(&w, &p, side).unwrap().sub(&moyal_product(&p, &w, side).unwrap()).unwrap();
        let expect = IsotropicPolySymbol::one(1, 1).scale(&(&ScalarExt::from_int(side.sign()) * &ScalarExt::i()));
        assert_eq!(comm, expect);
    }
}

/// Normalized Hermite functions at `x` up to order `kmax`.
fn hermite_functions(x: f64, kmax: usize) -> Vec<f64> {
    let mut h = vec![std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp()];
    if kmax >= 1 {
        h.push(2f64.sqrt() * x * h[0]);
    }
    for m in 1..kmax {
        let next = (2.0 / (m + 1) as f64).sqrt() * x * h[m] - (m as f64 / (m + 1) as f64).sqrt() * h[m - 1];
        h.push(next);
    }
    h
}

/// `int f` by the trapezoid rule on [-L, L].
fn quad(f: impl Fn(f64) -> f64) -> f64 {
    let (l, steps) = (14.0, 28_000);
    let hstep = 2.0 * l / steps as f64;
    (0..=steps)
        .map(|k| {
            let x = -l + k as f64 * hstep;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * f(x)
        })
        .sum::<f64>()
        * hstep
}

#[test]
fn vacuum_coefficients_match_hermite_projection() {
    let fock = FockSpace::new(1, 16).unwrap();
    for tau in [0.3, 1.0, 2.0, 4.0] {
        let v = vacuum_state(&fock, &[tau], 16).unwrap();
        let norm = (tau / std::f64::consts::PI).powf(0.25);
        let scale = (1.0 - v.tail).sqrt();
        for m in 0..=16usize {
            let cm = quad(|x| hermite_functions(x, 16)[m] * norm * (-tau * x * x / 2.0).exp());
            let got = v.coeffs[fock.index_of(&[m as u32]).unwrap()] * scale;
            assert!((cm - got).abs() < 1e-10, "tau {tau} m {m}: {cm} vs {got}");
        }
    }
}

#[test]
fn overlap_matches_gaussian_integral() {
    // one mode, cut deep enough that the tail is below 1e-12
    let fock = FockSpace::new(1, 80).unwrap();
    for tau in [0.25, 2.0, 4.0] {
        let v1 = vacuum_state(&fock, &[1.0], 80).unwrap();
        let v2 = vacuum_state(&fock, &[tau], 80).unwrap();
        let oracle = quad(|x| {
            std::f64::consts::PI.powf(-0.5) * tau.powf(0.25) * (-(1.0 + tau) * x * x / 2.0).exp()
        });
        assert!((v1.inner(&v2) - oracle).abs() < 1e-10, "tau {tau}");
    }
    // two modes with tau = (4, 4): squared overlap is (4/5)^2 per pair of modes
    let fock = FockSpace::new(2, 80).unwrap();
    let v1 = vacuum_state(&fock, &[1.0, 1.0], 80).unwrap();
    let v2 = vacuum_state(&fock, &[4.0, 4.0], 80).unwrap();
    assert!((v1.inner(&v2).powi(2) - 0.64).abs() < 1e-9);
}

#[test]
fn relating_projector_reproduces_first() {
    let space = ModelSpace::new(2, 1, 40).unwrap().with_vacuum_cutoff(40);
    let p1 = szego_model_projector(&space, &SzegoKind::Classical).unwrap();
    let p2 = szego_model_projector(&space, &SzegoKind::Generalized(vec![4.0])).unwrap();
    let rel = overlap_and_relating(&p1, &p2).unwrap();
    assert!((rel.trace - 0.8).abs() < 1e-9);
    let back = p1.op.compose(&rel.p21);
    let r = back.interior_distance(&p1.op, &space).unwrap();
    assert!(r.max < 1e-12);
    // idempotent and rank one on the slot
    for p in [&p1, &p2] {
        let sq = p.op.compose(&p.op);
        assert!(sq.interior_distance(&p.op, &space).unwrap().max < 1e-12);
    }
}

#[test]
fn conjugate_projector_uses_top_slot() {
    let space = ModelSpace::new(3, 2, 5).unwrap();
    let p = szego_model_projector(&space, &SzegoKind::Conjugate).unwrap();
    assert_eq!(p.degree, 2);
    assert_eq!(p.op.mat.nnz(), 2);
    for (i, j, v) in p.op.mat.entries() {
        assert_eq!(i, j);
        assert_eq!(space.fiber.degree_of(space.split(i).1), 2);
        assert!((v - c(1.0)).norm() < 1e-15);
    }
}

#[test]
fn nonpositive_width_rejected() {
    let fock = FockSpace::new(2, 6).unwrap();
    assert!(vacuum_state(&fock, &[1.0, 0.0], 6).is_err());
    assert!(vacuum_state(&fock, &[1.0, -2.0], 6).is_err());
}

fn arb_symbol(modes: usize, dim: usize, max_deg: u16) -> impl Strategy<Value = IsotropicPolySymbol> {
    let mono = proptest::collection::vec(0u16..=max_deg, 2 * modes);
    let coeff = proptest::collection::vec((-3i64..=3, -3i64..=3), dim * dim);
    proptest::collection::vec((mono, coeff), 1..4).prop_map(move |terms| {
        let mut s = IsotropicPolySymbol::zero(modes, dim);
        for (mut m, cs) in terms {
            // clip the total degree
            while m.iter().sum::<u16>() > max_deg {
                let k = m.iter().position(|&e| e > 0).unwrap();
                m[k] -= 1;
            }
            let mut op = FiberOperator::zero(dim);
            for (k, (a, b)) in cs.into_iter().enumerate() {
                let v = &ScalarExt::from_int(a) + &(&ScalarExt::from_int(b) * &ScalarExt::i());
                op.set(k / dim, k % dim, v);
            }
            s = s.add(&IsotropicPolySymbol::monomial(modes, m, op).unwrap()).unwrap();
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quantization_is_multiplicative(a in arb_symbol(2, 2, 2), b in arb_symbol(2, 2, 2), plus in any::<bool>()) {
        let side = if plus { Side::Plus } else { Side::Minus };
        let space = ModelSpace::from_parts(FockSpace::new(2, 9).unwrap(), calderon_core::exterior::FiberSpace::new(0, 2));
        let qa = weyl_quantize(&space, &a, side).unwrap();
        let qb = weyl_quantize(&space, &b, side).unwrap();
        let ab = moyal_product(&a, &b, side).unwrap();
        let qab = weyl_quantize(&space, &ab, side).unwrap();
        let r = qa.compose(&qb).interior_distance(&qab, &space).unwrap();
        prop_assert!(r.limit >= 5);
        prop_assert!(r.max < 1e-9, "residual {}", r.max);
    }

    #[test]
    fn overlap_is_positive_and_bounded(t1 in 0.05f64..20.0, t2 in 0.05f64..20.0) {
        let fock = FockSpace::new(1, 30).unwrap();
        let a = vacuum_state(&fock, &[t1], 30).unwrap();
        let b = vacuum_state(&fock, &[t2], 30).unwrap();
        let ov = a.inner(&b);
        prop_assert!(ov > 0.0);
        prop_assert!(ov <= 1.0 + 1e-12);
    }
}
