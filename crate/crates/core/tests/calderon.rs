use calderon_core::dirac::GeometryData;
use calderon_core::exterior::Parity;
use calderon_core::residue::{contour_quadrature, residue_at_pole};
use calderon_core::scalar::ScalarExt;
use calderon_core::symbol::{RationalBoundarySymbol, Side};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIDES: [Side; 2] = [Side::Plus, Side::Minus];
const PARITIES: [Parity; 2] = [Parity::Even, Parity::Odd];

fn random_b(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<BigRational>> {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| BigRational::new(BigInt::from(rng.random_range(-9..=9)), BigInt::from(rng.random_range(1..=7))))
                .collect()
        })
        .collect()
}

#[test]
fn principal_symbol_matches_block_form_and_is_idempotent() {
    for n in 2..=4 {
        let g = GeometryData::new(n, 1).unwrap();
        for side in SIDES {
            for parity in PARITIES {
                let cs = g.calderon_symbol(side, parity).unwrap();
                assert_eq!(cs.p0, g.p0_block_form(side, parity), "n={n} {side:?} {parity:?}");
                let sq = cs.p0.mul(&cs.p0).unwrap();
                assert_eq!(sq, cs.p0, "idempotence n={n} {side:?} {parity:?}");
            }
        }
    }
}

#[test]
fn order_minus_one_term_is_scalar() {
    for n in 2..=4 {
        let g = GeometryData::new(n, 1).unwrap();
        for side in SIDES {
            for parity in PARITIES {
                let cs = g.calderon_symbol(side, parity).unwrap();
                // flat part of the order -2 term gives the diagonal formula
                let sigma = g.sigma1_dt(parity, side);
                let flat = residue_at_pole(&g.q_minus2c_flat(parity), side).unwrap().mul_op_right(&sigma).unwrap();
                assert_eq!(flat, cs.pm1_diag);
                let expect = RationalBoundarySymbol::inv_radius_pow(n, g.dim(), 1)
                    .scale(&ScalarExt::frac(-side.sign() * (n as i64 - 1), 2));
                assert_eq!(cs.pm1_diag, expect);
                let packaged = cs.p0.add(&cs.pm1_diag).unwrap();
                assert_eq!(packaged, g.p_packaged(side, parity));
            }
        }
    }
}

#[test]
fn hessian_terms_vanish_on_contact_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=4 {
        for _ in 0..3 {
            let g = GeometryData::new(n, 1).unwrap().with_b(random_b(&mut rng, n), random_b(&mut rng, n)).unwrap();
            let fs = g.fiber();
            let layout = fs.block_layout();
            let zero: Vec<usize> = (2..=2 * n).filter(|&k| k != n + 1).collect();
            for side in SIDES {
                for parity in PARITIES {
                    let res = residue_at_pole(&g.q_minus2c_hessian(parity), side).unwrap();
                    assert!(!res.is_zero());
                    for blk in [&layout.first, &layout.second] {
                        let d = res.project(blk, blk);
                        let restricted = d.numerator().restrict(&zero, Some((-side.sign(), n + 1)));
                        assert!(restricted.is_zero(), "n={n} {side:?} {parity:?}");
                    }
                    for blk in g.hessian_contact_residual(side, parity).unwrap() {
                        assert!(blk.is_zero());
                    }
                }
            }
        }
    }
}

#[test]
fn contact_plane_restriction_commutes_with_the_residue() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for n in 2..=3 {
        let g = GeometryData::new(n, 1).unwrap().with_b(random_b(&mut rng, n), random_b(&mut rng, n)).unwrap();
        let zero: Vec<usize> = (2..=2 * n).filter(|&k| k != n + 1).collect();
        for parity in PARITIES {
            let full = g.q_minus2c_hessian(parity);
            let fast = g.q_minus2c_hessian_contact_plane(parity);
            assert_eq!(full.numerator().restrict(&zero, None), *fast.numerator());
            for side in SIDES {
                let a = residue_at_pole(&full, side).unwrap();
                let b = residue_at_pole(&fast, side).unwrap();
                let ra = a.numerator().restrict(&zero, Some((-side.sign(), n + 1)));
                let rb = b.numerator().restrict(&zero, Some((-side.sign(), n + 1)));
                assert_eq!(a.pole_orders(), b.pole_orders());
                assert_eq!(ra, rb);
            }
        }
    }
}

#[test]
fn contact_residual_vanishes_for_many_b() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in 2..=4 {
        for _ in 0..10 {
            let g = GeometryData::new(n, 1).unwrap().with_b(random_b(&mut rng, n), random_b(&mut rng, n)).unwrap();
            for side in SIDES {
                for parity in PARITIES {
                    for blk in g.hessian_contact_residual(side, parity).unwrap() {
                        assert!(blk.is_zero(), "n={n} {side:?} {parity:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn classical_t_matches_block_form() {
    for n in 2..=4 {
        let g = GeometryData::new(n, 1).unwrap();
        for side in SIDES {
            for parity in PARITIES {
                assert_eq!(g.t_classical(side, parity).unwrap(), g.t_block_form(side, parity));
            }
        }
    }
}

#[test]
fn residues_agree_with_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 3;
    let g = GeometryData::new(n, 1).unwrap().with_b(random_b(&mut rng, n), random_b(&mut rng, n)).unwrap();
    let syms = [g.q_minus1(Parity::Even), g.q_minus2c(Parity::Odd)];
    for s in &syms {
        for side in SIDES {
            let exact = residue_at_pole(s, side).unwrap();
            for _ in 0..5 {
                let xp: Vec<f64> = (0..2 * n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
                let q = contour_quadrature(s, side, &xp, 96);
                let mut full = vec![0.0];
                full.extend(&xp);
                let e = exact.eval_real(&full);
                let scale = e.norm().max(1e-12);
                assert!((q - e).norm() / scale < 1e-8);
            }
        }
    }
}
