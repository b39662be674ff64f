use calderon_core::dirac::GeometryData;
use calderon_core::exterior::{FiberOperator, FiberSpace, Parity};
use calderon_core::scalar::ScalarExt;
use calderon_core::symbol::PolySymbol;
use proptest::prelude::*;

fn anticomm(a: &FiberOperator, b: &FiberOperator) -> FiberOperator {
    &(a * b) + &(b * a)
}

#[test]
fn clifford_relations_up_to_six() {
    for m in 0..=6 {
        for r in [1, 2] {
            let fs = FiberSpace::new(m, r);
            let dim = fs.dim();
            assert_eq!(dim, r << m);
            let zero = FiberOperator::zero(dim);
            let id = FiberOperator::identity(dim);
            let e: Vec<_> = (1..=m).map(|j| fs.interior_op(j).unwrap()).collect();
            let w: Vec<_> = (1..=m).map(|j| fs.wedge_op(j).unwrap()).collect();
            for j in 0..m {
                assert_eq!(w[j].adjoint(), e[j]);
                for k in 0..m {
                    assert_eq!(anticomm(&e[j], &e[k]), zero);
                    assert_eq!(anticomm(&w[j], &w[k]), zero);
                    assert_eq!(anticomm(&e[j], &w[k]), if j == k { id.clone() } else { zero.clone() }, "m {m} ({j}, {k})");
                }
            }
            let mut number = zero.clone();
            let mut co = zero.clone();
            for j in 0..m {
                number = &number + &(&w[j] * &e[j]);
                co = &co + &(&e[j] * &w[j]);
            }
            for a in 0..dim {
                for b in 0..dim {
                    let (d, c) = if a == b { (fs.degree_of(a) as i64, (m - fs.degree_of(a)) as i64) } else { (0, 0) };
                    assert_eq!(number.get(a, b), ScalarExt::from_int(d));
                    assert_eq!(co.get(a, b), ScalarExt::from_int(c));
                }
            }
        }
    }
}

#[test]
fn ladder_indices_are_checked() {
    let fs = FiberSpace::new(3, 1);
    assert!(fs.interior_op(0).is_err());
    assert!(fs.wedge_op(4).is_err());
}

#[test]
fn tangential_dirac_symbol_squares_to_norm() {
    for n in 2..=5 {
        let g = GeometryData::new(n, 1).unwrap();
        let dd = g.dd_symbol();
        let mut norm = PolySymbol::zero(n, g.dim());
        for k in (2..=n).chain(n + 2..=2 * n) {
            norm = norm.add(&PolySymbol::xi(n, g.dim(), k).unwrap().pow(2).unwrap()).unwrap();
        }
        assert_eq!(dd.mul(&dd).unwrap(), norm, "n {n}");
    }
}

#[test]
fn parity_projectors_split_identity() {
    let fs = FiberSpace::new(4, 2);
    let sum = &fs.parity_projector(Parity::Even) + &fs.parity_projector(Parity::Odd);
    assert_eq!(sum, fs.identity());
    let total: usize = (0..=4).map(|q| fs.degree_projector(q).unwrap().dense().iter().enumerate().filter(|(i, row)| !row[*i].is_zero()).count()).sum();
    assert_eq!(total, fs.dim());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn degree_shifts(m in 1usize..=5, j in 1usize..=5, seed in 0usize..64) {
        prop_assume!(j <= m);
        let fs = FiberSpace::new(m, 1);
        let a = seed % fs.dim();
        let w = fs.wedge_op(j).unwrap();
        let e = fs.interior_op(j).unwrap();
        for b in 0..fs.dim() {
            if !w.get(b, a).is_zero() {
                prop_assert_eq!(fs.degree_of(b), fs.degree_of(a) + 1);
            }
            if !e.get(b, a).is_zero() {
                prop_assert_eq!(fs.degree_of(b) + 1, fs.degree_of(a));
            }
        }
    }
}
