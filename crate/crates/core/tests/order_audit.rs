use calderon_core::audit::{audit_term_shapes, ShapeFamily};

#[test]
fn lower_order_shapes_have_heisenberg_order_at_most_minus_four() {
    let rep = audit_term_shapes(4, 2, 3).unwrap();
    for row in &rep.rows {
        assert!(row.worst_order <= -4, "{row:?}");
        assert!(row.worst_order <= row.predicted, "{row:?}");
        if row.params.2 % 2 == 0 {
            assert_eq!(row.worst_order, row.predicted, "{row:?}");
        }
    }
    assert!(rep.passes());
}

#[test]
fn worst_cases_are_attained() {
    let rep = audit_term_shapes(3, 1, 3).unwrap();
    let find = |f: ShapeFamily, p: (u32, u32, u32, u32)| rep.rows.iter().find(|r| r.family == f && r.params == p).unwrap().worst_order;
    assert_eq!(find(ShapeFamily::OddOverPower, (2, 0, 0, 0)), -4);
    assert_eq!(find(ShapeFamily::PrincipalChange, (0, 1, 2, 2)), -4);
    assert_eq!(find(ShapeFamily::ChangeOdd, (2, 0, 1, 1)), -6);
    assert_eq!(rep.max_order, -4);
}
