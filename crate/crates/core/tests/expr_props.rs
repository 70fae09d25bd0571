use hammerfix_core::expr::{check_cone, BinOp, Func, Node};
use hammerfix_core::Expression;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        Just(Node::Var),
        (0.0f64..1e6).prop_map(Node::Num),
        (1e-9f64..1e-3).prop_map(Node::Num),
    ]
}

fn node() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let func = prop_oneof![
            Just(Func::Exp),
            Just(Func::Ln),
            Just(Func::Sqrt),
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Abs),
        ];
        prop_oneof![
            inner.clone().prop_map(|n| Node::Neg(Box::new(n))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Node::Bin(o, Box::new(l), Box::new(r))),
            (func, inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
        ]
    })
}

/// Small sums of positive terms, always members of the cone.
fn positive_source() -> impl Strategy<Value = String> {
    prop::collection::vec((0.01f64..5.0, 0u32..4, -2.0f64..2.0), 1..4).prop_map(|terms| {
        terms
            .iter()
            .map(|(c, p, r)| format!("{c}*t^{p}*exp({r}*t)"))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

fn same_outcome(a: &Result<f64, impl std::fmt::Debug>, b: &Result<f64, impl std::fmt::Debug>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.to_bits() == y.to_bits(),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #[test]
    fn display_then_parse_is_identity(n in node()) {
        let text = n.to_string();
        let e = Expression::parse(&text).unwrap();
        prop_assert_eq!(e.ast(), &n);
    }

    #[test]
    fn evaluation_is_deterministic(n in node(), t in 0.0f64..=1.0) {
        let e = Expression::parse(&n.to_string()).unwrap();
        prop_assert!(same_outcome(&e.eval(t), &e.eval(t)));
    }

    #[test]
    fn reparsed_expression_evaluates_identically(n in node(), t in 0.0f64..=1.0) {
        let e = Expression::parse(&n.to_string()).unwrap();
        let again = Expression::parse(&e.to_string()).unwrap();
        prop_assert!(same_outcome(&e.eval(t), &again.eval(t)));
    }

    #[test]
    fn adding_zero_keeps_cone_report(src in positive_source()) {
        let e = Expression::parse(&src).unwrap();
        let z = Expression::parse(&format!("0 + {src}")).unwrap();
        let r1 = check_cone(&e, 101).unwrap();
        let r2 = check_cone(&z, 101).unwrap();
        prop_assert_eq!(r1.verdict(), r2.verdict());
        prop_assert_eq!(r1.min_value, r2.min_value);
        prop_assert_eq!(r1.argmin, r2.argmin);
        prop_assert!(r1.is_member());
    }

    #[test]
    fn out_of_range_points_are_rejected(n in node(), t in prop_oneof![-10.0f64..-1e-9, 1.0000001f64..10.0]) {
        let e = Expression::parse(&n.to_string()).unwrap();
        prop_assert!(e.eval(t).is_err());
    }
}

#[test]
fn scientific_literals_round_trip() {
    for v in [1e-7, 2.5e-300, 1e21, 123456789.0] {
        let n = Node::Num(v);
        assert_eq!(Expression::parse(&n.to_string()).unwrap().ast(), &n);
    }
}
