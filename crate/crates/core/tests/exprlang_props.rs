use std::collections::HashMap;

use proptest::prelude::*;
use tmgeom::exprlang::parse;

fn env() -> HashMap<String, f64> {
    [("r", 5.0), ("M", 1.0), ("Q", 0.3), ("theta", 0.7), ("x", -0.4)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Random well-formed expressions over a small alphabet.
fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..50).prop_map(|n| format!("{}", n as f64 / 4.0)),
        Just("r".to_string()),
        Just("M".to_string()),
        Just("theta".to_string()),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/"]))
                .prop_map(|(a, b, op)| format!("({a}) {op} ({b})")),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            (inner.clone(), prop::sample::select(vec!["sin", "cos", "exp"]))
                .prop_map(|(a, f)| format!("{f}({a})")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn arbitrary_input_never_panics(s in "\\PC{0,40}") {
        let _ = parse(&s);
    }

    #[test]
    fn token_soup_never_panics(parts in prop::collection::vec(
        prop::sample::select(vec!["r", "M", "(", ")", "+", "-", "*", "/", "^", "sin", "sqrt", "2", "1e3", ".5", "pi", " ", ",", "1e400"]),
        0..30,
    )) {
        let s = parts.concat();
        if let Ok(e) = parse(&s) {
            let _ = e.eval_f64(&env());
        }
    }

    #[test]
    fn printed_form_reparses_to_same_tree(s in expr_strategy()) {
        let e = parse(&s).unwrap();
        let printed = e.to_string();
        let again = parse(&printed).unwrap();
        prop_assert_eq!(&e, &again, "printed as {}", printed);
        let (a, b) = (e.eval_f64(&env()), again.eval_f64(&env()));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }
}

#[test]
fn deep_nesting_is_rejected_not_overflowed() {
    let s = format!("{}1{}", "(".repeat(10_000), ")".repeat(10_000));
    assert!(parse(&s).is_err());
}

#[test]
fn reissner_nordstrom_lapse() {
    let e = parse("1 - 2*M/r + Q^2/r^2").unwrap();
    let v = e.eval_f64(&env()).unwrap();
    assert!((v - (1.0 - 0.4 + 0.09 / 25.0)).abs() < 1e-15);
}
