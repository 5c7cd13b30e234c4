use super::*;
use proptest::prelude::*;

fn p(src: &str) -> Expr {
    Expr::parse_str(src).unwrap()
}

fn c(v: f64) -> Box<Expr> {
    Box::new(Expr::Const(v))
}

fn var(i: usize) -> Box<Expr> {
    Box::new(Expr::Var(i))
}

#[test]
fn max_of_negation() {
    assert_eq!(p("max(x1, -x1)"), Expr::Max(vec![Expr::Var(1), Expr::Neg(var(1))]));
}

#[test]
fn three_halves_power() {
    let expected = Expr::Mul(
        Box::new(Expr::Div(c(2.0), c(3.0))),
        Box::new(Expr::Pow(Box::new(Expr::Abs(var(1))), Box::new(Expr::Div(c(3.0), c(2.0))))),
    );
    assert_eq!(p("2/3*abs(x1)^(3/2)"), expected);
}

#[test]
fn power_is_right_associative() {
    assert_eq!(p("x1^2^3"), Expr::Pow(var(1), Box::new(Expr::Pow(c(2.0), c(3.0)))));
}

#[test]
fn precedence_levels() {
    assert_eq!(p("-x1^2"), Expr::Neg(Box::new(Expr::Pow(var(1), c(2.0)))));
    assert_eq!(p("1-2-3"), Expr::Sub(Box::new(Expr::Sub(c(1.0), c(2.0))), c(3.0)));
    assert_eq!(p("8/4/2").eval(&[]).unwrap(), 1.0);
    assert_eq!(p("2*-3").eval(&[]).unwrap(), -6.0);
    assert_eq!(p("2^-1").eval(&[]).unwrap(), 0.5);
    assert_eq!(p("1+2*3^2").eval(&[]).unwrap(), 19.0);
}

#[test]
fn parse_errors() {
    let offset = |src: &str| match Expr::parse_str(src) {
        Err(Error::Parse { offset, message }) => (offset, message),
        other => panic!("{src}: {other:?}"),
    };
    assert!(offset("(x1 + 2").1.contains("unbalanced"));
    assert!(offset("x1 + 2)").1.contains("unbalanced"));
    assert!(offset("max(x1)").1.contains("argument count"));
    assert!(offset("abs(x1, x2)").1.contains("argument count"));
    assert_eq!(offset("x1 + * 2").0, 5);
    assert!(offset("y1 + 2").1.contains("unknown identifier"));
    assert!(offset("x0").1.contains("unknown identifier"));
    assert!(offset("").1.contains("empty"));
    assert!(offset("x1 x2").1.contains("unexpected"));
}

#[test]
fn dual_of_aniso_poly() {
    let d = p("x1^2+x2^4").eval_dual(&[-1.0, 0.0]).unwrap();
    assert_eq!(d.value, 1.0);
    assert_eq!(d.partials, vec![-2.0, 0.0]);
    let d = p("x1").eval_dual(&[7.0]).unwrap();
    assert_eq!((d.value, d.partials), (7.0, vec![1.0]));
}

#[test]
fn dual_of_max_matches_finite_differences() {
    let e = p("max(x1, 2*x1)");
    let d = e.eval_dual(&[3.0]).unwrap();
    assert_eq!((d.value, d.partials.clone()), (6.0, vec![2.0]));
    for x in [0.5, 1.0, 3.0, 10.0, -0.5, -4.0] {
        let h = 1e-6;
        let fd = (e.eval(&[x + h]).unwrap() - e.eval(&[x - h]).unwrap()) / (2.0 * h);
        let d = e.eval_dual(&[x]).unwrap().partials[0];
        assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{x}: {d} vs {fd}");
    }
}

#[test]
fn kink_policies() {
    let e = p("max(x1, -x1)");
    assert!(matches!(e.eval_dual(&[0.0]), Err(Error::Kink(_))));
    assert_eq!(e.eval_dual_one_sided(&[0.0]).unwrap().partials, vec![1.0]);
    let e = p("max(-x1, x1)");
    assert_eq!(e.eval_dual_one_sided(&[0.0]).unwrap().partials, vec![-1.0]);
    let e = p("abs(x1)");
    assert!(matches!(e.eval_dual(&[0.0]), Err(Error::Kink(_))));
    assert_eq!(e.eval_dual_one_sided(&[0.0]).unwrap().partials, vec![1.0]);
    assert_eq!(p("max(x1, x1)").eval_dual(&[0.0]).unwrap().partials, vec![1.0]);
    assert_eq!(p("abs(x1)^3").eval_dual(&[0.0]).unwrap().partials, vec![0.0]);
}

#[test]
fn domain_errors() {
    assert!(matches!(p("log(x1)").eval(&[0.0]), Err(Error::Domain(_))));
    assert!(matches!(p("1/x1").eval_dual(&[0.0]), Err(Error::Domain(_))));
    assert!(matches!(p("sqrt(x1)").eval(&[-1.0]), Err(Error::Domain(_))));
    assert!(matches!(p("sqrt(x1)").eval_dual(&[0.0]), Err(Error::Domain(_))));
    assert!(matches!(p("x1^0.5").eval(&[-2.0]), Err(Error::Domain(_))));
    assert!(matches!(p("x1 + x2").eval(&[1.0]), Err(Error::Dimension { .. })));
    assert_eq!(p("x1^3").eval(&[-2.0]).unwrap(), -8.0);
}

#[test]
fn active_gradients_at_cusp() {
    let e = p("max(x1^2+x2^4, (x1+1)^2+(x2-1)^4)");
    let g = e.active_gradients(&[-1.0, 0.0]).unwrap();
    assert_eq!(g, vec![vec![-2.0, 0.0], vec![0.0, -4.0]]);
    assert_eq!(e.eval(&[-8.0, -1.0]).unwrap(), 65.0);
    assert_eq!(p("x1^2").active_gradients(&[1.0]).unwrap(), vec![vec![2.0]]);
    assert_eq!(p("max(x1, -x1)").active_gradients(&[0.0]).unwrap(), vec![vec![1.0], vec![-1.0]]);
    let mut g = p("abs(x1)").active_gradients(&[0.0]).unwrap();
    g.sort_by(|a, b| a[0].total_cmp(&b[0]));
    assert_eq!(g, vec![vec![-1.0], vec![1.0]]);
}

#[test]
fn canonical_printing() {
    assert_eq!(p("2/3*abs(x1)^(3/2)").to_string(), "((2 / 3) * (abs(x1) ^ (3 / 2)))");
    assert_eq!(p("max(x1, -x1, 0.25)").to_string(), "max(x1, (-x1), 0.25)");
    assert_eq!(Expr::Const(-1.5).to_string(), "(-1.5)");
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0f64..100.0).prop_map(Expr::Const),
        (0u32..1000).prop_map(|k| Expr::Const(k as f64 / 8.0)),
        (1usize..4).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(5, 48, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Expr::Abs(Box::new(a))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Max),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Min),
            (inner, prop_oneof![Just(Func::Sqrt), Just(Func::Exp), Just(Func::Log)])
                .prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
        ]
    })
}

fn arb_smooth() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(-3.0f64..3.0).prop_map(Expr::Const), (1usize..4).prop_map(Expr::Var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), 2u32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), c(k as f64))),
            inner.clone().prop_map(|a| Expr::Call(
                Func::Sqrt,
                Box::new(Expr::Add(Box::new(Expr::Pow(Box::new(a), c(2.0))), c(1.0)))
            )),
            inner.clone().prop_map(|a| Expr::Call(Func::Exp, Box::new(Expr::Mul(c(0.3), Box::new(a))))),
            inner.prop_map(|a| Expr::Call(
                Func::Log,
                Box::new(Expr::Add(Box::new(Expr::Pow(Box::new(a), c(2.0))), c(1.0)))
            )),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let printed = e.to_string();
        let back = Expr::parse_str(&printed).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn dual_partials_match_finite_differences(e in arb_smooth(), x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let v = e.eval(&x).unwrap();
        prop_assume!(v.abs() < 1e3);
        let d = e.eval_dual(&x).unwrap();
        prop_assert_eq!(d.value, v);
        for i in 0..3 {
            let h = 1e-6 * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (e.eval(&xp).unwrap() - e.eval(&xm).unwrap()) / (2.0 * h);
            let err = (d.partials[i] - fd).abs() / d.partials[i].abs().max(1.0);
            prop_assert!(err <= 1e-6, "{}: partial {} = {} vs fd {}", e, i, d.partials[i], fd);
        }
    }

    #[test]
    fn active_set_is_singleton_at_smooth_points(e in arb_smooth(), x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let d = e.eval_dual(&x).unwrap();
        let g = e.active_gradients(&x).unwrap();
        prop_assert_eq!(g.len(), 1);
        for (a, b) in g[0].iter().zip(&d.partials) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn lexemes_reassemble_source(src in "[x0-9 +*/^(),.-]{0,40}") {
        if let Ok(tokens) = tokenize(&src) {
            let mut rebuilt = String::new();
            let mut cursor = 0;
            for t in &tokens {
                rebuilt.push_str(&src[cursor..t.position]);
                rebuilt.push_str(&t.lexeme);
                cursor = t.position + t.lexeme.len();
            }
            rebuilt.push_str(&src[cursor..]);
            prop_assert_eq!(rebuilt, src);
        }
    }
}
