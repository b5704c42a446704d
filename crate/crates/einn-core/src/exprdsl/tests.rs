use super::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn bindings(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(n, v)| (n.to_string(), *v)).collect()
}

#[test]
fn parse_single_constant() {
    let e = parse_source("1", &[]).unwrap();
    assert_eq!(e, Expr::Const(1.0));
}

#[test]
fn parse_undeclared_identifier_names_it() {
    let err = parse_source("u + w", &names(&["u"])).unwrap_err();
    match err {
        ExprError::UndeclaredIdentifier { name, pos } => {
            assert_eq!(name, "w");
            assert_eq!(pos, 4);
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn parse_trailing_tokens_rejected() {
    assert!(matches!(
        parse_source("1 + 2 3", &[]),
        Err(ExprError::TrailingTokens { .. })
    ));
}

#[test]
fn parse_unbalanced_parens_rejected() {
    assert!(matches!(
        parse_source("(1 + 2", &[]),
        Err(ExprError::UnbalancedParen { .. })
    ));
    assert!(matches!(
        parse_source("min(1, 2", &[]),
        Err(ExprError::UnbalancedParen { .. })
    ));
}

#[test]
fn parse_wrong_arity_rejected() {
    assert!(matches!(
        parse_source("min(1)", &[]),
        Err(ExprError::WrongArity { .. })
    ));
    assert!(matches!(
        parse_source("exp(1, 2)", &[]),
        Err(ExprError::WrongArity { .. })
    ));
}

// Structure of the saturating-uptake model right-hand side: subtraction of a
// ratio whose numerator and denominator both carry integer powers.
#[test]
fn parse_ratio_model_structure() {
    let vars = names(&["u", "beta", "alpha"]);
    let e = parse_source("u*(1-u) - beta*u^2/(u^2 + alpha^2)", &vars).unwrap();
    let Expr::Binary {
        op: BinOp::Sub,
        lhs,
        rhs,
        ..
    } = e
    else {
        panic!("expected top-level subtraction");
    };
    assert!(matches!(*lhs, Expr::Binary { op: BinOp::Mul, .. }));
    let Expr::Binary {
        op: BinOp::Div,
        lhs: num,
        rhs: den,
        ..
    } = *rhs
    else {
        panic!("expected division on the right");
    };
    assert!(matches!(*num, Expr::Binary { op: BinOp::Mul, .. }));
    let Expr::Binary {
        op: BinOp::Add,
        lhs: d_lhs,
        ..
    } = *den
    else {
        panic!("expected sum in the denominator");
    };
    assert!(matches!(*d_lhs, Expr::PowInt { exp: 2, .. }));
}

#[test]
fn precedence_pow_binds_tighter_than_unary_minus() {
    let e = parse_source("-2^2", &[]).unwrap();
    assert_eq!(eval(&e, &BTreeMap::new()).unwrap(), -4.0);
}

#[test]
fn pow_is_right_associative() {
    let e = parse_source("2^3^2", &[]).unwrap();
    assert_eq!(eval(&e, &BTreeMap::new()).unwrap(), 512.0); // 2^(3^2)
}

#[test]
fn eval_hill_function_at_half_saturation() {
    let vars = names(&["u", "h", "p"]);
    let e = parse_source("u^p/(u^p + h^p)", &vars).unwrap();
    let b = bindings(&[("u", 0.5), ("h", 0.5), ("p", 2.0)]);
    assert_eq!(eval(&e, &b).unwrap(), 0.5);
}

// The closed-form inverse r(u) = (beta*u - alpha)(u^2 + h^2)/u^2 gives
// r(0.25) = 2 exactly, so the right-hand side must vanish there.
#[test]
fn eval_scheffer_rhs_at_known_equilibrium() {
    let vars = names(&["u", "r", "alpha", "beta", "h", "p"]);
    let e = parse_source("alpha - beta*u + r*u^p/(u^p + h^p)", &vars).unwrap();
    let b = bindings(&[
        ("u", 0.25),
        ("r", 2.0),
        ("alpha", 0.1),
        ("beta", 2.0),
        ("h", 0.5),
        ("p", 2.0),
    ]);
    assert_eq!(eval(&e, &b).unwrap(), 0.0);
}

#[test]
fn eval_division_by_zero_reports_position() {
    let e = parse_source("1/u", &names(&["u"])).unwrap();
    match eval(&e, &bindings(&[("u", 0.0)])) {
        Err(ExprError::DivisionByZero { pos: 1 }) => {}
        other => panic!("expected division by zero at byte 1, got {other:?}"),
    }
}

#[test]
fn eval_log_and_sqrt_domain_errors() {
    let e = parse_source("log(u)", &names(&["u"])).unwrap();
    assert!(matches!(
        eval(&e, &bindings(&[("u", 0.0)])),
        Err(ExprError::LogDomain { .. })
    ));
    let e = parse_source("sqrt(u)", &names(&["u"])).unwrap();
    assert!(matches!(
        eval(&e, &bindings(&[("u", -1.0)])),
        Err(ExprError::SqrtDomain { .. })
    ));
}

#[test]
fn eval_negative_base_fractional_power_is_domain_error() {
    let e = parse_source("u^p", &names(&["u", "p"])).unwrap();
    assert!(matches!(
        eval(&e, &bindings(&[("u", -2.0), ("p", 0.5)])),
        Err(ExprError::PowDomain { .. })
    ));
    // integer-valued runtime exponent on a negative base is fine
    assert_eq!(eval(&e, &bindings(&[("u", -2.0), ("p", 2.0)])).unwrap(), 4.0);
}

#[test]
fn eval_dual_linear_in_seed() {
    let vars = names(&["u", "lambda"]);
    let e = parse_source("lambda - u", &vars).unwrap();
    let d = eval_dual(&e, &bindings(&[("u", 1.0), ("lambda", 1.0)]), "lambda").unwrap();
    assert_eq!(d.value, 0.0);
    assert_eq!(d.deriv, 1.0);
}

#[test]
fn eval_dual_hill_derivative() {
    let vars = names(&["u", "h"]);
    let e = parse_source("u^2/(u^2 + h^2)", &vars).unwrap();
    let d = eval_dual(&e, &bindings(&[("u", 0.5), ("h", 0.5)]), "u").unwrap();
    assert_eq!(d.value, 0.5);
    // g'(u) = 2 u h^2 / (u^2 + h^2)^2 = 1 at u = h = 0.5
    assert!((d.deriv - 1.0).abs() < 1e-15);
}

#[test]
fn eval_dual_seed_absent_from_tree_gives_zero() {
    let vars = names(&["u", "lambda"]);
    let e = parse_source("u^2 + 1", &vars).unwrap();
    let d = eval_dual(&e, &bindings(&[("u", 3.0), ("lambda", 7.0)]), "lambda").unwrap();
    assert_eq!(d.deriv, 0.0);
}

#[test]
fn gradient_product_rule() {
    let vars = names(&["u", "v"]);
    let e = parse_source("u*v", &vars).unwrap();
    let g = gradient(&e, &bindings(&[("u", 2.0), ("v", 3.0)]), &["u", "v"]).unwrap();
    assert_eq!(g, vec![3.0, 2.0]);
}

#[test]
fn gradient_of_constant_is_zero() {
    let vars = names(&["u", "v"]);
    let e = parse_source("5", &vars).unwrap();
    let g = gradient(&e, &bindings(&[("u", 1.0), ("v", 2.0)]), &["u", "v"]).unwrap();
    assert_eq!(g, vec![0.0, 0.0]);
}

// First right-hand side of the two-compartment feedback model, checked
// against central finite differences at the documented equilibrium point.
#[test]
fn gradient_feedback_model_matches_finite_differences() {
    let vars = names(&["u", "v", "a1", "a2", "k1", "alpha"]);
    let e = parse_source("a1 + a2*(v^2/(v^2 + alpha^2)) - k1*u", &vars).unwrap();
    let b = bindings(&[
        ("u", 1.0),
        ("v", 0.222),
        ("a1", 0.25),
        ("a2", 2.129),
        ("k1", 0.35),
        ("alpha", 1.0),
    ]);
    let g = gradient(&e, &b, &["u", "v", "a2"]).unwrap();
    for (seed, got) in ["u", "v", "a2"].iter().zip(&g) {
        let mut lo = b.clone();
        let mut hi = b.clone();
        let x = b[*seed];
        let h = 1e-6 * x.abs().max(1.0);
        *lo.get_mut(*seed).unwrap() = x - h;
        *hi.get_mut(*seed).unwrap() = x + h;
        let fd = (eval(&e, &hi).unwrap() - eval(&e, &lo).unwrap()) / (2.0 * h);
        let rel = (got - fd).abs() / got.abs().max(fd.abs()).max(1.0);
        assert!(rel <= 1e-6, "seed {seed}: dual {got} vs fd {fd}");
    }
}

// ---------------------------------------------------------------------------
// Randomized property suites
// ---------------------------------------------------------------------------

const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

fn gen_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth == 0 || rng.gen_range(0..10) < 2 {
        return if rng.gen_bool(0.5) {
            Expr::Const(rng.gen_range(0.3..2.5))
        } else {
            Expr::Var(VAR_NAMES[rng.gen_range(0..VAR_NAMES.len())].to_string())
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(gen_expr(rng, depth - 1));
    // strictly positive and bounded away from zero, for log/sqrt/div
    let positive = |rng: &mut ChaCha8Rng| {
        Box::new(Expr::Binary {
            op: BinOp::Add,
            lhs: Box::new(Expr::Call {
                func: Func::Abs,
                args: vec![gen_expr(rng, depth - 1)],
                pos: 0,
            }),
            rhs: Box::new(Expr::Const(rng.gen_range(0.5..1.5))),
            pos: 0,
        })
    };
    match rng.gen_range(0..12) {
        0 => Expr::Binary {
            op: BinOp::Add,
            lhs: sub(rng),
            rhs: sub(rng),
            pos: 0,
        },
        1 => Expr::Binary {
            op: BinOp::Sub,
            lhs: sub(rng),
            rhs: sub(rng),
            pos: 0,
        },
        2 => Expr::Binary {
            op: BinOp::Mul,
            lhs: sub(rng),
            rhs: sub(rng),
            pos: 0,
        },
        3 => Expr::Binary {
            op: BinOp::Div,
            lhs: sub(rng),
            rhs: positive(rng),
            pos: 0,
        },
        4 => Expr::Neg(sub(rng)),
        5 => Expr::PowInt {
            base: sub(rng),
            exp: rng.gen_range(-2..=3),
            pos: 0,
        },
        6 => Expr::Binary {
            op: BinOp::Pow,
            lhs: positive(rng),
            rhs: Box::new(Expr::Const(rng.gen_range(0.4..1.9))),
            pos: 0,
        },
        7 => Expr::Call {
            func: Func::Tanh,
            args: vec![gen_expr(rng, depth - 1)],
            pos: 0,
        },
        8 => Expr::Call {
            func: Func::Exp,
            args: vec![Expr::Binary {
                op: BinOp::Mul,
                lhs: Box::new(Expr::Const(0.3)),
                rhs: sub(rng),
                pos: 0,
            }],
            pos: 0,
        },
        9 => Expr::Call {
            func: if rng.gen_bool(0.5) { Func::Log } else { Func::Sqrt },
            args: vec![*positive(rng)],
            pos: 0,
        },
        10 => Expr::Call {
            func: Func::Abs,
            args: vec![gen_expr(rng, depth - 1)],
            pos: 0,
        },
        _ => Expr::Call {
            func: if rng.gen_bool(0.5) { Func::Min } else { Func::Max },
            args: vec![gen_expr(rng, depth - 1), gen_expr(rng, depth - 1)],
            pos: 0,
        },
    }
}

fn gen_bindings(rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    VAR_NAMES
        .iter()
        .map(|n| (n.to_string(), rng.gen_range(0.3..2.5)))
        .collect()
}

/// Finite differences are meaningless within a step of a kink, so samples
/// whose abs/min/max arguments sit near their tie point are skipped rather
/// than compared.
fn near_kink(e: &Expr, b: &BTreeMap<String, f64>) -> bool {
    match e {
        Expr::Const(_) | Expr::Var(_) => false,
        Expr::Neg(inner) => near_kink(inner, b),
        Expr::Binary { lhs, rhs, .. } => near_kink(lhs, b) || near_kink(rhs, b),
        Expr::PowInt { base, .. } => near_kink(base, b),
        Expr::Call { func, args, .. } => {
            if args.iter().any(|a| near_kink(a, b)) {
                return true;
            }
            match func {
                Func::Abs => match eval(&args[0], b) {
                    Ok(v) => v.abs() < 1e-4,
                    Err(_) => true,
                },
                Func::Min | Func::Max => {
                    match (eval(&args[0], b), eval(&args[1], b)) {
                        (Ok(a), Ok(c)) => (a - c).abs() < 1e-4,
                        _ => true,
                    }
                }
                _ => false,
            }
        }
    }
}

#[test]
fn property_dual_derivative_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < 1000 {
        attempts += 1;
        assert!(attempts < 30_000, "generator rejected too many samples");
        let depth = rng.gen_range(1..=6);
        let expr = gen_expr(&mut rng, depth);
        let b = gen_bindings(&mut rng);
        let Ok(value) = eval(&expr, &b) else { continue };
        if !value.is_finite() || value.abs() > 1e8 || near_kink(&expr, &b) {
            continue;
        }
        let mut sample_ok = true;
        for name in VAR_NAMES {
            let x = b[name];
            let h = 1e-6 * x.abs().max(1.0);
            let mut lo = b.clone();
            let mut hi = b.clone();
            *lo.get_mut(name).unwrap() = x - h;
            *hi.get_mut(name).unwrap() = x + h;
            let (Ok(f_lo), Ok(f_hi)) = (eval(&expr, &lo), eval(&expr, &hi)) else {
                sample_ok = false;
                break;
            };
            let fd = (f_hi - f_lo) / (2.0 * h);
            let dual = eval_dual(&expr, &b, name).unwrap();
            assert_eq!(dual.value.to_bits(), value.to_bits(), "value part must be bit-identical");
            if !fd.is_finite() || fd.abs() > 1e8 {
                sample_ok = false;
                break;
            }
            let rel = (dual.deriv - fd).abs() / dual.deriv.abs().max(fd.abs()).max(1.0);
            assert!(
                rel <= 1e-6,
                "derivative mismatch on {expr} at {b:?} seed {name}: dual {} vs fd {fd}",
                dual.deriv
            );
        }
        if sample_ok {
            accepted += 1;
        }
    }
}

#[test]
fn property_printer_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xca11);
    let declared = names(&VAR_NAMES);
    for _ in 0..200 {
        let depth = rng.gen_range(1..=6);
        let expr = gen_expr(&mut rng, depth);
        let printed = expr.to_source();
        let reparsed = parse_source(&printed, &declared)
            .unwrap_or_else(|e| panic!("printed form failed to parse: {printed}: {e}"));
        for _ in 0..100 {
            let b = gen_bindings(&mut rng);
            let a = eval(&expr, &b);
            let c = eval(&reparsed, &b);
            match (a, c) {
                (Ok(x), Ok(y)) => assert_eq!(
                    x.to_bits(),
                    y.to_bits(),
                    "round-trip drift for {printed} at {b:?}"
                ),
                (Err(_), Err(_)) => {}
                other => panic!("round-trip error asymmetry for {printed}: {other:?}"),
            }
        }
    }
}

#[test]
fn property_evaluation_is_pure() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let expr = gen_expr(&mut rng, 5);
        let b = gen_bindings(&mut rng);
        let first = eval(&expr, &b);
        let second = eval(&expr, &b);
        match (first, second) {
            (Ok(x), Ok(y)) => assert_eq!(x.to_bits(), y.to_bits()),
            (Err(x), Err(y)) => assert_eq!(x, y),
            other => panic!("impure evaluation: {other:?}"),
        }
    }
}
