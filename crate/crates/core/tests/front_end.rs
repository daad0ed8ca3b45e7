//! Normalization keeps answers, printing round-trips, and argument shapes
//! are sound against observed calls.

mod common;

use numterm::ast::{ArithOp, Atom, Clause, CmpOp, Goal, IntExpr, Program, Term};
use numterm::normalize::{eliminate_disjunctions, homogenize, normalize_builtins, prepare};
use numterm::oracle::Interpreter;
use numterm::parse::{parse_clause, parse_program};
use numterm::sample;
use numterm::shape::{infer_shapes, ArgShape};
use numterm::symbol::Var;
use proptest::prelude::*;

use common::*;

/// Programs with non-homogeneous heads, disjunctions and unifications, on
/// top of the corpus.
const PACK: &[(&str, &str)] = &[
    (
        "sign",
        ":- query(sign(int, var)).\n\
         sign(X, S) :- (X > 0, S = 1 ; X < 0, S = -1 ; X =:= 0, S = 0).",
    ),
    (
        "steps",
        ":- query(steps(int, var)).\n\
         steps(0, 0).\n\
         steps(N, K) :- N > 0, (N mod 2 =:= 0 -> M is N // 2 ; M is N - 1), steps(M, K0), K is K0 + 1.",
    ),
    (
        "walk",
        ":- query(walk(int, int)).\n\
         walk(X, X).\n\
         walk(X, Y) :- X < Y, (Z is X + 1 ; Z is X + 2), walk(Z, Y).",
    ),
];

fn programs() -> Vec<Program> {
    let mut out: Vec<Program> = CORPUS.iter().map(|n| load(n)).collect();
    for (name, src) in PACK {
        if let Ok(p) = parse_program(name, src) {
            out.push(p);
        }
    }
    out
}

#[test]
fn pack_parses() {
    let n = PACK
        .iter()
        .filter(|(n, s)| parse_program(n, s).is_ok())
        .count();
    // if-then-else is outside the input language
    assert_eq!(n, 2);
}

#[test]
fn normalization_preserves_answers() {
    let mut rng = sample::rng(11);
    for p in programs() {
        let q = p.query.clone().unwrap();
        let variants = [
            ("builtins", normalize_builtins(&p)),
            ("homogenize", homogenize(&normalize_builtins(&p))),
            (
                "disjunctions",
                eliminate_disjunctions(&homogenize(&normalize_builtins(&p))),
            ),
            ("prepare", prepare(&p)),
        ];
        let base = Interpreter::new(&p);
        let others: Vec<(&str, Interpreter)> = variants
            .iter()
            .map(|(n, v)| (*n, Interpreter::new(v)))
            .collect();
        for _ in 0..20 {
            let point = sample::random_point(&q, -20, 20, &mut rng);
            let goal = sample::query_atom(&q, &q.pred.name, &point);
            let want = base.run(&goal, 20_000);
            for (name, i) in &others {
                let got = i.run(&goal, 20_000);
                let agree = match (&want, &got) {
                    (Ok(a), Ok(b)) => a.agrees_with(b),
                    (a, b) => a == b,
                };
                assert!(
                    agree,
                    "{} {}: {} gave {:?} vs {:?}",
                    p.name, name, goal, want, got
                );
            }
        }
    }
}

#[test]
fn corpus_prints_and_reparses() {
    for p in programs() {
        for c in prepare(&p).clauses().iter().chain(p.clauses()) {
            let back = parse_clause(&c.to_string()).unwrap();
            assert!(back.alpha_eq(c), "{} reparsed as {}", c, back);
        }
    }
}

fn var() -> impl Strategy<Value = Var> {
    prop::sample::select(vec!["X", "Y", "Z", "W1"]).prop_map(Var::new)
}

fn expr() -> impl Strategy<Value = IntExpr> {
    let leaf = prop_oneof![
        (-20i64..=20).prop_map(IntExpr::lit),
        var().prop_map(IntExpr::Var)
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| IntExpr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![
                    ArithOp::Add,
                    ArithOp::Sub,
                    ArithOp::Mul,
                    ArithOp::IntDiv,
                    ArithOp::Mod
                ]),
                inner.clone(),
                inner
            )
                .prop_map(|(op, l, r)| IntExpr::bin(op, l, r)),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (-20i64..=20).prop_map(|n| Term::Int(n.into())),
        var().prop_map(Term::Var),
        prop::sample::select(vec!["a", "nil", "[]"]).prop_map(|f| Term::Struct(f.into(), vec![])),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (
            prop::sample::select(vec!["f", "g"]),
            prop::collection::vec(inner, 1..=2),
        )
            .prop_map(|(f, args)| Term::Struct(f.into(), args))
    })
}

fn goal() -> impl Strategy<Value = Goal> {
    let cmp = prop::sample::select(vec![
        CmpOp::Lt,
        CmpOp::Gt,
        CmpOp::Le,
        CmpOp::Ge,
        CmpOp::ArithEq,
        CmpOp::ArithNe,
    ]);
    let simple = prop_oneof![
        (var(), expr()).prop_map(|(v, e)| Goal::Is(Term::Var(v), e)),
        (cmp, expr(), expr()).prop_map(|(op, l, r)| Goal::Cmp(op, l, r)),
        (var(), term()).prop_map(|(v, t)| Goal::Unify(Term::Var(v), t)),
        prop::collection::vec(term(), 0..=2).prop_map(|args| Goal::Call(Atom::new("q", args))),
    ];
    simple.prop_recursive(1, 6, 3, |inner| {
        prop::collection::vec(prop::collection::vec(inner, 1..=2), 2..=3).prop_map(Goal::Disj)
    })
}

fn clause() -> impl Strategy<Value = Clause> {
    (
        prop::collection::vec(term(), 0..=3),
        prop::collection::vec(goal(), 0..=4),
    )
        .prop_map(|(args, body)| Clause::new(Atom::new("p", args), body))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_then_parse_is_identity(c in clause()) {
        let text = c.to_string();
        let back = parse_clause(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
        prop_assert!(back.alpha_eq(&c), "{}\nreparsed as\n{}", text, back);
    }

    #[test]
    fn extra_clauses_never_make_positions_integer(
        name in prop::sample::select(CORPUS.to_vec()),
        extra in clause(),
    ) {
        let p = load(name);
        let q = p.query.clone().unwrap();
        let before = infer_shapes(&prepare(&p), &q).unwrap();
        // retarget the random clause at a predicate of the program
        let target = p.clauses()[0].head.clone();
        let mut args = extra.head.args.clone();
        args.resize(target.args.len(), Term::Var(Var::new("Fresh")));
        let added = Clause::new(Atom::new(&target.pred, args), extra.body.clone());
        let mut clauses = p.clauses().to_vec();
        clauses.push(added);
        let bigger = Program::new(p.name.clone(), clauses, Some(q.clone()));
        let Ok(after) = infer_shapes(&prepare(&bigger), &q) else { return Ok(()) };
        for (k, shapes) in &before.shapes {
            if let Some(new) = after.get(k) {
                for (i, (old, new)) in shapes.iter().zip(new).enumerate() {
                    prop_assert!(
                        !(*old == ArgShape::Any && *new == ArgShape::Int),
                        "{} position {} became INT", k, i + 1
                    );
                }
            }
        }
    }
}

#[test]
fn integer_positions_hold_integers_at_runtime() {
    let mut rng = sample::rng(12);
    for name in CORPUS {
        let p = load(name);
        let q = p.query.clone().unwrap();
        let prepared = prepare(&p);
        let shapes = infer_shapes(&prepared, &q).unwrap();
        let interp = Interpreter::new(&prepared);
        for _ in 0..100 {
            let point = sample::random_point(&q, -50, 50, &mut rng);
            let goal = sample::query_atom(&q, &q.pred.name, &point);
            let mut bad = Vec::new();
            let _ = interp.run_observed(&goal, 5_000, &mut |a| {
                if let Some(s) = shapes.get(&a.key()) {
                    for (i, (shape, t)) in s.iter().zip(&a.args).enumerate() {
                        if *shape == ArgShape::Int && !matches!(t, Term::Int(_)) {
                            bad.push(format!("{} at position {}", a, i + 1));
                        }
                    }
                }
            });
            assert!(bad.is_empty(), "{}: {:?}", name, bad);
        }
    }
}
