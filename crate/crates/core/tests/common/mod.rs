#![allow(dead_code)]

use numterm::ast::{Clause, CmpOp, Goal, IntExpr, Program};
use numterm::infer::{analyze, Analysis, Options};
use numterm::parse::parse_user_program;

pub const CORPUS: &[&str] = &[
    "loop7",
    "loop7b",
    "osc",
    "gcd_q",
    "gcd_qa",
    "exp",
    "triangle",
    "r",
    "countdown",
    "between",
    "evenodd",
    "factorial",
];

pub fn source(name: &str) -> String {
    let path = format!("{}/corpus/{}.npl", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path, e))
}

pub fn load(name: &str) -> Program {
    parse_user_program(name, &source(name)).unwrap()
}

pub fn analysis(name: &str) -> Analysis {
    analyze(&load(name), &Options::default()).unwrap()
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}

fn orient(g: &Goal) -> Goal {
    match g {
        Goal::Cmp(op, IntExpr::Lit(n), r) if !matches!(r, IntExpr::Lit(_)) => {
            Goal::Cmp(flip(*op), r.clone(), IntExpr::Lit(n.clone()))
        }
        Goal::Disj(alts) => Goal::Disj(
            alts.iter()
                .map(|b| b.iter().map(orient).collect())
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Writes `c < X` as `X > c` so hand-written clauses compare with generated
/// ones.
pub fn oriented(c: &Clause) -> Clause {
    Clause::new(c.head.clone(), c.body.iter().map(orient).collect())
}

/// Same clauses up to order and variable renaming.
pub fn same_clauses(got: &[Clause], want: &[Clause]) -> bool {
    got.len() == want.len()
        && want
            .iter()
            .all(|w| got.iter().any(|g| oriented(g).alpha_eq(&oriented(w))))
}
