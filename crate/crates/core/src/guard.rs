//! Constraints known to hold at a point of a clause body, over head
//! variables. Built-in comparisons, `is/2` tests and integer `=/2` contribute;
//! user calls contribute nothing.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ast::*;
use crate::error::Result;
use crate::logic::cond::MAX_CONJUNCTS;
use crate::logic::fm;
use crate::logic::poly::poly_positive;
use crate::logic::{CmpRel, Condition, Conj, LinAtom, LinTerm, LogicError, Poly, PolyAtom};
use crate::normalize::{inline_is_chains, Subst};
use crate::par::Execution;
use crate::symbol::Var;

/// One conjunction; nonlinear atoms are kept apart from the linear core.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuardConj {
    pub lin: Conj,
    pub poly: Vec<PolyAtom>,
}

impl GuardConj {
    pub fn push(&mut self, a: PolyAtom) {
        match a.as_linear() {
            Some(l) => {
                if !self.lin.contains(&l) {
                    self.lin.push(l)
                }
            }
            None => {
                if !self.poly.contains(&a) {
                    self.poly.push(a)
                }
            }
        }
    }

    pub fn and(&self, other: &GuardConj) -> GuardConj {
        let mut out = self.clone();
        for l in &other.lin {
            if !out.lin.contains(l) {
                out.lin.push(l.clone());
            }
        }
        for p in &other.poly {
            out.push(p.clone());
        }
        out
    }

    /// False only when the linear part is unsatisfiable or some nonlinear
    /// atom is refuted everywhere on it.
    pub fn consistent(&self, exec: Execution) -> Result<bool> {
        if !fm::consistent_with(&self.lin, exec)? {
            return Ok(false);
        }
        for a in &self.poly {
            let refuted = poly_positive(&a.negate().as_positivity_goal(), &self.lin, exec)?;
            if refuted.proved() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for GuardConj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.lin.iter().map(|a| a.to_string()).collect();
        parts.extend(self.poly.iter().map(|a| a.to_string()));
        if parts.is_empty() {
            f.write_str("true")
        } else {
            f.write_str(&parts.join(" /\\ "))
        }
    }
}

/// Disjunction of [`GuardConj`]s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    pub disjuncts: Vec<GuardConj>,
}

impl Guard {
    pub fn truth() -> Guard {
        Guard {
            disjuncts: vec![GuardConj::default()],
        }
    }

    pub fn from_condition(c: &Condition) -> Guard {
        Guard {
            disjuncts: c
                .disjuncts()
                .iter()
                .map(|d| GuardConj {
                    lin: d.clone(),
                    poly: Vec::new(),
                })
                .collect(),
        }
    }

    /// Conjoins a disjunction of alternatives.
    pub fn and_alternatives(&self, alts: &[GuardConj]) -> Result<Guard> {
        let mut out = Vec::new();
        for d in &self.disjuncts {
            for a in alts {
                out.push(d.and(a));
            }
        }
        if out.len() > MAX_CONJUNCTS {
            return Err(LogicError::TooManyConjuncts(out.len()).into());
        }
        Ok(Guard { disjuncts: out })
    }

    pub fn prune(&mut self, exec: Execution) -> Result<()> {
        let mut kept = Vec::with_capacity(self.disjuncts.len());
        for d in self.disjuncts.drain(..) {
            if d.consistent(exec)? {
                kept.push(d);
            }
        }
        self.disjuncts = kept;
        Ok(())
    }

    pub fn is_unsat(&self) -> bool {
        self.disjuncts.is_empty()
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.disjuncts.len() {
            0 => f.write_str("false"),
            1 => write!(f, "{}", self.disjuncts[0]),
            _ => {
                let parts: Vec<String> =
                    self.disjuncts.iter().map(|d| format!("({})", d)).collect();
                f.write_str(&parts.join(" \\/ "))
            }
        }
    }
}

/// `l op r` as atoms over `Poly`. `=:=` gives two atoms; `=\=` is not
/// a conjunction and yields `None`.
pub fn compare(op: CmpOp, l: &Poly, r: &Poly) -> Option<Vec<PolyAtom>> {
    Some(match op {
        CmpOp::Lt => vec![PolyAtom::gt(r.sub(l))],
        CmpOp::Le => vec![PolyAtom::ge(r.sub(l))],
        CmpOp::Gt => vec![PolyAtom::gt(l.sub(r))],
        CmpOp::Ge => vec![PolyAtom::ge(l.sub(r))],
        CmpOp::ArithEq => vec![PolyAtom::ge(l.sub(r)), PolyAtom::ge(r.sub(l))],
        CmpOp::ArithNe => return None,
    })
}

fn resolve_poly(e: &IntExpr, s: &Subst, head: &[Var]) -> Option<Poly> {
    s.resolve(e, head)?.to_poly()
}

/// The constraint a goal adds, as a disjunction of alternatives, or `None`
/// when it constrains nothing expressible over head variables.
pub fn goal_constraint(g: &Goal, s: &Subst, head: &[Var]) -> Option<Vec<GuardConj>> {
    let one = |atoms: Vec<PolyAtom>| {
        let mut c = GuardConj::default();
        atoms.into_iter().for_each(|a| c.push(a));
        Some(vec![c])
    };
    match g {
        Goal::Cmp(CmpOp::ArithNe, l, r) => {
            let (l, r) = (resolve_poly(l, s, head)?, resolve_poly(r, s, head)?);
            let alt = |a: PolyAtom| {
                let mut c = GuardConj::default();
                c.push(a);
                c
            };
            Some(vec![
                alt(PolyAtom::gt(l.sub(&r))),
                alt(PolyAtom::gt(r.sub(&l))),
            ])
        }
        Goal::Cmp(op, l, r) => {
            let (l, r) = (resolve_poly(l, s, head)?, resolve_poly(r, s, head)?);
            one(compare(*op, &l, &r)?)
        }
        Goal::Is(Term::Var(x), e) if head.contains(x) || s.get(x).is_some() => {
            // a test: the value of x must equal e
            let l = resolve_poly(&IntExpr::Var(x.clone()), s, head)?;
            let r = resolve_poly(e, s, head)?;
            one(compare(CmpOp::ArithEq, &l, &r)?)
        }
        Goal::Is(Term::Int(n), e) => {
            let r = resolve_poly(e, s, head)?;
            one(compare(CmpOp::ArithEq, &Poly::constant(n.clone()), &r)?)
        }
        Goal::Unify(l, r) => {
            let side = |t: &Term| match t {
                Term::Int(n) => Some(Poly::constant(n.clone())),
                Term::Var(v) if head.contains(v) || s.get(v).is_some() => {
                    resolve_poly(&IntExpr::Var(v.clone()), s, head)
                }
                _ => None,
            };
            let (l, r) = (side(l)?, side(r)?);
            one(compare(CmpOp::ArithEq, &l, &r)?)
        }
        Goal::Disj(alts) => {
            let mut out = Vec::new();
            for alt in alts {
                let mut g = Guard::truth();
                for goal in alt {
                    if let Some(c) = goal_constraint(goal, s, head) {
                        g = g.and_alternatives(&c).ok()?;
                    }
                }
                out.extend(g.disjuncts);
            }
            if out.iter().any(|c| c.lin.is_empty() && c.poly.is_empty()) {
                return None;
            }
            Some(out)
        }
        Goal::Is(..) | Goal::Call(_) => None,
    }
}

/// The guard holding after `clause.body[..upto]` succeeded, starting from
/// `head` (a condition over the clause's head variables), together with the
/// `is/2` substitution at that point.
pub fn guard_before(
    clause: &Clause,
    head: &Condition,
    upto: usize,
    exec: Execution,
) -> Result<(Guard, Subst)> {
    let hv = clause.head_vars();
    let mut g = Guard::from_condition(head);
    for i in 0..upto.min(clause.body.len()) {
        let s = inline_is_chains(clause, i)?;
        if let Some(c) = goal_constraint(&clause.body[i], &s, &hv) {
            g = g.and_alternatives(&c)?;
            g.prune(exec)?;
        }
    }
    Ok((g, inline_is_chains(clause, upto)?))
}

/// Index of the first body goal after which the accumulated guard is
/// unsatisfiable, if any.
pub fn first_inconsistency(
    clause: &Clause,
    head: &Condition,
    exec: Execution,
) -> Result<Option<usize>> {
    let hv = clause.head_vars();
    let mut g = Guard::from_condition(head);
    g.prune(exec)?;
    if g.is_unsat() {
        return Ok(Some(0));
    }
    for (i, goal) in clause.body.iter().enumerate() {
        let s = inline_is_chains(clause, i)?;
        if let Some(c) = goal_constraint(goal, &s, &hv) {
            g = g.and_alternatives(&c)?;
            g.prune(exec)?;
            if g.is_unsat() {
                return Ok(Some(i));
            }
        }
    }
    Ok(None)
}

/// Renders a linear term as an expression, with variables mapped by `arg`.
/// Coefficients are expected non-negative, as produced by [`LinAtom::sides`].
pub fn lin_to_expr(t: &LinTerm, arg: &dyn Fn(&Var) -> IntExpr) -> IntExpr {
    let mut acc: Option<IntExpr> = None;
    for (v, c) in t.coeffs() {
        let (neg, mag) = (c.is_negative(), c.abs());
        let piece = if mag.is_one() {
            arg(v)
        } else {
            IntExpr::bin(ArithOp::Mul, IntExpr::Lit(mag), arg(v))
        };
        acc = Some(match acc {
            None if neg => IntExpr::Neg(Box::new(piece)),
            None => piece,
            Some(a) => IntExpr::bin(if neg { ArithOp::Sub } else { ArithOp::Add }, a, piece),
        });
    }
    let k = t.constant_part();
    match acc {
        None => IntExpr::Lit(k.clone()),
        Some(a) if k.is_zero() => a,
        Some(a) if k.is_negative() => IntExpr::bin(ArithOp::Sub, a, IntExpr::Lit(-k)),
        Some(a) => IntExpr::bin(ArithOp::Add, a, IntExpr::Lit(k.clone())),
    }
}

/// A linear atom as a comparison goal, its variables replaced by `arg`.
pub fn atom_goal(a: &LinAtom, arg: &dyn Fn(&Var) -> IntExpr) -> Goal {
    let (l, op, r) = a.sides();
    let op = match op {
        CmpRel::Lt => CmpOp::Lt,
        CmpRel::Le => CmpOp::Le,
        CmpRel::Gt => CmpOp::Gt,
        CmpRel::Ge => CmpOp::Ge,
    };
    Goal::Cmp(op, lin_to_expr(&l, arg), lin_to_expr(&r, arg))
}

/// A condition as body goals: a conjunction inline, a disjunction as `;`.
pub fn condition_goals(c: &Condition, arg: &dyn Fn(&Var) -> IntExpr) -> Vec<Goal> {
    let conj = |d: &Conj| d.iter().map(|a| atom_goal(a, arg)).collect::<Vec<_>>();
    match c.disjuncts() {
        [] => vec![Goal::Cmp(
            CmpOp::Lt,
            IntExpr::Lit(BigInt::one()),
            IntExpr::Lit(BigInt::zero()),
        )],
        [d] => conj(d),
        ds => vec![Goal::Disj(ds.iter().map(conj).collect())],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_clause;

    fn x() -> Var {
        Var::new("X")
    }

    #[test]
    fn nonlinear_refutation() {
        // X in (1, 1000) and -X*X > 1 cannot hold
        let c = parse_clause("p(X) :- X > 1, X < 1000, X1 is -X*X, X1 > 1, p(X1).").unwrap();
        let k = first_inconsistency(&c, &Condition::truth(), Execution::Sequential).unwrap();
        assert_eq!(k, Some(3));
        let c = parse_clause("p(X) :- X > 1, X < 1000, X1 is -X*X, X1 < -1, X1 > -1000, p(X1).")
            .unwrap();
        assert_eq!(
            first_inconsistency(&c, &Condition::truth(), Execution::Sequential).unwrap(),
            None
        );
    }

    #[test]
    fn head_condition_counts() {
        let c = parse_clause("p(X) :- X < 7, X1 is X + 1, p(X1).").unwrap();
        let head = Condition::parse("X >= 7").unwrap();
        assert_eq!(
            first_inconsistency(&c, &head, Execution::Sequential).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn integer_unification_is_equality() {
        let c = parse_clause("q(H) :- H = 0, q(1).").unwrap();
        let head = Condition::parse("H > 0").unwrap();
        assert_eq!(
            first_inconsistency(&c, &head, Execution::Sequential).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn guard_collects_inlined_atoms() {
        let c = parse_clause("q(X, Y) :- X > Y, Z is X - Y, Z > Y, q(Z, Y).").unwrap();
        let (g, s) = guard_before(&c, &Condition::truth(), 3, Execution::Sequential).unwrap();
        assert_eq!(g.disjuncts.len(), 1);
        assert_eq!(g.to_string(), "X > Y /\\ X > 2*Y");
        assert_eq!(s.map[&Var::new("Z")].to_string(), "X-Y");
    }

    #[test]
    fn goals_render_like_source() {
        let a = Condition::parse("p1 < 7").unwrap();
        let arg = |_: &Var| IntExpr::Var(x());
        let goals = condition_goals(&a, &arg);
        assert_eq!(goals[0].to_string(), "X < 7");
        let c = Condition::parse("p1 =< -1000 \\/ (p1 >= -1 /\\ p1 =< 1) \\/ p1 >= 1000").unwrap();
        let goals = condition_goals(&c, &arg);
        assert_eq!(goals.len(), 1);
        assert!(matches!(goals[0], Goal::Disj(ref alts) if alts.len() == 3));
        let t = LinTerm::var(x())
            .scale(&BigInt::from(2))
            .sub(&LinTerm::constant(3));
        assert_eq!(
            lin_to_expr(&t, &|v| IntExpr::Var(v.clone())).to_string(),
            "2*X-3"
        );
    }
}
