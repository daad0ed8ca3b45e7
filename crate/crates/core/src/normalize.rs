//! Source-level normalization: comparison rewriting, homogeneous heads,
//! disjunction splitting, and inlining of `is/2` chains.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::error::{Error, Result};
use crate::symbol::Var;

/// `E1 =:= E2` becomes `E1 >= E2, E1 =< E2`; `E1 =\= E2` becomes
/// `(E1 > E2 ; E1 < E2)`.
pub fn normalize_builtins(p: &Program) -> Program {
    fn goals(gs: &[Goal]) -> Vec<Goal> {
        let mut out = Vec::with_capacity(gs.len());
        for g in gs {
            match g {
                Goal::Cmp(CmpOp::ArithEq, l, r) => {
                    out.push(Goal::Cmp(CmpOp::Ge, l.clone(), r.clone()));
                    out.push(Goal::Cmp(CmpOp::Le, l.clone(), r.clone()));
                }
                Goal::Cmp(CmpOp::ArithNe, l, r) => out.push(Goal::Disj(vec![
                    vec![Goal::Cmp(CmpOp::Gt, l.clone(), r.clone())],
                    vec![Goal::Cmp(CmpOp::Lt, l.clone(), r.clone())],
                ])),
                Goal::Disj(alts) => out.push(Goal::Disj(alts.iter().map(|a| goals(a)).collect())),
                g => out.push(g.clone()),
            }
        }
        out
    }
    p.with_clauses(
        p.clauses()
            .iter()
            .map(|c| Clause::new(c.head.clone(), goals(&c.body)))
            .collect(),
    )
}

/// Makes every head argument a distinct variable. The first occurrence of a
/// variable stays in place; repeats and non-variable arguments are replaced
/// by fresh `_H<n>` variables bound by leading `=/2` goals.
pub fn homogenize(p: &Program) -> Program {
    p.with_clauses(p.clauses().iter().map(homogenize_clause).collect())
}

pub fn homogenize_clause(c: &Clause) -> Clause {
    let mut fresh = FreshVars::new();
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    let mut args = Vec::with_capacity(c.head.args.len());
    let mut eqs = Vec::new();
    for a in &c.head.args {
        match a {
            Term::Var(v) if seen.insert(v.clone()) => args.push(a.clone()),
            other => {
                let h = fresh.fresh();
                args.push(Term::Var(h.clone()));
                eqs.push(Goal::Unify(Term::Var(h), other.clone()));
            }
        }
    }
    eqs.extend(c.body.iter().cloned());
    Clause::new(
        Atom {
            pred: c.head.pred.clone(),
            args,
        },
        eqs,
    )
}

/// Splits clauses on body disjunctions, first disjunction outermost.
pub fn eliminate_disjunctions(p: &Program) -> Program {
    let mut out = Vec::new();
    for c in p.clauses() {
        for body in expand(&c.body) {
            out.push(Clause::new(c.head.clone(), body));
        }
    }
    p.with_clauses(out)
}

fn expand(goals: &[Goal]) -> Vec<Vec<Goal>> {
    let mut acc: Vec<Vec<Goal>> = vec![Vec::new()];
    for g in goals {
        match g {
            Goal::Disj(alts) => {
                let mut next = Vec::new();
                for prefix in &acc {
                    for alt in alts {
                        for tail in expand(alt) {
                            let mut b = prefix.clone();
                            b.extend(tail);
                            next.push(b);
                        }
                    }
                }
                acc = next;
            }
            g => acc.iter_mut().for_each(|b| b.push(g.clone())),
        }
    }
    acc
}

/// All normalization passes in order.
pub fn prepare(p: &Program) -> Program {
    eliminate_disjunctions(&homogenize(&normalize_builtins(p)))
}

/// Variables defined by `is/2` (and `=/2` with integers) in terms of head
/// variables, plus the variables whose value cannot be expressed that way.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    pub map: BTreeMap<Var, IntExpr>,
    pub opaque: BTreeSet<Var>,
}

impl Subst {
    pub fn get(&self, v: &Var) -> Option<&IntExpr> {
        self.map.get(v)
    }

    /// `e` rewritten over head variables; `None` if it mentions anything else.
    pub fn resolve(&self, e: &IntExpr, head: &[Var]) -> Option<IntExpr> {
        for v in e.vars() {
            if !head.contains(&v) && !self.map.contains_key(&v) {
                return None;
            }
        }
        Some(e.substitute(&|v| self.map.get(v).cloned()))
    }

    pub fn resolve_term(&self, t: &Term, head: &[Var]) -> Option<IntExpr> {
        self.resolve(&IntExpr::from_term(t)?, head)
    }
}

/// Inlines the `is/2` chain of `clause.body[..upto]`.
pub fn inline_is_chains(clause: &Clause, upto: usize) -> Result<Subst> {
    let head = clause.head_vars();
    let mut s = Subst::default();
    let known = |s: &Subst, v: &Var| head.contains(v) || s.map.contains_key(v);
    for g in &clause.body[..upto.min(clause.body.len())] {
        match g {
            Goal::Is(Term::Var(x), e) => {
                if known(&s, x) || s.opaque.contains(x) {
                    continue;
                }
                if e.vars().contains(x) {
                    return Err(Error::input(format!(
                        "circular definition of {} in `{}`",
                        x, g
                    )));
                }
                match s.resolve(e, &head) {
                    Some(r) if !e.has_div_mod() => {
                        s.map.insert(x.clone(), r);
                    }
                    _ => {
                        s.opaque.insert(x.clone());
                    }
                }
            }
            Goal::Unify(l, r) => {
                let bind = |s: &mut Subst, v: &Var, t: &Term| match t {
                    Term::Int(n) => {
                        s.map.insert(v.clone(), IntExpr::Lit(n.clone()));
                    }
                    Term::Var(w) if known(s, w) => {
                        let e = s.resolve(&IntExpr::Var(w.clone()), &head).expect("known");
                        s.map.insert(v.clone(), e);
                    }
                    _ => {
                        s.opaque.insert(v.clone());
                    }
                };
                match (l, r) {
                    (Term::Var(v), t) if !known(&s, v) && !s.opaque.contains(v) => {
                        bind(&mut s, v, t)
                    }
                    (t, Term::Var(v)) if !known(&s, v) && !s.opaque.contains(v) => {
                        bind(&mut s, v, t)
                    }
                    _ => {
                        for v in l.vars().into_iter().chain(r.vars()) {
                            if !known(&s, &v) {
                                s.opaque.insert(v);
                            }
                        }
                    }
                }
            }
            Goal::Call(a) => {
                for v in a.vars() {
                    if !known(&s, &v) {
                        s.opaque.insert(v);
                    }
                }
            }
            Goal::Disj(alts) => {
                let mut vs = Vec::new();
                alts.iter().flatten().for_each(|g| g.collect_vars(&mut vs));
                for v in vs {
                    if !known(&s, &v) {
                        s.opaque.insert(v);
                    }
                }
            }
            Goal::Is(_, _) | Goal::Cmp(..) => {}
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_clause, parse_program};

    fn prog(src: &str) -> Program {
        parse_program("t", src).unwrap()
    }

    #[test]
    fn homogenize_examples() {
        let p = homogenize(&prog("p(X,Y,Y) :- Y > 5."));
        assert_eq!(
            p.clauses()[0].to_string(),
            "p(X, Y, _H0) :- _H0 = Y, Y > 5."
        );
        let q = homogenize(&prog("q(0) :- q(1)."));
        assert_eq!(q.clauses()[0].to_string(), "q(_H0) :- _H0 = 0, q(1).");
        let r = prog("r(X, Y) :- X > Y.");
        assert_eq!(homogenize(&r), r);
    }

    #[test]
    fn disjunctions_split_in_order() {
        let p = eliminate_disjunctions(&prog("h :- (a ; b), c."));
        let text: Vec<String> = p.clauses().iter().map(|c| c.to_string()).collect();
        assert_eq!(text, ["h :- a, c.", "h :- b, c."]);
        let n = eliminate_disjunctions(&prog("h :- (a ; (b ; c))."));
        assert_eq!(n.clauses().len(), 3);
        let two = eliminate_disjunctions(&prog("h :- (a ; b), (c ; d)."));
        let text: Vec<String> = two.clauses().iter().map(|c| c.to_string()).collect();
        assert_eq!(
            text,
            ["h :- a, c.", "h :- a, d.", "h :- b, c.", "h :- b, d."]
        );
    }

    #[test]
    fn comparison_rewrites() {
        let p = prepare(&prog("c(X) :- X =\\= 0, X =:= 2*Y."));
        let text: Vec<String> = p.clauses().iter().map(|c| c.to_string()).collect();
        assert_eq!(
            text,
            [
                "c(X) :- X > 0, X >= 2*Y, X =< 2*Y.",
                "c(X) :- X < 0, X >= 2*Y, X =< 2*Y."
            ]
        );
    }

    #[test]
    fn inlining() {
        let c = parse_clause("q(X, Y) :- X > Y, Z is X - Y, q(Z, Y).").unwrap();
        let s = inline_is_chains(&c, 2).unwrap();
        assert_eq!(s.map[&Var::new("Z")].to_string(), "X-Y");

        let c = parse_clause("p(X) :- X > 1, X < 1000, X1 is -X*X, p(X1).").unwrap();
        let s = inline_is_chains(&c, 3).unwrap();
        let e = &s.map[&Var::new("X1")];
        assert_eq!(e.to_poly().unwrap().to_string(), "-X^2");

        assert_eq!(inline_is_chains(&c, 0).unwrap(), Subst::default());

        let c = parse_clause("e(X, Y) :- R is Y // 2, S is R + 1, t(S, T), U is T + X.").unwrap();
        let s = inline_is_chains(&c, 4).unwrap();
        assert!(s.opaque.contains(&Var::new("R")));
        assert!(s.opaque.contains(&Var::new("S")));
        assert!(s.opaque.contains(&Var::new("U")));

        let bad = parse_clause("b(X) :- Y is Y + X.").unwrap();
        assert!(inline_is_chains(&bad, 1).is_err());
    }
}
