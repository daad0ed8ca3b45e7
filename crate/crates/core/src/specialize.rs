//! The adornment transformation: every recursive predicate `p` is split into
//! one predicate `p__x` per adornment `x`, each recursive call is preceded by
//! the guard of the adornment it is routed to, and clauses whose guards
//! cannot hold are dropped.

use std::collections::BTreeMap;
use std::fmt;

use crate::adorn::{at_head, denominators, Adornment, AdornmentSet};
use crate::ast::*;
use crate::error::{Error, Result};
use crate::guard::{condition_goals, first_inconsistency};
use crate::logic::Condition;
use crate::par::Execution;
use crate::symbol::Var;

pub const SEPARATOR: &str = "__";

pub fn adorned_name(pred: &str, adornment: &str) -> String {
    format!("{}{}{}", pred, SEPARATOR, adornment)
}

/// Where an adorned clause came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// 0-based index into the normalized program.
    pub origin: usize,
    pub head: String,
    pub calls: Vec<String>,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "from clause {}, head={}", self.origin + 1, self.head)?;
        for (i, c) in self.calls.iter().enumerate() {
            write!(f, ", call{}={}", i + 1, c)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdornedClause {
    pub clause: Clause,
    /// `None` for clauses of predicates that are not adorned.
    pub provenance: Option<Provenance>,
    /// Body goals dropped after a guard that can never hold.
    pub truncated: bool,
}

/// A clause removed because its guard is unsatisfiable before any user call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeletedClause {
    pub provenance: Provenance,
    /// The candidate clause, before deletion.
    pub clause: Clause,
    /// Index of the body goal after which the guard became unsatisfiable.
    pub at_goal: usize,
}

/// What an adorned predicate stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    pub pred: PredKey,
    pub adornment: Adornment,
}

#[derive(Clone, Debug)]
pub struct AdornedProgram {
    pub program: Program,
    pub clauses: Vec<AdornedClause>,
    pub deleted: Vec<DeletedClause>,
    pub sets: BTreeMap<PredKey, AdornmentSet>,
    pub origins: BTreeMap<PredKey, Origin>,
}

impl AdornedProgram {
    pub fn origin(&self, p: &PredKey) -> Option<&Origin> {
        self.origins.get(p)
    }

    pub fn provenance_of(&self, clause_index: usize) -> Option<&Provenance> {
        self.clauses
            .get(clause_index)
            .and_then(|c| c.provenance.as_ref())
    }
}

impl fmt::Display for AdornedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            if let Some(p) = &c.provenance {
                writeln!(f, "% {}", p)?;
            }
            writeln!(f, "{}", c.clause)?;
        }
        Ok(())
    }
}

/// One element of the adorned query set: run `pred` on queries satisfying
/// `adornment`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdornedQuery {
    pub adornment: Adornment,
    pub pred: PredKey,
}

impl fmt::Display for AdornedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.adornment.cond, self.pred)
    }
}

pub fn adorn_queries(q: &QuerySpec, set: Option<&AdornmentSet>) -> Vec<AdornedQuery> {
    match set {
        Some(s) => s
            .adornments
            .iter()
            .map(|a| AdornedQuery {
                adornment: a.clone(),
                pred: PredKey::new(&adorned_name(&q.pred.name, &a.name), q.pred.arity),
            })
            .collect(),
        None => vec![AdornedQuery {
            adornment: Adornment {
                name: "a".into(),
                cond: Condition::truth(),
            },
            pred: q.pred.clone(),
        }],
    }
}

fn rename_atom(a: &Atom, name: &str) -> Atom {
    Atom {
        pred: name.into(),
        args: a.args.clone(),
    }
}

/// A condition over `key`'s denominators instantiated at a call's arguments.
fn call_guard(cond: &Condition, call: &Atom) -> Result<Vec<Goal>> {
    let key = call.key();
    let mut args: BTreeMap<Var, IntExpr> = BTreeMap::new();
    let used = cond.vars();
    for (d, t) in denominators(&key).into_iter().zip(&call.args) {
        if !used.contains(&d) {
            continue;
        }
        match IntExpr::from_term(t) {
            Some(e) => {
                args.insert(d, e);
            }
            None => {
                return Err(Error::input(format!(
                    "argument `{}` of `{}` is not an integer expression",
                    t, call
                )))
            }
        }
    }
    Ok(condition_goals(cond, &|v| {
        args.get(v)
            .cloned()
            .unwrap_or_else(|| IntExpr::Var(v.clone()))
    }))
}

/// Drops comparisons that repeat one of the clause's leading comparisons
/// over head variables.
fn dedupe_prefix(c: &Clause) -> Clause {
    let head = c.head_vars();
    let over_head = |g: &Goal| match g {
        Goal::Cmp(_, l, r) => l
            .vars()
            .iter()
            .chain(r.vars().iter())
            .all(|v| head.contains(v)),
        Goal::Unify(l, r) => l
            .vars()
            .iter()
            .chain(r.vars().iter())
            .all(|v| head.contains(v)),
        _ => false,
    };
    let mut prefix: Vec<&Goal> = Vec::new();
    let mut in_prefix = true;
    let mut body = Vec::with_capacity(c.body.len());
    for g in &c.body {
        in_prefix = in_prefix && over_head(g);
        if matches!(g, Goal::Cmp(..)) {
            if prefix.contains(&g) {
                continue;
            }
            if in_prefix {
                prefix.push(g);
            }
        }
        body.push(g.clone());
    }
    Clause::new(c.head.clone(), body)
}

/// Builds the adorned program for the given adornment sets (one per adorned
/// predicate). Clauses of other predicates are kept unchanged.
pub fn adorn(
    p: &Program,
    sets: &BTreeMap<PredKey, AdornmentSet>,
    exec: Execution,
) -> Result<AdornedProgram> {
    for k in p.defined_preds() {
        if k.name.contains(SEPARATOR) {
            return Err(Error::input(format!(
                "predicate name {} uses the reserved separator `{}`",
                k, SEPARATOR
            )));
        }
    }
    let mut clauses = Vec::new();
    let mut deleted = Vec::new();
    let mut origins = BTreeMap::new();
    for (k, s) in sets {
        for a in &s.adornments {
            origins.insert(
                PredKey::new(&adorned_name(&k.name, &a.name), k.arity),
                Origin {
                    pred: k.clone(),
                    adornment: a.clone(),
                },
            );
        }
    }
    for (idx, c) in p.clauses().iter().enumerate() {
        let key = c.head.key();
        let Some(head_set) = sets.get(&key) else {
            clauses.push(AdornedClause {
                clause: c.clone(),
                provenance: None,
                truncated: false,
            });
            continue;
        };
        // positions of calls to adorned predicates
        let calls: Vec<(usize, &AdornmentSet)> = c
            .body
            .iter()
            .enumerate()
            .filter_map(|(i, g)| match g {
                Goal::Call(a) => sets.get(&a.key()).map(|s| (i, s)),
                _ => None,
            })
            .collect();
        for h in &head_set.adornments {
            let mut choice = vec![0usize; calls.len()];
            loop {
                let mut body = Vec::new();
                let mut j = 0;
                for (i, g) in c.body.iter().enumerate() {
                    match g {
                        Goal::Call(a) if j < calls.len() && calls[j].0 == i => {
                            let ad = &calls[j].1.adornments[choice[j]];
                            body.extend(call_guard(&ad.cond, a)?);
                            body.push(Goal::Call(rename_atom(a, &adorned_name(&a.pred, &ad.name))));
                            j += 1;
                        }
                        g => body.push(g.clone()),
                    }
                }
                let head = rename_atom(&c.head, &adorned_name(&key.name, &h.name));
                let candidate = Clause::new(head, body);
                let prov = Provenance {
                    origin: idx,
                    head: h.name.clone(),
                    calls: calls
                        .iter()
                        .zip(&choice)
                        .map(|((_, s), &x)| s.adornments[x].name.clone())
                        .collect(),
                };
                let head_cond = at_head(&h.cond, &key, &candidate)?;
                match first_inconsistency(&candidate, &head_cond, exec)? {
                    Some(k) if !candidate.body[..k].iter().any(|g| g.is_user_call()) => {
                        deleted.push(DeletedClause {
                            provenance: prov,
                            clause: candidate,
                            at_goal: k,
                        });
                    }
                    Some(k) => {
                        let cut =
                            Clause::new(candidate.head.clone(), candidate.body[..=k].to_vec());
                        clauses.push(AdornedClause {
                            clause: dedupe_prefix(&cut),
                            provenance: Some(prov),
                            truncated: true,
                        });
                    }
                    None => clauses.push(AdornedClause {
                        clause: dedupe_prefix(&candidate),
                        provenance: Some(prov),
                        truncated: false,
                    }),
                }
                // odometer, last call fastest
                let mut pos = choice.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    choice[pos] += 1;
                    if choice[pos] < calls[pos].1.len() {
                        break;
                    }
                    choice[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if choice.is_empty() || pos == usize::MAX {
                    break;
                }
            }
        }
    }
    let program = Program::new(
        format!("{}{}adorned", p.name, SEPARATOR),
        clauses.iter().map(|c| c.clause.clone()).collect(),
        None,
    );
    Ok(AdornedProgram {
        program,
        clauses,
        deleted,
        sets: sets.clone(),
        origins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adorn::{adorned_predicates, adornment_sets};
    use crate::normalize::prepare;
    use crate::parse::{parse_clause, parse_program};
    use crate::shape::infer_shapes;

    fn adorned(src: &str) -> AdornedProgram {
        let p = prepare(&parse_program("t", src).unwrap());
        let q = p.query.clone().unwrap();
        let shapes = infer_shapes(&p, &q).unwrap();
        let preds = adorned_predicates(&p, &q.pred, &shapes);
        let sets = adornment_sets(&p, &preds, &shapes).unwrap();
        adorn(&p, &sets, Execution::Sequential).unwrap()
    }

    fn texts(a: &AdornedProgram) -> Vec<String> {
        a.clauses.iter().map(|c| c.clause.to_string()).collect()
    }

    #[test]
    fn loop_two_clauses() {
        let a = adorned(":- query(p(int)).\np(X) :- X < 7, X1 is X + 1, p(X1).");
        assert_eq!(
            texts(&a),
            [
                "p__a(X) :- X < 7, X1 is X+1, X1 < 7, p__a(X1).",
                "p__a(X) :- X < 7, X1 is X+1, X1 >= 7, p__b(X1).",
            ]
        );
        assert_eq!(a.deleted.len(), 2);
        assert_eq!(
            a.clauses[1].provenance.as_ref().unwrap().to_string(),
            "from clause 1, head=a, call1=b"
        );
        let expected = parse_clause("p__a(Y) :- Y < 7, Y1 is Y+1, Y1 >= 7, p__b(Y1).").unwrap();
        assert!(a.clauses[1].clause.alpha_eq(&expected));
    }

    #[test]
    fn oscillation_four_clauses() {
        let a = adorned(
            ":- query(p(int)).\np(X) :- X > 1, X < 1000, X1 is -X*X, p(X1).\np(X) :- X < -1, X > -1000, X1 is X*X, p(X1).",
        );
        let heads: Vec<(String, String)> = a
            .clauses
            .iter()
            .map(|c| {
                let p = c.provenance.as_ref().unwrap();
                (p.head.clone(), p.calls[0].clone())
            })
            .collect();
        let pairs: Vec<(&str, &str)> = heads
            .iter()
            .map(|(h, c)| (h.as_str(), c.as_str()))
            .collect();
        assert_eq!(pairs, [("a", "b"), ("a", "c"), ("b", "a"), ("b", "c")]);
        assert!(texts(&a)[1].contains(';'));
    }

    #[test]
    fn non_recursive_unchanged() {
        let src = ":- query(a(int)).\na(X) :- X > 0, b(X).\nb(X) :- X < 10.";
        let a = adorned(src);
        let p = prepare(&parse_program("t", src).unwrap());
        assert_eq!(a.program.clauses(), p.clauses());
        assert!(a.clauses.iter().all(|c| c.provenance.is_none()));
    }

    #[test]
    fn duplicate_guard_dropped() {
        let a = adorned(":- query(r(int)).\nr(X) :- X > 5.\nr(X) :- X > 10, r(X).");
        assert!(
            texts(&a).contains(&"r__a(X) :- X > 10, r__a(X).".to_string()),
            "{:?}",
            texts(&a)
        );
        assert_eq!(a.clauses.len(), 3);
    }

    #[test]
    fn truncation_after_a_call() {
        let a = adorned(":- query(t(int)).\nt(X) :- X > 0, t(X), X < 0, t(X).");
        let truncated: Vec<&AdornedClause> = a.clauses.iter().filter(|c| c.truncated).collect();
        assert!(!truncated.is_empty());
        for c in truncated {
            assert!(c.clause.body.iter().filter(|g| g.is_user_call()).count() == 1);
        }
    }

    #[test]
    fn queries() {
        let q = QuerySpec::new("p", vec![Mode::Int]);
        let qs = adorn_queries(&q, None);
        assert_eq!(qs.len(), 1);
        assert!(qs[0].adornment.cond.is_true());
        assert_eq!(qs[0].pred, PredKey::new("p", 1));
    }
}
