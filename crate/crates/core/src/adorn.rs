//! Maximal integer prefixes and guard-tuned adornment sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::*;
use crate::error::{Error, Result};
use crate::guard::compare;
use crate::logic::{Condition, LinAtom, LinTerm, Poly};
use crate::shape::ShapeTable;
use crate::symbol::Var;

pub const MAX_GUARDS: usize = 16;

/// The symbol naming argument `i` (0-based) of `pred` in conditions: `p1`,
/// `q2`, or `f1_2` when the name already ends in a digit.
pub fn denominator(pred: &str, i: usize) -> Var {
    if pred.ends_with(|c: char| c.is_ascii_digit()) {
        Var::new(format!("{}_{}", pred, i + 1))
    } else {
        Var::new(format!("{}{}", pred, i + 1))
    }
}

pub fn denominators(key: &PredKey) -> Vec<Var> {
    (0..key.arity).map(|i| denominator(&key.name, i)).collect()
}

/// Rewrites a condition over the denominators of `key` into one over the
/// head variables of `clause` (which must be homogeneous).
pub fn at_head(c: &Condition, key: &PredKey, clause: &Clause) -> Result<Condition> {
    let map: BTreeMap<Var, LinTerm> = denominators(key)
        .into_iter()
        .zip(&clause.head.args)
        .filter_map(|(d, a)| a.as_var().map(|v| (d, LinTerm::var(v.clone()))))
        .collect();
    Ok(c.substitute(&|v| map.get(v).cloned())?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerPrefix {
    pub clause: usize,
    /// Over head variables.
    pub atoms: Vec<LinAtom>,
    /// Index of the first body goal outside the prefix.
    pub end: usize,
    /// The prefix as a condition over the predicate's denominators.
    pub condition: Condition,
}

fn is_transparent(g: &Goal, head: &[Var]) -> bool {
    let simple = |t: &Term| match t {
        Term::Var(v) => head.contains(v),
        Term::Int(_) => true,
        Term::Struct(..) => false,
    };
    matches!(g, Goal::Unify(l, r) if simple(l) && simple(r))
}

/// Longest leading run of linear comparisons over head variables. Equalities
/// between head variables and integers (left by homogenization) are stepped
/// over without contributing.
pub fn maximal_prefix(
    clause: &Clause,
    index: usize,
    key: &PredKey,
    shapes: &ShapeTable,
) -> Result<IntegerPrefix> {
    let head = clause.head_vars();
    let mut atoms = Vec::new();
    let mut end = clause.body.len();
    for (i, g) in clause.body.iter().enumerate() {
        if is_transparent(g, &head) {
            continue;
        }
        let lin = match g {
            Goal::Cmp(op, l, r)
                if l.vars()
                    .iter()
                    .chain(r.vars().iter())
                    .all(|v| head.contains(v)) =>
            {
                match (l.to_linear(), r.to_linear()) {
                    (Some(l), Some(r)) => compare(*op, &Poly::from_lin(&l), &Poly::from_lin(&r))
                        .map(|ps| ps.iter().filter_map(|p| p.as_linear()).collect::<Vec<_>>()),
                    _ => None,
                }
            }
            _ => None,
        };
        match lin {
            Some(ls) => {
                for a in &ls {
                    for v in a.vars() {
                        let pos = clause.head.args.iter().position(|t| t.as_var() == Some(v));
                        if let Some(pos) = pos {
                            if !shapes.is_int(key, pos) {
                                return Err(Error::input(format!(
                                    "mixed guard: `{}` in clause {} of {} compares non-integer argument {}",
                                    g,
                                    index + 1,
                                    key,
                                    pos + 1
                                )));
                            }
                        }
                    }
                }
                atoms.extend(ls);
            }
            None => {
                end = i;
                break;
            }
        }
    }
    let dens = denominators(key);
    let rename: BTreeMap<Var, Var> = clause
        .head
        .args
        .iter()
        .zip(&dens)
        .filter_map(|(a, d)| a.as_var().map(|v| (v.clone(), d.clone())))
        .collect();
    let over_dens: Vec<LinAtom> = atoms
        .iter()
        .map(|a| a.rename(&|v| rename.get(v).cloned().unwrap_or_else(|| v.clone())))
        .collect();
    Ok(IntegerPrefix {
        clause: index,
        atoms,
        end,
        condition: Condition::conj(over_dens)?,
    })
}

pub fn maximal_prefixes(
    p: &Program,
    key: &PredKey,
    shapes: &ShapeTable,
) -> Result<Vec<IntegerPrefix>> {
    p.clauses_of(key)
        .map(|(i, c)| maximal_prefix(c, i, key, shapes))
        .collect()
}

/// `C_pred`: prefix conditions in clause order, equivalent ones merged.
pub fn guard_conditions(prefixes: &[IntegerPrefix]) -> Result<Vec<Condition>> {
    let mut out: Vec<Condition> = Vec::new();
    for pfx in prefixes {
        let mut dup = false;
        for c in &out {
            if c.equivalent(&pfx.condition)? {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(pfx.condition.clone());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adornment {
    pub name: String,
    pub cond: Condition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdornmentSet {
    pub pred: PredKey,
    pub adornments: Vec<Adornment>,
}

impl AdornmentSet {
    pub fn get(&self, name: &str) -> Option<&Adornment> {
        self.adornments.iter().find(|a| a.name == name)
    }

    pub fn len(&self) -> usize {
        self.adornments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adornments.is_empty()
    }

    /// The adornment holding at a point, if exactly one does.
    pub fn classify(&self, point: &BTreeMap<Var, i64>) -> Vec<&Adornment> {
        self.adornments
            .iter()
            .filter(|a| a.cond.holds_at_i64(point) == Some(true))
            .collect()
    }
}

impl fmt::Display for AdornmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .adornments
            .iter()
            .map(|a| format!("{}: {}", a.name, a.cond))
            .collect();
        write!(f, "adornments({}): {}", self.pred, parts.join(" | "))
    }
}

/// `a`, `b`, ..., `z`, `aa`, `ab`, ...
pub fn adornment_name(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).expect("ascii")
}

/// Every consistent conjunction choosing each condition or its negation,
/// positive choices first, earlier conditions varying slowest.
pub fn guard_tuned_set(pred: &PredKey, cs: &[Condition]) -> Result<AdornmentSet> {
    if cs.len() > MAX_GUARDS {
        return Err(Error::limit(format!(
            "too many distinct guards for {} ({} > {})",
            pred,
            cs.len(),
            MAX_GUARDS
        )));
    }
    let negs: Vec<Condition> = cs.iter().map(|c| c.negate()).collect::<Result<_, _>>()?;
    let mut found = Vec::new();
    fn go(
        k: usize,
        acc: Condition,
        cs: &[Condition],
        negs: &[Condition],
        found: &mut Vec<Condition>,
    ) -> Result<()> {
        if acc.is_false() {
            return Ok(());
        }
        if k == cs.len() {
            found.push(acc.merged()?);
            return Ok(());
        }
        go(k + 1, acc.and(&cs[k])?, cs, negs, found)?;
        go(k + 1, acc.and(&negs[k])?, cs, negs, found)
    }
    go(0, Condition::truth(), cs, &negs, &mut found)?;
    Ok(AdornmentSet {
        pred: pred.clone(),
        adornments: found
            .into_iter()
            .enumerate()
            .map(|(i, cond)| Adornment {
                name: adornment_name(i),
                cond,
            })
            .collect(),
    })
}

/// Predicates that get their own adornment set: recursive ones reachable
/// from the query.
pub fn adorned_predicates(p: &Program, q: &PredKey, shapes: &ShapeTable) -> BTreeSet<PredKey> {
    p.deps()
        .reachable(q)
        .into_iter()
        .filter(|k| p.deps().recursive(k) && shapes.reached(k) && p.defines(k))
        .collect()
}

pub fn adornment_sets(
    p: &Program,
    preds: &BTreeSet<PredKey>,
    shapes: &ShapeTable,
) -> Result<BTreeMap<PredKey, AdornmentSet>> {
    let mut out = BTreeMap::new();
    for k in preds {
        let cs = guard_conditions(&maximal_prefixes(p, k, shapes)?)?;
        out.insert(k.clone(), guard_tuned_set(k, &cs)?);
    }
    Ok(out)
}
