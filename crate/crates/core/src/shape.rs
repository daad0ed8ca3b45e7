//! Which argument positions are always integers at call time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::*;
use crate::error::{Error, Result};
use crate::symbol::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArgShape {
    Int,
    /// Free at every call.
    Var,
    Any,
}

impl ArgShape {
    pub fn meet(self, other: ArgShape) -> ArgShape {
        if self == other {
            self
        } else {
            ArgShape::Any
        }
    }
}

impl fmt::Display for ArgShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgShape::Int => "int",
            ArgShape::Var => "var",
            ArgShape::Any => "any",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShapeTable {
    /// Call pattern per reached predicate; unreached predicates are absent.
    pub shapes: BTreeMap<PredKey, Vec<ArgShape>>,
    pub diagnostics: BTreeSet<String>,
}

impl ShapeTable {
    pub fn reached(&self, p: &PredKey) -> bool {
        self.shapes.contains_key(p)
    }

    pub fn get(&self, p: &PredKey) -> Option<&[ArgShape]> {
        self.shapes.get(p).map(|v| v.as_slice())
    }

    pub fn is_int(&self, p: &PredKey, i: usize) -> bool {
        self.get(p)
            .is_some_and(|s| s.get(i) == Some(&ArgShape::Int))
    }

    pub fn int_positions(&self, p: &PredKey) -> Vec<usize> {
        self.get(p)
            .map(|s| {
                s.iter()
                    .enumerate()
                    .filter(|(_, a)| **a == ArgShape::Int)
                    .map(|(i, _)| i)
                    .collect()
            })
            .unwrap_or_default()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarState {
    Int,
    Unbound,
    Any,
}

struct Walker<'a> {
    clause: &'a Clause,
    key: PredKey,
    env: BTreeMap<Var, VarState>,
    head_pos: BTreeMap<Var, usize>,
    pattern: &'a [ArgShape],
    calls: Vec<(PredKey, Vec<ArgShape>)>,
    diags: Vec<String>,
}

impl<'a> Walker<'a> {
    fn state(&self, v: &Var) -> VarState {
        self.env.get(v).copied().unwrap_or(VarState::Unbound)
    }

    fn expr_is_int(&self, e: &IntExpr) -> bool {
        e.vars().iter().all(|v| self.state(v) == VarState::Int)
    }

    fn require_int(&mut self, e: &IntExpr, why: &str) {
        for v in e.vars() {
            if self.state(&v) != VarState::Int {
                if let Some(&i) = self.head_pos.get(&v) {
                    if self.pattern[i] != ArgShape::Int {
                        self.diags.push(format!(
                            "shape: {} arg {} not integer ({} `{}`)",
                            self.key,
                            i + 1,
                            why,
                            v
                        ));
                    }
                }
                self.env.insert(v, VarState::Int);
            }
        }
    }

    fn term_shape(&self, t: &Term) -> ArgShape {
        match t {
            Term::Int(_) => ArgShape::Int,
            Term::Var(v) => match self.state(v) {
                VarState::Int => ArgShape::Int,
                VarState::Unbound => ArgShape::Var,
                VarState::Any => ArgShape::Any,
            },
            Term::Struct(..) => match IntExpr::from_term(t) {
                Some(e) if self.expr_is_int(&e) => ArgShape::Int,
                _ => ArgShape::Any,
            },
        }
    }

    fn run(mut self) -> (Vec<(PredKey, Vec<ArgShape>)>, Vec<String>) {
        for (i, a) in self.clause.head.args.iter().enumerate() {
            if let Term::Var(v) = a {
                let st = match self.pattern[i] {
                    ArgShape::Int => VarState::Int,
                    ArgShape::Var => VarState::Unbound,
                    ArgShape::Any => VarState::Any,
                };
                self.env.insert(v.clone(), st);
                self.head_pos.insert(v.clone(), i);
            }
        }
        for g in &self.clause.body {
            self.goal(g);
        }
        (self.calls, self.diags)
    }

    fn goal(&mut self, g: &Goal) {
        match g {
            Goal::Is(l, e) => {
                self.require_int(e, "evaluated by is/2");
                if let Term::Var(v) = l {
                    self.env.insert(v.clone(), VarState::Int);
                }
            }
            Goal::Cmp(_, l, r) => {
                self.require_int(l, "compared");
                self.require_int(r, "compared");
            }
            Goal::Unify(l, r) => self.unify(l, r),
            Goal::Call(a) => {
                let pattern: Vec<ArgShape> = a.args.iter().map(|t| self.term_shape(t)).collect();
                self.calls.push((a.key(), pattern));
                for v in a.vars() {
                    if self.state(&v) != VarState::Int {
                        self.env.insert(v, VarState::Any);
                    }
                }
            }
            Goal::Disj(alts) => {
                // keep only what every branch agrees on
                let before = self.env.clone();
                let mut merged: Option<BTreeMap<Var, VarState>> = None;
                for alt in alts {
                    self.env = before.clone();
                    for g in alt {
                        self.goal(g);
                    }
                    merged = Some(match merged {
                        None => self.env.clone(),
                        Some(m) => {
                            let mut out = m.clone();
                            for (v, s) in &self.env {
                                let prev = m.get(v).copied().unwrap_or(VarState::Unbound);
                                out.insert(v.clone(), if prev == *s { *s } else { VarState::Any });
                            }
                            for (v, s) in &m {
                                if !self.env.contains_key(v) && *s != VarState::Unbound {
                                    out.insert(v.clone(), VarState::Any);
                                }
                            }
                            out
                        }
                    });
                }
                self.env = merged.unwrap_or(before);
            }
        }
    }

    fn unify(&mut self, l: &Term, r: &Term) {
        let int_side = |w: &Self, t: &Term| match t {
            Term::Int(_) => true,
            Term::Var(v) => w.state(v) == VarState::Int,
            _ => false,
        };
        let (li, ri) = (int_side(self, l), int_side(self, r));
        match (l, r) {
            (Term::Var(a), Term::Var(b)) => {
                let s = match (self.state(a), self.state(b)) {
                    _ if li || ri => VarState::Int,
                    (VarState::Unbound, s) | (s, VarState::Unbound) => s,
                    _ => VarState::Any,
                };
                self.env.insert(a.clone(), s);
                self.env.insert(b.clone(), s);
            }
            (Term::Var(v), _) if ri => {
                self.env.insert(v.clone(), VarState::Int);
            }
            (_, Term::Var(v)) if li => {
                self.env.insert(v.clone(), VarState::Int);
            }
            _ => {
                for v in l.vars().into_iter().chain(r.vars()) {
                    if self.state(&v) != VarState::Int {
                        self.env.insert(v, VarState::Any);
                    }
                }
            }
        }
    }
}

/// Left-to-right abstract execution from the query's call pattern, iterated
/// to a fixpoint over all reached predicates.
pub fn infer_shapes(p: &Program, q: &QuerySpec) -> Result<ShapeTable> {
    if !p.defines(&q.pred) {
        return Err(Error::input(format!(
            "query predicate {} is not defined",
            q.pred
        )));
    }
    let mut table = ShapeTable::default();
    let start: Vec<ArgShape> = q
        .modes
        .iter()
        .map(|m| match m {
            Mode::Int => ArgShape::Int,
            Mode::Var => ArgShape::Var,
            Mode::Any => ArgShape::Any,
        })
        .collect();
    table.shapes.insert(q.pred.clone(), start);
    let mut diags = BTreeSet::new();
    loop {
        let mut changed = false;
        let reached: Vec<(PredKey, Vec<ArgShape>)> = table
            .shapes
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (key, pattern) in reached {
            for (_, c) in p.clauses_of(&key) {
                let w = Walker {
                    clause: c,
                    key: key.clone(),
                    env: BTreeMap::new(),
                    head_pos: BTreeMap::new(),
                    pattern: &pattern,
                    calls: Vec::new(),
                    diags: Vec::new(),
                };
                let (calls, ds) = w.run();
                diags.extend(ds);
                for (callee, pat) in calls {
                    match table.shapes.get_mut(&callee) {
                        None => {
                            table.shapes.insert(callee, pat);
                            changed = true;
                        }
                        Some(cur) => {
                            for (c, n) in cur.iter_mut().zip(pat) {
                                let m = c.meet(n);
                                if m != *c {
                                    *c = m;
                                    changed = true;
                                }
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    table.diagnostics = diags;
    Ok(table)
}

/// Refuses query classes with no integer argument at all.
pub fn require_integer_query(q: &QuerySpec) -> Result<()> {
    if q.modes.contains(&Mode::Int) {
        Ok(())
    } else {
        Err(Error::input(format!("non-integer query class {}", q)))
    }
}
