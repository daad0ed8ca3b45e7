//! Decrease obligations between a clause head and each call into its own
//! recursive component, and the search for weights (and, failing that,
//! residual conditions on head variables) that discharge them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::adorn::denominator;
use crate::ast::*;
use crate::error::Result;
use crate::guard::{guard_before, Guard};
use crate::levelmap::{LevelMap, WeightRef};
use crate::logic::fm;
use crate::logic::poly::poly_positive;
use crate::logic::{Condition, LinAtom, LinTerm, Poly};
use crate::par::{self, Execution};
use crate::specialize::{AdornedProgram, Provenance};
use crate::symbol::Var;

/// Most weights searched per adorned predicate.
pub const MAX_WEIGHTS_PER_PRED: usize = 8;
/// Most weights searched per recursive component.
pub const MAX_WEIGHTS_PER_SCC: usize = 20;

/// `Σ W · poly`: the level of the head minus the level of the call.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decrease {
    pub terms: BTreeMap<WeightRef, Poly>,
}

impl Decrease {
    fn add(&mut self, w: WeightRef, p: Poly) {
        let e = self.terms.entry(w).or_insert_with(Poly::zero);
        *e = e.add(&p);
        self.terms.retain(|_, p| !p.is_zero());
    }

    /// The decrease under a 0/1 weight assignment.
    pub fn at(&self, on: &BTreeSet<WeightRef>) -> Poly {
        self.terms
            .iter()
            .filter(|(w, _)| on.contains(*w))
            .fold(Poly::zero(), |acc, (_, p)| acc.add(p))
    }

    pub fn weights(&self) -> impl Iterator<Item = &WeightRef> {
        self.terms.keys()
    }
}

impl fmt::Display for Decrease {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, p)| format!("{}*({})", w, p))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Level of the head must exceed level of the call by at least one wherever
/// the guard holds.
#[derive(Clone, Debug)]
pub struct Obligation {
    /// Index into the adorned program's clauses.
    pub clause: usize,
    pub provenance: Option<Provenance>,
    pub head: PredKey,
    pub call: PredKey,
    /// Body index of the call.
    pub call_index: usize,
    /// Head variable per argument position.
    pub head_vars: Vec<Var>,
    pub guard: Guard,
    /// Call arguments over head variables, where expressible.
    pub call_args: Vec<Option<Poly>>,
    /// `Err` holds why no decrease could be formed.
    pub decrease: std::result::Result<Decrease, String>,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.decrease {
            Ok(d) => write!(f, "{} |- {} >= 1", self.guard, d),
            Err(e) => write!(f, "{} |- ? ({})", self.guard, e),
        }
    }
}

fn head_vars(c: &Clause) -> Vec<Var> {
    c.head
        .args
        .iter()
        .map(|t| t.as_var().cloned().expect("homogeneous head"))
        .collect()
}

/// One obligation per call from a clause into the recursive component of
/// its own head.
pub fn generate_sigma(
    ap: &AdornedProgram,
    maps: &BTreeMap<PredKey, LevelMap>,
    scope: &BTreeSet<PredKey>,
    exec: Execution,
) -> Result<Vec<Obligation>> {
    let deps = ap.program.deps();
    let mut out = Vec::new();
    for (ci, ac) in ap.clauses.iter().enumerate() {
        let c = &ac.clause;
        let head = c.head.key();
        if !scope.contains(&head) {
            continue;
        }
        let hv = head_vars(c);
        let head_cond = match ap.origin(&head) {
            Some(o) => crate::adorn::at_head(&o.adornment.cond, &o.pred, c)?,
            None => Condition::truth(),
        };
        for (bi, g) in c.body.iter().enumerate() {
            let Goal::Call(a) = g else { continue };
            let call = a.key();
            if !deps.mutual(&head, &call) {
                continue;
            }
            let (guard, subst) = guard_before(c, &head_cond, bi, exec)?;
            let call_args: Vec<Option<Poly>> = a
                .args
                .iter()
                .map(|t| subst.resolve_term(t, &hv).and_then(|e| e.to_poly()))
                .collect();
            let head_args: Vec<Option<Poly>> =
                hv.iter().map(|v| Some(Poly::var(v.clone()))).collect();
            let empty_h = LevelMap::empty(head.clone());
            let empty_c = LevelMap::empty(call.clone());
            let hm = maps.get(&head).unwrap_or(&empty_h);
            let cm = maps.get(&call).unwrap_or(&empty_c);
            let decrease = match (hm.apply(&head_args), cm.apply(&call_args)) {
                (Ok(h), Ok(k)) => {
                    let mut d = Decrease::default();
                    h.into_iter().for_each(|(w, p)| d.add(w, p));
                    k.into_iter().for_each(|(w, p)| d.add(w, p.neg()));
                    Ok(d)
                }
                (_, Err(pos)) | (Err(pos), _) => Err(format!(
                    "argument {} of `{}` is not expressible over head variables",
                    pos + 1,
                    a
                )),
            };
            out.push(Obligation {
                clause: ci,
                provenance: ac.provenance.clone(),
                head: head.clone(),
                call,
                call_index: bi,
                head_vars: hv.clone(),
                guard,
                call_args,
                decrease,
            });
        }
    }
    Ok(out)
}

/// How an obligation was settled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Discharged,
    /// Holds under this condition on the head, over denominators.
    Residual(LinAtom),
    Failed(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Discharged => f.write_str("discharged"),
            Outcome::Residual(r) => write!(f, "residual {}", r),
            Outcome::Failed(why) => write!(f, "failed: {}", why),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SccStatus {
    Discharged,
    Residual,
    Failed,
}

/// The result for one recursive component of the adorned program.
#[derive(Clone, Debug)]
pub struct SccSolution {
    pub members: BTreeSet<PredKey>,
    /// Indices into the obligation list.
    pub obligations: Vec<usize>,
    pub outcomes: Vec<Outcome>,
    /// Chosen 0/1 weights, when some assignment was usable.
    pub weights: Option<BTreeMap<WeightRef, u64>>,
    pub status: SccStatus,
    /// Conjunction of accepted residuals, over the denominators of `origin`.
    pub residual: Option<Condition>,
    pub notes: Vec<String>,
}

/// Checks `D >= 1` on every disjunct of the guard, with extra atoms.
fn decreases(d: &Poly, guard: &Guard, extra: &[LinAtom], exec: Execution) -> Result<bool> {
    for g in &guard.disjuncts {
        let mut lin = g.lin.clone();
        lin.extend(extra.iter().cloned());
        if !poly_positive(d, &lin, exec)?.proved() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lin_of(p: &Option<Poly>) -> Option<LinTerm> {
    p.as_ref().and_then(|p| p.as_linear())
}

/// `r` over denominators of `origin` is preserved by every obligation: if
/// it holds at the head (and the guard), it holds at the call.
fn invariant(r: &LinAtom, origin: &PredKey, obligations: &[&Obligation]) -> Result<bool> {
    for o in obligations {
        let dens: Vec<Var> = (0..o.head_vars.len())
            .map(|i| denominator(&origin.name, i))
            .collect();
        let at_head = r.substitute(&|v| {
            dens.iter()
                .position(|d| d == v)
                .map(|i| LinTerm::var(o.head_vars[i].clone()))
        });
        let mut call_terms = BTreeMap::new();
        for v in r.vars() {
            let Some(i) = dens.iter().position(|d| d == v) else {
                return Ok(false);
            };
            let Some(t) = o.call_args.get(i).and_then(lin_of) else {
                return Ok(false);
            };
            call_terms.insert(v.clone(), t);
        }
        let at_call = r.substitute(&|v| call_terms.get(v).cloned());
        for g in &o.guard.disjuncts {
            let mut lin = g.lin.clone();
            lin.push(at_head.clone());
            if !fm::entails(&lin, &at_call)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Residual candidates for one obligation under fixed weights, over head
/// variables: `v > 0` and `v >= 0` for head variables with a positive
/// coefficient in `D`, and `D >= 1` itself.
fn candidates(d: &LinTerm, head: &[Var]) -> Vec<LinAtom> {
    let mut out = Vec::new();
    for (v, c) in d.coeffs() {
        if c.is_positive() && head.contains(v) {
            out.push(LinAtom::gt(LinTerm::var(v.clone())));
            out.push(LinAtom::ge(LinTerm::var(v.clone())));
        }
    }
    if !d.is_constant() && d.vars().all(|v| head.contains(v)) {
        out.push(LinAtom::ge(d.sub(&LinTerm::constant(BigInt::one()))));
    }
    let mut seen = Vec::new();
    out.retain(|a| {
        if seen.contains(a) {
            false
        } else {
            seen.push(a.clone());
            true
        }
    });
    out
}

fn to_denominators(a: &LinAtom, head: &[Var], origin: &PredKey) -> LinAtom {
    a.rename(&|v| match head.iter().position(|h| h == v) {
        Some(i) => denominator(&origin.name, i),
        None => v.clone(),
    })
}

/// The weakest residual making `o` decrease that every obligation of the
/// component preserves.
fn residual_for(
    o: &Obligation,
    on: &BTreeSet<WeightRef>,
    origin: &PredKey,
    all: &[&Obligation],
    exec: Execution,
) -> Result<Option<LinAtom>> {
    let Ok(dec) = &o.decrease else {
        return Ok(None);
    };
    let d = dec.at(on);
    let Some(lin) = d.as_linear() else {
        return Ok(None);
    };
    let mut accepted: Vec<LinAtom> = Vec::new();
    for r in candidates(&lin, &o.head_vars) {
        if r.trivial() == Some(false) {
            continue;
        }
        if !decreases(&d, &o.guard, std::slice::from_ref(&r), exec)? {
            continue;
        }
        let rd = to_denominators(&r, &o.head_vars, origin);
        if invariant(&rd, origin, all)? {
            accepted.push(rd);
        }
    }
    for a in &accepted {
        let mut weakest = true;
        for b in &accepted {
            if !fm::entails(std::slice::from_ref(b), a)? {
                weakest = false;
                break;
            }
        }
        if weakest {
            return Ok(Some(a.clone()));
        }
    }
    Ok(accepted.into_iter().next())
}

fn assignment(ws: &[WeightRef], mask: u64) -> BTreeSet<WeightRef> {
    ws.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, w)| w.clone())
        .collect()
}

/// Masks over `k` weights, fewest ones first.
fn masks_by_popcount(k: usize) -> Vec<u64> {
    let mut m: Vec<u64> = (0..1u64 << k).collect();
    m.sort_by_key(|x| (x.count_ones(), *x));
    m
}

/// Weight search for one recursive component. Residuals are only looked
/// for when every member is an adornment of `residual_origin`.
pub fn solve_scc(
    members: BTreeSet<PredKey>,
    obligations: &[Obligation],
    maps: &BTreeMap<PredKey, LevelMap>,
    residual_origin: Option<&PredKey>,
    exec: Execution,
) -> Result<SccSolution> {
    let idx: Vec<usize> = (0..obligations.len())
        .filter(|&i| members.contains(&obligations[i].head))
        .collect();
    let obs: Vec<&Obligation> = idx.iter().map(|&i| &obligations[i]).collect();
    let mut sol = SccSolution {
        members: members.clone(),
        obligations: idx.clone(),
        outcomes: vec![Outcome::Failed("not attempted".into()); idx.len()],
        weights: None,
        status: SccStatus::Failed,
        residual: None,
        notes: Vec::new(),
    };
    let mut ws: Vec<WeightRef> = Vec::new();
    for m in &members {
        if let Some(lm) = maps.get(m) {
            let active = lm.active();
            if active.len() > MAX_WEIGHTS_PER_PRED {
                sol.notes.push(format!(
                    "weight cap exceeded: {} has {} primitive maps (> {})",
                    m.name,
                    active.len(),
                    MAX_WEIGHTS_PER_PRED
                ));
                return Ok(sol);
            }
            ws.extend(active.into_iter().map(|i| lm.weight(i)));
        }
    }
    if ws.len() > MAX_WEIGHTS_PER_SCC {
        sol.notes.push(format!(
            "weight cap exceeded: {} weights in one component (> {})",
            ws.len(),
            MAX_WEIGHTS_PER_SCC
        ));
        return Ok(sol);
    }
    if let Some((i, o)) = obs.iter().enumerate().find(|(_, o)| o.decrease.is_err()) {
        let why = o.decrease.clone().unwrap_err();
        sol.outcomes[i] = Outcome::Failed(why.clone());
        sol.notes.push(why);
        return Ok(sol);
    }
    let masks = masks_by_popcount(ws.len());
    let discharges = |o: &Obligation, on: &BTreeSet<WeightRef>| -> bool {
        let d = o.decrease.as_ref().expect("checked").at(on);
        decreases(&d, &o.guard, &[], exec).unwrap_or(false)
    };
    let full = par::find_first(exec, &masks, |&m| {
        let on = assignment(&ws, m);
        obs.iter().all(|o| discharges(o, &on))
    });
    let weights_of = |on: &BTreeSet<WeightRef>| -> BTreeMap<WeightRef, u64> {
        ws.iter()
            .map(|w| (w.clone(), u64::from(on.contains(w))))
            .collect()
    };
    if let Some(i) = full {
        let on = assignment(&ws, masks[i]);
        sol.weights = Some(weights_of(&on));
        sol.outcomes = vec![Outcome::Discharged; obs.len()];
        sol.status = SccStatus::Discharged;
        return Ok(sol);
    }
    let Some(origin) = residual_origin else {
        sol.notes.push(
            "no weights discharge every obligation; residuals need a component of query adornments"
                .into(),
        );
        sol.outcomes = vec![Outcome::Failed("no discharging weights".into()); obs.len()];
        return Ok(sol);
    };
    // residual search, first usable assignment in the same order
    let attempt = |m: u64| -> Result<Option<Vec<Outcome>>> {
        let on = assignment(&ws, m);
        let mut outcomes = Vec::with_capacity(obs.len());
        for o in &obs {
            if discharges(o, &on) {
                outcomes.push(Outcome::Discharged);
                continue;
            }
            match residual_for(o, &on, origin, &obs, exec)? {
                Some(r) => outcomes.push(Outcome::Residual(r)),
                None => return Ok(None),
            }
        }
        Ok(Some(outcomes))
    };
    let found = par::find_first(exec, &masks, |&m| matches!(attempt(m), Ok(Some(_))));
    match found {
        Some(i) => {
            let outcomes = attempt(masks[i])?.expect("found");
            let mut atoms: Vec<LinAtom> = Vec::new();
            for o in &outcomes {
                if let Outcome::Residual(r) = o {
                    if !atoms.contains(r) {
                        atoms.push(r.clone());
                    }
                }
            }
            sol.weights = Some(weights_of(&assignment(&ws, masks[i])));
            sol.residual = Some(Condition::conj(atoms)?);
            sol.outcomes = outcomes;
            sol.status = SccStatus::Residual;
        }
        None => {
            sol.outcomes = vec![Outcome::Failed("no weights and no residual".into()); obs.len()];
            sol.notes
                .push("no 0/1 weights discharge the component, with or without residuals".into());
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn popcount_order() {
        assert_eq!(masks_by_popcount(2), vec![0, 1, 2, 3]);
        assert_eq!(masks_by_popcount(3), vec![0, 1, 2, 4, 3, 5, 6, 7]);
    }

    #[test]
    fn candidate_grammar() {
        let y = Var::new("Y");
        let x = Var::new("X");
        let d = LinTerm::var(y.clone());
        let c = candidates(&d, &[x.clone(), y.clone()]);
        let s: Vec<String> = c.iter().map(|a| a.to_string()).collect();
        assert_eq!(s, ["Y > 0", "Y >= 0", "Y >= 1"]);
        let d = LinTerm::var(y.clone()).add(&LinTerm::constant(1));
        let s: Vec<String> = candidates(&d, &[x, y])
            .iter()
            .map(|a| a.to_string())
            .collect();
        assert_eq!(s, ["Y > 0", "Y >= 0"]);
        assert!(candidates(&LinTerm::constant(-1), &[]).is_empty());
    }
}
