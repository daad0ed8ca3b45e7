//! End-to-end termination inference for one program and query.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::accept::{generate_sigma, solve_scc, SccSolution, SccStatus};
use crate::adorn::{adorned_predicates, adornment_sets, AdornmentSet};
use crate::ast::{PredKey, Program, QuerySpec};
use crate::error::{Error, Result};
use crate::levelmap::{level_maps, LevelMap};
use crate::logic::Condition;
use crate::normalize::prepare;
use crate::par::Execution;
use crate::shape::{infer_shapes, require_integer_query, ShapeTable};
use crate::specialize::{adorn, adorn_queries, AdornedProgram, AdornedQuery};

#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub exec: Execution,
}

/// Which way the final condition was assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Every query adornment terminates: the condition is `true`.
    Unconditional,
    /// Some recursive adornments were proved, possibly under residuals.
    Refined,
    /// Only the adornments that never reach recursion.
    NonRecursiveOnly,
}

impl Case {
    pub fn letter(self) -> &'static str {
        match self {
            Case::Unconditional => "a",
            Case::Refined => "b",
            Case::NonRecursiveOnly => "c",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// Outcome for one adornment of the query.
#[derive(Clone, Debug)]
pub struct QueryVerdict {
    pub query: AdornedQuery,
    /// Never reaches a recursive predicate.
    pub nonrecursive: bool,
    /// Indices of the recursive components it reaches.
    pub sccs: Vec<usize>,
    /// What it adds to the final condition, if anything.
    pub contribution: Option<Condition>,
}

impl QueryVerdict {
    pub fn fully_discharged(&self, sccs: &[SccSolution]) -> bool {
        !self.nonrecursive
            && self
                .sccs
                .iter()
                .all(|&i| sccs[i].status == SccStatus::Discharged)
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub query: QuerySpec,
    /// After built-in normalization, homogenization and disjunction removal.
    pub program: Program,
    pub shapes: ShapeTable,
    pub sets: BTreeMap<PredKey, AdornmentSet>,
    pub adorned: AdornedProgram,
    pub queries: Vec<AdornedQuery>,
    pub maps: BTreeMap<PredKey, LevelMap>,
    pub obligations: Vec<crate::accept::Obligation>,
    pub sccs: Vec<SccSolution>,
    pub verdicts: Vec<QueryVerdict>,
    pub cond1: Condition,
    pub cond2: Condition,
    pub condition: Condition,
    pub case: Case,
    pub notes: Vec<String>,
}

/// Runs the whole pipeline on a program carrying a query directive.
pub fn analyze(p: &Program, opts: &Options) -> Result<Analysis> {
    let exec = opts.exec;
    let query = p
        .query
        .clone()
        .ok_or_else(|| Error::input("missing query directive"))?;
    require_integer_query(&query).map_err(|e| e.at("query"))?;
    let program = prepare(p);
    let shapes = infer_shapes(&program, &query).map_err(|e| e.at("shapes"))?;
    let preds = adorned_predicates(&program, &query.pred, &shapes);
    let sets = adornment_sets(&program, &preds, &shapes).map_err(|e| e.at("adornments"))?;
    let adorned = adorn(&program, &sets, exec).map_err(|e| e.at("specialization"))?;
    let queries = adorn_queries(&query, sets.get(&query.pred));
    let maps = level_maps(&adorned);

    let deps = adorned.program.deps();
    let mut components: Vec<BTreeSet<PredKey>> = Vec::new();
    let mut verdicts = Vec::new();
    for aq in &queries {
        let reach = deps.reachable(&aq.pred);
        let mut mine = Vec::new();
        for k in reach.iter().filter(|k| deps.recursive(k)) {
            let comp = deps.component(k);
            let i = match components.iter().position(|c| *c == comp) {
                Some(i) => i,
                None => {
                    components.push(comp);
                    components.len() - 1
                }
            };
            if !mine.contains(&i) {
                mine.push(i);
            }
        }
        verdicts.push(QueryVerdict {
            query: aq.clone(),
            nonrecursive: mine.is_empty(),
            sccs: mine,
            contribution: None,
        });
    }

    let scope: BTreeSet<PredKey> = components.iter().flatten().cloned().collect();
    let obligations =
        generate_sigma(&adorned, &maps, &scope, exec).map_err(|e| e.at("acceptability"))?;
    let mut sccs = Vec::with_capacity(components.len());
    for comp in components {
        let own_query = comp
            .iter()
            .all(|k| adorned.origin(k).is_some_and(|o| o.pred == query.pred));
        let origin = own_query.then_some(&query.pred);
        sccs.push(
            solve_scc(comp, &obligations, &maps, origin, exec)
                .map_err(|e| e.at("acceptability"))?,
        );
    }

    let mut cond1 = Condition::falsity();
    let mut cond2 = Condition::falsity();
    for v in &mut verdicts {
        let c = &v.query.adornment.cond;
        if v.nonrecursive {
            cond1 = cond1.or(c)?;
            v.contribution = Some(c.clone());
            continue;
        }
        let mut extra = Condition::truth();
        let mut ok = true;
        for &i in &v.sccs {
            let s = &sccs[i];
            match s.status {
                SccStatus::Discharged => {}
                SccStatus::Residual if s.members.contains(&v.query.pred) => {
                    extra = extra.and(s.residual.as_ref().expect("residual component"))?;
                }
                _ => ok = false,
            }
        }
        if ok {
            let contrib = c.and(&extra)?;
            if !contrib.is_false() {
                cond2 = cond2.or(&contrib)?;
                v.contribution = Some(contrib);
            }
        }
    }

    let mut notes: Vec<String> = preds
        .iter()
        .filter(|k| !program.deps().mutual(k, &query.pred))
        .map(|k| {
            format!(
                "{} is recursive apart from {} and has its own adornment set",
                k, query.pred
            )
        })
        .collect();
    notes.extend(sccs.iter().flat_map(|s| s.notes.iter().cloned()));
    let open: Vec<&QueryVerdict> = verdicts.iter().filter(|v| !v.nonrecursive).collect();
    let (case, condition) = if open.iter().all(|v| v.fully_discharged(&sccs)) {
        (Case::Unconditional, Condition::truth())
    } else if !cond2.is_false() {
        notes.push("the condition is sufficient but may not be the weakest one".into());
        (Case::Refined, cond1.or(&cond2)?.merged()?)
    } else {
        (Case::NonRecursiveOnly, cond1.merged()?)
    };
    notes.dedup();

    Ok(Analysis {
        query,
        program,
        shapes,
        sets,
        adorned,
        queries,
        maps,
        obligations,
        sccs,
        verdicts,
        cond1,
        cond2,
        condition,
        case,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_user_program;

    fn run(src: &str) -> Analysis {
        analyze(&parse_user_program("t", src).unwrap(), &Options::default()).unwrap()
    }

    #[test]
    fn helper_recursion_is_noted() {
        let a = run(":- query(p(int)).\n\
                     p(X) :- X > 0, down(X), Y is X - 1, p(Y).\n\
                     down(0).\n\
                     down(N) :- N > 0, M is N - 1, down(M).");
        assert!(a.condition.is_true());
        assert_eq!(a.case, Case::Unconditional);
        assert!(a
            .notes
            .iter()
            .any(|n| n.starts_with("down/1 is recursive apart from p/1")));
    }

    #[test]
    fn non_recursive_query_is_unconditional() {
        let a = run(":- query(p(int)).\np(X) :- X > 0.\np(0).");
        assert!(a.condition.is_true());
        assert!(a.sccs.is_empty());
    }

    #[test]
    fn missing_directive_is_an_input_error() {
        let p = crate::parse::parse_program("t", "p(1).").unwrap();
        assert!(analyze(&p, &Options::default()).unwrap_err().is_input());
    }
}
