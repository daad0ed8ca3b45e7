//! The reference interpreter: step budgets and fact-only programs.

mod common;

use num_bigint::BigInt;
use numterm::ast::{Atom, Clause, Program, Term};
use numterm::oracle::{Interpreter, Status};
use numterm::sample;
use numterm::symbol::Var;
use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn more_budget_never_changes_a_finished_run(
        name in prop::sample::select(CORPUS.to_vec()),
        seed in any::<u64>(),
        budget in 1u64..3_000,
    ) {
        let p = load(name);
        let q = p.query.clone().unwrap();
        let pt = sample::random_point(&q, -30, 30, &mut sample::rng(seed));
        let g = sample::query_atom(&q, &q.pred.name, &pt);
        let i = Interpreter::new(&p);
        let (Ok(small), Ok(large)) = (i.run(&g, budget), i.run(&g, budget * 2)) else {
            return Ok(());
        };
        prop_assert!(small.steps <= budget);
        match small.status {
            Status::AllFinite => prop_assert_eq!(small, large),
            Status::BudgetExceeded => {
                prop_assert!(large.steps >= small.steps);
                if large.status == Status::AllFinite {
                    prop_assert!(large.steps > budget);
                }
            }
        }
    }

    #[test]
    fn fact_programs_finish_within_one_step_per_clause(
        facts in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 0..12),
        goal in prop::collection::vec(prop::option::of(-3i64..=3), 2),
    ) {
        let clauses: Vec<Clause> = facts
            .iter()
            .map(|f| Clause::new(Atom::new("f", f.iter().map(|n| Term::Int(BigInt::from(*n))).collect()), vec![]))
            .collect();
        let p = Program::new("facts".to_string(), clauses.clone(), None);
        let args: Vec<Term> = goal
            .iter()
            .enumerate()
            .map(|(i, g)| match g {
                Some(n) => Term::Int(BigInt::from(*n)),
                None => Term::Var(Var::new(format!("A{}", i))),
            })
            .collect();
        let r = Interpreter::new(&p).run(&Atom::new("f", args), 1_000).unwrap();
        prop_assert_eq!(r.status, Status::AllFinite);
        prop_assert!(r.steps <= clauses.len() as u64 + 1, "{} steps for {} facts", r.steps, clauses.len());
        let mut want: Vec<String> = facts
            .iter()
            .filter(|f| f.iter().zip(&goal).all(|(x, g)| g.is_none_or(|g| g == *x)))
            .map(|f| format!("({},{})", f[0], f[1]))
            .collect();
        want.sort();
        let mut got = r.answers.clone();
        got.sort();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn runaway_recursion_hits_the_budget() {
    let p = load("loop7b");
    let r = Interpreter::new(&p)
        .run(&Atom::new("p", vec![Term::Int(BigInt::from(8))]), 5_000)
        .unwrap();
    assert_eq!(r.status, Status::BudgetExceeded);
    assert!(r.steps <= 5_000);
}
