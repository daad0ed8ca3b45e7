//! Properties of the linear/polynomial logic checked against brute force.

use std::collections::BTreeMap;

use numterm::logic::poly::poly_positive;
use numterm::logic::{fm, Condition, LinAtom, LinTerm, Poly, Rel};
use numterm::par::Execution;
use numterm::report::{condition_from_json, condition_json};
use numterm::symbol::Var;
use proptest::prelude::*;

fn names() -> Vec<Var> {
    ["x", "y", "z"].iter().map(Var::new).collect()
}

fn atom(nvars: usize) -> impl Strategy<Value = LinAtom> {
    (
        prop::collection::vec(-3i64..=3, nvars),
        -10i64..=10,
        any::<bool>(),
    )
        .prop_map(|(cs, k, strict)| {
            let mut t = LinTerm::constant(k);
            for (v, c) in names().into_iter().zip(cs) {
                t.add_coeff(v, c.into());
            }
            LinAtom::new(t, if strict { Rel::Gt } else { Rel::Ge })
        })
}

fn conj(nvars: usize) -> impl Strategy<Value = Vec<LinAtom>> {
    prop::collection::vec(atom(nvars), 1..=4)
}

fn condition(nvars: usize) -> impl Strategy<Value = Condition> {
    prop::collection::vec(prop::collection::vec(atom(nvars), 1..=3), 0..=3)
        .prop_map(|ds| Condition::from_disjuncts(ds).unwrap())
}

fn grid(nvars: usize, r: i64) -> Vec<BTreeMap<Var, i64>> {
    let mut out = vec![BTreeMap::new()];
    for v in names().into_iter().take(nvars) {
        out = out
            .into_iter()
            .flat_map(|p| {
                let v = v.clone();
                (-r..=r).map(move |x| {
                    let mut q = p.clone();
                    q.insert(v.clone(), x);
                    q
                })
            })
            .collect();
    }
    out
}

fn holds(a: &LinAtom, p: &BTreeMap<Var, i64>) -> bool {
    a.holds_at_i64(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn consistency_matches_enumeration((n, c) in (1usize..=3).prop_flat_map(|n| (Just(n), conj(n)))) {
        let model = grid(n, 15).iter().any(|p| c.iter().all(|a| holds(a, p)));
        let consistent = fm::consistent(&c).unwrap();
        if model {
            prop_assert!(consistent, "{:?} has a model but was judged inconsistent", c);
        }
        if !consistent {
            prop_assert!(!model);
        }
    }

    #[test]
    fn entailment_has_no_counterexample(c in conj(2), target in atom(2)) {
        if fm::entails(&c, &target).unwrap() {
            for p in grid(2, 15) {
                if c.iter().all(|a| holds(a, &p)) {
                    prop_assert!(holds(&target, &p), "{:?} at {:?}", target, p);
                }
            }
        }
    }

    #[test]
    fn negation_is_complement(c in condition(2)) {
        let n = c.negate().unwrap();
        for p in grid(2, 8) {
            let a = c.holds_at_i64(&p).unwrap();
            let b = n.holds_at_i64(&p).unwrap();
            prop_assert!(a != b, "{} and its negation {} agree at {:?}", c, n, p);
        }
    }

    #[test]
    fn equivalence_laws(c in condition(2), d in condition(2)) {
        prop_assert!(c.equivalent(&c).unwrap());
        prop_assert_eq!(c.equivalent(&d).unwrap(), d.equivalent(&c).unwrap());
        let mut rev = c.disjuncts().to_vec();
        rev.reverse();
        let r = Condition::from_disjuncts(rev).unwrap();
        prop_assert!(c.equivalent(&r).unwrap());
        prop_assert!(c.merged().unwrap().equivalent(&c).unwrap());
    }

    #[test]
    fn condition_text_round_trips(c in condition(3)) {
        let back = Condition::parse(&c.to_string()).unwrap();
        prop_assert!(back.equivalent(&c).unwrap(), "{} reparsed as {}", c, back);
        let json = serde_json::to_value(condition_json(&c)).unwrap();
        let back = condition_from_json(&json).unwrap();
        prop_assert!(back.equivalent(&c).unwrap());
    }

    #[test]
    fn proved_positivity_holds(
        cs in prop::collection::vec(-3i64..=3, 6),
        guard in prop::collection::vec(atom(2), 0..=3),
    ) {
        let x = Poly::var(Var::new("x"));
        let y = Poly::var(Var::new("y"));
        let terms = [
            Poly::constant(1),
            x.clone(),
            y.clone(),
            x.mul(&x),
            x.mul(&y),
            y.mul(&y),
        ];
        let p = terms
            .iter()
            .zip(&cs)
            .fold(Poly::zero(), |acc, (t, c)| acc.add(&t.scale(&(*c).into())));
        if poly_positive(&p, &guard, Execution::Sequential).unwrap().proved() {
            let far = [-10_000i64, -1000, -100, 100, 1000, 10_000];
            let points = grid(2, 30).into_iter().chain(far.iter().flat_map(|a| {
                far.iter().map(move |b| BTreeMap::from([(Var::new("x"), *a), (Var::new("y"), *b)]))
            }));
            for pt in points {
                if guard.iter().all(|a| holds(a, &pt)) {
                    let v = p.eval(&|v| pt.get(v).map(|n| (*n).into())).unwrap();
                    prop_assert!(v > num_bigint::BigInt::from(0), "{} at {:?} is {}", p, pt, v);
                }
            }
        }
    }
}
