//! Seeded sampling of integer query points, for spot checks against the
//! interpreter.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adorn::denominator;
use crate::ast::{Atom, Mode, QuerySpec, Term};
use crate::logic::{fm, Condition, LinAtom, LinTerm};
use crate::symbol::Var;

pub const DEFAULT_SEED: u64 = 0x5eed_2002;

/// A query point: one integer per `int` position, keyed by denominator.
pub type Point = BTreeMap<Var, i64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Denominators of the `int` positions of the query.
pub fn int_denominators(q: &QuerySpec) -> Vec<Var> {
    q.modes
        .iter()
        .enumerate()
        .filter(|(_, m)| **m == Mode::Int)
        .map(|(i, _)| denominator(&q.pred.name, i))
        .collect()
}

pub fn random_point(q: &QuerySpec, lo: i64, hi: i64, rng: &mut impl Rng) -> Point {
    int_denominators(q)
        .into_iter()
        .map(|v| (v, rng.gen_range(lo..=hi)))
        .collect()
}

/// Up to `n` points in `[lo, hi]` satisfying `cond`. Each draw picks a
/// disjunct and fixes one coordinate at a time inside the interval the
/// disjunct still allows, so thin regions such as `x = y` get hit; gives up
/// after `50 * n` draws.
pub fn sample_satisfying(
    q: &QuerySpec,
    cond: &Condition,
    n: usize,
    lo: i64,
    hi: i64,
    rng: &mut impl Rng,
) -> Vec<Point> {
    let vars = int_denominators(q);
    let ds = cond.disjuncts();
    let mut out = Vec::with_capacity(n);
    if ds.is_empty() {
        return out;
    }
    for _ in 0..50 * n.max(1) {
        if out.len() == n {
            break;
        }
        let d = &ds[rng.gen_range(0..ds.len())];
        if let Some(p) = draw_in(d, &vars, lo, hi, rng) {
            if cond.holds_at_i64(&p) == Some(true) {
                out.push(p);
            }
        }
    }
    out
}

/// One point of `conj` over `vars` in `[lo, hi]`, if the coordinate-wise
/// draw finds room; other variables of `conj` are left free.
pub fn draw_in(
    conj: &[LinAtom],
    vars: &[Var],
    lo: i64,
    hi: i64,
    rng: &mut impl Rng,
) -> Option<Point> {
    let clip =
        |b: &Option<BigInt>, d: i64| b.as_ref().and_then(|b| i64::try_from(b).ok()).unwrap_or(d);
    let mut p = Point::new();
    for v in vars {
        let fixed: Vec<LinAtom> = conj
            .iter()
            .map(|a| a.substitute(&|x| p.get(x).map(|n| LinTerm::constant(*n))))
            .collect();
        let iv = fm::box_of(&fixed).ok()??.get(v);
        let (a, b) = (clip(&iv.lo, lo).max(lo), clip(&iv.hi, hi).min(hi));
        if a > b {
            return None;
        }
        p.insert(v.clone(), rng.gen_range(a..=b));
    }
    Some(p)
}

/// The query atom for `pred` at `point`; non-integer positions get
/// distinct fresh variables.
pub fn query_atom(q: &QuerySpec, pred: &str, point: &Point) -> Atom {
    let args = (0..q.modes.len())
        .map(|i| match point.get(&denominator(&q.pred.name, i)) {
            Some(n) => Term::Int(BigInt::from(*n)),
            None => Term::Var(Var::new(format!("A{}", i))),
        })
        .collect();
    Atom::new(pred, args)
}
