//! Level mappings built from adornments: one primitive map per atom of the
//! adornment, combined with natural or symbolic weights.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::adorn::denominators;
use crate::ast::PredKey;
use crate::logic::{Condition, LinAtom, LinTerm, Poly};
use crate::specialize::AdornedProgram;
use crate::symbol::Var;

/// `E` where the source atom reads `E > 0` or `E >= 0`; zero off the atom.
/// Maps without a source atom are constantly zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveMap {
    pub source: Option<LinAtom>,
    pub expr: LinTerm,
}

impl PrimitiveMap {
    pub fn zero() -> Self {
        PrimitiveMap {
            source: None,
            expr: LinTerm::zero(),
        }
    }

    pub fn of_atom(a: &LinAtom) -> Self {
        PrimitiveMap {
            source: Some(a.clone()),
            expr: a.term().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.source.is_none()
    }

    /// Value at a point given over denominators.
    pub fn eval(&self, point: &dyn Fn(&Var) -> Option<BigInt>) -> Option<BigInt> {
        match &self.source {
            None => Some(BigInt::zero()),
            Some(a) => {
                if a.holds_at(point)? {
                    self.expr.eval(point)
                } else {
                    Some(BigInt::zero())
                }
            }
        }
    }
}

/// One map per atom shared by every disjunct of the adornment; a zero map
/// when there is none and the adornment is a proper disjunction.
pub fn primitive_maps(adornment: &Condition) -> Vec<PrimitiveMap> {
    let ds = adornment.disjuncts();
    let Some(first) = ds.first() else {
        return vec![PrimitiveMap::zero()];
    };
    let common: Vec<&LinAtom> = first
        .iter()
        .filter(|a| ds[1..].iter().all(|d| d.contains(a)))
        .collect();
    let mut maps: Vec<PrimitiveMap> = common.into_iter().map(PrimitiveMap::of_atom).collect();
    if ds.len() > 1 {
        maps.push(PrimitiveMap::zero());
    }
    maps
}

/// Names a weight: `W[pred][index]`, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightRef {
    pub pred: PredKey,
    pub index: usize,
}

impl fmt::Display for WeightRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{}][{}]", self.pred.name, self.index + 1)
    }
}

/// The symbolic counterpart of a natural level mapping for one adorned
/// predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelMap {
    pub pred: PredKey,
    /// The predicate whose denominators the maps are written over.
    pub origin: PredKey,
    pub maps: Vec<PrimitiveMap>,
}

impl LevelMap {
    pub fn new(pred: PredKey, origin: PredKey, adornment: &Condition) -> Self {
        LevelMap {
            pred,
            origin,
            maps: primitive_maps(adornment),
        }
    }

    pub fn empty(pred: PredKey) -> Self {
        LevelMap {
            origin: pred.clone(),
            pred,
            maps: Vec::new(),
        }
    }

    pub fn weight(&self, index: usize) -> WeightRef {
        WeightRef {
            pred: self.pred.clone(),
            index,
        }
    }

    /// Indices of maps whose weight is worth searching over.
    pub fn active(&self) -> Vec<usize> {
        (0..self.maps.len())
            .filter(|&i| !self.maps[i].is_zero())
            .collect()
    }

    /// `E_i(args)` for each active map, arguments given per position.
    /// Fails with the position of an argument a map needs but is missing.
    pub fn apply(&self, args: &[Option<Poly>]) -> Result<Vec<(WeightRef, Poly)>, usize> {
        let dens = denominators(&self.origin);
        let mut out = Vec::new();
        for i in self.active() {
            let e = &self.maps[i].expr;
            for v in e.vars() {
                let pos = dens
                    .iter()
                    .position(|d| d == v)
                    .expect("map over denominators");
                if args.get(pos).is_none_or(|a| a.is_none()) {
                    return Err(pos);
                }
            }
            let p = Poly::from_lin(e).substitute(&|v| {
                let pos = dens.iter().position(|d| d == v)?;
                args[pos].clone()
            });
            out.push((self.weight(i), p));
        }
        Ok(out)
    }

    /// The natural level mapping value for concrete weights (indexed like
    /// `maps`), arguments given per position.
    pub fn eval(&self, weights: &[u64], args: &[BigInt]) -> BigInt {
        let dens = denominators(&self.origin);
        let point = |v: &Var| {
            dens.iter()
                .position(|d| d == v)
                .and_then(|i| args.get(i).cloned())
        };
        self.maps
            .iter()
            .zip(weights)
            .map(|(m, w)| m.eval(&point).unwrap_or_default() * BigInt::from(*w))
            .sum()
    }
}

impl fmt::Display for LevelMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dens: Vec<String> = denominators(&self.origin)
            .iter()
            .map(|d| d.to_string())
            .collect();
        write!(f, "|{}({})|^s = ", self.pred.name, dens.join(", "))?;
        if self.maps.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| match &m.source {
                Some(_) => format!("{}*({})", self.weight(i), m.expr),
                None => format!("{}*0", self.weight(i)),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One level map per adorned predicate of the program.
pub fn level_maps(ap: &AdornedProgram) -> BTreeMap<PredKey, LevelMap> {
    ap.origins
        .iter()
        .map(|(k, o)| {
            (
                k.clone(),
                LevelMap::new(k.clone(), o.pred.clone(), &o.adornment.cond),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(s: &str) -> Condition {
        Condition::parse(s).unwrap()
    }

    fn p1() -> PredKey {
        PredKey::new("p", 1)
    }

    #[test]
    fn conjunction_gives_one_map_per_atom() {
        let m = LevelMap::new(PredKey::new("p__a", 1), p1(), &cond("p1 > 1 /\\ p1 < 1000"));
        let exprs: Vec<String> = m.maps.iter().map(|m| m.expr.to_string()).collect();
        assert_eq!(exprs.len(), 2);
        assert!(exprs.contains(&"p1 - 1".to_string()), "{:?}", exprs);
        assert!(exprs.contains(&"-p1 + 1000".to_string()), "{:?}", exprs);
    }

    #[test]
    fn disjunction_gives_zero() {
        let m = primitive_maps(&cond(
            "p1 =< -1000 \\/ (p1 >= -1 /\\ p1 =< 1) \\/ p1 >= 1000",
        ));
        assert_eq!(m, vec![PrimitiveMap::zero()]);
    }

    #[test]
    fn single_atom() {
        let m = primitive_maps(&cond("p1 >= 7"));
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].expr.to_string(), "p1 - 7");
    }

    #[test]
    fn application() {
        let q = PredKey::new("q", 2);
        let m = LevelMap::new(PredKey::new("q__a", 2), q, &cond("q1 > q2"));
        let x = Poly::var(Var::new("X"));
        let y = Poly::var(Var::new("Y"));
        let head = m.apply(&[Some(x.clone()), Some(y.clone())]).unwrap();
        assert_eq!(head[0].1.to_string(), "X - Y");
        let call = m.apply(&[Some(x.sub(&y)), Some(y.clone())]).unwrap();
        assert_eq!(head[0].1.sub(&call[0].1).to_string(), "Y");
        assert_eq!(m.apply(&[None, Some(y)]), Err(0));
        assert_eq!(head[0].0.to_string(), "W[q__a][1]");
    }

    #[test]
    fn natural_evaluation_is_piecewise() {
        let m = LevelMap::new(PredKey::new("p__b", 1), p1(), &cond("p1 >= 7"));
        assert_eq!(m.eval(&[1], &[BigInt::from(10)]), BigInt::from(3));
        assert_eq!(m.eval(&[1], &[BigInt::from(3)]), BigInt::from(0));
        assert_eq!(m.eval(&[0], &[BigInt::from(10)]), BigInt::from(0));
    }
}
