use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::symbol::Var;

/// `Σ coeff·var + constant`, with zero coefficients never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinTerm {
    coeffs: BTreeMap<Var, BigInt>,
    constant: BigInt,
}

impl LinTerm {
    pub fn zero() -> Self {
        LinTerm::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: c.into(),
        }
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(v, BigInt::one())
    }

    pub fn monomial(v: Var, c: impl Into<BigInt>) -> Self {
        let mut t = LinTerm::zero();
        t.add_coeff(v, c.into());
        t
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, BigInt> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &BigInt {
        &self.constant
    }

    pub fn coeff(&self, v: &Var) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_coeff(&mut self, v: Var, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v).or_default();
        *entry += c;
        if entry.is_zero() {
            self.coeffs.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add_constant(&mut self, c: &BigInt) {
        self.constant += c;
    }

    pub fn add(&self, other: &LinTerm) -> LinTerm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_coeff(v.clone(), c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &LinTerm) -> LinTerm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinTerm {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> LinTerm {
        if k.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
            constant: &self.constant * k,
        }
    }

    /// Replaces each variable by a linear term; unmapped variables stay.
    pub fn substitute(&self, map: &dyn Fn(&Var) -> Option<LinTerm>) -> LinTerm {
        let mut out = LinTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match map(v) {
                Some(t) => out = out.add(&t.scale(c)),
                None => out.add_coeff(v.clone(), c.clone()),
            }
        }
        out
    }

    pub fn rename(&self, map: &dyn Fn(&Var) -> Var) -> LinTerm {
        let mut out = LinTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_coeff(map(v), c.clone());
        }
        out
    }

    /// Evaluates at an integer point; `None` when a variable is unassigned.
    pub fn eval(&self, point: &dyn Fn(&Var) -> Option<BigInt>) -> Option<BigInt> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * point(v)?;
        }
        Some(acc)
    }

    pub fn eval_i64(&self, point: &BTreeMap<Var, i64>) -> Option<BigInt> {
        self.eval(&|v| point.get(v).map(|x| BigInt::from(*x)))
    }

    /// gcd of every coefficient and the constant (0 for the zero term).
    fn content(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(self.constant.abs(), |g, c| g.gcd(c))
    }
}

impl fmt::Debug for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            write_signed_term(f, c, Some(v), first)?;
            first = false;
        }
        if first || !self.constant.is_zero() {
            write_signed_term(f, &self.constant, None, first)?;
        }
        Ok(())
    }
}

fn write_signed_term(
    f: &mut fmt::Formatter<'_>,
    c: &BigInt,
    v: Option<&Var>,
    first: bool,
) -> fmt::Result {
    let neg = c.is_negative();
    let mag = c.abs();
    if first {
        if neg {
            f.write_str("-")?;
        }
    } else {
        f.write_str(if neg { " - " } else { " + " })?;
    }
    match v {
        Some(v) if mag.is_one() => write!(f, "{}", v),
        Some(v) => write!(f, "{}*{}", mag, v),
        None => write!(f, "{}", mag),
    }
}

/// Relation of a canonical atom against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    /// `t > 0`
    Gt,
    /// `t >= 0`
    Ge,
}

/// `term rel 0`, scaled to coprime integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinAtom {
    term: LinTerm,
    rel: Rel,
}

impl LinAtom {
    pub fn new(term: LinTerm, rel: Rel) -> Self {
        let g = term.content();
        let term = if g.is_zero() || g.is_one() {
            term
        } else {
            LinTerm {
                coeffs: term
                    .coeffs
                    .iter()
                    .map(|(v, c)| (v.clone(), c / &g))
                    .collect(),
                constant: &term.constant / &g,
            }
        };
        LinAtom { term, rel }
    }

    pub fn gt(term: LinTerm) -> Self {
        Self::new(term, Rel::Gt)
    }

    pub fn ge(term: LinTerm) -> Self {
        Self::new(term, Rel::Ge)
    }

    /// `lhs < rhs`, `lhs > rhs` and friends, normalized.
    pub fn lt_of(lhs: &LinTerm, rhs: &LinTerm) -> Self {
        Self::gt(rhs.sub(lhs))
    }
    pub fn le_of(lhs: &LinTerm, rhs: &LinTerm) -> Self {
        Self::ge(rhs.sub(lhs))
    }
    pub fn gt_of(lhs: &LinTerm, rhs: &LinTerm) -> Self {
        Self::gt(lhs.sub(rhs))
    }
    pub fn ge_of(lhs: &LinTerm, rhs: &LinTerm) -> Self {
        Self::ge(lhs.sub(rhs))
    }

    pub fn term(&self) -> &LinTerm {
        &self.term
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn is_strict(&self) -> bool {
        self.rel == Rel::Gt
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.term.vars()
    }

    /// Over the integers: `¬(t > 0)` is `-t >= 0`, `¬(t >= 0)` is `-t > 0`.
    pub fn negate(&self) -> LinAtom {
        let rel = match self.rel {
            Rel::Gt => Rel::Ge,
            Rel::Ge => Rel::Gt,
        };
        LinAtom::new(self.term.neg(), rel)
    }

    /// Truth value of a variable-free atom.
    pub fn trivial(&self) -> Option<bool> {
        if !self.term.is_constant() {
            return None;
        }
        let c = &self.term.constant;
        Some(match self.rel {
            Rel::Gt => c.is_positive(),
            Rel::Ge => !c.is_negative(),
        })
    }

    /// Strict atoms become `t - 1 >= 0`; then coefficients are divided by
    /// their gcd with the constant floored. Sound and exact over the integers.
    pub fn tightened(&self) -> LinTerm {
        let mut t = self.term.clone();
        if self.rel == Rel::Gt {
            t.constant -= 1;
        }
        tighten_nonstrict(t)
    }

    pub fn substitute(&self, map: &dyn Fn(&Var) -> Option<LinTerm>) -> LinAtom {
        LinAtom::new(self.term.substitute(map), self.rel)
    }

    pub fn rename(&self, map: &dyn Fn(&Var) -> Var) -> LinAtom {
        LinAtom::new(self.term.rename(map), self.rel)
    }

    pub fn holds_at(&self, point: &dyn Fn(&Var) -> Option<BigInt>) -> Option<bool> {
        let v = self.term.eval(point)?;
        Some(match self.rel {
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
        })
    }

    pub fn holds_at_i64(&self, point: &BTreeMap<Var, i64>) -> Option<bool> {
        self.holds_at(&|v| point.get(v).map(|x| BigInt::from(*x)))
    }

    /// Splits into `lhs op rhs` with the leading variable on the left with a
    /// positive coefficient. Used for rendering and guard instantiation.
    pub fn sides(&self) -> (LinTerm, CmpRel, LinTerm) {
        let lead_negative = self
            .term
            .coeffs
            .values()
            .next()
            .map(|c| c.is_negative())
            .unwrap_or(false);
        let (t, op) = if lead_negative {
            let op = match self.rel {
                Rel::Gt => CmpRel::Lt,
                Rel::Ge => CmpRel::Le,
            };
            (self.term.neg(), op)
        } else {
            let op = match self.rel {
                Rel::Gt => CmpRel::Gt,
                Rel::Ge => CmpRel::Ge,
            };
            (self.term.clone(), op)
        };
        // t op 0, leading coefficient positive: positive terms stay left.
        let mut lhs = LinTerm::zero();
        let mut rhs = LinTerm::constant(-t.constant.clone());
        for (v, c) in &t.coeffs {
            if c.is_positive() {
                lhs.add_coeff(v.clone(), c.clone());
            } else {
                rhs.add_coeff(v.clone(), -c);
            }
        }
        (lhs, op, rhs)
    }
}

pub(crate) fn tighten_nonstrict(mut t: LinTerm) -> LinTerm {
    let g = t.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() || g.is_one() {
        return t;
    }
    for c in t.coeffs.values_mut() {
        *c = &*c / &g;
    }
    t.constant = t.constant.div_floor(&g);
    t
}

/// Comparison operators of the surface syntax.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpRel {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpRel {
    pub fn token(self) -> &'static str {
        match self {
            CmpRel::Lt => "<",
            CmpRel::Le => "=<",
            CmpRel::Gt => ">",
            CmpRel::Ge => ">=",
        }
    }

    pub fn atom(self, lhs: &LinTerm, rhs: &LinTerm) -> LinAtom {
        match self {
            CmpRel::Lt => LinAtom::lt_of(lhs, rhs),
            CmpRel::Le => LinAtom::le_of(lhs, rhs),
            CmpRel::Gt => LinAtom::gt_of(lhs, rhs),
            CmpRel::Ge => LinAtom::ge_of(lhs, rhs),
        }
    }
}

impl Ord for LinAtom {
    /// Variable sequence first, then coefficients (larger first, so that
    /// `p1 > 1` precedes `p1 < 1000`), then constant and relation.
    fn cmp(&self, other: &Self) -> Ordering {
        let av = self.term.coeffs.keys();
        let bv = other.term.coeffs.keys();
        av.cmp(bv)
            .then_with(|| {
                let ac = self.term.coeffs.values();
                let bc = other.term.coeffs.values();
                bc.cmp(ac)
            })
            .then_with(|| self.term.constant.cmp(&other.term.constant))
            .then(self.rel.cmp(&other.rel))
    }
}

impl PartialOrd for LinAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LinAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(b) = self.trivial() {
            return f.write_str(if b { "true" } else { "false" });
        }
        let (l, op, r) = self.sides();
        write!(f, "{} {} {}", l, op.token(), r)
    }
}

impl fmt::Debug for LinAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
