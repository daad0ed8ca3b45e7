//! Multivariate integer polynomials and a positivity prover over guarded
//! integer boxes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fm::{self, MAX_SCAN_POINTS};
use super::linear::{LinAtom, LinTerm, Rel};
use super::LogicError;
use crate::par::{self, Execution};
use crate::symbol::Var;

/// Sorted `(variable, exponent)` pairs with positive exponents; empty is `1`.
pub type Monomial = Vec<(Var, u32)>;

pub const MAX_DEGREE: u32 = 4;
pub const MAX_POLY_VARS: usize = 3;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigInt>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut m: BTreeMap<Var, u32> = a.iter().cloned().collect();
    for (v, e) in b {
        *m.entry(v.clone()).or_default() += e;
    }
    m.into_iter().collect()
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c.into());
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Poly::zero();
        p.add_term(vec![(v, 1)], BigInt::one());
        p
    }

    pub fn from_lin(t: &LinTerm) -> Self {
        let mut p = Poly::constant(t.constant_part().clone());
        for (v, c) in t.coeffs() {
            p.add_term(vec![(v.clone(), 1)], c.clone());
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn as_linear(&self) -> Option<LinTerm> {
        let mut t = LinTerm::zero();
        for (m, c) in &self.terms {
            match m.as_slice() {
                [] => t.add_constant(c),
                [(v, 1)] => t.add_coeff(v.clone(), c.clone()),
                _ => return None,
            }
        }
        Some(t)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(1), |acc, _| acc.mul(self))
    }

    pub fn substitute(&self, map: &dyn Fn(&Var) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (v, e) in m {
                let base = map(v).unwrap_or_else(|| Poly::var(v.clone()));
                term = term.mul(&base.pow(*e));
            }
            out = out.add(&term);
        }
        out
    }

    pub fn eval(&self, point: &dyn Fn(&Var) -> Option<BigInt>) -> Option<BigInt> {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                t *= num_traits::pow(point(v)?, *e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Univariate coefficients, lowest degree first.
    fn univariate_coeffs(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.degree() as usize + 1];
        for (m, c) in &self.terms {
            let e = m.first().map_or(0, |(_, e)| *e) as usize;
            out[e] += c;
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest degree first, constant last
        let mut terms: Vec<(&Monomial, &BigInt)> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| std::cmp::Reverse(m.iter().map(|(_, e)| *e).sum::<u32>()));
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_empty() {
                write!(f, "{}", mag)?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{}*", mag)?;
            }
            for (j, (v, e)) in m.iter().enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                if *e == 1 {
                    write!(f, "{}", v)?;
                } else {
                    write!(f, "{}^{}", v, e)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// `poly rel 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyAtom {
    pub poly: Poly,
    pub rel: Rel,
}

impl PolyAtom {
    pub fn gt(poly: Poly) -> Self {
        PolyAtom { poly, rel: Rel::Gt }
    }

    pub fn ge(poly: Poly) -> Self {
        PolyAtom { poly, rel: Rel::Ge }
    }

    pub fn negate(&self) -> PolyAtom {
        match self.rel {
            Rel::Gt => PolyAtom::ge(self.poly.neg()),
            Rel::Ge => PolyAtom::gt(self.poly.neg()),
        }
    }

    pub fn as_linear(&self) -> Option<LinAtom> {
        self.poly.as_linear().map(|t| LinAtom::new(t, self.rel))
    }

    /// A polynomial that is positive exactly where the atom holds.
    pub fn as_positivity_goal(&self) -> Poly {
        match self.rel {
            Rel::Gt => self.poly.clone(),
            Rel::Ge => self.poly.add(&Poly::constant(1)),
        }
    }

    pub fn holds_at(&self, point: &dyn Fn(&Var) -> Option<BigInt>) -> Option<bool> {
        let v = self.poly.eval(point)?;
        Some(match self.rel {
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
        })
    }

    pub fn substitute(&self, map: &dyn Fn(&Var) -> Option<Poly>) -> PolyAtom {
        PolyAtom {
            poly: self.poly.substitute(map),
            rel: self.rel,
        }
    }
}

impl fmt::Display for PolyAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.rel {
            Rel::Gt => ">",
            Rel::Ge => ">=",
        };
        write!(f, "{} {} 0", self.poly, op)
    }
}

impl fmt::Debug for PolyAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Positivity {
    Proved,
    Unknown(UnknownReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    /// A guard point where the polynomial is not positive, or the linear
    /// entailment failed.
    NotPositive,
    TooComplex,
    Unbounded,
}

impl Positivity {
    pub fn proved(self) -> bool {
        self == Positivity::Proved
    }
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::NotPositive => "not positive on the guard",
            UnknownReason::TooComplex => "polynomial too complex (degree > 4 or > 3 variables)",
            UnknownReason::Unbounded => "guard leaves the polynomial unbounded",
        })
    }
}

/// Tries to show `p > 0` at every integer point satisfying `guard`.
pub fn poly_positive(
    p: &Poly,
    guard: &[LinAtom],
    exec: Execution,
) -> Result<Positivity, LogicError> {
    use Positivity::*;
    use UnknownReason::*;
    let verdict = |b: bool| if b { Proved } else { Unknown(NotPositive) };
    if p.is_zero() {
        return Ok(Unknown(NotPositive));
    }
    if let Some(c) = p.constant_value() {
        return Ok(verdict(c.is_positive() || !fm::consistent(guard)?));
    }
    if let Some(t) = p.as_linear() {
        return Ok(verdict(fm::entails(guard, &LinAtom::gt(t))?));
    }
    let vars: Vec<Var> = p.vars().into_iter().collect();
    if p.degree() > MAX_DEGREE || vars.len() > MAX_POLY_VARS {
        return Ok(Unknown(TooComplex));
    }
    let Some(bx) = fm::box_of(guard)? else {
        return Ok(Proved);
    };
    // Guard atoms that only talk about the polynomial's variables filter the
    // enumerated points; the rest are already reflected in the box.
    let var_set: BTreeSet<&Var> = vars.iter().collect();
    let local: Vec<&LinAtom> = guard
        .iter()
        .filter(|a| a.vars().all(|v| var_set.contains(v)))
        .collect();

    let mut ranges = Vec::with_capacity(vars.len());
    let mut finite = true;
    for v in &vars {
        let iv = bx.get(v);
        match (
            iv.lo.as_ref().and_then(|x| x.to_i64()),
            iv.hi.as_ref().and_then(|x| x.to_i64()),
        ) {
            (Some(lo), Some(hi)) => ranges.push((lo, hi)),
            _ => finite = false,
        }
    }
    if finite {
        let points: BigInt = ranges
            .iter()
            .map(|(l, h)| BigInt::from(h - l + 1))
            .product();
        if points <= BigInt::from(MAX_SCAN_POINTS) {
            return Ok(verdict(positive_on_box(p, &vars, &ranges, &local, exec)));
        }
        return Ok(Unknown(TooComplex));
    }
    if vars.len() != 1 {
        return Ok(Unknown(Unbounded));
    }
    univariate_positive(p, &vars[0], &bx.get(&vars[0]), &local, exec)
}

fn univariate_positive(
    p: &Poly,
    v: &Var,
    iv: &fm::Interval,
    local: &[&LinAtom],
    exec: Execution,
) -> Result<Positivity, LogicError> {
    use Positivity::*;
    use UnknownReason::*;
    let coeffs = p.univariate_coeffs();
    let n = coeffs.len() - 1;
    let lead = &coeffs[n];
    // every real root lies in [-bound, bound]
    let bound: BigInt = coeffs[..n]
        .iter()
        .map(|c| c.abs().div_ceil(&lead.abs()))
        .max()
        .unwrap_or_default()
        + 1;
    let pos_at_plus_inf = lead.is_positive();
    let pos_at_minus_inf = lead.is_positive() == n.is_multiple_of(2);
    if iv.hi.is_none() && !pos_at_plus_inf {
        return Ok(Unknown(NotPositive));
    }
    if iv.lo.is_none() && !pos_at_minus_inf {
        return Ok(Unknown(NotPositive));
    }
    let lo = match &iv.lo {
        Some(l) => l.clone().max(-&bound),
        None => -&bound,
    };
    let hi = match &iv.hi {
        Some(h) => h.clone().min(bound.clone()),
        None => bound.clone(),
    };
    // Beyond [-bound, bound] the sign is the sign at the matching infinity.
    if iv.lo.as_ref().is_some_and(|l| *l < -&bound) && !pos_at_minus_inf {
        return Ok(Unknown(NotPositive));
    }
    if iv.hi.as_ref().is_some_and(|h| *h > bound) && !pos_at_plus_inf {
        return Ok(Unknown(NotPositive));
    }
    if lo > hi {
        return Ok(Proved);
    }
    let (Some(lo), Some(hi)) = (lo.to_i64(), hi.to_i64()) else {
        return Ok(Unknown(TooComplex));
    };
    if (hi - lo) as u64 >= MAX_SCAN_POINTS {
        return Ok(Unknown(TooComplex));
    }
    let ok = positive_on_box(p, std::slice::from_ref(v), &[(lo, hi)], local, exec);
    Ok(if ok { Proved } else { Unknown(NotPositive) })
}

/// Exhaustive check over a finite box, skipping points that violate `local`.
fn positive_on_box(
    p: &Poly,
    vars: &[Var],
    ranges: &[(i64, i64)],
    local: &[&LinAtom],
    exec: Execution,
) -> bool {
    let index: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let fast = FastPoly::compile(p, &index);
    let guards: Vec<FastLin> = local
        .iter()
        .filter_map(|a| FastLin::compile(a, &index))
        .collect();
    let slow_guards: Vec<&LinAtom> = local
        .iter()
        .copied()
        .filter(|a| FastLin::compile(a, &index).is_none())
        .collect();
    let check = |pt: &[i64]| -> bool {
        let admitted = guards.iter().all(|g| g.holds(pt).unwrap_or(true))
            && slow_guards.iter().all(|a| {
                a.holds_at(&|v| index.get(v).map(|&i| BigInt::from(pt[i])))
                    .unwrap_or(true)
            });
        if !admitted {
            return true;
        }
        match fast.as_ref().and_then(|f| f.eval(pt)) {
            Some(x) => x > 0,
            None => p
                .eval(&|v| index.get(v).map(|&i| BigInt::from(pt[i])))
                .is_some_and(|x| x.is_positive()),
        }
    };
    let (lo0, hi0) = ranges[0];
    par::all_in_range(exec, lo0, hi0, |x0| {
        let mut pt: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        pt[0] = x0;
        loop {
            if !check(&pt) {
                return false;
            }
            let mut d = 1;
            loop {
                if d >= pt.len() {
                    return true;
                }
                if pt[d] < ranges[d].1 {
                    pt[d] += 1;
                    break;
                }
                pt[d] = ranges[d].0;
                d += 1;
            }
        }
    })
}

/// i128 evaluation with overflow detection.
struct FastPoly {
    terms: Vec<(i128, Vec<(usize, u32)>)>,
}

impl FastPoly {
    fn compile(p: &Poly, index: &BTreeMap<&Var, usize>) -> Option<FastPoly> {
        let terms = p
            .terms
            .iter()
            .map(|(m, c)| {
                let exps = m
                    .iter()
                    .map(|(v, e)| Some((*index.get(v)?, *e)))
                    .collect::<Option<_>>()?;
                Some((c.to_i128()?, exps))
            })
            .collect::<Option<_>>()?;
        Some(FastPoly { terms })
    }

    fn eval(&self, pt: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for (c, exps) in &self.terms {
            let mut t = *c;
            for &(i, e) in exps {
                t = t.checked_mul((pt[i] as i128).checked_pow(e)?)?;
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }
}

struct FastLin {
    coeffs: Vec<(usize, i128)>,
    c: i128,
    strict: bool,
}

impl FastLin {
    fn compile(a: &LinAtom, index: &BTreeMap<&Var, usize>) -> Option<FastLin> {
        let coeffs = a
            .term()
            .coeffs()
            .iter()
            .map(|(v, c)| Some((*index.get(v)?, c.to_i128()?)))
            .collect::<Option<_>>()?;
        Some(FastLin {
            coeffs,
            c: a.term().constant_part().to_i128()?,
            strict: a.is_strict(),
        })
    }

    fn holds(&self, pt: &[i64]) -> Option<bool> {
        let mut s = self.c;
        for &(i, c) in &self.coeffs {
            s = s.checked_add(c.checked_mul(pt[i] as i128)?)?;
        }
        Some(if self.strict { s > 0 } else { s >= 0 })
    }
}
