//! Integer-tightened Fourier-Motzkin elimination.
//!
//! Every row is `Σ aᵢxᵢ + c >= 0` with integer coefficients. Strict atoms are
//! tightened before elimination and each derived row is divided by the gcd of
//! its coefficients with the constant floored, which keeps the procedure sound
//! over the integers while usually being stronger than the rational shadow.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linear::LinAtom;
use super::LogicError;
use crate::par::{self, Execution};
use crate::symbol::Var;

pub const MAX_VARS: usize = 32;
pub const MAX_ATOMS: usize = 256;
/// Beyond this many rows an elimination gives up and answers "satisfiable".
const MAX_ROWS: usize = 4000;
pub const MAX_SCAN_POINTS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Row {
    coeffs: Vec<BigInt>,
    c: BigInt,
}

impl Row {
    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn normalize(mut self) -> Row {
        let g = self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in &mut self.coeffs {
                *c = &*c / &g;
            }
            self.c = self.c.div_floor(&g);
        }
        self
    }
}

enum Elim {
    Unsat,
    GaveUp,
    /// Rows left after elimination plus, per eliminated variable, the rows
    /// that mentioned it at the time (for witness reconstruction).
    Sat {
        rest: Vec<Row>,
        stages: Vec<(usize, Vec<Row>)>,
    },
}

/// A conjunction compiled against a fixed variable ordering.
struct System {
    vars: Vec<Var>,
    rows: Vec<Row>,
    trivially_false: bool,
}

impl System {
    fn new(atoms: &[LinAtom]) -> Result<Self, LogicError> {
        let vars: Vec<Var> = atoms
            .iter()
            .flat_map(|a| a.vars().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if vars.len() > MAX_VARS || atoms.len() > MAX_ATOMS {
            return Err(LogicError::TooLarge {
                vars: vars.len(),
                atoms: atoms.len(),
            });
        }
        let index: HashMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut rows = Vec::with_capacity(atoms.len());
        let mut trivially_false = false;
        for a in atoms {
            let t = a.tightened();
            let mut coeffs = vec![BigInt::zero(); vars.len()];
            for (v, c) in t.coeffs() {
                coeffs[index[v]] = c.clone();
            }
            let row = Row {
                coeffs,
                c: t.constant_part().clone(),
            };
            if row.is_constant() {
                if row.c.is_negative() {
                    trivially_false = true;
                }
                continue;
            }
            rows.push(row);
        }
        Ok(System {
            vars,
            rows: dedup(rows),
            trivially_false,
        })
    }

    fn eliminate(&self, targets: &[usize]) -> Elim {
        if self.trivially_false {
            return Elim::Unsat;
        }
        let mut rows = self.rows.clone();
        let mut remaining: Vec<usize> = targets.to_vec();
        let mut stages = Vec::new();
        while !remaining.is_empty() {
            // cheapest variable first: fewest generated rows
            let (pick_pos, _) = remaining
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let pos = rows.iter().filter(|r| r.coeffs[v].is_positive()).count();
                    let neg = rows.iter().filter(|r| r.coeffs[v].is_negative()).count();
                    (i, pos * neg)
                })
                .min_by_key(|&(_, cost)| cost)
                .expect("non-empty");
            let v = remaining.swap_remove(pick_pos);
            let (with, mut without): (Vec<Row>, Vec<Row>) =
                rows.into_iter().partition(|r| !r.coeffs[v].is_zero());
            let (pos, neg): (Vec<&Row>, Vec<&Row>) =
                with.iter().partition(|r| r.coeffs[v].is_positive());
            for p in &pos {
                for n in &neg {
                    let a = &p.coeffs[v];
                    let b = -&n.coeffs[v];
                    let coeffs: Vec<BigInt> = p
                        .coeffs
                        .iter()
                        .zip(&n.coeffs)
                        .map(|(x, y)| x * &b + y * a)
                        .collect();
                    let row = Row {
                        coeffs,
                        c: &p.c * &b + &n.c * a,
                    }
                    .normalize();
                    if row.is_constant() {
                        if row.c.is_negative() {
                            return Elim::Unsat;
                        }
                        continue;
                    }
                    without.push(row);
                }
            }
            rows = dedup(without);
            if let Some(contradiction) = opposite_pair_contradiction(&rows) {
                if contradiction {
                    return Elim::Unsat;
                }
            }
            if rows.len() > MAX_ROWS {
                return Elim::GaveUp;
            }
            stages.push((v, with));
        }
        Elim::Sat { rest: rows, stages }
    }

    fn witness(&self, stages: &[(usize, Vec<Row>)]) -> Option<Vec<BigInt>> {
        let mut values: Vec<Option<BigInt>> = vec![None; self.vars.len()];
        for (v, rows) in stages.iter().rev() {
            let (lo, hi) = bounds_given(rows, *v, &values)?;
            let pick = match (&lo, &hi) {
                (Some(l), Some(h)) if l > h => return None,
                (Some(l), _) if l.is_positive() => l.clone(),
                (_, Some(h)) if h.is_negative() => h.clone(),
                _ => BigInt::zero(),
            };
            values[*v] = Some(pick);
        }
        values
            .into_iter()
            .map(|v| v.or_else(|| Some(BigInt::zero())))
            .collect()
    }

    fn satisfied_by(&self, point: &[BigInt]) -> bool {
        self.rows.iter().all(|r| {
            let s: BigInt = r.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            !(s + &r.c).is_negative()
        })
    }

    /// Integer bounds of `var` implied by the whole system; `None` if a
    /// contradiction was found.
    fn project(&self, var: usize) -> Option<Interval> {
        let others: Vec<usize> = (0..self.vars.len()).filter(|&i| i != var).collect();
        match self.eliminate(&others) {
            Elim::Unsat => None,
            Elim::GaveUp => Some(Interval::unbounded()),
            Elim::Sat { rest, .. } => {
                let (lo, hi) = bounds_given(&rest, var, &vec![None; self.vars.len()])?;
                if let (Some(l), Some(h)) = (&lo, &hi) {
                    if l > h {
                        return None;
                    }
                }
                Some(Interval { lo, hi })
            }
        }
    }

    fn scan(&self, bounds: &[(i64, i64)], exec: Execution) -> bool {
        if bounds.is_empty() {
            return self.rows.is_empty();
        }
        let (first_lo, first_hi) = bounds[0];
        par::any_in_range(exec, first_lo, first_hi, |x0| {
            let mut point: Vec<i64> = bounds.iter().map(|b| b.0).collect();
            point[0] = x0;
            loop {
                let big: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
                if self.satisfied_by(&big) {
                    return true;
                }
                // odometer over dimensions 1..
                let mut d = 1;
                loop {
                    if d >= point.len() {
                        return false;
                    }
                    if point[d] < bounds[d].1 {
                        point[d] += 1;
                        break;
                    }
                    point[d] = bounds[d].0;
                    d += 1;
                }
            }
        })
    }
}

fn dedup(rows: Vec<Row>) -> Vec<Row> {
    let mut best: HashMap<Vec<BigInt>, BigInt> = HashMap::with_capacity(rows.len());
    let mut order = Vec::new();
    for r in rows {
        match best.get_mut(&r.coeffs) {
            Some(c) => {
                if r.c < *c {
                    *c = r.c;
                }
            }
            None => {
                order.push(r.coeffs.clone());
                best.insert(r.coeffs, r.c);
            }
        }
    }
    order
        .into_iter()
        .map(|coeffs| {
            let c = best[&coeffs].clone();
            Row { coeffs, c }
        })
        .collect()
}

/// Detects `t + c1 >= 0` and `-t + c2 >= 0` with `c1 + c2 < 0`.
fn opposite_pair_contradiction(rows: &[Row]) -> Option<bool> {
    let map: HashMap<&Vec<BigInt>, &BigInt> = rows.iter().map(|r| (&r.coeffs, &r.c)).collect();
    for r in rows {
        let negated: Vec<BigInt> = r.coeffs.iter().map(|c| -c).collect();
        if let Some(c2) = map.get(&negated) {
            if (&r.c + *c2).is_negative() {
                return Some(true);
            }
        }
    }
    Some(false)
}

fn bounds_given(
    rows: &[Row],
    var: usize,
    values: &[Option<BigInt>],
) -> Option<(Option<BigInt>, Option<BigInt>)> {
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    for r in rows {
        let a = &r.coeffs[var];
        if a.is_zero() {
            continue;
        }
        let mut rest = r.c.clone();
        for (i, c) in r.coeffs.iter().enumerate() {
            if i == var || c.is_zero() {
                continue;
            }
            rest += c * values[i].as_ref()?;
        }
        if a.is_positive() {
            // a·v + rest >= 0  =>  v >= ceil(-rest / a)
            let b = (-rest).div_ceil(a);
            lo = Some(match lo {
                Some(l) if l > b => l,
                _ => b,
            });
        } else {
            // v <= floor(rest / -a)
            let b = rest.div_floor(&(-a));
            hi = Some(match hi {
                Some(h) if h < b => h,
                _ => b,
            });
        }
    }
    Some((lo, hi))
}

/// Closed integer interval with optional infinite ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<BigInt>,
    pub hi: Option<BigInt>,
}

impl Interval {
    pub fn unbounded() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Interval {
            lo: lo.map(BigInt::from),
            hi: hi.map(BigInt::from),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    /// Number of integer points when finite.
    pub fn width(&self) -> Option<BigInt> {
        Some(self.hi.as_ref()? - self.lo.as_ref()? + 1)
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        self.lo.as_ref().is_none_or(|l| l <= x) && self.hi.as_ref().is_none_or(|h| x <= h)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(l) => write!(f, "[{}", l)?,
            None => f.write_str("(-inf")?,
        }
        match &self.hi {
            Some(h) => write!(f, ", {}]", h),
            None => f.write_str(", +inf)"),
        }
    }
}

/// Per-variable integer bounds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntBox {
    pub bounds: BTreeMap<Var, Interval>,
}

impl IntBox {
    pub fn get(&self, v: &Var) -> Interval {
        self.bounds
            .get(v)
            .cloned()
            .unwrap_or_else(Interval::unbounded)
    }

    /// Total number of points over `vars`, when every one is finite.
    pub fn points(&self, vars: &[Var]) -> Option<BigInt> {
        vars.iter()
            .map(|v| self.get(v).width())
            .try_fold(BigInt::one(), |acc, w| Some(acc * w?))
    }
}

/// Whether some integer point satisfies every atom.
pub fn consistent(atoms: &[LinAtom]) -> Result<bool, LogicError> {
    consistent_with(atoms, Execution::Sequential)
}

pub fn consistent_with(atoms: &[LinAtom], exec: Execution) -> Result<bool, LogicError> {
    let sys = System::new(atoms)?;
    if sys.trivially_false {
        return Ok(false);
    }
    if sys.rows.is_empty() {
        return Ok(true);
    }
    let all: Vec<usize> = (0..sys.vars.len()).collect();
    let stages = match sys.eliminate(&all) {
        Elim::Unsat => return Ok(false),
        Elim::GaveUp => return Ok(true),
        Elim::Sat { stages, .. } => stages,
    };
    if let Some(w) = sys.witness(&stages) {
        if sys.satisfied_by(&w) {
            return Ok(true);
        }
    }
    // No cheap witness: settle it by enumeration when the box is small,
    // otherwise keep the (sound, weaker) rational answer.
    let mut bounds = Vec::with_capacity(sys.vars.len());
    let mut points = BigInt::one();
    for i in 0..sys.vars.len() {
        let Some(iv) = sys.project(i) else {
            return Ok(false);
        };
        let (Some(lo), Some(hi)) = (
            iv.lo.as_ref().and_then(|x| x.to_i64()),
            iv.hi.as_ref().and_then(|x| x.to_i64()),
        ) else {
            return Ok(true);
        };
        points *= hi - lo + 1;
        bounds.push((lo, hi));
    }
    if points > BigInt::from(MAX_SCAN_POINTS) {
        return Ok(true);
    }
    Ok(sys.scan(&bounds, exec))
}

/// Every integer model of `conj` satisfies `atom`.
pub fn entails(conj: &[LinAtom], atom: &LinAtom) -> Result<bool, LogicError> {
    if let Some(b) = atom.trivial() {
        return Ok(b || !consistent(conj)?);
    }
    let mut all = conj.to_vec();
    all.push(atom.negate());
    Ok(!consistent(&all)?)
}

/// Tightest derivable interval per variable, or `None` when the projection
/// exposes an inconsistency.
pub fn box_of(conj: &[LinAtom]) -> Result<Option<IntBox>, LogicError> {
    let sys = System::new(conj)?;
    if sys.trivially_false {
        return Ok(None);
    }
    let mut out = IntBox::default();
    for (i, v) in sys.vars.iter().enumerate() {
        match sys.project(i) {
            None => return Ok(None),
            Some(iv) => {
                out.bounds.insert(v.clone(), iv);
            }
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::linear::LinTerm;

    fn x(c: i64, name: &str) -> LinTerm {
        LinTerm::monomial(Var::new(name), c)
    }
    fn k(c: i64) -> LinTerm {
        LinTerm::constant(c)
    }

    #[test]
    fn contradiction() {
        let a = [
            LinAtom::gt_of(&x(1, "x"), &k(5)),
            LinAtom::le_of(&x(1, "x"), &k(5)),
        ];
        assert!(!consistent(&a).unwrap());
    }

    #[test]
    fn witness_six() {
        let a = [
            LinAtom::gt_of(&x(1, "x"), &k(5)),
            LinAtom::lt_of(&x(1, "x"), &k(7)),
        ];
        assert!(consistent(&a).unwrap());
    }

    #[test]
    fn integer_gap() {
        // 2x > 4 and 2x < 6 has rational models (x = 2.5) but no integer one
        let a = [
            LinAtom::gt_of(&x(2, "x"), &k(4)),
            LinAtom::lt_of(&x(2, "x"), &k(6)),
        ];
        assert!(!consistent(&a).unwrap());
        // 2x > 5 and 2x < 7 is satisfied by x = 3
        let b = [
            LinAtom::gt_of(&x(2, "x"), &k(5)),
            LinAtom::lt_of(&x(2, "x"), &k(7)),
        ];
        assert!(consistent(&b).unwrap());
    }

    #[test]
    fn entailment_examples() {
        let gt10 = [LinAtom::gt_of(&x(1, "x"), &k(10))];
        assert!(entails(&gt10, &LinAtom::gt_of(&x(1, "x"), &k(5))).unwrap());
        let gt5 = [LinAtom::gt_of(&x(1, "x"), &k(5))];
        assert!(!entails(&gt5, &LinAtom::gt_of(&x(1, "x"), &k(10))).unwrap());
        let chain = [
            LinAtom::gt_of(&x(1, "x"), &x(1, "y")),
            LinAtom::gt_of(&x(1, "y"), &k(0)),
        ];
        assert!(entails(&chain, &LinAtom::ge_of(&x(1, "x"), &k(2))).unwrap());
    }

    #[test]
    fn boxes() {
        let a = [
            LinAtom::gt_of(&x(1, "x"), &k(1)),
            LinAtom::lt_of(&x(1, "x"), &k(1000)),
        ];
        let b = box_of(&a).unwrap().unwrap();
        assert_eq!(b.get(&Var::new("x")), Interval::new(Some(2), Some(999)));

        let rel = [LinAtom::gt_of(&x(1, "x"), &x(1, "y"))];
        let b = box_of(&rel).unwrap().unwrap();
        assert_eq!(b.get(&Var::new("x")), Interval::unbounded());
        assert_eq!(b.get(&Var::new("y")), Interval::unbounded());

        let mut c = a.to_vec();
        c.push(LinAtom::ge_of(&x(1, "y"), &x(1, "x")));
        let b = box_of(&c).unwrap().unwrap();
        assert_eq!(b.get(&Var::new("y")), Interval::new(Some(2), None));
    }

    #[test]
    fn size_cap() {
        let atoms: Vec<LinAtom> = (0..40)
            .map(|i| LinAtom::gt_of(&x(1, &format!("v{}", i)), &k(0)))
            .collect();
        assert!(matches!(
            consistent(&atoms),
            Err(LogicError::TooLarge { .. })
        ));
    }
}
