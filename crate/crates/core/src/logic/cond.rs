//! Symbolic conditions: disjunctions of conjunctions of linear atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use super::fm;
use super::linear::{LinAtom, LinTerm};
use super::LogicError;
use crate::symbol::Var;

pub type Conj = Vec<LinAtom>;

pub const MAX_CONJUNCTS: usize = 64;

/// A condition in disjunctive normal form. The empty disjunction is `false`;
/// a disjunction holding the empty conjunction is `true`.
///
/// Construction goes through [`Condition::from_disjuncts`], which drops
/// inconsistent and subsumed conjuncts and redundant atoms, so `is_true` and
/// `is_false` are syntactic checks on an already simplified form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    disjuncts: Vec<Conj>,
}

impl Condition {
    pub fn truth() -> Self {
        Condition {
            disjuncts: vec![Vec::new()],
        }
    }

    pub fn falsity() -> Self {
        Condition {
            disjuncts: Vec::new(),
        }
    }

    pub fn atom(a: LinAtom) -> Result<Self, LogicError> {
        Self::from_disjuncts(vec![vec![a]])
    }

    pub fn conj(atoms: Conj) -> Result<Self, LogicError> {
        Self::from_disjuncts(vec![atoms])
    }

    pub fn from_disjuncts(disjuncts: Vec<Conj>) -> Result<Self, LogicError> {
        let mut kept: Vec<Conj> = Vec::new();
        for c in disjuncts {
            if let Some(c) = simplify_conj(c)? {
                if c.is_empty() {
                    return Ok(Condition::truth());
                }
                if !kept.contains(&c) {
                    kept.push(c);
                }
            }
        }
        let mut alive = vec![true; kept.len()];
        for i in 0..kept.len() {
            for j in 0..kept.len() {
                if i != j && alive[j] && conj_entails_conj(&kept[i], &kept[j])? {
                    alive[i] = false;
                    break;
                }
            }
        }
        let disjuncts: Vec<Conj> = kept
            .into_iter()
            .zip(alive)
            .filter_map(|(c, a)| a.then_some(c))
            .collect();
        if disjuncts.len() > MAX_CONJUNCTS {
            return Err(LogicError::TooManyConjuncts(disjuncts.len()));
        }
        Ok(Condition { disjuncts })
    }

    pub fn disjuncts(&self) -> &[Conj] {
        &self.disjuncts
    }

    pub fn is_true(&self) -> bool {
        self.disjuncts.iter().any(|c| c.is_empty())
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// The single conjunct, if this is a plain conjunction.
    pub fn as_conj(&self) -> Option<&Conj> {
        match self.disjuncts.as_slice() {
            [c] => Some(c),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.disjuncts
            .iter()
            .flatten()
            .flat_map(|a| a.vars().cloned())
            .collect()
    }

    pub fn or(&self, other: &Condition) -> Result<Condition, LogicError> {
        let mut d = self.disjuncts.clone();
        d.extend(other.disjuncts.iter().cloned());
        Self::from_disjuncts(d)
    }

    pub fn and(&self, other: &Condition) -> Result<Condition, LogicError> {
        let mut out = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                if fm::consistent(&c)? {
                    out.push(c);
                }
            }
        }
        Self::from_disjuncts(out)
    }

    pub fn and_conj(&self, atoms: &[LinAtom]) -> Result<Condition, LogicError> {
        self.and(&Condition::conj(atoms.to_vec())?)
    }

    /// Integer-aware complement, distributed back into DNF.
    pub fn negate(&self) -> Result<Condition, LogicError> {
        let mut acc = Condition::truth();
        for c in &self.disjuncts {
            let neg = Condition::from_disjuncts(c.iter().map(|a| vec![a.negate()]).collect())?;
            acc = acc.and(&neg)?;
            if acc.is_false() {
                break;
            }
        }
        Ok(acc)
    }

    pub fn entails(&self, other: &Condition) -> Result<bool, LogicError> {
        for c in &self.disjuncts {
            if !conj_entails_cond(c, other)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equivalent(&self, other: &Condition) -> Result<bool, LogicError> {
        Ok(self.entails(other)? && other.entails(self)?)
    }

    pub fn is_consistent_with(&self, conj: &[LinAtom]) -> Result<bool, LogicError> {
        for c in &self.disjuncts {
            let mut all = c.clone();
            all.extend(conj.iter().cloned());
            if fm::consistent(&all)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn holds_at(&self, point: &dyn Fn(&Var) -> Option<BigInt>) -> Option<bool> {
        let mut any = false;
        for c in &self.disjuncts {
            let mut all = true;
            for a in c {
                if !a.holds_at(point)? {
                    all = false;
                    break;
                }
            }
            any |= all;
        }
        Some(any)
    }

    pub fn holds_at_i64(&self, point: &BTreeMap<Var, i64>) -> Option<bool> {
        self.holds_at(&|v| point.get(v).map(|x| BigInt::from(*x)))
    }

    pub fn substitute(
        &self,
        map: &dyn Fn(&Var) -> Option<LinTerm>,
    ) -> Result<Condition, LogicError> {
        Self::from_disjuncts(
            self.disjuncts
                .iter()
                .map(|c| c.iter().map(|a| a.substitute(map)).collect())
                .collect(),
        )
    }

    pub fn rename(&self, map: &dyn Fn(&Var) -> Var) -> Result<Condition, LogicError> {
        Self::from_disjuncts(
            self.disjuncts
                .iter()
                .map(|c| c.iter().map(|a| a.rename(map)).collect())
                .collect(),
        )
    }

    /// Replaces pairs of disjuncts by their common hull when the hull adds no
    /// points, e.g. `p1 < 7 \/ (p1 >= 7 /\ p1 =< 7)` becomes `p1 =< 7`.
    pub fn merged(&self) -> Result<Condition, LogicError> {
        let mut cur = self.clone();
        'outer: loop {
            let d = &cur.disjuncts;
            for i in 0..d.len() {
                for j in i + 1..d.len() {
                    let mut hull: Conj = Vec::new();
                    for a in &d[i] {
                        if fm::entails(&d[j], a)? {
                            hull.push(a.clone());
                        }
                    }
                    for a in &d[j] {
                        if fm::entails(&d[i], a)? && !hull.contains(a) {
                            hull.push(a.clone());
                        }
                    }
                    let pair = Condition {
                        disjuncts: vec![d[i].clone(), d[j].clone()],
                    };
                    if conj_entails_cond(&hull, &pair)? {
                        let mut next: Vec<Conj> = Vec::with_capacity(d.len() - 1);
                        for (k, c) in d.iter().enumerate() {
                            if k == i {
                                next.push(hull.clone());
                            } else if k != j {
                                next.push(c.clone());
                            }
                        }
                        cur = Condition::from_disjuncts(next)?;
                        continue 'outer;
                    }
                }
            }
            return Ok(cur);
        }
    }

    pub fn parse(src: &str) -> Result<Condition, String> {
        parse::parse_condition(src)
    }
}

/// Sort, drop trivially true and redundant atoms; `None` if inconsistent.
fn simplify_conj(atoms: Conj) -> Result<Option<Conj>, LogicError> {
    let mut set: BTreeSet<LinAtom> = BTreeSet::new();
    for a in atoms {
        match a.trivial() {
            Some(true) => {}
            Some(false) => return Ok(None),
            None => {
                set.insert(a);
            }
        }
    }
    let mut atoms: Conj = set.into_iter().collect();
    if !fm::consistent(&atoms)? {
        return Ok(None);
    }
    let mut i = 0;
    while i < atoms.len() {
        let others: Conj = atoms
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, a)| a.clone())
            .collect();
        if fm::entails(&others, &atoms[i])? {
            atoms.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(Some(atoms))
}

fn conj_entails_conj(a: &[LinAtom], b: &[LinAtom]) -> Result<bool, LogicError> {
    for atom in b {
        if !fm::entails(a, atom)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `conj ⊨ C1 ∨ … ∨ Cn`, by searching for a model of `conj ∧ ¬C1 ∧ … ∧ ¬Cn`.
pub fn conj_entails_cond(conj: &[LinAtom], cond: &Condition) -> Result<bool, LogicError> {
    fn countermodel(acc: &mut Conj, rest: &[Conj]) -> Result<bool, LogicError> {
        if !fm::consistent(acc)? {
            return Ok(false);
        }
        let Some((first, rest)) = rest.split_first() else {
            return Ok(true);
        };
        for a in first {
            acc.push(a.negate());
            let found = countermodel(acc, rest)?;
            acc.pop();
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
    let mut acc = conj.to_vec();
    Ok(!countermodel(&mut acc, &cond.disjuncts)?)
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_false() {
            return f.write_str("false");
        }
        if self.is_true() {
            return f.write_str("true");
        }
        let multi = self.disjuncts.len() > 1;
        for (i, c) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" \\/ ")?;
            }
            let paren = multi && c.len() > 1;
            if paren {
                f.write_str("(")?;
            }
            for (j, a) in c.iter().enumerate() {
                if j > 0 {
                    f.write_str(" /\\ ")?;
                }
                write!(f, "{}", a)?;
            }
            if paren {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

mod parse {
    use super::*;

    #[derive(Clone, Debug, PartialEq)]
    enum Tok {
        Int(BigInt),
        Ident(String),
        Op(&'static str),
    }

    const OPS: [&str; 13] = [
        "\\/", "/\\", "=<", "<=", ">=", "=", "<", ">", "+", "-", "*", "(", ")",
    ];

    fn lex(src: &str) -> Result<Vec<Tok>, String> {
        let mut out = Vec::new();
        let b = src.as_bytes();
        let mut i = 0;
        'next: while i < b.len() {
            let c = b[i] as char;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let s = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Tok::Int(src[s..i].parse().expect("digits")));
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let s = i;
                while i < b.len() && ((b[i] as char).is_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                out.push(Tok::Ident(src[s..i].to_string()));
                continue;
            }
            for op in OPS {
                if src[i..].starts_with(op) {
                    out.push(Tok::Op(op));
                    i += op.len();
                    continue 'next;
                }
            }
            return Err(format!("unexpected character '{}' at offset {}", c, i));
        }
        Ok(out)
    }

    struct P {
        toks: Vec<Tok>,
        pos: usize,
    }

    type R<T> = Result<T, String>;

    impl P {
        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos)
        }
        fn eat(&mut self, op: &str) -> bool {
            if self.peek() == Some(&Tok::Op(op_static(op))) {
                self.pos += 1;
                true
            } else {
                false
            }
        }

        fn disj(&mut self) -> R<Condition> {
            let mut c = self.conj()?;
            while self.eat("\\/") {
                let r = self.conj()?;
                c = c.or(&r).map_err(|e| e.to_string())?;
            }
            Ok(c)
        }

        fn conj(&mut self) -> R<Condition> {
            let mut c = self.prim()?;
            while self.eat("/\\") {
                let r = self.prim()?;
                c = c.and(&r).map_err(|e| e.to_string())?;
            }
            Ok(c)
        }

        fn prim(&mut self) -> R<Condition> {
            match self.peek() {
                Some(Tok::Ident(s)) if s == "true" => {
                    self.pos += 1;
                    return Ok(Condition::truth());
                }
                Some(Tok::Ident(s)) if s == "false" => {
                    self.pos += 1;
                    return Ok(Condition::falsity());
                }
                _ => {}
            }
            let save = self.pos;
            match self.comparison() {
                Ok(c) => Ok(c),
                Err(e) => {
                    self.pos = save;
                    if self.eat("(") {
                        let c = self.disj()?;
                        if !self.eat(")") {
                            return Err("expected ')'".into());
                        }
                        Ok(c)
                    } else {
                        Err(e)
                    }
                }
            }
        }

        fn comparison(&mut self) -> R<Condition> {
            let l = self.expr()?;
            let op = match self.peek() {
                Some(Tok::Op(op)) if ["<", "=<", "<=", ">", ">=", "="].contains(op) => *op,
                _ => return Err("expected comparison operator".into()),
            };
            self.pos += 1;
            let r = self.expr()?;
            let atoms = match op {
                "<" => vec![LinAtom::lt_of(&l, &r)],
                "=<" | "<=" => vec![LinAtom::le_of(&l, &r)],
                ">" => vec![LinAtom::gt_of(&l, &r)],
                ">=" => vec![LinAtom::ge_of(&l, &r)],
                _ => vec![LinAtom::ge_of(&l, &r), LinAtom::le_of(&l, &r)],
            };
            Condition::conj(atoms).map_err(|e| e.to_string())
        }

        fn expr(&mut self) -> R<LinTerm> {
            let mut t = self.signed()?;
            loop {
                if self.eat("+") {
                    t = t.add(&self.signed()?);
                } else if self.eat("-") {
                    t = t.sub(&self.signed()?);
                } else {
                    return Ok(t);
                }
            }
        }

        fn signed(&mut self) -> R<LinTerm> {
            if self.eat("-") {
                Ok(self.signed()?.neg())
            } else {
                self.product()
            }
        }

        fn product(&mut self) -> R<LinTerm> {
            let mut t = self.factor()?;
            while self.eat("*") {
                let r = self.factor()?;
                t = if t.is_constant() {
                    r.scale(t.constant_part())
                } else if r.is_constant() {
                    t.scale(r.constant_part())
                } else {
                    return Err("nonlinear product in condition".into());
                };
            }
            Ok(t)
        }

        fn factor(&mut self) -> R<LinTerm> {
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    Ok(LinTerm::constant(n))
                }
                Some(Tok::Ident(s)) => {
                    self.pos += 1;
                    Ok(LinTerm::var(Var::new(s)))
                }
                Some(Tok::Op("(")) => {
                    self.pos += 1;
                    let t = self.expr()?;
                    if !self.eat(")") {
                        return Err("expected ')'".into());
                    }
                    Ok(t)
                }
                Some(Tok::Op("-")) => {
                    self.pos += 1;
                    Ok(self.factor()?.neg())
                }
                other => Err(format!("unexpected token {:?}", other)),
            }
        }
    }

    fn op_static(op: &str) -> &'static str {
        OPS.iter().find(|o| **o == op).copied().unwrap_or("")
    }

    pub fn parse_condition(src: &str) -> Result<Condition, String> {
        let mut p = P {
            toks: lex(src)?,
            pos: 0,
        };
        let c = p.disj()?;
        if p.pos != p.toks.len() {
            return Err(format!("trailing input at token {}", p.pos));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Condition {
        Condition::parse(s).unwrap()
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(c("p1 =< 7").to_string(), "p1 =< 7");
        assert_eq!(c("true").to_string(), "true");
        assert_eq!(
            c("p1 > 1 /\\ p1 < 1000").to_string(),
            "p1 > 1 /\\ p1 < 1000"
        );
        assert_eq!(
            c("q1 =< q2 \\/ (q1 > q2 /\\ q2 > 0)").to_string(),
            "q1 =< q2 \\/ (q1 > q2 /\\ q2 > 0)"
        );
        assert_eq!(c("2*x + 3 > y - 1").to_string(), "2*x > y - 4");
    }

    #[test]
    fn negation_examples() {
        let n = c("1 < p1 /\\ p1 < 1000").negate().unwrap();
        assert!(n.equivalent(&c("p1 =< 1 \\/ p1 >= 1000")).unwrap());
        assert!(c("true").negate().unwrap().is_false());
        assert!(c("false").negate().unwrap().is_true());
    }

    #[test]
    fn equivalence_examples() {
        assert!(c("p1 =< 7").equivalent(&c("p1 < 8")).unwrap());
        assert!(c("true").equivalent(&c("p1 =< 7 \\/ p1 > 7")).unwrap());
        assert!(c("q1 =< q2 \\/ (q1 > q2 /\\ q2 > 0)")
            .equivalent(&c("q2 > 0 \\/ q1 =< q2"))
            .unwrap());
        assert!(!c("p1 =< 7").equivalent(&c("p1 < 7")).unwrap());
    }

    #[test]
    fn excluded_middle_collapses_on_construction() {
        // p1 < 7 \/ p1 >= 7 is not syntactically true, but merging exposes it
        let m = c("p1 < 7 \\/ p1 >= 7").merged().unwrap();
        assert!(m.is_true());
    }

    #[test]
    fn merge_hulls() {
        let m = c("p1 < 7 \\/ (p1 >= 7 /\\ p1 =< 7)").merged().unwrap();
        assert_eq!(m.to_string(), "p1 =< 7");
        let keep = c("q1 =< q2 \\/ (q1 > q2 /\\ q2 > 0)").merged().unwrap();
        assert_eq!(keep.to_string(), "q1 =< q2 \\/ (q1 > q2 /\\ q2 > 0)");
    }

    #[test]
    fn redundant_atoms_and_subsumed_conjuncts() {
        assert_eq!(c("x > 5 /\\ x > 3").to_string(), "x > 5");
        assert_eq!(c("x > 5 \\/ x > 3").to_string(), "x > 3");
        assert!(c("x > 5 /\\ x < 3").is_false());
    }
}
