//! Abstract syntax of pure logic programs with integer arithmetic.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::logic::{LinTerm, Poly};
use crate::symbol::Var;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Int(BigInt),
    /// Constants are zero-arity structures; lists use `[]` and `'[|]'`.
    Struct(Arc<str>, Vec<Term>),
}

pub const NIL: &str = "[]";
pub const CONS: &str = "[|]";

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn int(n: impl Into<BigInt>) -> Term {
        Term::Int(n.into())
    }

    pub fn atom(name: &str) -> Term {
        Term::Struct(Arc::from(name), Vec::new())
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Int(_) => {}
            Term::Struct(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Int(n) => Term::Int(n.clone()),
            Term::Struct(n, args) => {
                Term::Struct(n.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    IntDiv,
    Mod,
}

impl ArithOp {
    pub fn token(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::IntDiv => "//",
            ArithOp::Mod => "mod",
        }
    }

    pub fn from_token(s: &str) -> Option<ArithOp> {
        Some(match s {
            "+" => ArithOp::Add,
            "-" => ArithOp::Sub,
            "*" => ArithOp::Mul,
            "//" => ArithOp::IntDiv,
            "mod" => ArithOp::Mod,
            _ => return None,
        })
    }

    pub fn precedence(self) -> u32 {
        match self {
            ArithOp::Add | ArithOp::Sub => 500,
            _ => 400,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Lit(BigInt),
    Var(Var),
    Neg(Box<IntExpr>),
    Bin(ArithOp, Box<IntExpr>, Box<IntExpr>),
}

impl IntExpr {
    pub fn lit(n: impl Into<BigInt>) -> IntExpr {
        IntExpr::Lit(n.into())
    }

    pub fn var(name: &str) -> IntExpr {
        IntExpr::Var(Var::new(name))
    }

    pub fn bin(op: ArithOp, l: IntExpr, r: IntExpr) -> IntExpr {
        IntExpr::Bin(op, Box::new(l), Box::new(r))
    }

    /// Reads an arithmetic term; `None` if any leaf is not an integer or a
    /// variable.
    pub fn from_term(t: &Term) -> Option<IntExpr> {
        match t {
            Term::Var(v) => Some(IntExpr::Var(v.clone())),
            Term::Int(n) => Some(IntExpr::Lit(n.clone())),
            Term::Struct(f, args) => match (f.as_ref(), args.as_slice()) {
                ("-", [a]) => Some(IntExpr::Neg(Box::new(IntExpr::from_term(a)?))),
                (op, [a, b]) => Some(IntExpr::bin(
                    ArithOp::from_token(op)?,
                    IntExpr::from_term(a)?,
                    IntExpr::from_term(b)?,
                )),
                _ => None,
            },
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            IntExpr::Lit(n) => Term::Int(n.clone()),
            IntExpr::Var(v) => Term::Var(v.clone()),
            IntExpr::Neg(e) => Term::Struct(Arc::from("-"), vec![e.to_term()]),
            IntExpr::Bin(op, l, r) => {
                Term::Struct(Arc::from(op.token()), vec![l.to_term(), r.to_term()])
            }
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            IntExpr::Lit(_) => {}
            IntExpr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            IntExpr::Neg(e) => e.collect_vars(out),
            IntExpr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn has_div_mod(&self) -> bool {
        match self {
            IntExpr::Lit(_) | IntExpr::Var(_) => false,
            IntExpr::Neg(e) => e.has_div_mod(),
            IntExpr::Bin(op, l, r) => {
                matches!(op, ArithOp::IntDiv | ArithOp::Mod) || l.has_div_mod() || r.has_div_mod()
            }
        }
    }

    pub fn substitute(&self, map: &dyn Fn(&Var) -> Option<IntExpr>) -> IntExpr {
        match self {
            IntExpr::Lit(n) => IntExpr::Lit(n.clone()),
            IntExpr::Var(v) => map(v).unwrap_or_else(|| IntExpr::Var(v.clone())),
            IntExpr::Neg(e) => IntExpr::Neg(Box::new(e.substitute(map))),
            IntExpr::Bin(op, l, r) => IntExpr::bin(*op, l.substitute(map), r.substitute(map)),
        }
    }

    /// Polynomial form; `None` when `//` or `mod` occurs.
    pub fn to_poly(&self) -> Option<Poly> {
        Some(match self {
            IntExpr::Lit(n) => Poly::constant(n.clone()),
            IntExpr::Var(v) => Poly::var(v.clone()),
            IntExpr::Neg(e) => e.to_poly()?.neg(),
            IntExpr::Bin(op, l, r) => {
                let (l, r) = (l.to_poly()?, r.to_poly()?);
                match op {
                    ArithOp::Add => l.add(&r),
                    ArithOp::Sub => l.sub(&r),
                    ArithOp::Mul => l.mul(&r),
                    ArithOp::IntDiv | ArithOp::Mod => return None,
                }
            }
        })
    }

    pub fn to_linear(&self) -> Option<LinTerm> {
        self.to_poly()?.as_linear()
    }

    fn precedence(&self) -> u32 {
        match self {
            IntExpr::Lit(n) if n.is_negative() => 200,
            IntExpr::Lit(_) | IntExpr::Var(_) => 0,
            IntExpr::Neg(_) => 200,
            IntExpr::Bin(op, _, _) => op.precedence(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    /// `=:=`
    ArithEq,
    /// `=\=`
    ArithNe,
}

impl CmpOp {
    pub fn token(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "=<",
            CmpOp::Ge => ">=",
            CmpOp::ArithEq => "=:=",
            CmpOp::ArithNe => "=\\=",
        }
    }

    pub fn from_token(s: &str) -> Option<CmpOp> {
        Some(match s {
            "<" => CmpOp::Lt,
            ">" => CmpOp::Gt,
            "=<" => CmpOp::Le,
            ">=" => CmpOp::Ge,
            "=:=" => CmpOp::ArithEq,
            "=\\=" => CmpOp::ArithNe,
            _ => return None,
        })
    }

    pub fn holds(self, l: &BigInt, r: &BigInt) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Gt => l > r,
            CmpOp::Le => l <= r,
            CmpOp::Ge => l >= r,
            CmpOp::ArithEq => l == r,
            CmpOp::ArithNe => l != r,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: Arc::from(pred),
            args,
        }
    }

    pub fn key(&self) -> PredKey {
        PredKey::new(&self.pred, self.args.len())
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Goal {
    Call(Atom),
    Is(Term, IntExpr),
    Cmp(CmpOp, IntExpr, IntExpr),
    Unify(Term, Term),
    Disj(Vec<Vec<Goal>>),
}

impl Goal {
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Goal::Call(a) => a.args.iter().for_each(|t| t.collect_vars(out)),
            Goal::Is(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Goal::Cmp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Goal::Unify(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Goal::Disj(alts) => alts.iter().flatten().for_each(|g| g.collect_vars(out)),
        }
    }

    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Term) -> Goal {
        let e = |x: &IntExpr| {
            x.substitute(&|v| match f(v) {
                Term::Var(w) => Some(IntExpr::Var(w)),
                t => IntExpr::from_term(&t),
            })
        };
        match self {
            Goal::Call(a) => Goal::Call(Atom {
                pred: a.pred.clone(),
                args: a.args.iter().map(|t| t.map_vars(f)).collect(),
            }),
            Goal::Is(l, r) => Goal::Is(l.map_vars(f), e(r)),
            Goal::Cmp(op, l, r) => Goal::Cmp(*op, e(l), e(r)),
            Goal::Unify(l, r) => Goal::Unify(l.map_vars(f), r.map_vars(f)),
            Goal::Disj(alts) => Goal::Disj(
                alts.iter()
                    .map(|alt| alt.iter().map(|g| g.map_vars(f)).collect())
                    .collect(),
            ),
        }
    }

    pub fn is_user_call(&self) -> bool {
        matches!(self, Goal::Call(_))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Goal>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Goal>) -> Clause {
        Clause { head, body }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = self.head.vars();
        self.body.iter().for_each(|g| g.collect_vars(&mut out));
        out
    }

    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Term) -> Clause {
        let head = Atom {
            pred: self.head.pred.clone(),
            args: self.head.args.iter().map(|t| t.map_vars(f)).collect(),
        };
        Clause {
            head,
            body: self.body.iter().map(|g| g.map_vars(f)).collect(),
        }
    }

    /// Renames variables to `V0, V1, …` in order of first occurrence.
    pub fn canonical(&self) -> Clause {
        let names: HashMap<Var, Var> = self
            .vars()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, Var::new(format!("V{}", i))))
            .collect();
        self.map_vars(&|v| Term::Var(names[v].clone()))
    }

    /// Structural equality modulo a consistent renaming of variables.
    pub fn alpha_eq(&self, other: &Clause) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn head_vars(&self) -> Vec<Var> {
        self.head.vars()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: Arc<str>,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: &str, arity: usize) -> PredKey {
        PredKey {
            name: Arc::from(name),
            arity,
        }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Debug for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Int,
    Var,
    Any,
}

impl Mode {
    pub fn token(self) -> &'static str {
        match self {
            Mode::Int => "int",
            Mode::Var => "var",
            Mode::Any => "any",
        }
    }
}

/// The `:- query(p(int, any, var)).` directive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuerySpec {
    pub pred: PredKey,
    pub modes: Vec<Mode>,
}

impl QuerySpec {
    pub fn new(name: &str, modes: Vec<Mode>) -> QuerySpec {
        QuerySpec {
            pred: PredKey::new(name, modes.len()),
            modes,
        }
    }
}

impl fmt::Display for QuerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let modes: Vec<&str> = self.modes.iter().map(|m| m.token()).collect();
        write!(f, "{}({})", self.pred.name, modes.join(", "))
    }
}

/// The "refers to" relation, its transitive closure and derived notions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Deps {
    refers: BTreeMap<PredKey, BTreeSet<PredKey>>,
    closure: BTreeMap<PredKey, BTreeSet<PredKey>>,
}

impl Deps {
    pub fn of(clauses: &[Clause]) -> Deps {
        let mut refers: BTreeMap<PredKey, BTreeSet<PredKey>> = BTreeMap::new();
        fn calls(goals: &[Goal], out: &mut BTreeSet<PredKey>) {
            for g in goals {
                match g {
                    Goal::Call(a) => {
                        out.insert(a.key());
                    }
                    Goal::Disj(alts) => alts.iter().for_each(|alt| calls(alt, out)),
                    _ => {}
                }
            }
        }
        for c in clauses {
            let entry = refers.entry(c.head.key()).or_default();
            calls(&c.body, entry);
        }
        let callees: Vec<PredKey> = refers.values().flatten().cloned().collect();
        for k in callees {
            refers.entry(k).or_default();
        }
        let mut closure = BTreeMap::new();
        for p in refers.keys() {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<&PredKey> = refers[p].iter().collect();
            while let Some(q) = stack.pop() {
                if seen.insert(q.clone()) {
                    stack.extend(refers[q].iter());
                }
            }
            closure.insert(p.clone(), seen);
        }
        Deps { refers, closure }
    }

    pub fn preds(&self) -> impl Iterator<Item = &PredKey> {
        self.refers.keys()
    }

    pub fn refers_to(&self, p: &PredKey) -> impl Iterator<Item = &PredKey> {
        self.refers.get(p).into_iter().flatten()
    }

    /// `p ⊒ q`: p depends on q through zero or more steps.
    pub fn depends(&self, p: &PredKey, q: &PredKey) -> bool {
        p == q || self.closure.get(p).is_some_and(|s| s.contains(q))
    }

    pub fn recursive(&self, p: &PredKey) -> bool {
        self.closure.get(p).is_some_and(|s| s.contains(p))
    }

    /// `p ≃ q`.
    pub fn mutual(&self, p: &PredKey, q: &PredKey) -> bool {
        self.closure.get(p).is_some_and(|s| s.contains(q))
            && self.closure.get(q).is_some_and(|s| s.contains(p))
    }

    /// Predicates reachable from `p`, including `p`.
    pub fn reachable(&self, p: &PredKey) -> BTreeSet<PredKey> {
        let mut out = self.closure.get(p).cloned().unwrap_or_default();
        out.insert(p.clone());
        out
    }

    /// The component of `p`: `{p}` plus everything mutually recursive with it.
    pub fn component(&self, p: &PredKey) -> BTreeSet<PredKey> {
        let mut out: BTreeSet<PredKey> = self
            .refers
            .keys()
            .filter(|q| self.mutual(p, q))
            .cloned()
            .collect();
        out.insert(p.clone());
        out
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    clauses: Vec<Clause>,
    pub query: Option<QuerySpec>,
    deps: Deps,
}

impl Program {
    pub fn new(name: impl Into<String>, clauses: Vec<Clause>, query: Option<QuerySpec>) -> Program {
        let deps = Deps::of(&clauses);
        Program {
            name: name.into(),
            clauses,
            query,
            deps,
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn with_clauses(&self, clauses: Vec<Clause>) -> Program {
        Program::new(self.name.clone(), clauses, self.query.clone())
    }

    pub fn deps(&self) -> &Deps {
        &self.deps
    }

    pub fn clauses_of<'a>(
        &'a self,
        p: &'a PredKey,
    ) -> impl Iterator<Item = (usize, &'a Clause)> + 'a {
        self.clauses
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.head.key() == *p)
    }

    pub fn defines(&self, p: &PredKey) -> bool {
        self.clauses.iter().any(|c| c.head.key() == *p)
    }

    /// Defined predicates in first-definition order.
    pub fn defined_preds(&self) -> Vec<PredKey> {
        let mut out: Vec<PredKey> = Vec::new();
        for c in &self.clauses {
            let k = c.head.key();
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    /// Same clauses modulo variable renaming, same query.
    pub fn alpha_eq(&self, other: &Program) -> bool {
        self.query == other.query
            && self.clauses.len() == other.clauses.len()
            && self
                .clauses
                .iter()
                .zip(&other.clauses)
                .all(|(a, b)| a.alpha_eq(b))
    }
}

// ---------------------------------------------------------------- printing

fn is_plain_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => s == NIL,
    }
}

fn write_atom_name(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_plain_atom_name(s) {
        f.write_str(s)
    } else {
        write!(f, "'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

fn term_precedence(t: &Term) -> u32 {
    match t {
        Term::Int(n) if n.is_negative() => 200,
        Term::Struct(f, args) => match (f.as_ref(), args.len()) {
            ("-", 1) => 200,
            (op, 2) => ArithOp::from_token(op).map_or(0, |o| o.precedence()),
            _ => 0,
        },
        _ => 0,
    }
}

fn write_term_at(f: &mut fmt::Formatter<'_>, t: &Term, max: u32) -> fmt::Result {
    let p = term_precedence(t);
    if p > max {
        write!(f, "({})", t)
    } else {
        write!(f, "{}", t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Int(n) => write!(f, "{}", n),
            Term::Struct(name, args) => {
                match (name.as_ref(), args.as_slice()) {
                    ("-", [a]) => {
                        // `-(3)` stays distinct from the literal `-3`
                        return match a {
                            Term::Int(_) => write!(f, "-({})", a),
                            _ if term_precedence(a) == 0 => write!(f, "-{}", a),
                            _ => write!(f, "-({})", a),
                        };
                    }
                    (op, [l, r]) if ArithOp::from_token(op).is_some() => {
                        let prec = ArithOp::from_token(op).expect("checked").precedence();
                        write_term_at(f, l, prec)?;
                        if op == "mod" {
                            f.write_str(" mod ")?;
                        } else {
                            f.write_str(op)?;
                        }
                        let max = if term_precedence(r) == 200 {
                            0
                        } else {
                            prec - 1
                        };
                        return write_term_at(f, r, max);
                    }
                    (CONS, [_, _]) => return write_list(f, self),
                    _ => {}
                }
                write_atom_name(f, name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    f.write_str("[")?;
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::Struct(n, args) if n.as_ref() == CONS && args.len() == 2 => {
                if !first {
                    f.write_str(", ")?;
                }
                write!(f, "{}", args[0])?;
                first = false;
                cur = &args[1];
            }
            Term::Struct(n, args) if n.as_ref() == NIL && args.is_empty() => break,
            other => {
                write!(f, "|{}", other)?;
                break;
            }
        }
    }
    f.write_str("]")
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn write_expr_at(f: &mut fmt::Formatter<'_>, e: &IntExpr, max: u32) -> fmt::Result {
    if e.precedence() > max {
        write!(f, "({})", e)
    } else {
        write!(f, "{}", e)
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Lit(n) => write!(f, "{}", n),
            IntExpr::Var(v) => write!(f, "{}", v),
            IntExpr::Neg(e) => match e.as_ref() {
                IntExpr::Var(v) => write!(f, "-{}", v),
                other => write!(f, "-({})", other),
            },
            IntExpr::Bin(op, l, r) => {
                let prec = op.precedence();
                write_expr_at(f, l, prec)?;
                match op {
                    ArithOp::Mod => f.write_str(" mod ")?,
                    _ => write!(f, "{}", op.token())?,
                }
                let max = if r.precedence() == 200 { 0 } else { prec - 1 };
                write_expr_at(f, r, max)
            }
        }
    }
}

impl fmt::Debug for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Term::Struct(self.pred.clone(), self.args.clone()))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn write_goals(f: &mut fmt::Formatter<'_>, goals: &[Goal]) -> fmt::Result {
    for (i, g) in goals.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}", g)?;
    }
    Ok(())
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Call(a) => write!(f, "{}", a),
            Goal::Is(l, r) => write!(f, "{} is {}", l, r),
            Goal::Cmp(op, l, r) => write!(f, "{} {} {}", l, op.token(), r),
            Goal::Unify(l, r) => write!(f, "{} = {}", l, r),
            Goal::Disj(alts) => {
                f.write_str("(")?;
                for (i, alt) in alts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ; ")?;
                    }
                    if alt.is_empty() {
                        f.write_str("true")?;
                    }
                    write_goals(f, alt)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            write_goals(f, &self.body)?;
        }
        f.write_str(".")
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = &self.query {
            writeln!(f, ":- query({}).", q)?;
        }
        for c in &self.clauses {
            writeln!(f, "{}", c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Fresh `_H<n>` names not clashing with anything in `taken`.
pub struct FreshVars {
    next: usize,
}

impl FreshVars {
    pub const PREFIX: &'static str = "_H";

    pub fn new() -> Self {
        FreshVars { next: 0 }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::new(format!("{}{}", Self::PREFIX, self.next));
        self.next += 1;
        v
    }
}

impl Default for FreshVars {
    fn default() -> Self {
        Self::new()
    }
}
