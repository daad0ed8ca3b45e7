//! Reference interpreter: depth-first, leftmost selection, clauses in
//! written order, unbounded integers, and a step budget.
//!
//! The analysis never calls this; tests use it to check that specialization
//! keeps behavior and that inferred conditions really do terminate.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::ast::{ArithOp, Atom, CmpOp, Goal, Program, Term};
use crate::symbol::Var;

/// Integers wider than this are treated as running out of budget.
pub const DEFAULT_MAX_INT_BITS: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("unbound variable in arithmetic")]
    Unbound,
    #[error("not an integer expression: {0}")]
    NotInteger(String),
    #[error("division by zero")]
    ZeroDivisor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    AllFinite,
    BudgetExceeded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::AllFinite => "all finite",
            Status::BudgetExceeded => "budget exceeded",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub status: Status,
    /// Query arguments per answer, sorted; unbound parts print as `_`.
    pub answers: Vec<String>,
    pub steps: u64,
}

impl RunResult {
    /// Same status, and same answers when both trees were fully explored.
    pub fn agrees_with(&self, other: &RunResult) -> bool {
        self.status == other.status
            && (self.status == Status::BudgetExceeded || self.answers == other.answers)
    }
}

#[derive(Clone, Debug)]
enum RTerm {
    Var(usize),
    Int(BigInt),
    Struct(Arc<str>, Vec<RTerm>),
}

#[derive(Clone, Debug)]
enum RGoal {
    Call(Arc<str>, Vec<RTerm>),
    Is(RTerm, RTerm),
    Cmp(CmpOp, RTerm, RTerm),
    Unify(RTerm, RTerm),
    Disj(Vec<Vec<RGoal>>),
}

#[derive(Debug)]
struct Compiled {
    head: Vec<RTerm>,
    body: Vec<RGoal>,
    nvars: usize,
}

struct VarMap(HashMap<Var, usize>);

impl VarMap {
    fn term(&mut self, t: &Term) -> RTerm {
        match t {
            Term::Var(v) => {
                let n = self.0.len();
                RTerm::Var(*self.0.entry(v.clone()).or_insert(n))
            }
            Term::Int(n) => RTerm::Int(n.clone()),
            Term::Struct(f, args) => {
                RTerm::Struct(f.clone(), args.iter().map(|a| self.term(a)).collect())
            }
        }
    }

    fn goal(&mut self, g: &Goal) -> RGoal {
        match g {
            Goal::Call(a) => RGoal::Call(
                a.pred.clone(),
                a.args.iter().map(|t| self.term(t)).collect(),
            ),
            Goal::Is(l, r) => RGoal::Is(self.term(l), self.term(&r.to_term())),
            Goal::Cmp(op, l, r) => {
                RGoal::Cmp(*op, self.term(&l.to_term()), self.term(&r.to_term()))
            }
            Goal::Unify(l, r) => RGoal::Unify(self.term(l), self.term(r)),
            Goal::Disj(alts) => RGoal::Disj(
                alts.iter()
                    .map(|b| b.iter().map(|g| self.goal(g)).collect())
                    .collect(),
            ),
        }
    }
}

fn offset_term(t: &RTerm, base: usize) -> RTerm {
    match t {
        RTerm::Var(i) => RTerm::Var(i + base),
        RTerm::Int(n) => RTerm::Int(n.clone()),
        RTerm::Struct(f, args) => RTerm::Struct(
            f.clone(),
            args.iter().map(|a| offset_term(a, base)).collect(),
        ),
    }
}

fn offset_goal(g: &RGoal, base: usize) -> RGoal {
    match g {
        RGoal::Call(p, args) => RGoal::Call(
            p.clone(),
            args.iter().map(|a| offset_term(a, base)).collect(),
        ),
        RGoal::Is(l, r) => RGoal::Is(offset_term(l, base), offset_term(r, base)),
        RGoal::Cmp(op, l, r) => RGoal::Cmp(*op, offset_term(l, base), offset_term(r, base)),
        RGoal::Unify(l, r) => RGoal::Unify(offset_term(l, base), offset_term(r, base)),
        RGoal::Disj(alts) => RGoal::Disj(
            alts.iter()
                .map(|b| b.iter().map(|g| offset_goal(g, base)).collect())
                .collect(),
        ),
    }
}

struct ContNode {
    goal: RGoal,
    next: Cont,
}

type Cont = Option<Rc<ContNode>>;

// Continuations of deep recursions are long lists; unlink them in a loop.
impl Drop for ContNode {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut node) => next = node.next.take(),
                Err(_) => break,
            }
        }
    }
}

fn push_all(goals: &[RGoal], base: usize, mut cont: Cont) -> Cont {
    for g in goals.iter().rev() {
        cont = Some(Rc::new(ContNode {
            goal: offset_goal(g, base),
            next: cont,
        }));
    }
    cont
}

enum Alt {
    Clauses {
        key: (Arc<str>, usize),
        args: Vec<RTerm>,
        next: usize,
    },
    Branches {
        alts: Vec<Vec<RGoal>>,
        next: usize,
    },
}

struct Choice {
    alt: Alt,
    cont: Cont,
    trail: usize,
    store: usize,
}

/// A program prepared for repeated runs.
pub struct Interpreter {
    clauses: HashMap<(Arc<str>, usize), Vec<Compiled>>,
    pub max_int_bits: u64,
}

struct Machine<'a> {
    interp: &'a Interpreter,
    on_call: Option<&'a mut dyn FnMut(&Atom)>,
    store: Vec<Option<RTerm>>,
    trail: Vec<usize>,
    choices: Vec<Choice>,
    steps: u64,
}

enum Stop {
    Budget,
    Error(RunError),
}

impl From<RunError> for Stop {
    fn from(e: RunError) -> Self {
        Stop::Error(e)
    }
}

impl Interpreter {
    pub fn new(p: &Program) -> Self {
        let mut clauses: HashMap<(Arc<str>, usize), Vec<Compiled>> = HashMap::new();
        for c in p.clauses() {
            let mut vm = VarMap(HashMap::new());
            let head = c.head.args.iter().map(|t| vm.term(t)).collect();
            let body = c.body.iter().map(|g| vm.goal(g)).collect();
            clauses
                .entry((c.head.pred.clone(), c.head.args.len()))
                .or_default()
                .push(Compiled {
                    head,
                    body,
                    nvars: vm.0.len(),
                });
        }
        Interpreter {
            clauses,
            max_int_bits: DEFAULT_MAX_INT_BITS,
        }
    }

    /// Explores the whole tree for `goal`, or stops after `budget` steps.
    pub fn run(&self, goal: &Atom, budget: u64) -> Result<RunResult, RunError> {
        self.run_inner(goal, budget, None)
    }

    /// Like `run`, reporting each selected user call as it is made; unbound
    /// variables show up as `_Ri`.
    pub fn run_observed(
        &self,
        goal: &Atom,
        budget: u64,
        on_call: &mut dyn FnMut(&Atom),
    ) -> Result<RunResult, RunError> {
        self.run_inner(goal, budget, Some(on_call))
    }

    fn run_inner<'a>(
        &'a self,
        goal: &Atom,
        budget: u64,
        on_call: Option<&'a mut dyn FnMut(&Atom)>,
    ) -> Result<RunResult, RunError> {
        let mut vm = VarMap(HashMap::new());
        let args: Vec<RTerm> = goal.args.iter().map(|t| vm.term(t)).collect();
        let mut m = Machine {
            interp: self,
            on_call,
            store: vec![None; vm.0.len()],
            trail: Vec::new(),
            choices: Vec::new(),
            steps: 0,
        };
        let mut answers = Vec::new();
        let start = push_all(&[RGoal::Call(goal.pred.clone(), args.clone())], 0, None);
        let status = match m.solve(start, budget, &args, &mut answers) {
            Ok(()) => Status::AllFinite,
            Err(Stop::Budget) => Status::BudgetExceeded,
            Err(Stop::Error(e)) => return Err(e),
        };
        answers.sort();
        Ok(RunResult {
            status,
            answers,
            steps: m.steps,
        })
    }
}

/// One-off run of `goal` against `p`.
pub fn run(p: &Program, goal: &Atom, budget: u64) -> Result<RunResult, RunError> {
    Interpreter::new(p).run(goal, budget)
}

impl Machine<'_> {
    fn deref(&self, t: &RTerm) -> RTerm {
        let mut t = t.clone();
        while let RTerm::Var(i) = t {
            match &self.store[i] {
                Some(b) => t = b.clone(),
                None => return t,
            }
        }
        t
    }

    fn bind(&mut self, v: usize, t: RTerm) {
        self.store[v] = Some(t);
        self.trail.push(v);
    }

    fn unify(&mut self, a: &RTerm, b: &RTerm) -> bool {
        let (a, b) = (self.deref(a), self.deref(b));
        match (&a, &b) {
            (RTerm::Var(i), RTerm::Var(j)) if i == j => true,
            (RTerm::Var(i), _) => {
                self.bind(*i, b);
                true
            }
            (_, RTerm::Var(j)) => {
                self.bind(*j, a);
                true
            }
            (RTerm::Int(x), RTerm::Int(y)) => x == y,
            (RTerm::Struct(f, xs), RTerm::Struct(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn eval(&self, t: &RTerm) -> Result<BigInt, Stop> {
        let n = match self.deref(t) {
            RTerm::Var(_) => return Err(RunError::Unbound.into()),
            RTerm::Int(n) => n,
            RTerm::Struct(f, args) => match (f.as_ref(), args.as_slice()) {
                ("-", [a]) => -self.eval(a)?,
                (op, [a, b]) => {
                    let op = ArithOp::from_token(op)
                        .ok_or_else(|| RunError::NotInteger(op.to_string()))?;
                    let (x, y) = (self.eval(a)?, self.eval(b)?);
                    match op {
                        ArithOp::Add => x + y,
                        ArithOp::Sub => x - y,
                        ArithOp::Mul => x * y,
                        ArithOp::IntDiv if y.is_zero() => return Err(RunError::ZeroDivisor.into()),
                        ArithOp::IntDiv => x / y,
                        ArithOp::Mod if y.is_zero() => return Err(RunError::ZeroDivisor.into()),
                        ArithOp::Mod => x.mod_floor(&y),
                    }
                }
                _ => return Err(RunError::NotInteger(f.to_string()).into()),
            },
        };
        if n.bits() > self.interp.max_int_bits {
            return Err(Stop::Budget);
        }
        Ok(n)
    }

    fn tick(&mut self, budget: u64) -> Result<(), Stop> {
        if self.steps >= budget {
            return Err(Stop::Budget);
        }
        self.steps += 1;
        Ok(())
    }

    fn undo_to(&mut self, trail: usize, store: usize) {
        for v in self.trail.drain(trail..) {
            self.store[v] = None;
        }
        self.store.truncate(store);
    }

    fn fresh(&mut self, n: usize) -> usize {
        let base = self.store.len();
        self.store.resize(base + n, None);
        base
    }

    /// Resumes the newest choicepoint; `None` when none are left.
    fn backtrack(&mut self, budget: u64) -> Result<Option<Cont>, Stop> {
        while let Some(top) = self.choices.last_mut() {
            let (trail, store, cont) = (top.trail, top.store, top.cont.clone());
            let step = match &mut top.alt {
                Alt::Clauses { key, args, next } => {
                    let cs = self
                        .interp
                        .clauses
                        .get(key)
                        .map(|v| v.as_slice())
                        .unwrap_or(&[]);
                    if *next >= cs.len() {
                        None
                    } else {
                        let i = *next;
                        *next += 1;
                        Some((Some((key.clone(), i)), args.clone(), i + 1 >= cs.len()))
                    }
                }
                Alt::Branches { alts, next } => {
                    if *next >= alts.len() {
                        None
                    } else {
                        let i = *next;
                        *next += 1;
                        let body = alts[i].clone();
                        let last = *next >= alts.len();
                        self.undo_to(trail, store);
                        if last {
                            self.choices.pop();
                        }
                        self.tick(budget)?;
                        return Ok(Some(push_all(&body, 0, cont)));
                    }
                }
            };
            self.undo_to(trail, store);
            let Some((Some((key, i)), args, last)) = step else {
                self.choices.pop();
                continue;
            };
            if last {
                self.choices.pop();
            }
            self.tick(budget)?;
            let c = &self.interp.clauses[&key][i];
            let base = self.fresh(c.nvars);
            let head: Vec<RTerm> = c.head.iter().map(|t| offset_term(t, base)).collect();
            if head.iter().zip(&args).all(|(h, a)| self.unify(h, a)) {
                return Ok(Some(push_all(&c.body, base, cont)));
            }
        }
        Ok(None)
    }

    fn to_term(&self, t: &RTerm) -> Term {
        match self.deref(t) {
            RTerm::Var(i) => Term::Var(Var::new(format!("_R{}", i))),
            RTerm::Int(n) => Term::Int(n),
            RTerm::Struct(f, args) => {
                Term::Struct(f, args.iter().map(|a| self.to_term(a)).collect())
            }
        }
    }

    fn render(&self, t: &RTerm) -> String {
        match self.deref(t) {
            RTerm::Var(_) => "_".into(),
            RTerm::Int(n) => n.to_string(),
            RTerm::Struct(f, args) if args.is_empty() => f.to_string(),
            RTerm::Struct(f, args) => {
                let parts: Vec<String> = args.iter().map(|a| self.render(a)).collect();
                format!("{}({})", f, parts.join(","))
            }
        }
    }

    fn solve(
        &mut self,
        mut cont: Cont,
        budget: u64,
        query: &[RTerm],
        answers: &mut Vec<String>,
    ) -> Result<(), Stop> {
        loop {
            let Some(node) = cont.take() else {
                let parts: Vec<String> = query.iter().map(|t| self.render(t)).collect();
                answers.push(format!("({})", parts.join(",")));
                match self.backtrack(budget)? {
                    Some(c) => {
                        cont = c;
                        continue;
                    }
                    None => return Ok(()),
                }
            };
            let next = node.next.clone();
            let ok = match &node.goal {
                RGoal::Call(p, args) => {
                    if self.on_call.is_some() {
                        let atom = Atom::new(p, args.iter().map(|a| self.to_term(a)).collect());
                        if let Some(f) = self.on_call.as_mut() {
                            f(&atom);
                        }
                    }
                    self.choices.push(Choice {
                        alt: Alt::Clauses {
                            key: (p.clone(), args.len()),
                            args: args.clone(),
                            next: 0,
                        },
                        cont: next.clone(),
                        trail: self.trail.len(),
                        store: self.store.len(),
                    });
                    match self.backtrack(budget)? {
                        Some(c) => {
                            cont = c;
                            continue;
                        }
                        None => return Ok(()),
                    }
                }
                RGoal::Disj(alts) => {
                    self.choices.push(Choice {
                        alt: Alt::Branches {
                            alts: alts.clone(),
                            next: 0,
                        },
                        cont: next.clone(),
                        trail: self.trail.len(),
                        store: self.store.len(),
                    });
                    false
                }
                RGoal::Is(l, r) => {
                    self.tick(budget)?;
                    let v = self.eval(r)?;
                    self.unify(l, &RTerm::Int(v))
                }
                RGoal::Cmp(op, l, r) => {
                    self.tick(budget)?;
                    let (x, y) = (self.eval(l)?, self.eval(r)?);
                    match op {
                        CmpOp::Lt => x < y,
                        CmpOp::Gt => x > y,
                        CmpOp::Le => x <= y,
                        CmpOp::Ge => x >= y,
                        CmpOp::ArithEq => x == y,
                        CmpOp::ArithNe => x != y,
                    }
                }
                RGoal::Unify(l, r) => {
                    self.tick(budget)?;
                    self.unify(l, r)
                }
            };
            if ok {
                cont = next;
                continue;
            }
            match self.backtrack(budget)? {
                Some(c) => cont = c,
                None => return Ok(()),
            }
        }
    }
}
