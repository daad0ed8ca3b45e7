//! Reader for `.npl` sources.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::ast::*;
use crate::error::{Error, Result};
use crate::symbol::Var;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Var(String),
    Name(String),
    Int(BigInt),
    Punct(&'static str),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

// longest first
const PUNCT: [&str; 19] = [
    ":-", "=:=", "=\\=", "=<", ">=", "//", "=", "<", ">", "+", "-", "*", "(", ")", "[", "]", "|",
    ",", ";",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: String| Error::Syntax { line, col, msg };
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            bump!();
            bump!();
            loop {
                if i + 1 >= chars.len() {
                    return Err(syntax(l0, c0, "unterminated block comment".into()));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: l0,
                col: c0,
            })
        };
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i < chars.len()
                && chars[i] == '.'
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                return Err(syntax(
                    l0,
                    c0,
                    "floating-point literals are not supported".into(),
                ));
            }
            let text: String = chars[s..i].iter().collect();
            push(&mut out, Tok::Int(text.parse().expect("digits")));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let text: String = chars[s..i].iter().collect();
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(text)
            } else {
                Tok::Name(text)
            };
            push(&mut out, tok);
            continue;
        }
        if c == '\'' {
            bump!();
            let mut text = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(syntax(l0, c0, "unterminated quoted atom".into()))
                    }
                    Some('\'') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let Some(&e) = chars.get(i) else {
                            return Err(syntax(l0, c0, "unterminated quoted atom".into()));
                        };
                        text.push(e);
                        bump!();
                    }
                    Some(&ch) => {
                        text.push(ch);
                        bump!();
                    }
                }
            }
            push(&mut out, Tok::Name(text));
            continue;
        }
        if c == '.' {
            bump!();
            push(&mut out, Tok::Punct("."));
            continue;
        }
        for p in PUNCT {
            let n = p.chars().count();
            if chars[i..].iter().take(n).copied().eq(p.chars()) {
                for _ in 0..n {
                    bump!();
                }
                push(&mut out, Tok::Punct(p));
                continue 'outer;
            }
        }
        return Err(syntax(l0, c0, format!("unexpected character '{}'", c)));
    }
    out.push(Token {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

const BUILTINS: [&str; 8] = ["is", "<", ">", "=<", ">=", "=:=", "=\\=", "="];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            anon: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn err_at<T>(&self, at: (usize, usize), msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: at.0,
            col: at.1,
            msg: msg.into(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected '{}', found {}", p, describe(self.peek())))
        }
    }

    // ------------------------------------------------------------ terms

    fn expr(&mut self) -> Result<Term> {
        let mut t = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p @ ("+" | "-")) => *p,
                _ => return Ok(t),
            };
            self.pos += 1;
            let r = self.product()?;
            t = Term::Struct(Arc::from(op), vec![t, r]);
        }
    }

    fn product(&mut self) -> Result<Term> {
        let mut t = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p @ ("*" | "//")) => *p,
                Tok::Name(n) if n == "mod" => "mod",
                _ => return Ok(t),
            };
            self.pos += 1;
            let r = self.unary()?;
            t = Term::Struct(Arc::from(op), vec![t, r]);
        }
    }

    fn unary(&mut self) -> Result<Term> {
        if self.is_punct("-") {
            if let Tok::Int(n) = self.peek_at(1).clone() {
                self.pos += 2;
                return Ok(Term::Int(-n));
            }
            self.pos += 1;
            let t = self.unary()?;
            return Ok(Term::Struct(Arc::from("-"), vec![t]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(Term::Int(n))
            }
            Tok::Var(v) => {
                self.pos += 1;
                if v == "_" {
                    self.anon += 1;
                    return Ok(Term::Var(Var::new(format!("\u{0}{}", self.anon))));
                }
                Ok(Term::Var(Var::new(v)))
            }
            Tok::Name(n) => {
                self.pos += 1;
                if self.eat("(") {
                    let mut args = vec![self.expr()?];
                    while self.eat(",") {
                        args.push(self.expr()?);
                    }
                    self.expect(")")?;
                    Ok(Term::Struct(Arc::from(n.as_str()), args))
                } else {
                    Ok(Term::atom(&n))
                }
            }
            Tok::Punct("(") => {
                self.pos += 1;
                let t = self.expr()?;
                self.expect(")")?;
                Ok(t)
            }
            Tok::Punct("[") => {
                self.pos += 1;
                if self.eat("]") {
                    return Ok(Term::atom(NIL));
                }
                let mut items = vec![self.expr()?];
                while self.eat(",") {
                    items.push(self.expr()?);
                }
                let tail = if self.eat("|") {
                    self.expr()?
                } else {
                    Term::atom(NIL)
                };
                self.expect("]")?;
                Ok(items
                    .into_iter()
                    .rev()
                    .fold(tail, |acc, x| Term::Struct(Arc::from(CONS), vec![x, acc])))
            }
            other => self.err(format!("expected a term, found {}", describe(&other))),
        }
    }

    // ------------------------------------------------------------ goals

    fn int_expr(&self, t: &Term, at: (usize, usize)) -> Result<IntExpr> {
        match IntExpr::from_term(t) {
            Some(e) => Ok(e),
            None => self.err_at(
                at,
                format!("non-integer literal in arithmetic position: {}", t),
            ),
        }
    }

    fn goal_seq(&mut self) -> Result<Vec<Goal>> {
        let mut goals = self.goal()?;
        while self.eat(",") {
            goals.extend(self.goal()?);
        }
        Ok(goals)
    }

    fn goal(&mut self) -> Result<Vec<Goal>> {
        if self.is_punct("(") {
            let save = self.pos;
            let anon = self.anon;
            if let Ok(g) = self.simple_goal() {
                if matches!(self.peek(), Tok::Punct("," | "." | ";" | ")")) {
                    return Ok(vec![g]);
                }
            }
            self.pos = save;
            self.anon = anon;
            self.expect("(")?;
            let mut alts = vec![self.goal_seq()?];
            while self.eat(";") {
                alts.push(self.goal_seq()?);
            }
            self.expect(")")?;
            if alts.len() == 1 {
                return Ok(alts.pop().expect("one"));
            }
            return Ok(vec![Goal::Disj(alts)]);
        }
        Ok(vec![self.simple_goal()?])
    }

    fn simple_goal(&mut self) -> Result<Goal> {
        let at = self.here();
        let lhs = self.expr()?;
        let op: Option<String> = match self.peek() {
            Tok::Name(n) if n == "is" => Some("is".into()),
            Tok::Punct(p) if BUILTINS.contains(p) => Some(p.to_string()),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let rhs_at = self.here();
            let rhs = self.expr()?;
            return self.builtin(&op, lhs, rhs, at, rhs_at);
        }
        match lhs {
            Term::Struct(name, args) => {
                if BUILTINS.contains(&name.as_ref()) {
                    if args.len() != 2 {
                        return self.err_at(
                            at,
                            format!("unknown built-in arity: {}/{}", name, args.len()),
                        );
                    }
                    let mut it = args.into_iter();
                    let (l, r) = (it.next().expect("2"), it.next().expect("2"));
                    return self.builtin(&name, l, r, at, at);
                }
                Ok(Goal::Call(Atom { pred: name, args }))
            }
            Term::Var(_) => self.err_at(at, "variables are not callable goals"),
            Term::Int(_) => self.err_at(at, "integers are not callable goals"),
        }
    }

    fn builtin(
        &self,
        op: &str,
        lhs: Term,
        rhs: Term,
        at: (usize, usize),
        rhs_at: (usize, usize),
    ) -> Result<Goal> {
        Ok(match op {
            "is" => Goal::Is(lhs, self.int_expr(&rhs, rhs_at)?),
            "=" => Goal::Unify(lhs, rhs),
            cmp => Goal::Cmp(
                CmpOp::from_token(cmp).expect("comparison"),
                self.int_expr(&lhs, at)?,
                self.int_expr(&rhs, rhs_at)?,
            ),
        })
    }

    // ------------------------------------------------------------ clauses

    fn head(&mut self) -> Result<Atom> {
        let at = self.here();
        match self.primary()? {
            Term::Struct(name, args) => {
                if BUILTINS.contains(&name.as_ref()) {
                    return self.err_at(
                        at,
                        format!("cannot redefine built-in {}/{}", name, args.len()),
                    );
                }
                Ok(Atom { pred: name, args })
            }
            _ => self.err_at(at, "clause head must be an atom"),
        }
    }

    fn clause(&mut self) -> Result<Clause> {
        self.anon = 0;
        let head = self.head()?;
        let body = if self.eat(":-") {
            self.goal_seq()?
        } else {
            Vec::new()
        };
        self.expect(".")?;
        Ok(name_anonymous(Clause::new(head, body)))
    }

    fn directive(&mut self) -> Result<QuerySpec> {
        let at = self.here();
        let t = self.primary()?;
        self.expect(".")?;
        let bad = || Error::Syntax {
            line: at.0,
            col: at.1,
            msg: "expected `query(p(int|var|any, ...))` directive".into(),
        };
        let Term::Struct(d, dargs) = &t else {
            return Err(bad());
        };
        if d.as_ref() != "query" || dargs.len() != 1 {
            return Err(bad());
        }
        let Term::Struct(p, margs) = &dargs[0] else {
            return Err(bad());
        };
        let modes = margs
            .iter()
            .map(|m| match m {
                Term::Struct(n, a) if a.is_empty() => match n.as_ref() {
                    "int" => Some(Mode::Int),
                    "var" => Some(Mode::Var),
                    "any" => Some(Mode::Any),
                    _ => None,
                },
                _ => None,
            })
            .collect::<Option<Vec<Mode>>>()
            .ok_or_else(bad)?;
        Ok(QuerySpec::new(p, modes))
    }
}

/// Gives `_` occurrences names that do not clash with the clause's own.
fn name_anonymous(c: Clause) -> Clause {
    let vars = c.vars();
    if !vars.iter().any(|v| v.as_str().starts_with('\u{0}')) {
        return c;
    }
    let taken: HashSet<String> = vars.iter().map(|v| v.as_str().to_string()).collect();
    let mut k = 0;
    let mut fresh = || loop {
        let name = format!("_G{}", k);
        k += 1;
        if !taken.contains(&name) {
            return name;
        }
    };
    let renames: Vec<(Var, Var)> = vars
        .iter()
        .filter(|v| v.as_str().starts_with('\u{0}'))
        .map(|v| (v.clone(), Var::new(fresh())))
        .collect();
    c.map_vars(&|v| {
        let to = renames
            .iter()
            .find(|(from, _)| from == v)
            .map(|(_, to)| to.clone());
        Term::Var(to.unwrap_or_else(|| v.clone()))
    })
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Var(v) => format!("variable {}", v),
        Tok::Name(n) => format!("'{}'", n),
        Tok::Int(n) => format!("integer {}", n),
        Tok::Punct(p) => format!("'{}'", p),
        Tok::End => "end of input".into(),
    }
}

fn check_reserved(c: &Clause) -> Result<()> {
    for v in c.vars() {
        if v.as_str().starts_with(FreshVars::PREFIX) {
            return Err(Error::input(format!(
                "variable {} uses the reserved prefix {} (in clause for {})",
                v,
                FreshVars::PREFIX,
                c.head.key()
            )));
        }
    }
    Ok(())
}

pub fn parse_program(name: &str, src: &str) -> Result<Program> {
    let mut p = Parser::new(src)?;
    let mut clauses = Vec::new();
    let mut query = None;
    while *p.peek() != Tok::End {
        if p.eat(":-") {
            let at = p.here();
            let q = p.directive()?;
            if query.is_some() {
                return p.err_at(at, "more than one query directive");
            }
            query = Some(q);
        } else {
            clauses.push(p.clause()?);
        }
    }
    Ok(Program::new(name, clauses, query))
}

/// Like [`parse_program`] but rejects user variables named `_H…`.
pub fn parse_user_program(name: &str, src: &str) -> Result<Program> {
    let prog = parse_program(name, src)?;
    for c in prog.clauses() {
        check_reserved(c)?;
    }
    Ok(prog)
}

/// A single goal atom such as `p(5, X)`.
pub fn parse_atom(src: &str) -> Result<Atom> {
    let mut p = Parser::new(src)?;
    let a = p.head()?;
    p.eat(".");
    if *p.peek() != Tok::End {
        return p.err("trailing input after goal");
    }
    let c = name_anonymous(Clause::new(a, Vec::new()));
    Ok(c.head)
}

pub fn parse_clause(src: &str) -> Result<Clause> {
    let mut p = Parser::new(src)?;
    let c = p.clause()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input after clause");
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_clause() {
        let c = parse_clause("p(X) :- X < 7, X1 is X + 1, p(X1).").unwrap();
        assert_eq!(c.head.key(), PredKey::new("p", 1));
        assert_eq!(c.body.len(), 3);
        assert!(matches!(c.body[0], Goal::Cmp(CmpOp::Lt, _, _)));
        assert!(matches!(c.body[1], Goal::Is(_, _)));
        assert!(matches!(c.body[2], Goal::Call(_)));
        assert_eq!(c.to_string(), "p(X) :- X < 7, X1 is X+1, p(X1).");
    }

    #[test]
    fn fact() {
        let c = parse_clause("a.").unwrap();
        assert!(c.body.is_empty());
        assert_eq!(c.head.args.len(), 0);
    }

    #[test]
    fn negative_literals_and_unary_minus() {
        let c = parse_clause("p(X) :- X1 is -X*X, X > -1000, Y is X - -3, Z is -(4).").unwrap();
        let Goal::Is(_, e) = &c.body[0] else { panic!() };
        assert_eq!(
            *e,
            IntExpr::bin(
                ArithOp::Mul,
                IntExpr::Neg(Box::new(IntExpr::var("X"))),
                IntExpr::var("X")
            )
        );
        let Goal::Cmp(_, _, r) = &c.body[1] else {
            panic!()
        };
        assert_eq!(*r, IntExpr::lit(-1000));
        let Goal::Is(_, e) = &c.body[2] else { panic!() };
        assert_eq!(
            *e,
            IntExpr::bin(ArithOp::Sub, IntExpr::var("X"), IntExpr::lit(-3))
        );
        let Goal::Is(_, e) = &c.body[3] else { panic!() };
        assert_eq!(*e, IntExpr::Neg(Box::new(IntExpr::lit(4))));
        let again = parse_clause(&c.to_string()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn disjunctions_and_parenthesized_comparisons() {
        let c = parse_clause("h(X) :- (X > 1 ; X < -1), (X + 1) * 2 > 3, (a ; (b ; c)).").unwrap();
        assert!(matches!(&c.body[0], Goal::Disj(a) if a.len() == 2));
        assert!(matches!(&c.body[1], Goal::Cmp(CmpOp::Gt, _, _)));
        assert!(matches!(&c.body[2], Goal::Disj(a) if a.len() == 2));
        assert_eq!(parse_clause(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn query_directive() {
        let p = parse_program("t", ":- query(p(int, any, var)).\np(X, Y, Z).").unwrap();
        let q = p.query.unwrap();
        assert_eq!(q.pred, PredKey::new("p", 3));
        assert_eq!(q.modes, vec![Mode::Int, Mode::Any, Mode::Var]);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_program("t", "p(X) :-\n  X < .").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 2, .. }), "{:?}", e);
        let e = parse_clause("p(X) :- X is foo + 1.").unwrap_err();
        assert!(e.to_string().contains("non-integer literal"), "{}", e);
        let e = parse_clause("p(X) :- is(X).").unwrap_err();
        assert!(e.to_string().contains("unknown built-in arity"), "{}", e);
        let e = parse_user_program("t", "p(_H1).").unwrap_err();
        assert!(e.to_string().contains("reserved"), "{}", e);
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let c = parse_clause("p(_, _, G0) :- q(_G0).").unwrap();
        let vars = c.vars();
        assert_eq!(vars.len(), 4);
        assert_eq!(parse_clause(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn lists_and_mod() {
        let c = parse_clause("len([_|T], N) :- len(T, M), N is M + 1 mod 2.").unwrap();
        assert_eq!(
            c.to_string(),
            "len([_G0|T], N) :- len(T, M), N is M+1 mod 2."
        );
        assert_eq!(parse_clause(&c.to_string()).unwrap(), c);
    }
}
