//! Lexer and backtracking recursive-descent parser for the concrete syntax.
//!
//! A `(` in expression position is ambiguous between a parenthesised
//! boolean, a constant-time conditional and a parenthesised arithmetic
//! expression, so the parser tries the alternatives in turn. Results for the
//! two expression nonterminals are memoised per token position, which keeps
//! nested parentheses linear.

use std::collections::HashMap;

use thiserror::Error;

use super::{used_vars, AExp, ArithOp, BExp, CmpOp, Com};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("`{0}` is used both as a scalar and as an array")]
    NameClash(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(u64),
    Id(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

const KEYWORDS: [&str; 9] = [
    "skip", "if", "then", "else", "end", "while", "do", "true", "false",
];

// Longest first so that maximal munch falls out of the scan order.
const SYMBOLS: [&str; 19] = [
    ":=", "<-", "<=", "<>", "&&", "||", ";", "[", "]", "(", ")", "?", ":", "+", "-", "*", "=",
    "<", "!",
];

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let bump = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump(c, &mut line, &mut col);
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s.parse::<u64>().map_err(|_| ParseError::Syntax {
                line: l0,
                col: c0,
                msg: format!("numeral `{s}` out of range"),
            })?;
            out.push(Token { tok: Tok::Num(n), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match KEYWORDS.iter().find(|k| **k == s) {
                Some(k) => Tok::Kw(k),
                None => Tok::Id(s),
            };
            out.push(Token { tok, line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => {
                return Err(ParseError::Syntax {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

type PResult<T> = Result<(T, usize), ()>;

struct Parser {
    toks: Vec<Token>,
    furthest: usize,
    expected: Vec<String>,
    aexp_memo: HashMap<usize, PResult<AExp>>,
    bexp_memo: HashMap<usize, PResult<BExp>>,
}

impl Parser {
    fn tok(&self, p: usize) -> &Tok {
        &self.toks[p.min(self.toks.len() - 1)].tok
    }

    fn fail<T>(&mut self, p: usize, what: &str) -> Result<T, ()> {
        if p > self.furthest {
            self.furthest = p;
            self.expected.clear();
        }
        if p == self.furthest && !self.expected.iter().any(|e| e == what) {
            self.expected.push(what.to_string());
        }
        Err(())
    }

    fn sym(&mut self, p: usize, s: &'static str) -> Result<usize, ()> {
        if *self.tok(p) == Tok::Sym(s) {
            Ok(p + 1)
        } else {
            self.fail(p, &format!("`{s}`"))
        }
    }

    fn kw(&mut self, p: usize, k: &'static str) -> Result<usize, ()> {
        if *self.tok(p) == Tok::Kw(k) {
            Ok(p + 1)
        } else {
            self.fail(p, &format!("`{k}`"))
        }
    }

    fn ident(&mut self, p: usize) -> PResult<String> {
        match self.tok(p) {
            Tok::Id(s) => Ok((s.clone(), p + 1)),
            _ => self.fail(p, "identifier"),
        }
    }

    fn com(&mut self, p: usize) -> PResult<Com> {
        let (c1, p) = self.simple(p)?;
        if *self.tok(p) == Tok::Sym(";") {
            let (c2, p) = self.com(p + 1)?;
            Ok((Com::seq(c1, c2), p))
        } else {
            Ok((c1, p))
        }
    }

    fn simple(&mut self, p: usize) -> PResult<Com> {
        match self.tok(p).clone() {
            Tok::Kw("skip") => Ok((Com::Skip, p + 1)),
            Tok::Kw("if") => {
                let (b, p) = self.bexp(p + 1)?;
                let p = self.kw(p, "then")?;
                let (c1, p) = self.com(p)?;
                let (c2, p) = if *self.tok(p) == Tok::Kw("else") {
                    self.com(p + 1)?
                } else {
                    (Com::Skip, p)
                };
                let p = self.kw(p, "end")?;
                Ok((Com::if_(b, c1, c2), p))
            }
            Tok::Kw("while") => {
                let (b, p) = self.bexp(p + 1)?;
                let p = self.kw(p, "do")?;
                let (c, p) = self.com(p)?;
                let p = self.kw(p, "end")?;
                Ok((Com::while_(b, c), p))
            }
            Tok::Id(x) => match self.tok(p + 1) {
                Tok::Sym(":=") => {
                    let (e, p) = self.aexp(p + 2)?;
                    Ok((Com::Asgn(x, e), p))
                }
                Tok::Sym("<-") => {
                    let (a, p) = self.ident(p + 2)?;
                    let p = self.sym(p, "[")?;
                    let (i, p) = self.aexp(p)?;
                    let p = self.sym(p, "]")?;
                    Ok((Com::ARead(x, a, i), p))
                }
                Tok::Sym("[") => {
                    let (i, p) = self.aexp(p + 2)?;
                    let p = self.sym(p, "]")?;
                    let p = self.sym(p, "<-")?;
                    let (e, p) = self.aexp(p)?;
                    Ok((Com::AWrite(x, i, e), p))
                }
                _ => self.fail(p + 1, "`:=`, `<-` or `[`"),
            },
            _ => self.fail(p, "command"),
        }
    }

    fn aexp(&mut self, p: usize) -> PResult<AExp> {
        if let Some(r) = self.aexp_memo.get(&p) {
            return r.clone();
        }
        let r = self.aexp_sum(p);
        self.aexp_memo.insert(p, r.clone());
        r
    }

    fn aexp_sum(&mut self, p: usize) -> PResult<AExp> {
        let (mut e, mut p) = self.aexp_prod(p)?;
        loop {
            let op = match self.tok(p) {
                Tok::Sym("+") => ArithOp::Add,
                Tok::Sym("-") => ArithOp::Sub,
                _ => return Ok((e, p)),
            };
            let (r, q) = self.aexp_prod(p + 1)?;
            e = AExp::bin(op, e, r);
            p = q;
        }
    }

    fn aexp_prod(&mut self, p: usize) -> PResult<AExp> {
        let (mut e, mut p) = self.aexp_atom(p)?;
        while *self.tok(p) == Tok::Sym("*") {
            let (r, q) = self.aexp_atom(p + 1)?;
            e = AExp::bin(ArithOp::Mul, e, r);
            p = q;
        }
        Ok((e, p))
    }

    fn aexp_atom(&mut self, p: usize) -> PResult<AExp> {
        match self.tok(p).clone() {
            Tok::Num(n) => Ok((AExp::Num(n), p + 1)),
            Tok::Id(x) => Ok((AExp::Var(x), p + 1)),
            Tok::Sym("(") => {
                if let Ok(r) = self.ct_cond(p + 1) {
                    return Ok(r);
                }
                let (e, q) = self.aexp(p + 1)?;
                let q = self.sym(q, ")")?;
                Ok((e, q))
            }
            _ => self.fail(p, "arithmetic expression"),
        }
    }

    fn ct_cond(&mut self, p: usize) -> PResult<AExp> {
        let (b, p) = self.bexp(p)?;
        let p = self.sym(p, "?")?;
        let (t, p) = self.aexp(p)?;
        let p = self.sym(p, ":")?;
        let (e, p) = self.aexp(p)?;
        let p = self.sym(p, ")")?;
        Ok((AExp::cond(b, t, e), p))
    }

    fn bexp(&mut self, p: usize) -> PResult<BExp> {
        if let Some(r) = self.bexp_memo.get(&p) {
            return r.clone();
        }
        let r = self.bexp_or(p);
        self.bexp_memo.insert(p, r.clone());
        r
    }

    fn bexp_or(&mut self, p: usize) -> PResult<BExp> {
        let (mut b, mut p) = self.bexp_and(p)?;
        while *self.tok(p) == Tok::Sym("||") {
            let (r, q) = self.bexp_and(p + 1)?;
            b = BExp::or(b, r);
            p = q;
        }
        Ok((b, p))
    }

    fn bexp_and(&mut self, p: usize) -> PResult<BExp> {
        let (mut b, mut p) = self.bexp_unary(p)?;
        while *self.tok(p) == Tok::Sym("&&") {
            let (r, q) = self.bexp_unary(p + 1)?;
            b = BExp::and(b, r);
            p = q;
        }
        Ok((b, p))
    }

    fn bexp_unary(&mut self, p: usize) -> PResult<BExp> {
        match self.tok(p) {
            Tok::Sym("!") => {
                let (b, p) = self.bexp_unary(p + 1)?;
                Ok((BExp::not(b), p))
            }
            Tok::Kw("true") => Ok((BExp::Bool(true), p + 1)),
            Tok::Kw("false") => Ok((BExp::Bool(false), p + 1)),
            Tok::Sym("(") => {
                let paren = self.bexp(p + 1).and_then(|(b, q)| {
                    let q = self.sym(q, ")")?;
                    Ok((b, q))
                });
                if paren.is_ok() {
                    return paren;
                }
                self.comparison(p)
            }
            _ => self.comparison(p),
        }
    }

    fn comparison(&mut self, p: usize) -> PResult<BExp> {
        let (l, p) = self.aexp(p)?;
        let op = match self.tok(p) {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("<>") => CmpOp::Ne,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            _ => return self.fail(p, "comparison operator"),
        };
        let (r, p) = self.aexp(p + 1)?;
        Ok((BExp::Cmp(op, l, r), p))
    }

    fn error(&self) -> ParseError {
        let t = &self.toks[self.furthest.min(self.toks.len() - 1)];
        let found = match &t.tok {
            Tok::Num(n) => format!("`{n}`"),
            Tok::Id(s) => format!("`{s}`"),
            Tok::Kw(k) | Tok::Sym(k) => format!("`{k}`"),
            Tok::Eof => "end of input".to_string(),
        };
        ParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: format!("expected {}, found {found}", self.expected.join(" or ")),
        }
    }
}

/// Parses a whole program.
pub fn parse_com(text: &str) -> Result<Com, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        furthest: 0,
        expected: Vec::new(),
        aexp_memo: HashMap::new(),
        bexp_memo: HashMap::new(),
    };
    let c = match p.com(0) {
        Ok((c, end)) if *p.tok(end) == Tok::Eof => c,
        Ok((_, end)) => {
            p.fail::<()>(end, "`;` or end of input").ok();
            return Err(p.error());
        }
        Err(()) => return Err(p.error()),
    };
    let arrays = c.arrays();
    if let Some(x) = used_vars(&c).into_iter().find(|x| arrays.contains(x)) {
        return Err(ParseError::NameClash(x));
    }
    Ok(c)
}
