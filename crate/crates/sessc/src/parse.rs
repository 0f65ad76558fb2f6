//! Lexer and recursive-descent parsers for HGV and CP concrete syntax.
//! Binders are uniquified while parsing, so every bound name in the
//! resulting tree is globally distinct.

use std::fmt;

use crate::names::{Label, Name, NameSupply, Polarity, TypeVar};
use crate::syntax::process::Process;
use crate::syntax::prop::Proposition;
use crate::syntax::session::{dual_session, SessionType, Type};
use crate::syntax::term::Term;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    One,
    EndBang,
    EndQuest,
    Bang,
    DoubleBang,
    Quest,
    DoubleQuest,
    Hash,
    At,
    PlusBraceHead,  // (+)
    AmpBraceHead,   // (&)
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Dot,
    Comma,
    Colon,
    Semi,
    Star,
    Pipe,
    DoublePipe,
    Tilde,
    Arrow,    // ->
    Lolli,    // -o
    LinkArr,  // <->
    Equals,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Tok::*;
        let s = match self {
            Lower(s) | Upper(s) => return write!(f, "{}", s),
            One => "1",
            EndBang => "end!",
            EndQuest => "end?",
            Bang => "!",
            DoubleBang => "!!",
            Quest => "?",
            DoubleQuest => "??",
            Hash => "#",
            At => "@",
            PlusBraceHead => "(+)",
            AmpBraceHead => "(&)",
            LParen => "(",
            RParen => ")",
            LBrace => "{",
            RBrace => "}",
            LBracket => "[",
            RBracket => "]",
            Dot => ".",
            Comma => ",",
            Colon => ":",
            Semi => ";",
            Star => "*",
            Pipe => "|",
            DoublePipe => "||",
            Tilde => "~",
            Arrow => "->",
            Lolli => "-o",
            LinkArr => "<->",
            Equals => "=",
        };
        write!(f, "{}", s)
    }
}

#[derive(Clone, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut lx = Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 };
    let mut toks = Vec::new();
    loop {
        lx.skip_ws();
        if lx.pos >= lx.src.len() {
            return Ok(toks);
        }
        let (line, col) = (lx.line, lx.col);
        let t = lx.next_tok()?;
        toks.push((t, line, col));
    }
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self, k: usize) -> Option<u8> {
        self.src.get(self.pos + k).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek(0) {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'-') if self.peek(1) == Some(b'-') => {
                    while let Some(c) = self.peek(0) {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: self.col, message: message.into() })
    }

    fn next_tok(&mut self) -> Result<Tok, ParseError> {
        let c = self.peek(0).unwrap();
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while let Some(c) = self.peek(0) {
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                    self.bump();
                } else {
                    break;
                }
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            if word == "end" {
                match self.peek(0) {
                    Some(b'!') => {
                        self.bump();
                        return Ok(Tok::EndBang);
                    }
                    Some(b'?') => {
                        self.bump();
                        return Ok(Tok::EndQuest);
                    }
                    _ => {}
                }
            }
            let first = word.as_bytes()[0];
            return Ok(if first.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            });
        }
        match c {
            b'1' => {
                self.bump();
                Ok(Tok::One)
            }
            b'0'..=b'9' => self.err("unexpected number"),
            b'!' => {
                self.bump();
                if self.peek(0) == Some(b'!') {
                    self.bump();
                    Ok(Tok::DoubleBang)
                } else {
                    Ok(Tok::Bang)
                }
            }
            b'?' => {
                self.bump();
                if self.peek(0) == Some(b'?') {
                    self.bump();
                    Ok(Tok::DoubleQuest)
                } else {
                    Ok(Tok::Quest)
                }
            }
            b'#' => {
                self.bump();
                Ok(Tok::Hash)
            }
            b'@' => {
                self.bump();
                Ok(Tok::At)
            }
            b'(' => {
                if self.peek(1) == Some(b'+') && self.peek(2) == Some(b')') {
                    self.bump();
                    self.bump();
                    self.bump();
                    Ok(Tok::PlusBraceHead)
                } else if self.peek(1) == Some(b'&') && self.peek(2) == Some(b')') {
                    self.bump();
                    self.bump();
                    self.bump();
                    Ok(Tok::AmpBraceHead)
                } else {
                    self.bump();
                    Ok(Tok::LParen)
                }
            }
            b')' => {
                self.bump();
                Ok(Tok::RParen)
            }
            b'{' => {
                self.bump();
                Ok(Tok::LBrace)
            }
            b'}' => {
                self.bump();
                Ok(Tok::RBrace)
            }
            b'[' => {
                self.bump();
                Ok(Tok::LBracket)
            }
            b']' => {
                self.bump();
                Ok(Tok::RBracket)
            }
            b'.' => {
                self.bump();
                Ok(Tok::Dot)
            }
            b',' => {
                self.bump();
                Ok(Tok::Comma)
            }
            b':' => {
                self.bump();
                Ok(Tok::Colon)
            }
            b';' => {
                self.bump();
                Ok(Tok::Semi)
            }
            b'*' => {
                self.bump();
                Ok(Tok::Star)
            }
            b'|' => {
                self.bump();
                if self.peek(0) == Some(b'|') {
                    self.bump();
                    Ok(Tok::DoublePipe)
                } else {
                    Ok(Tok::Pipe)
                }
            }
            b'~' => {
                self.bump();
                Ok(Tok::Tilde)
            }
            b'=' => {
                self.bump();
                Ok(Tok::Equals)
            }
            b'-' => {
                self.bump();
                match self.peek(0) {
                    Some(b'>') => {
                        self.bump();
                        Ok(Tok::Arrow)
                    }
                    Some(b'o') => {
                        self.bump();
                        Ok(Tok::Lolli)
                    }
                    _ => self.err("expected -> or -o"),
                }
            }
            b'<' => {
                self.bump();
                if self.peek(0) == Some(b'-') && self.peek(1) == Some(b'>') {
                    self.bump();
                    self.bump();
                    Ok(Tok::LinkArr)
                } else {
                    self.err("expected <->")
                }
            }
            other => self.err(format!("unexpected character '{}'", other as char)),
        }
    }
}

pub struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    pub supply: &'a mut NameSupply,
    scope: Vec<(String, Name)>,
    /// Expand let-sugar for the pi fragment instead of full HGV.
    pub pi_mode: bool,
}

impl<'a> Parser<'a> {
    pub fn new(src: &str, supply: &'a mut NameSupply) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, supply, scope: Vec::new(), pi_mode: false })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .or_else(|| self.toks.last().map(|(_, l, c)| (*l, *c)))
            .unwrap_or((1, 1))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, message: message.into() })
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, _, _)) => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            self.pos -= 1;
            self.err(format!("expected '{}', found '{}'", t, got))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn lower(&mut self) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Lower(s) => Ok(s),
            got => {
                self.pos -= 1;
                self.err(format!("expected a name, found '{}'", got))
            }
        }
    }

    fn upper(&mut self) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Upper(s) => Ok(s),
            got => {
                self.pos -= 1;
                self.err(format!("expected a type variable, found '{}'", got))
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn bind(&mut self, base: &str) -> Name {
        let n = self.supply.fresh(base);
        self.scope.push((base.to_string(), n.clone()));
        n
    }

    fn unbind(&mut self, k: usize) {
        for _ in 0..k {
            self.scope.pop();
        }
    }

    fn resolve(&self, base: &str) -> Result<Name, ParseError> {
        self.scope
            .iter()
            .rev()
            .find(|(b, _)| b == base)
            .map(|(_, n)| n.clone())
            .ok_or_else(|| {
                let (line, col) = self.here();
                ParseError { line, col, message: format!("unbound name {}", base) }
            })
    }

    // ---- types ----

    pub fn parse_type(&mut self) -> Result<Type, ParseError> {
        let lhs = self.parse_type_tensor()?;
        match self.peek() {
            Some(Tok::Lolli) => {
                self.next()?;
                let rhs = self.parse_type()?;
                Ok(Type::LinFun(Box::new(lhs), Box::new(rhs)))
            }
            Some(Tok::Arrow) => {
                self.next()?;
                let rhs = self.parse_type()?;
                Ok(Type::UnFun(Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_type_tensor(&mut self) -> Result<Type, ParseError> {
        let lhs = self.parse_type_atom()?;
        if self.eat(&Tok::Star) {
            let rhs = self.parse_type_tensor()?;
            Ok(Type::Tensor(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_type_atom(&mut self) -> Result<Type, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.next()?;
            let t = self.parse_type()?;
            self.expect(Tok::RParen)?;
            Ok(t)
        } else {
            Ok(Type::Session(self.parse_session()?))
        }
    }

    pub fn parse_session(&mut self) -> Result<SessionType, ParseError> {
        match self.next()? {
            Tok::Bang => {
                let t = self.parse_payload()?;
                self.expect(Tok::Dot)?;
                let s = self.parse_session()?;
                Ok(SessionType::Output(Box::new(t), Box::new(s)))
            }
            Tok::Quest => {
                let t = self.parse_payload()?;
                self.expect(Tok::Dot)?;
                let s = self.parse_session()?;
                Ok(SessionType::Input(Box::new(t), Box::new(s)))
            }
            Tok::DoubleBang => {
                let x = self.upper()?;
                self.expect(Tok::Dot)?;
                let s = self.parse_session()?;
                Ok(SessionType::OutputType(TypeVar::pos(&x), Box::new(s)))
            }
            Tok::DoubleQuest => {
                let x = self.upper()?;
                self.expect(Tok::Dot)?;
                let s = self.parse_session()?;
                Ok(SessionType::InputType(TypeVar::pos(&x), Box::new(s)))
            }
            Tok::PlusBraceHead => Ok(SessionType::Select(self.session_branches()?)),
            Tok::AmpBraceHead => Ok(SessionType::Choice(self.session_branches()?)),
            Tok::EndBang => Ok(SessionType::EndOut),
            Tok::EndQuest => Ok(SessionType::EndIn),
            Tok::Upper(x) => Ok(SessionType::Var(TypeVar::pos(&x))),
            Tok::Tilde => {
                let x = self.upper()?;
                Ok(SessionType::Var(TypeVar { ident: x, polarity: Polarity::Dual }))
            }
            Tok::Hash => Ok(SessionType::Server(Box::new(self.parse_session()?))),
            Tok::At => Ok(SessionType::Service(Box::new(self.parse_session()?))),
            got => {
                self.pos -= 1;
                self.err(format!("expected a session type, found '{}'", got))
            }
        }
    }

    /// Message payloads: a session type bare, anything else in parentheses.
    fn parse_payload(&mut self) -> Result<Type, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.next()?;
            let t = self.parse_type()?;
            self.expect(Tok::RParen)?;
            Ok(t)
        } else {
            Ok(Type::Session(self.parse_session()?))
        }
    }

    fn session_branches(&mut self) -> Result<Vec<(Label, SessionType)>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let l = self.lower()?;
            self.expect(Tok::Colon)?;
            let s = self.parse_session()?;
            out.push((Label(l), s));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBrace)?;
            return Ok(out);
        }
    }

    // ---- propositions ----

    pub fn parse_prop(&mut self) -> Result<Proposition, ParseError> {
        match self.peek() {
            Some(Tok::Lower(w)) if w == "ex" || w == "all" => {
                let ex = w == "ex";
                self.next()?;
                let x = self.upper()?;
                self.expect(Tok::Dot)?;
                let body = self.parse_prop()?;
                Ok(if ex {
                    Proposition::Exists(TypeVar::pos(&x), Box::new(body))
                } else {
                    Proposition::Forall(TypeVar::pos(&x), Box::new(body))
                })
            }
            _ => self.parse_prop_par(),
        }
    }

    fn parse_prop_par(&mut self) -> Result<Proposition, ParseError> {
        let lhs = self.parse_prop_tensor()?;
        if self.eat(&Tok::DoublePipe) {
            let rhs = self.parse_prop_par()?;
            Ok(Proposition::Par(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_prop_tensor(&mut self) -> Result<Proposition, ParseError> {
        let lhs = self.parse_prop_atom()?;
        if self.eat(&Tok::Star) {
            let rhs = self.parse_prop_tensor()?;
            Ok(Proposition::Tensor(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_prop_atom(&mut self) -> Result<Proposition, ParseError> {
        match self.next()? {
            Tok::One => Ok(Proposition::One),
            Tok::Lower(w) if w == "bot" => Ok(Proposition::Bottom),
            Tok::Upper(x) => Ok(Proposition::Var(TypeVar::pos(&x))),
            Tok::Tilde => {
                let x = self.upper()?;
                Ok(Proposition::Var(TypeVar { ident: x, polarity: Polarity::Dual }))
            }
            Tok::Bang => Ok(Proposition::OfCourse(Box::new(self.parse_prop_atom()?))),
            Tok::Quest => Ok(Proposition::WhyNot(Box::new(self.parse_prop_atom()?))),
            Tok::PlusBraceHead => Ok(Proposition::Plus(self.prop_branches()?)),
            Tok::AmpBraceHead => Ok(Proposition::With(self.prop_branches()?)),
            Tok::LParen => {
                let p = self.parse_prop()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            got => {
                self.pos -= 1;
                self.err(format!("expected a proposition, found '{}'", got))
            }
        }
    }

    fn prop_branches(&mut self) -> Result<Vec<(Label, Proposition)>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let l = self.lower()?;
            self.expect(Tok::Colon)?;
            let p = self.parse_prop()?;
            out.push((Label(l), p));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBrace)?;
            return Ok(out);
        }
    }

    // ---- HGV terms ----

    pub fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Lower(w)) => match w.as_str() {
                "fn" => {
                    self.next()?;
                    let x = self.lower()?;
                    self.expect(Tok::Colon)?;
                    let t = self.parse_type()?;
                    self.expect(Tok::Dot)?;
                    let xn = self.bind(&x);
                    let body = self.parse_term()?;
                    self.unbind(1);
                    Ok(Term::Lam(xn, t, Box::new(body)))
                }
                "let" => {
                    self.next()?;
                    self.parse_let()
                }
                "with" => {
                    self.next()?;
                    self.parse_with()
                }
                "fork" | "serve" => {
                    self.next()?;
                    let x = self.lower()?;
                    let annot = if self.eat(&Tok::Colon) {
                        Some(self.parse_session()?)
                    } else {
                        None
                    };
                    self.expect(Tok::Dot)?;
                    let xn = self.bind(&x);
                    let body = self.parse_term()?;
                    self.unbind(1);
                    Ok(if w == "fork" {
                        Term::Fork(xn, annot, Box::new(body))
                    } else {
                        Term::Serve(xn, annot, Box::new(body))
                    })
                }
                "recvty" => {
                    self.next()?;
                    let x = self.upper()?;
                    self.expect(Tok::Dot)?;
                    let body = self.parse_term()?;
                    Ok(Term::ReceiveType(TypeVar::pos(&x), Box::new(body)))
                }
                _ => self.parse_term_app(),
            },
            _ => self.parse_term_app(),
        }
    }

    fn parse_let(&mut self) -> Result<Term, ParseError> {
        if self.eat(&Tok::LParen) {
            let x = self.lower()?;
            self.expect(Tok::Comma)?;
            let y = self.lower()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Equals)?;
            let m = self.parse_term()?;
            let kw = self.lower()?;
            if kw != "in" {
                self.pos -= 1;
                return self.err("expected 'in'");
            }
            let xn = self.bind(&x);
            let yn = self.bind(&y);
            let n = self.parse_term()?;
            self.unbind(2);
            return Ok(Term::LetPair(xn, yn, Box::new(m), Box::new(n)));
        }
        let x = self.lower()?;
        let annot = if self.eat(&Tok::Colon) { Some(self.parse_type()?) } else { None };
        self.expect(Tok::Equals)?;
        let m = self.parse_term()?;
        let kw = self.lower()?;
        if kw != "in" {
            self.pos -= 1;
            return self.err("expected 'in'");
        }
        let xn = self.bind(&x);
        let n = self.parse_term()?;
        self.unbind(1);
        self.expand_let(xn, annot, m, n)
    }

    /// `let x = M in N`: in full HGV an application of a lambda, in pi mode
    /// the send/fork/receive/link expansion. `let x = M in x` collapses to M.
    fn expand_let(
        &mut self,
        x: Name,
        annot: Option<Type>,
        m: Term,
        n: Term,
    ) -> Result<Term, ParseError> {
        if n == Term::Var(x.clone()) {
            return Ok(m);
        }
        if self.pi_mode {
            let z = self.supply.fresh("z");
            let z2 = self.supply.fresh("z");
            let fork_annot = annot.map(|t| {
                SessionType::Input(Box::new(t), Box::new(SessionType::EndIn))
            });
            let inner = Term::LetPair(
                x,
                z2.clone(),
                Box::new(Term::Receive(Box::new(Term::Var(z.clone())))),
                Box::new(Term::Link(Box::new(n), Box::new(Term::Var(z2)))),
            );
            Ok(Term::Send(
                Box::new(m),
                Box::new(Term::Fork(z, fork_annot, Box::new(inner))),
            ))
        } else {
            match annot {
                Some(t) => Ok(Term::App(Box::new(Term::Lam(x, t, Box::new(n))), Box::new(m))),
                None => self.err("let binding needs a type annotation here"),
            }
        }
    }

    fn parse_with(&mut self) -> Result<Term, ParseError> {
        let x = self.lower()?;
        let annot = if self.eat(&Tok::Colon) { Some(self.parse_session()?) } else { None };
        let kw = self.lower()?;
        if kw != "connect" {
            self.pos -= 1;
            return self.err("expected 'connect'");
        }
        let xn1 = self.bind(&x);
        let m = self.parse_term()?;
        self.unbind(1);
        let kw = self.lower()?;
        if kw != "to" {
            self.pos -= 1;
            return self.err("expected 'to'");
        }
        let xn2 = self.bind(&x);
        let n = self.parse_term()?;
        self.unbind(1);
        let fork = Term::Fork(xn1, annot.clone(), Box::new(m));
        let let_annot = annot.map(|s| Type::Session(dual_session(&s)));
        self.expand_let(xn2, let_annot, fork, n)
    }

    fn parse_term_app(&mut self) -> Result<Term, ParseError> {
        let mut head = self.parse_term_head()?;
        while self.starts_atom() {
            let arg = self.parse_term_atom()?;
            head = Term::App(Box::new(head), Box::new(arg));
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Lower(w)) if !is_term_keyword(w))
            || self.peek() == Some(&Tok::LParen)
    }

    fn parse_term_head(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Lower(w)) => match w.as_str() {
                "send" => {
                    self.next()?;
                    let m = self.parse_term_atom()?;
                    let n = self.parse_term_atom()?;
                    Ok(Term::Send(Box::new(m), Box::new(n)))
                }
                "link" => {
                    self.next()?;
                    let m = self.parse_term_atom()?;
                    let n = self.parse_term_atom()?;
                    Ok(Term::Link(Box::new(m), Box::new(n)))
                }
                "receive" => {
                    self.next()?;
                    Ok(Term::Receive(Box::new(self.parse_term_atom()?)))
                }
                "request" => {
                    self.next()?;
                    Ok(Term::Request(Box::new(self.parse_term_atom()?)))
                }
                "select" => {
                    self.next()?;
                    let l = self.lower()?;
                    Ok(Term::Select(Label(l), Box::new(self.parse_term_atom()?)))
                }
                "sendty" => {
                    self.next()?;
                    let s = self.parse_session()?;
                    Ok(Term::SendType(s, Box::new(self.parse_term_atom()?)))
                }
                "case" => {
                    self.next()?;
                    let scrut = self.parse_term_atom()?;
                    self.expect(Tok::LBrace)?;
                    let mut bs = Vec::new();
                    loop {
                        let l = self.lower()?;
                        self.expect(Tok::LParen)?;
                        let x = self.lower()?;
                        self.expect(Tok::RParen)?;
                        self.expect(Tok::Dot)?;
                        let xn = self.bind(&x);
                        let body = self.parse_term()?;
                        self.unbind(1);
                        bs.push((Label(l), xn, body));
                        if self.eat(&Tok::Semi) {
                            continue;
                        }
                        self.expect(Tok::RBrace)?;
                        break;
                    }
                    Ok(Term::Case(Box::new(scrut), bs))
                }
                _ => self.parse_term_atom(),
            },
            _ => self.parse_term_atom(),
        }
    }

    fn parse_term_atom(&mut self) -> Result<Term, ParseError> {
        match self.next()? {
            Tok::Lower(w) if !is_term_keyword(&w) => Ok(Term::Var(self.resolve(&w)?)),
            Tok::LParen => {
                let m = self.parse_term()?;
                match self.next()? {
                    Tok::RParen => Ok(m),
                    Tok::Comma => {
                        let n = self.parse_term()?;
                        self.expect(Tok::RParen)?;
                        Ok(Term::Pair(Box::new(m), Box::new(n)))
                    }
                    Tok::Colon => {
                        let t = self.parse_type()?;
                        self.expect(Tok::RParen)?;
                        match &t {
                            Type::UnFun(..) => Ok(Term::CoerceUn(Box::new(m), t)),
                            Type::LinFun(..) => Ok(Term::CoerceLin(Box::new(m), t)),
                            _ => self.err("a coercion needs a function type"),
                        }
                    }
                    got => {
                        self.pos -= 1;
                        self.err(format!("expected ')', ',' or ':', found '{}'", got))
                    }
                }
            }
            got => {
                self.pos -= 1;
                self.err(format!("expected a term, found '{}'", got))
            }
        }
    }

    // ---- CP processes ----

    pub fn parse_process(&mut self) -> Result<Process, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Lower(w)) if w == "new" => {
                self.next()?;
                let x = self.lower()?;
                let annot = if self.eat(&Tok::Colon) { Some(self.parse_prop()?) } else { None };
                self.expect(Tok::LParen)?;
                let xn = self.bind(&x);
                let p = self.parse_process()?;
                self.expect(Tok::Pipe)?;
                let q = self.parse_process()?;
                self.unbind(1);
                self.expect(Tok::RParen)?;
                Ok(match annot {
                    Some(a) => Process::cut_annot(xn, a, p, q),
                    None => Process::cut(xn, p, q),
                })
            }
            Some(Tok::Lower(w)) if w == "case" => {
                self.next()?;
                let x = self.lower()?;
                let xn = self.resolve(&x)?;
                self.expect(Tok::LBrace)?;
                let mut bs = Vec::new();
                if self.eat(&Tok::RBrace) {
                    return Ok(Process::CaseP(xn, bs));
                }
                loop {
                    let l = self.lower()?;
                    self.expect(Tok::Dot)?;
                    let body = self.parse_process()?;
                    bs.push((Label(l), body));
                    if self.eat(&Tok::Semi) {
                        continue;
                    }
                    self.expect(Tok::RBrace)?;
                    break;
                }
                Ok(Process::CaseP(xn, bs))
            }
            Some(Tok::Bang) => {
                self.next()?;
                let x = self.lower()?;
                let xn = self.resolve(&x)?;
                self.expect(Tok::LParen)?;
                let y = self.lower()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Dot)?;
                let yn = self.bind(&y);
                let body = self.parse_process()?;
                self.unbind(1);
                Ok(Process::Bang(xn, yn, Box::new(body)))
            }
            Some(Tok::Quest) => {
                self.next()?;
                let x = self.lower()?;
                let xn = self.resolve(&x)?;
                self.expect(Tok::LBracket)?;
                let y = self.lower()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Dot)?;
                let yn = self.bind(&y);
                let body = self.parse_process()?;
                self.unbind(1);
                Ok(Process::Query(xn, yn, Box::new(body)))
            }
            Some(Tok::Lower(_)) => self.parse_process_prefix(),
            _ => self.err("expected a process"),
        }
    }

    fn parse_process_prefix(&mut self) -> Result<Process, ParseError> {
        let x = self.lower()?;
        let xn = self.resolve(&x)?;
        match self.next()? {
            Tok::LinkArr => {
                let y = self.lower()?;
                Ok(Process::LinkP(xn, self.resolve(&y)?))
            }
            Tok::LParen => {
                if self.eat(&Tok::RParen) {
                    self.expect(Tok::Dot)?;
                    let body = self.parse_process()?;
                    return Ok(Process::EmptyIn(xn, Box::new(body)));
                }
                match self.next()? {
                    Tok::Lower(y) => {
                        self.expect(Tok::RParen)?;
                        self.expect(Tok::Dot)?;
                        let yn = self.bind(&y);
                        let body = self.parse_process()?;
                        self.unbind(1);
                        Ok(Process::In(xn, yn, Box::new(body)))
                    }
                    Tok::Upper(v) => {
                        self.expect(Tok::RParen)?;
                        self.expect(Tok::Dot)?;
                        let body = self.parse_process()?;
                        Ok(Process::InType(xn, TypeVar::pos(&v), Box::new(body)))
                    }
                    got => {
                        self.pos -= 1;
                        self.err(format!("expected a binder, found '{}'", got))
                    }
                }
            }
            Tok::LBracket => {
                if self.eat(&Tok::RBracket) {
                    return Ok(Process::EmptyOut(xn));
                }
                // A single lowercase identifier is a fresh name (output) or a
                // label (injection), told apart by whether `.(` follows. The
                // proposition keyword `bot` stays a type witness.
                let single_lower = match (self.peek(), self.peek_at(1)) {
                    (Some(Tok::Lower(id)), Some(Tok::RBracket)) if id != "bot" => {
                        Some(id.clone())
                    }
                    _ => None,
                };
                if let Some(id) = single_lower {
                    if self.peek_at(2) == Some(&Tok::Dot) && self.peek_at(3) == Some(&Tok::LParen) {
                        self.next()?;
                        self.next()?;
                        self.next()?;
                        self.next()?;
                        let yn = self.bind(&id);
                        let payload = self.parse_process()?;
                        self.unbind(1);
                        self.expect(Tok::Pipe)?;
                        let cont = self.parse_process()?;
                        self.expect(Tok::RParen)?;
                        return Ok(Process::Out(xn, yn, Box::new(payload), Box::new(cont)));
                    }
                    self.next()?;
                    self.next()?;
                    self.expect(Tok::Dot)?;
                    let cont = self.parse_process()?;
                    return Ok(Process::Inject(xn, Label(id), Box::new(cont)));
                }
                let a = self.parse_prop()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Dot)?;
                let cont = self.parse_process()?;
                Ok(Process::OutType(xn, a, Box::new(cont)))
            }
            got => {
                self.pos -= 1;
                self.err(format!("expected '<->', '(' or '[', found '{}'", got))
            }
        }
    }

    // ---- files ----

    fn parse_ctx_header_types(&mut self) -> Result<Vec<(Name, Type)>, ParseError> {
        let mut ctx = Vec::new();
        if matches!(self.peek(), Some(Tok::Lower(w)) if w == "ctx") {
            self.next()?;
            if self.eat(&Tok::Dot) {
                return Ok(ctx);
            }
            loop {
                let x = self.lower()?;
                self.expect(Tok::Colon)?;
                let t = self.parse_type()?;
                let n = self.bind(&x);
                ctx.push((n, t));
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::Dot)?;
                break;
            }
        }
        Ok(ctx)
    }

    fn parse_ctx_header_props(&mut self) -> Result<Vec<(Name, Proposition)>, ParseError> {
        let mut ctx = Vec::new();
        if matches!(self.peek(), Some(Tok::Lower(w)) if w == "ctx") {
            self.next()?;
            if self.eat(&Tok::Dot) {
                return Ok(ctx);
            }
            loop {
                let x = self.lower()?;
                self.expect(Tok::Colon)?;
                let a = self.parse_prop()?;
                let n = self.bind(&x);
                ctx.push((n, a));
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::Dot)?;
                break;
            }
        }
        Ok(ctx)
    }
}

fn is_term_keyword(w: &str) -> bool {
    matches!(
        w,
        "fn" | "let"
            | "in"
            | "with"
            | "connect"
            | "to"
            | "send"
            | "receive"
            | "select"
            | "case"
            | "fork"
            | "link"
            | "sendty"
            | "recvty"
            | "serve"
            | "request"
            | "ctx"
    )
}

pub struct HgvFile {
    pub ctx: Vec<(Name, Type)>,
    pub term: Term,
    pub expected: Option<Type>,
}

pub struct CpFile {
    pub ctx: Vec<(Name, Proposition)>,
    pub process: Process,
}

pub fn parse_hgv_file(
    src: &str,
    supply: &mut NameSupply,
    pi_mode: bool,
) -> Result<HgvFile, ParseError> {
    let expected = extract_expected_type(src, supply)?;
    let mut p = Parser::new(src, supply)?;
    p.pi_mode = pi_mode;
    let ctx = p.parse_ctx_header_types()?;
    let term = p.parse_term()?;
    if !p.at_end() {
        return p.err("trailing input after the term");
    }
    Ok(HgvFile { ctx, term, expected })
}

fn extract_expected_type(
    src: &str,
    supply: &mut NameSupply,
) -> Result<Option<Type>, ParseError> {
    for line in src.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("-- type:") {
            let mut p = Parser::new(rest.trim(), supply)?;
            let t = p.parse_type()?;
            if !p.at_end() {
                return p.err("trailing input after the expected type");
            }
            return Ok(Some(t));
        }
    }
    Ok(None)
}

pub fn parse_cp_file(src: &str, supply: &mut NameSupply) -> Result<CpFile, ParseError> {
    let mut p = Parser::new(src, supply)?;
    let ctx = p.parse_ctx_header_props()?;
    let process = p.parse_process()?;
    if !p.at_end() {
        return p.err("trailing input after the process");
    }
    Ok(CpFile { ctx, process })
}

pub fn parse_type_str(src: &str, supply: &mut NameSupply) -> Result<Type, ParseError> {
    let mut p = Parser::new(src, supply)?;
    let t = p.parse_type()?;
    if !p.at_end() {
        return p.err("trailing input after the type");
    }
    Ok(t)
}

pub fn parse_prop_str(src: &str, supply: &mut NameSupply) -> Result<Proposition, ParseError> {
    let mut p = Parser::new(src, supply)?;
    let a = p.parse_prop()?;
    if !p.at_end() {
        return p.err("trailing input after the proposition");
    }
    Ok(a)
}
