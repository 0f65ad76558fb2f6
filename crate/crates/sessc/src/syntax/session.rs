//! HGV session types and value types: duality, substitution, equality.

use crate::names::{Label, Polarity, TypeVar};

/// Session types of HGV.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SessionType {
    /// `!T.S` — output a value of type `T`, continue as `S`.
    Output(Box<Type>, Box<SessionType>),
    /// `?T.S` — input a value of type `T`, continue as `S`.
    Input(Box<Type>, Box<SessionType>),
    /// `(+){l_i: S_i}` — select one of the branches.
    Select(Vec<(Label, SessionType)>),
    /// `(&){l_i: S_i}` — offer all of the branches.
    Choice(Vec<(Label, SessionType)>),
    /// `end!`
    EndOut,
    /// `end?`
    EndIn,
    /// `X` or `~X`
    Var(TypeVar),
    /// `!!X.S` — output a session type.
    OutputType(TypeVar, Box<SessionType>),
    /// `??X.S` — input a session type.
    InputType(TypeVar, Box<SessionType>),
    /// `#S` — server of arbitrarily many `S` sessions.
    Server(Box<SessionType>),
    /// `@S` — service providing arbitrarily many `S` sessions.
    Service(Box<SessionType>),
}

/// Value types of HGV: sessions, linear pairs, linear and unlimited functions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Type {
    Session(SessionType),
    /// `T -o U`
    LinFun(Box<Type>, Box<Type>),
    /// `T -> U`
    UnFun(Box<Type>, Box<Type>),
    /// `T * U`
    Tensor(Box<Type>, Box<Type>),
}

impl Type {
    pub fn session(s: SessionType) -> Type {
        Type::Session(s)
    }

    pub fn as_session(&self) -> Option<&SessionType> {
        match self {
            Type::Session(s) => Some(s),
            _ => None,
        }
    }
}

/// Duality of session types. Dualisation leaves payload types of input and
/// output untouched; only the communication direction flips.
pub fn dual_session(s: &SessionType) -> SessionType {
    use SessionType::*;
    match s {
        Output(t, cont) => Input(t.clone(), Box::new(dual_session(cont))),
        Input(t, cont) => Output(t.clone(), Box::new(dual_session(cont))),
        Select(bs) => Choice(bs.iter().map(|(l, s)| (l.clone(), dual_session(s))).collect()),
        Choice(bs) => Select(bs.iter().map(|(l, s)| (l.clone(), dual_session(s))).collect()),
        EndOut => EndIn,
        EndIn => EndOut,
        Var(v) => Var(v.flip()),
        OutputType(x, cont) => InputType(x.clone(), Box::new(dual_session(cont))),
        InputType(x, cont) => OutputType(x.clone(), Box::new(dual_session(cont))),
        Server(s) => Service(Box::new(dual_session(s))),
        Service(s) => Server(Box::new(dual_session(s))),
    }
}

/// Substitute `repl` for the positive occurrences of `var` in `target`,
/// and `dual(repl)` for the dual occurrences. Capture is avoided by
/// priming the binder.
pub fn subst_session(target: &SessionType, var: &str, repl: &SessionType) -> SessionType {
    use SessionType::*;
    match target {
        Output(t, cont) => Output(
            Box::new(subst_type(t, var, repl)),
            Box::new(subst_session(cont, var, repl)),
        ),
        Input(t, cont) => Input(
            Box::new(subst_type(t, var, repl)),
            Box::new(subst_session(cont, var, repl)),
        ),
        Select(bs) => Select(bs.iter().map(|(l, s)| (l.clone(), subst_session(s, var, repl))).collect()),
        Choice(bs) => Choice(bs.iter().map(|(l, s)| (l.clone(), subst_session(s, var, repl))).collect()),
        EndOut => EndOut,
        EndIn => EndIn,
        Var(v) => {
            if v.ident == var {
                match v.polarity {
                    Polarity::Positive => repl.clone(),
                    Polarity::Dual => dual_session(repl),
                }
            } else {
                Var(v.clone())
            }
        }
        OutputType(x, cont) if x.ident == var => OutputType(x.clone(), cont.clone()),
        InputType(x, cont) if x.ident == var => InputType(x.clone(), cont.clone()),
        OutputType(x, cont) => {
            let (x, cont) = avoid_capture(x, cont, repl);
            OutputType(x, Box::new(subst_session(&cont, var, repl)))
        }
        InputType(x, cont) => {
            let (x, cont) = avoid_capture(x, cont, repl);
            InputType(x, Box::new(subst_session(&cont, var, repl)))
        }
        Server(s) => Server(Box::new(subst_session(s, var, repl))),
        Service(s) => Service(Box::new(subst_session(s, var, repl))),
    }
}

pub fn subst_type(target: &Type, var: &str, repl: &SessionType) -> Type {
    match target {
        Type::Session(s) => Type::Session(subst_session(s, var, repl)),
        Type::LinFun(t, u) => Type::LinFun(
            Box::new(subst_type(t, var, repl)),
            Box::new(subst_type(u, var, repl)),
        ),
        Type::UnFun(t, u) => Type::UnFun(
            Box::new(subst_type(t, var, repl)),
            Box::new(subst_type(u, var, repl)),
        ),
        Type::Tensor(t, u) => Type::Tensor(
            Box::new(subst_type(t, var, repl)),
            Box::new(subst_type(u, var, repl)),
        ),
    }
}

/// If the binder would capture a free variable of `repl`, prime it until it
/// no longer does.
fn avoid_capture(binder: &TypeVar, body: &SessionType, repl: &SessionType) -> (TypeVar, SessionType) {
    let repl_free = free_tyvars_session(repl);
    if !repl_free.contains(&binder.ident) {
        return (binder.clone(), body.clone());
    }
    let body_free = free_tyvars_session(body);
    let mut fresh = binder.ident.clone();
    loop {
        fresh.push('\'');
        if !repl_free.contains(&fresh) && !body_free.contains(&fresh) {
            break;
        }
    }
    let renamed = rename_tyvar_session(body, &binder.ident, &fresh);
    (TypeVar { ident: fresh, polarity: binder.polarity }, renamed)
}

fn rename_tyvar_session(s: &SessionType, from: &str, to: &str) -> SessionType {
    use SessionType::*;
    match s {
        Output(t, c) => Output(Box::new(rename_tyvar_type(t, from, to)), Box::new(rename_tyvar_session(c, from, to))),
        Input(t, c) => Input(Box::new(rename_tyvar_type(t, from, to)), Box::new(rename_tyvar_session(c, from, to))),
        Select(bs) => Select(bs.iter().map(|(l, s)| (l.clone(), rename_tyvar_session(s, from, to))).collect()),
        Choice(bs) => Choice(bs.iter().map(|(l, s)| (l.clone(), rename_tyvar_session(s, from, to))).collect()),
        EndOut => EndOut,
        EndIn => EndIn,
        Var(v) => {
            if v.ident == from {
                Var(TypeVar { ident: to.to_string(), polarity: v.polarity })
            } else {
                Var(v.clone())
            }
        }
        OutputType(x, c) if x.ident == from => OutputType(x.clone(), c.clone()),
        InputType(x, c) if x.ident == from => InputType(x.clone(), c.clone()),
        OutputType(x, c) => OutputType(x.clone(), Box::new(rename_tyvar_session(c, from, to))),
        InputType(x, c) => InputType(x.clone(), Box::new(rename_tyvar_session(c, from, to))),
        Server(s) => Server(Box::new(rename_tyvar_session(s, from, to))),
        Service(s) => Service(Box::new(rename_tyvar_session(s, from, to))),
    }
}

fn rename_tyvar_type(t: &Type, from: &str, to: &str) -> Type {
    match t {
        Type::Session(s) => Type::Session(rename_tyvar_session(s, from, to)),
        Type::LinFun(a, b) => Type::LinFun(Box::new(rename_tyvar_type(a, from, to)), Box::new(rename_tyvar_type(b, from, to))),
        Type::UnFun(a, b) => Type::UnFun(Box::new(rename_tyvar_type(a, from, to)), Box::new(rename_tyvar_type(b, from, to))),
        Type::Tensor(a, b) => Type::Tensor(Box::new(rename_tyvar_type(a, from, to)), Box::new(rename_tyvar_type(b, from, to))),
    }
}

pub fn free_tyvars_session(s: &SessionType) -> std::collections::BTreeSet<String> {
    use SessionType::*;
    let mut out = std::collections::BTreeSet::new();
    match s {
        Output(t, c) | Input(t, c) => {
            out.extend(free_tyvars_type(t));
            out.extend(free_tyvars_session(c));
        }
        Select(bs) | Choice(bs) => {
            for (_, s) in bs {
                out.extend(free_tyvars_session(s));
            }
        }
        EndOut | EndIn => {}
        Var(v) => {
            out.insert(v.ident.clone());
        }
        OutputType(x, c) | InputType(x, c) => {
            let mut inner = free_tyvars_session(c);
            inner.remove(&x.ident);
            out.extend(inner);
        }
        Server(s) | Service(s) => out.extend(free_tyvars_session(s)),
    }
    out
}

pub fn free_tyvars_type(t: &Type) -> std::collections::BTreeSet<String> {
    match t {
        Type::Session(s) => free_tyvars_session(s),
        Type::LinFun(a, b) | Type::UnFun(a, b) | Type::Tensor(a, b) => {
            let mut out = free_tyvars_type(a);
            out.extend(free_tyvars_type(b));
            out
        }
    }
}

/// Canonical encoding of a session type: branch maps sorted by label, type
/// binders numbered de Bruijn style. Two types are equal (modulo alpha and
/// branch order) iff their encodings coincide.
pub fn canon_session(s: &SessionType) -> String {
    let mut out = String::new();
    enc_session(s, &mut Vec::new(), &mut out);
    out
}

pub fn canon_type(t: &Type) -> String {
    let mut out = String::new();
    enc_type(t, &mut Vec::new(), &mut out);
    out
}

fn enc_var(v: &TypeVar, env: &[String], out: &mut String) {
    let tag = if v.polarity == Polarity::Dual { "~" } else { "" };
    match env.iter().rev().position(|i| *i == v.ident) {
        Some(ix) => out.push_str(&format!("{}b{}", tag, ix)),
        None => out.push_str(&format!("{}f:{}", tag, v.ident)),
    }
}

fn enc_session(s: &SessionType, env: &mut Vec<String>, out: &mut String) {
    use SessionType::*;
    match s {
        Output(t, c) => {
            out.push_str("(!");
            enc_type(t, env, out);
            out.push('.');
            enc_session(c, env, out);
            out.push(')');
        }
        Input(t, c) => {
            out.push_str("(?");
            enc_type(t, env, out);
            out.push('.');
            enc_session(c, env, out);
            out.push(')');
        }
        Select(bs) | Choice(bs) => {
            out.push_str(if matches!(s, Select(_)) { "(+{" } else { "(&{" });
            let mut sorted: Vec<_> = bs.iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            for (l, s) in sorted {
                out.push_str(&l.0);
                out.push(':');
                enc_session(s, env, out);
                out.push(';');
            }
            out.push_str("})");
        }
        EndOut => out.push_str("end!"),
        EndIn => out.push_str("end?"),
        Var(v) => enc_var(v, env, out),
        OutputType(x, c) | InputType(x, c) => {
            out.push_str(if matches!(s, OutputType(..)) { "(!!." } else { "(??." });
            env.push(x.ident.clone());
            enc_session(c, env, out);
            env.pop();
            out.push(')');
        }
        Server(s2) => {
            out.push_str("(#");
            enc_session(s2, env, out);
            out.push(')');
        }
        Service(s2) => {
            out.push_str("(@");
            enc_session(s2, env, out);
            out.push(')');
        }
    }
}

fn enc_type(t: &Type, env: &mut Vec<String>, out: &mut String) {
    match t {
        Type::Session(s) => enc_session(s, env, out),
        Type::LinFun(a, b) => {
            out.push_str("(-o ");
            enc_type(a, env, out);
            out.push(' ');
            enc_type(b, env, out);
            out.push(')');
        }
        Type::UnFun(a, b) => {
            out.push_str("(-> ");
            enc_type(a, env, out);
            out.push(' ');
            enc_type(b, env, out);
            out.push(')');
        }
        Type::Tensor(a, b) => {
            out.push_str("(* ");
            enc_type(a, env, out);
            out.push(' ');
            enc_type(b, env, out);
            out.push(')');
        }
    }
}

/// Type equality modulo alpha on type binders and branch ordering.
pub fn session_eq(a: &SessionType, b: &SessionType) -> bool {
    canon_session(a) == canon_session(b)
}

pub fn type_eq(a: &Type, b: &Type) -> bool {
    canon_type(a) == canon_type(b)
}
