//! HGV term syntax, free variables, alpha-canonical forms.

use std::collections::BTreeSet;

use crate::names::{Label, Name, TypeVar};
use crate::syntax::session::{free_tyvars_session, free_tyvars_type, SessionType, Type};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Var(Name),
    /// `fn x:T. M` — the domain annotation keeps checking syntax-directed.
    Lam(Name, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    /// `let (x, y) = M in N`
    LetPair(Name, Name, Box<Term>, Box<Term>),
    /// `send M N` — payload `M`, channel `N`.
    Send(Box<Term>, Box<Term>),
    Receive(Box<Term>),
    Select(Label, Box<Term>),
    Case(Box<Term>, Vec<(Label, Name, Term)>),
    /// `fork x. M`; the binder annotation (when present) is the session type
    /// consumed by the body.
    Fork(Name, Option<SessionType>, Box<Term>),
    Link(Box<Term>, Box<Term>),
    SendType(SessionType, Box<Term>),
    ReceiveType(TypeVar, Box<Term>),
    Serve(Name, Option<SessionType>, Box<Term>),
    Request(Box<Term>),
    /// `(M : T -> U)` — the arrow-introduction coercion; annotation is the
    /// unlimited function type produced.
    CoerceUn(Box<Term>, Type),
    /// `(M : T -o U)` — the arrow-elimination coercion; annotation is the
    /// linear function type produced.
    CoerceLin(Box<Term>, Type),
}

impl Term {
    pub fn var(n: Name) -> Term {
        Term::Var(n)
    }
}

pub fn free_vars(m: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(m, &mut Vec::new(), &mut out);
    out
}

/// Free variables with multiplicity, in left-to-right occurrence order.
pub fn free_var_occurrences(m: &Term) -> Vec<Name> {
    let mut out = Vec::new();
    collect_occ(m, &mut Vec::new(), &mut out);
    out
}

fn collect_free(m: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let mut occ = Vec::new();
    collect_occ(m, bound, &mut occ);
    out.extend(occ);
}

fn collect_occ(m: &Term, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    use Term::*;
    match m {
        Var(n) => {
            if !bound.contains(n) {
                out.push(n.clone());
            }
        }
        Lam(x, _, body) | Fork(x, _, body) | Serve(x, _, body) => {
            bound.push(x.clone());
            collect_occ(body, bound, out);
            bound.pop();
        }
        App(a, b) | Pair(a, b) | Send(a, b) | Link(a, b) => {
            collect_occ(a, bound, out);
            collect_occ(b, bound, out);
        }
        LetPair(x, y, scrut, body) => {
            collect_occ(scrut, bound, out);
            bound.push(x.clone());
            bound.push(y.clone());
            collect_occ(body, bound, out);
            bound.pop();
            bound.pop();
        }
        Receive(a) | Select(_, a) | Request(a) | SendType(_, a) | ReceiveType(_, a)
        | CoerceUn(a, _) | CoerceLin(a, _) => collect_occ(a, bound, out),
        Case(scrut, branches) => {
            collect_occ(scrut, bound, out);
            for (_, x, body) in branches {
                bound.push(x.clone());
                collect_occ(body, bound, out);
                bound.pop();
            }
        }
    }
}

/// Free type variables of a term (through annotations and type arguments).
pub fn free_tyvars_term(m: &Term) -> BTreeSet<String> {
    use Term::*;
    let mut out = BTreeSet::new();
    match m {
        Var(_) => {}
        Lam(_, t, body) => {
            out.extend(free_tyvars_type(t));
            out.extend(free_tyvars_term(body));
        }
        Fork(_, annot, body) | Serve(_, annot, body) => {
            if let Some(s) = annot {
                out.extend(free_tyvars_session(s));
            }
            out.extend(free_tyvars_term(body));
        }
        App(a, b) | Pair(a, b) | Send(a, b) | Link(a, b) => {
            out.extend(free_tyvars_term(a));
            out.extend(free_tyvars_term(b));
        }
        LetPair(_, _, a, b) => {
            out.extend(free_tyvars_term(a));
            out.extend(free_tyvars_term(b));
        }
        Receive(a) | Select(_, a) | Request(a) => out.extend(free_tyvars_term(a)),
        SendType(s, a) => {
            out.extend(free_tyvars_session(s));
            out.extend(free_tyvars_term(a));
        }
        ReceiveType(x, a) => {
            let mut inner = free_tyvars_term(a);
            inner.remove(&x.ident);
            out.extend(inner);
        }
        CoerceUn(a, t) | CoerceLin(a, t) => {
            out.extend(free_tyvars_term(a));
            out.extend(free_tyvars_type(t));
        }
        Case(scrut, branches) => {
            out.extend(free_tyvars_term(scrut));
            for (_, _, body) in branches {
                out.extend(free_tyvars_term(body));
            }
        }
    }
    out
}

/// Rename every free occurrence of `from` to `to`.
pub fn rename_term(m: &Term, to: &Name, from: &Name) -> Term {
    use Term::*;
    let r = |t: &Term| rename_term(t, to, from);
    match m {
        Var(n) => Var(if n == from { to.clone() } else { n.clone() }),
        Lam(x, _, _) | Fork(x, _, _) | Serve(x, _, _) if x == from => m.clone(),
        Lam(x, t, body) => Lam(x.clone(), t.clone(), Box::new(r(body))),
        Fork(x, a, body) => Fork(x.clone(), a.clone(), Box::new(r(body))),
        Serve(x, a, body) => Serve(x.clone(), a.clone(), Box::new(r(body))),
        App(a, b) => App(Box::new(r(a)), Box::new(r(b))),
        Pair(a, b) => Pair(Box::new(r(a)), Box::new(r(b))),
        Send(a, b) => Send(Box::new(r(a)), Box::new(r(b))),
        Link(a, b) => Link(Box::new(r(a)), Box::new(r(b))),
        LetPair(x, y, a, b) => {
            let body = if x == from || y == from { (**b).clone() } else { r(b) };
            LetPair(x.clone(), y.clone(), Box::new(r(a)), Box::new(body))
        }
        Receive(a) => Receive(Box::new(r(a))),
        Select(l, a) => Select(l.clone(), Box::new(r(a))),
        Request(a) => Request(Box::new(r(a))),
        SendType(s, a) => SendType(s.clone(), Box::new(r(a))),
        ReceiveType(x, a) => ReceiveType(x.clone(), Box::new(r(a))),
        CoerceUn(a, t) => CoerceUn(Box::new(r(a)), t.clone()),
        CoerceLin(a, t) => CoerceLin(Box::new(r(a)), t.clone()),
        Case(scrut, branches) => Case(
            Box::new(r(scrut)),
            branches
                .iter()
                .map(|(l, x, body)| {
                    let body = if x == from { body.clone() } else { r(body) };
                    (l.clone(), x.clone(), body)
                })
                .collect(),
        ),
    }
}

/// Alpha-canonical encoding: bound names become de Bruijn indices, free
/// names stay rigid (printed by base). Two terms are alpha-equivalent iff
/// their encodings coincide.
pub fn alpha_canonical_term(m: &Term) -> String {
    let mut out = String::new();
    enc(m, &mut Vec::new(), &mut out);
    out
}

fn enc_name(n: &Name, env: &[Name], out: &mut String) {
    match env.iter().rev().position(|b| b == n) {
        Some(ix) => out.push_str(&format!("b{}", ix)),
        None => out.push_str(&format!("f:{}", n.base)),
    }
}

fn enc(m: &Term, env: &mut Vec<Name>, out: &mut String) {
    use Term::*;
    match m {
        Var(n) => enc_name(n, env, out),
        Lam(x, t, body) => {
            out.push_str("(fn:");
            out.push_str(&crate::syntax::session::canon_type(t));
            out.push('.');
            env.push(x.clone());
            enc(body, env, out);
            env.pop();
            out.push(')');
        }
        Fork(x, _, body) | Serve(x, _, body) => {
            out.push_str(if matches!(m, Fork(..)) { "(fork." } else { "(serve." });
            env.push(x.clone());
            enc(body, env, out);
            env.pop();
            out.push(')');
        }
        App(a, b) | Pair(a, b) | Send(a, b) | Link(a, b) => {
            out.push_str(match m {
                App(..) => "(app ",
                Pair(..) => "(pair ",
                Send(..) => "(send ",
                _ => "(link ",
            });
            enc(a, env, out);
            out.push(' ');
            enc(b, env, out);
            out.push(')');
        }
        LetPair(x, y, a, b) => {
            out.push_str("(letp ");
            enc(a, env, out);
            out.push(' ');
            env.push(x.clone());
            env.push(y.clone());
            enc(b, env, out);
            env.pop();
            env.pop();
            out.push(')');
        }
        Receive(a) => {
            out.push_str("(recv ");
            enc(a, env, out);
            out.push(')');
        }
        Select(l, a) => {
            out.push_str(&format!("(sel {} ", l));
            enc(a, env, out);
            out.push(')');
        }
        Request(a) => {
            out.push_str("(req ");
            enc(a, env, out);
            out.push(')');
        }
        SendType(s, a) => {
            out.push_str("(sendty ");
            out.push_str(&crate::syntax::session::canon_session(s));
            out.push(' ');
            enc(a, env, out);
            out.push(')');
        }
        ReceiveType(x, a) => {
            out.push_str(&format!("(recvty {} ", x.ident));
            enc(a, env, out);
            out.push(')');
        }
        CoerceUn(a, t) | CoerceLin(a, t) => {
            out.push_str(if matches!(m, CoerceUn(..)) { "(coun " } else { "(colin " });
            enc(a, env, out);
            out.push(':');
            out.push_str(&crate::syntax::session::canon_type(t));
            out.push(')');
        }
        Case(scrut, branches) => {
            out.push_str("(case ");
            enc(scrut, env, out);
            let mut sorted: Vec<_> = branches.iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            for (l, x, body) in sorted {
                out.push_str(&format!(" {}(.", l));
                env.push(x.clone());
                enc(body, env, out);
                env.pop();
                out.push(')');
            }
            out.push(')');
        }
    }
}
