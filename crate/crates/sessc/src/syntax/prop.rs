//! CP propositions (classical linear logic), duality, substitution.

use crate::names::{Label, Polarity, TypeVar};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Proposition {
    /// `A * B`
    Tensor(Box<Proposition>, Box<Proposition>),
    /// `A | B` (par)
    Par(Box<Proposition>, Box<Proposition>),
    /// `(+){l_i: A_i}`
    Plus(Vec<(Label, Proposition)>),
    /// `(&){l_i: A_i}`
    With(Vec<(Label, Proposition)>),
    One,
    Bottom,
    /// `!A`
    OfCourse(Box<Proposition>),
    /// `?A`
    WhyNot(Box<Proposition>),
    /// `exists X. A`
    Exists(TypeVar, Box<Proposition>),
    /// `forall X. A`
    Forall(TypeVar, Box<Proposition>),
    Var(TypeVar),
}

/// De Morgan duality. In contrast with session duality, tensor/par dualise
/// BOTH components.
pub fn dual_prop(a: &Proposition) -> Proposition {
    use Proposition::*;
    match a {
        Tensor(l, r) => Par(Box::new(dual_prop(l)), Box::new(dual_prop(r))),
        Par(l, r) => Tensor(Box::new(dual_prop(l)), Box::new(dual_prop(r))),
        Plus(bs) => With(bs.iter().map(|(l, a)| (l.clone(), dual_prop(a))).collect()),
        With(bs) => Plus(bs.iter().map(|(l, a)| (l.clone(), dual_prop(a))).collect()),
        One => Bottom,
        Bottom => One,
        OfCourse(a) => WhyNot(Box::new(dual_prop(a))),
        WhyNot(a) => OfCourse(Box::new(dual_prop(a))),
        Exists(x, a) => Forall(x.clone(), Box::new(dual_prop(a))),
        Forall(x, a) => Exists(x.clone(), Box::new(dual_prop(a))),
        Var(v) => Var(v.flip()),
    }
}

/// Substitute `repl` for positive occurrences of `var`, `dual(repl)` for dual
/// occurrences. Capture-avoiding via priming.
pub fn subst_prop(target: &Proposition, var: &str, repl: &Proposition) -> Proposition {
    use Proposition::*;
    match target {
        Tensor(l, r) => Tensor(Box::new(subst_prop(l, var, repl)), Box::new(subst_prop(r, var, repl))),
        Par(l, r) => Par(Box::new(subst_prop(l, var, repl)), Box::new(subst_prop(r, var, repl))),
        Plus(bs) => Plus(bs.iter().map(|(l, a)| (l.clone(), subst_prop(a, var, repl))).collect()),
        With(bs) => With(bs.iter().map(|(l, a)| (l.clone(), subst_prop(a, var, repl))).collect()),
        One => One,
        Bottom => Bottom,
        OfCourse(a) => OfCourse(Box::new(subst_prop(a, var, repl))),
        WhyNot(a) => WhyNot(Box::new(subst_prop(a, var, repl))),
        Exists(x, _) | Forall(x, _) if x.ident == var => target.clone(),
        Exists(x, a) => {
            let (x, a) = avoid_capture(x, a, repl);
            Exists(x, Box::new(subst_prop(&a, var, repl)))
        }
        Forall(x, a) => {
            let (x, a) = avoid_capture(x, a, repl);
            Forall(x, Box::new(subst_prop(&a, var, repl)))
        }
        Var(v) => {
            if v.ident == var {
                match v.polarity {
                    Polarity::Positive => repl.clone(),
                    Polarity::Dual => dual_prop(repl),
                }
            } else {
                Var(v.clone())
            }
        }
    }
}

fn avoid_capture(binder: &TypeVar, body: &Proposition, repl: &Proposition) -> (TypeVar, Proposition) {
    let repl_free = free_tyvars_prop(repl);
    if !repl_free.contains(&binder.ident) {
        return (binder.clone(), body.clone());
    }
    let body_free = free_tyvars_prop(body);
    let mut fresh = binder.ident.clone();
    loop {
        fresh.push('\'');
        if !repl_free.contains(&fresh) && !body_free.contains(&fresh) {
            break;
        }
    }
    let renamed = rename_tyvar_prop(body, &binder.ident, &fresh);
    (TypeVar { ident: fresh, polarity: binder.polarity }, renamed)
}

fn rename_tyvar_prop(a: &Proposition, from: &str, to: &str) -> Proposition {
    use Proposition::*;
    match a {
        Tensor(l, r) => Tensor(Box::new(rename_tyvar_prop(l, from, to)), Box::new(rename_tyvar_prop(r, from, to))),
        Par(l, r) => Par(Box::new(rename_tyvar_prop(l, from, to)), Box::new(rename_tyvar_prop(r, from, to))),
        Plus(bs) => Plus(bs.iter().map(|(l, a)| (l.clone(), rename_tyvar_prop(a, from, to))).collect()),
        With(bs) => With(bs.iter().map(|(l, a)| (l.clone(), rename_tyvar_prop(a, from, to))).collect()),
        One => One,
        Bottom => Bottom,
        OfCourse(a) => OfCourse(Box::new(rename_tyvar_prop(a, from, to))),
        WhyNot(a) => WhyNot(Box::new(rename_tyvar_prop(a, from, to))),
        Exists(x, _) | Forall(x, _) if x.ident == from => a.clone(),
        Exists(x, a) => Exists(x.clone(), Box::new(rename_tyvar_prop(a, from, to))),
        Forall(x, a) => Forall(x.clone(), Box::new(rename_tyvar_prop(a, from, to))),
        Var(v) => {
            if v.ident == from {
                Var(TypeVar { ident: to.to_string(), polarity: v.polarity })
            } else {
                Var(v.clone())
            }
        }
    }
}

pub fn free_tyvars_prop(a: &Proposition) -> std::collections::BTreeSet<String> {
    use Proposition::*;
    let mut out = std::collections::BTreeSet::new();
    match a {
        Tensor(l, r) | Par(l, r) => {
            out.extend(free_tyvars_prop(l));
            out.extend(free_tyvars_prop(r));
        }
        Plus(bs) | With(bs) => {
            for (_, a) in bs {
                out.extend(free_tyvars_prop(a));
            }
        }
        One | Bottom => {}
        OfCourse(a) | WhyNot(a) => out.extend(free_tyvars_prop(a)),
        Exists(x, a) | Forall(x, a) => {
            let mut inner = free_tyvars_prop(a);
            inner.remove(&x.ident);
            out.extend(inner);
        }
        Var(v) => {
            out.insert(v.ident.clone());
        }
    }
    out
}

/// Canonical encoding: branches sorted, binders de Bruijn numbered.
pub fn canon_prop(a: &Proposition) -> String {
    let mut out = String::new();
    enc(a, &mut Vec::new(), &mut out);
    out
}

pub fn prop_eq(a: &Proposition, b: &Proposition) -> bool {
    canon_prop(a) == canon_prop(b)
}

fn enc(a: &Proposition, env: &mut Vec<String>, out: &mut String) {
    use Proposition::*;
    match a {
        Tensor(l, r) | Par(l, r) => {
            out.push_str(if matches!(a, Tensor(..)) { "(* " } else { "(| " });
            enc(l, env, out);
            out.push(' ');
            enc(r, env, out);
            out.push(')');
        }
        Plus(bs) | With(bs) => {
            out.push_str(if matches!(a, Plus(_)) { "(+{" } else { "(&{" });
            let mut sorted: Vec<_> = bs.iter().collect();
            sorted.sort_by(|x, y| x.0.cmp(&y.0));
            for (l, a) in sorted {
                out.push_str(&l.0);
                out.push(':');
                enc(a, env, out);
                out.push(';');
            }
            out.push_str("})");
        }
        One => out.push('1'),
        Bottom => out.push_str("bot"),
        OfCourse(a) => {
            out.push_str("(!");
            enc(a, env, out);
            out.push(')');
        }
        WhyNot(a) => {
            out.push_str("(?");
            enc(a, env, out);
            out.push(')');
        }
        Exists(x, body) | Forall(x, body) => {
            out.push_str(if matches!(a, Exists(..)) { "(ex." } else { "(fa." });
            env.push(x.ident.clone());
            enc(body, env, out);
            env.pop();
            out.push(')');
        }
        Var(v) => {
            let tag = if v.polarity == Polarity::Dual { "~" } else { "" };
            match env.iter().rev().position(|i| *i == v.ident) {
                Some(ix) => out.push_str(&format!("{}b{}", tag, ix)),
                None => out.push_str(&format!("{}f:{}", tag, v.ident)),
            }
        }
    }
}
