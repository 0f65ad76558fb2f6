//! The three translations: full HGV into its pi fragment, the pi fragment
//! into CP (with the direct extension to non-session constructs), and CP
//! back into the pi fragment. Term translations work on derivations so
//! that elaborated Weaken/Contract nodes and cut types are available.

use crate::cp::{CPDerivation, CPRule};
use crate::hgv::{Derivation, Rule};
use crate::names::{Name, NameSupply};
use crate::syntax::process::Process;
use crate::syntax::prop::{dual_prop, Proposition};
use crate::syntax::session::{dual_session, SessionType, Type};
use crate::syntax::term::{rename_term, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TranslateError {
    /// A lambda-calculus construct reached the session-only translation.
    NonSession(String),
}

impl std::fmt::Display for TranslateError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TranslateError::NonSession(what) => {
                write!(f, "{} has no session-only translation; lower to the pi fragment first or use the direct extension", what)
            }
        }
    }
}

// ---- HGV types into pi-fragment session types ----

pub fn tr_type_pi(t: &Type) -> SessionType {
    match t {
        Type::Session(s) => tr_session_pi(s),
        Type::LinFun(t, u) => SessionType::Output(
            Box::new(Type::Session(tr_type_pi(t))),
            Box::new(tr_type_pi(u)),
        ),
        Type::UnFun(t, u) => SessionType::Service(Box::new(SessionType::Output(
            Box::new(Type::Session(tr_type_pi(t))),
            Box::new(tr_type_pi(u)),
        ))),
        Type::Tensor(t, u) => SessionType::Input(
            Box::new(Type::Session(tr_type_pi(t))),
            Box::new(tr_type_pi(u)),
        ),
    }
}

pub fn tr_session_pi(s: &SessionType) -> SessionType {
    use SessionType::*;
    match s {
        Output(t, cont) => Output(
            Box::new(Type::Session(tr_type_pi(t))),
            Box::new(tr_session_pi(cont)),
        ),
        Input(t, cont) => Input(
            Box::new(Type::Session(tr_type_pi(t))),
            Box::new(tr_session_pi(cont)),
        ),
        Select(bs) => Select(bs.iter().map(|(l, s)| (l.clone(), tr_session_pi(s))).collect()),
        Choice(bs) => Choice(bs.iter().map(|(l, s)| (l.clone(), tr_session_pi(s))).collect()),
        EndOut => EndOut,
        EndIn => EndIn,
        Var(x) => Var(x.clone()),
        OutputType(x, cont) => OutputType(x.clone(), Box::new(tr_session_pi(cont))),
        InputType(x, cont) => InputType(x.clone(), Box::new(tr_session_pi(cont))),
        Server(inner) => Server(Box::new(tr_session_pi(inner))),
        Service(inner) => Service(Box::new(tr_session_pi(inner))),
    }
}

pub fn tr_ctx_pi(ctx: &[(Name, Type)]) -> Vec<(Name, Type)> {
    ctx.iter().map(|(n, t)| (n.clone(), Type::Session(tr_type_pi(t)))).collect()
}

// ---- HGV types into CP propositions (with the non-session extension) ----

pub fn tr_type_cp(t: &Type) -> Proposition {
    match t {
        Type::Session(s) => tr_session_cp(s),
        Type::LinFun(t, u) => Proposition::Tensor(
            Box::new(dual_prop(&tr_type_cp(t))),
            Box::new(tr_type_cp(u)),
        ),
        Type::UnFun(t, u) => Proposition::WhyNot(Box::new(Proposition::Tensor(
            Box::new(dual_prop(&tr_type_cp(t))),
            Box::new(tr_type_cp(u)),
        ))),
        Type::Tensor(t, u) => {
            Proposition::Par(Box::new(tr_type_cp(t)), Box::new(tr_type_cp(u)))
        }
    }
}

/// The interface orientation of the extended type translation.
pub fn flip(t: &Type) -> Proposition {
    dual_prop(&tr_type_cp(t))
}

pub fn tr_session_cp(s: &SessionType) -> Proposition {
    use SessionType::*;
    match s {
        Output(t, cont) => Proposition::Tensor(
            Box::new(dual_prop(&tr_type_cp(t))),
            Box::new(tr_session_cp(cont)),
        ),
        Input(t, cont) => Proposition::Par(
            Box::new(tr_type_cp(t)),
            Box::new(tr_session_cp(cont)),
        ),
        Select(bs) => {
            Proposition::Plus(bs.iter().map(|(l, s)| (l.clone(), tr_session_cp(s))).collect())
        }
        Choice(bs) => {
            Proposition::With(bs.iter().map(|(l, s)| (l.clone(), tr_session_cp(s))).collect())
        }
        EndOut => Proposition::One,
        EndIn => Proposition::Bottom,
        Var(x) => Proposition::Var(x.clone()),
        OutputType(x, cont) => Proposition::Exists(x.clone(), Box::new(tr_session_cp(cont))),
        InputType(x, cont) => Proposition::Forall(x.clone(), Box::new(tr_session_cp(cont))),
        Server(inner) => Proposition::OfCourse(Box::new(tr_session_cp(inner))),
        Service(inner) => Proposition::WhyNot(Box::new(tr_session_cp(inner))),
    }
}

pub fn tr_ctx_cp(ctx: &[(Name, Type)]) -> Vec<(Name, Proposition)> {
    ctx.iter().map(|(n, t)| (n.clone(), tr_type_cp(t))).collect()
}

// ---- CP propositions into pi-fragment session types ----

pub fn tr_prop_gv(a: &Proposition) -> SessionType {
    use Proposition::*;
    match a {
        Tensor(a, b) => SessionType::Output(
            Box::new(Type::Session(dual_session(&tr_prop_gv(a)))),
            Box::new(tr_prop_gv(b)),
        ),
        Par(a, b) => SessionType::Input(
            Box::new(Type::Session(tr_prop_gv(a))),
            Box::new(tr_prop_gv(b)),
        ),
        Plus(bs) => {
            SessionType::Select(bs.iter().map(|(l, a)| (l.clone(), tr_prop_gv(a))).collect())
        }
        With(bs) => {
            SessionType::Choice(bs.iter().map(|(l, a)| (l.clone(), tr_prop_gv(a))).collect())
        }
        One => SessionType::EndOut,
        Bottom => SessionType::EndIn,
        OfCourse(a) => SessionType::Server(Box::new(tr_prop_gv(a))),
        WhyNot(a) => SessionType::Service(Box::new(tr_prop_gv(a))),
        Exists(x, a) => SessionType::OutputType(x.clone(), Box::new(tr_prop_gv(a))),
        Forall(x, a) => SessionType::InputType(x.clone(), Box::new(tr_prop_gv(a))),
        Var(x) => SessionType::Var(x.clone()),
    }
}

pub fn tr_ctx_gv(ctx: &[(Name, Proposition)]) -> Vec<(Name, Type)> {
    ctx.iter().map(|(n, a)| (n.clone(), Type::Session(tr_prop_gv(a)))).collect()
}

// ---- full HGV terms into the pi fragment ----

pub fn tr_term_pi(d: &Derivation, supply: &mut NameSupply) -> Term {
    match &d.rule {
        Rule::Id => d.term.clone(),
        Rule::Weaken(_) => tr_term_pi(&d.children[0], supply),
        Rule::Contract(x, fresh) => {
            let inner = tr_term_pi(&d.children[0], supply);
            rename_term(&inner, x, fresh)
        }
        Rule::LamI => {
            let (x, t) = match &d.term {
                Term::Lam(x, t, _) => (x.clone(), t.clone()),
                _ => unreachable!(),
            };
            let u = d.children[0].ty.clone();
            let z = supply.fresh("z");
            let z2 = supply.fresh("z");
            let annot = SessionType::Input(
                Box::new(Type::Session(tr_type_pi(&t))),
                Box::new(dual_session(&tr_type_pi(&u))),
            );
            let body = tr_term_pi(&d.children[0], supply);
            Term::Fork(
                z.clone(),
                Some(annot),
                Box::new(Term::LetPair(
                    x,
                    z2.clone(),
                    Box::new(Term::Receive(Box::new(Term::Var(z)))),
                    Box::new(Term::Link(Box::new(body), Box::new(Term::Var(z2)))),
                )),
            )
        }
        Rule::LamE => {
            let l = tr_term_pi(&d.children[0], supply);
            let m = tr_term_pi(&d.children[1], supply);
            Term::Send(Box::new(m), Box::new(l))
        }
        Rule::UnI => {
            let (t, u) = match &d.ty {
                Type::UnFun(t, u) => (t.clone(), u.clone()),
                _ => unreachable!(),
            };
            let z = supply.fresh("z");
            let annot = SessionType::Input(
                Box::new(Type::Session(tr_type_pi(&t))),
                Box::new(dual_session(&tr_type_pi(&u))),
            );
            let l = tr_term_pi(&d.children[0], supply);
            Term::Serve(
                z.clone(),
                Some(annot),
                Box::new(Term::Link(Box::new(l), Box::new(Term::Var(z)))),
            )
        }
        Rule::UnE => Term::Request(Box::new(tr_term_pi(&d.children[0], supply))),
        Rule::PairI => {
            let t = d.children[0].ty.clone();
            let u = d.children[1].ty.clone();
            let z = supply.fresh("z");
            let annot = SessionType::Output(
                Box::new(Type::Session(tr_type_pi(&t))),
                Box::new(dual_session(&tr_type_pi(&u))),
            );
            let m = tr_term_pi(&d.children[0], supply);
            let n = tr_term_pi(&d.children[1], supply);
            Term::Fork(
                z.clone(),
                Some(annot),
                Box::new(Term::Link(
                    Box::new(Term::Send(Box::new(m), Box::new(Term::Var(z)))),
                    Box::new(n),
                )),
            )
        }
        Rule::PairE => {
            let (x, y) = match &d.term {
                Term::LetPair(x, y, _, _) => (x.clone(), y.clone()),
                _ => unreachable!(),
            };
            let m = tr_term_pi(&d.children[0], supply);
            let n = tr_term_pi(&d.children[1], supply);
            Term::LetPair(x, y, Box::new(Term::Receive(Box::new(m))), Box::new(n))
        }
        Rule::ReceiveR => tr_term_pi(&d.children[0], supply),
        Rule::SendR => {
            let m = tr_term_pi(&d.children[0], supply);
            let n = tr_term_pi(&d.children[1], supply);
            Term::Send(Box::new(m), Box::new(n))
        }
        Rule::SelectR(l) => {
            Term::Select(l.clone(), Box::new(tr_term_pi(&d.children[0], supply)))
        }
        Rule::CaseR => {
            let branches = match &d.term {
                Term::Case(_, bs) => bs.clone(),
                _ => unreachable!(),
            };
            let m = tr_term_pi(&d.children[0], supply);
            let bs = branches
                .iter()
                .zip(&d.children[1..])
                .map(|((l, x, _), child)| (l.clone(), x.clone(), tr_term_pi(child, supply)))
                .collect();
            Term::Case(Box::new(m), bs)
        }
        Rule::ForkR => {
            let (x, annot) = match &d.term {
                Term::Fork(x, a, _) => (x.clone(), a.clone()),
                _ => unreachable!(),
            };
            let body = tr_term_pi(&d.children[0], supply);
            Term::Fork(x, annot.map(|s| tr_session_pi(&s)), Box::new(body))
        }
        Rule::LinkR => {
            let m = tr_term_pi(&d.children[0], supply);
            let n = tr_term_pi(&d.children[1], supply);
            Term::Link(Box::new(m), Box::new(n))
        }
        Rule::SendTypeR => {
            let s = match &d.term {
                Term::SendType(s, _) => s.clone(),
                _ => unreachable!(),
            };
            Term::SendType(tr_session_pi(&s), Box::new(tr_term_pi(&d.children[0], supply)))
        }
        Rule::ReceiveTypeR => {
            let x = match &d.term {
                Term::ReceiveType(x, _) => x.clone(),
                _ => unreachable!(),
            };
            Term::ReceiveType(x, Box::new(tr_term_pi(&d.children[0], supply)))
        }
        Rule::ServeR => {
            let (x, annot) = match &d.term {
                Term::Serve(x, a, _) => (x.clone(), a.clone()),
                _ => unreachable!(),
            };
            let body = tr_term_pi(&d.children[0], supply);
            Term::Serve(x, annot.map(|s| tr_session_pi(&s)), Box::new(body))
        }
        Rule::RequestR => Term::Request(Box::new(tr_term_pi(&d.children[0], supply))),
    }
}

// ---- pi-fragment (or full, with `direct`) HGV terms into CP ----

/// Translate the derivation of an HGV term to a CP process with
/// continuation channel `z`. With `direct` set, non-session constructs
/// use the extended translation; otherwise they are rejected.
pub fn tr_term_cp(
    d: &Derivation,
    z: &Name,
    supply: &mut NameSupply,
    direct: bool,
) -> Result<Process, TranslateError> {
    let rec = |d: &Derivation, z: &Name, supply: &mut NameSupply| tr_term_cp(d, z, supply, direct);
    // Cut type of a fresh channel carrying the interface of subterm `c`.
    let iface = |c: &Derivation| dual_prop(&tr_type_cp(&c.ty));
    match &d.rule {
        Rule::Id => {
            let x = match &d.term {
                Term::Var(x) => x.clone(),
                _ => unreachable!(),
            };
            Ok(Process::LinkP(x, z.clone()))
        }
        Rule::Weaken(x) => {
            let t = d.ctx.iter().find(|(n, _)| n == x).map(|(_, t)| t.clone()).unwrap();
            let inner = rec(&d.children[0], z, supply)?;
            match t {
                Type::Session(SessionType::EndIn) => {
                    Ok(Process::EmptyIn(x.clone(), Box::new(inner)))
                }
                // ?-typed images: CP weakening is implicit.
                _ => Ok(inner),
            }
        }
        Rule::Contract(x, fresh) => {
            let t = d.ctx.iter().find(|(n, _)| n == x).map(|(_, t)| t.clone()).unwrap();
            let inner = rec(&d.children[0], z, supply)?;
            match t {
                Type::Session(SessionType::EndIn) => Ok(Process::cut_annot(
                    fresh.clone(),
                    Proposition::Bottom,
                    inner,
                    Process::EmptyOut(fresh.clone()),
                )),
                _ => Ok(crate::syntax::process::rename_process(&inner, x, fresh)),
            }
        }
        Rule::SendR => {
            let x = supply.fresh("x");
            let y = supply.fresh("y");
            let pm = rec(&d.children[0], &y, supply)?;
            let pn = rec(&d.children[1], &x, supply)?;
            let a = dual_prop(&iface(&d.children[1]));
            Ok(Process::cut_annot(
                x.clone(),
                a,
                Process::Out(
                    x.clone(),
                    y,
                    Box::new(pm),
                    Box::new(Process::LinkP(x, z.clone())),
                ),
                pn,
            ))
        }
        Rule::PairE => {
            let (x, y) = match &d.term {
                Term::LetPair(x, y, _, _) => (x.clone(), y.clone()),
                _ => unreachable!(),
            };
            // The first premise is `receive M` in the fused form; its
            // translation is the translation of M itself.
            let dm = &d.children[0];
            let inner_m = if dm.rule == Rule::ReceiveR { &dm.children[0] } else { dm };
            if dm.rule != Rule::ReceiveR && !direct {
                return Err(TranslateError::NonSession("let-pair over a non-receive".into()));
            }
            let pm = rec(inner_m, &y, supply)?;
            let pn = rec(&d.children[1], z, supply)?;
            let a = iface(inner_m);
            Ok(Process::cut_annot(
                y.clone(),
                a,
                pm,
                Process::In(y, x, Box::new(pn)),
            ))
        }
        Rule::ReceiveR => {
            if !direct {
                return Err(TranslateError::NonSession("a bare receive".into()));
            }
            rec(&d.children[0], z, supply)
        }
        Rule::SelectR(l) => {
            let x = supply.fresh("x");
            let pm = rec(&d.children[0], &x, supply)?;
            let a = iface(&d.children[0]);
            Ok(Process::cut_annot(
                x.clone(),
                a,
                pm,
                Process::Inject(x.clone(), l.clone(), Box::new(Process::LinkP(x, z.clone()))),
            ))
        }
        Rule::CaseR => {
            let branches = match &d.term {
                Term::Case(_, bs) => bs.clone(),
                _ => unreachable!(),
            };
            let x = supply.fresh("x");
            let pm = rec(&d.children[0], &x, supply)?;
            let a = iface(&d.children[0]);
            let mut bs = Vec::new();
            for ((l, xi, _), child) in branches.iter().zip(&d.children[1..]) {
                let body = rec(child, z, supply)?;
                bs.push((l.clone(), crate::syntax::process::rename_process(&body, &x, xi)));
            }
            Ok(Process::cut_annot(x.clone(), a, pm, Process::CaseP(x, bs)))
        }
        Rule::ForkR => {
            let x = match &d.term {
                Term::Fork(x, _, _) => x.clone(),
                _ => unreachable!(),
            };
            let xty = d.children[0]
                .ctx
                .iter()
                .find(|(n, _)| n == &x)
                .map(|(_, t)| t.clone())
                .unwrap();
            let y = supply.fresh("y");
            let pm = rec(&d.children[0], &y, supply)?;
            let inner = Process::cut_annot(
                y.clone(),
                Proposition::Bottom,
                pm,
                Process::EmptyOut(y),
            );
            Ok(Process::cut_annot(
                x.clone(),
                tr_type_cp(&xty),
                inner,
                Process::LinkP(x, z.clone()),
            ))
        }
        Rule::LinkR => {
            let x = supply.fresh("x");
            let pm = rec(&d.children[0], &x, supply)?;
            let dn = &d.children[1];
            let pn = rec(dn, &x, supply)?;
            // Both components regard x as their continuation; the types
            // dual(tr(S)) and dual(tr(dual S)) are dual as required.
            let inner = Process::Cut(
                x,
                crate::syntax::process::CutAnnot(Some(iface(&d.children[0]))),
                Box::new(pm),
                Box::new(pn),
            );
            Ok(Process::EmptyIn(z.clone(), Box::new(inner)))
        }
        Rule::SendTypeR => {
            let s = match &d.term {
                Term::SendType(s, _) => s.clone(),
                _ => unreachable!(),
            };
            let x = supply.fresh("x");
            let pm = rec(&d.children[0], &x, supply)?;
            let a = iface(&d.children[0]);
            Ok(Process::cut_annot(
                x.clone(),
                a,
                pm,
                Process::OutType(
                    x.clone(),
                    tr_session_cp(&s),
                    Box::new(Process::LinkP(x, z.clone())),
                ),
            ))
        }
        Rule::ReceiveTypeR => {
            let v = match &d.term {
                Term::ReceiveType(v, _) => v.clone(),
                _ => unreachable!(),
            };
            let x = supply.fresh("x");
            let pm = rec(&d.children[0], &x, supply)?;
            let a = iface(&d.children[0]);
            Ok(Process::cut_annot(
                x.clone(),
                a,
                pm,
                Process::InType(x.clone(), v, Box::new(Process::LinkP(x, z.clone()))),
            ))
        }
        Rule::ServeR => {
            let y = match &d.term {
                Term::Serve(y, _, _) => y.clone(),
                _ => unreachable!(),
            };
            let x = supply.fresh("x");
            let pm = rec(&d.children[0], &x, supply)?;
            let inner = Process::cut_annot(
                x.clone(),
                Proposition::Bottom,
                pm,
                Process::EmptyOut(x),
            );
            Ok(Process::Bang(z.clone(), y, Box::new(inner)))
        }
        Rule::RequestR => {
            let x = supply.fresh("x");
            let y = supply.fresh("y");
            let pm = rec(&d.children[0], &x, supply)?;
            let a = iface(&d.children[0]);
            Ok(Process::cut_annot(
                x.clone(),
                a,
                pm,
                Process::Query(x, y.clone(), Box::new(Process::LinkP(y, z.clone()))),
            ))
        }
        // Non-session constructs: the direct extension.
        Rule::LamI => {
            if !direct {
                return Err(TranslateError::NonSession("a lambda".into()));
            }
            let x = match &d.term {
                Term::Lam(x, _, _) => x.clone(),
                _ => unreachable!(),
            };
            let body = rec(&d.children[0], z, supply)?;
            Ok(Process::In(z.clone(), x, Box::new(body)))
        }
        Rule::LamE => {
            if !direct {
                return Err(TranslateError::NonSession("an application".into()));
            }
            let y = supply.fresh("y");
            let x = supply.fresh("x");
            let pl = rec(&d.children[0], &y, supply)?;
            let pm = rec(&d.children[1], &x, supply)?;
            let a = iface(&d.children[0]);
            Ok(Process::cut_annot(
                y.clone(),
                a,
                pl,
                Process::Out(
                    y.clone(),
                    x,
                    Box::new(pm),
                    Box::new(Process::LinkP(y, z.clone())),
                ),
            ))
        }
        Rule::UnI => {
            if !direct {
                return Err(TranslateError::NonSession("an unlimited coercion".into()));
            }
            let y = supply.fresh("y");
            let pl = rec(&d.children[0], &y, supply)?;
            Ok(Process::Bang(z.clone(), y, Box::new(pl)))
        }
        Rule::UnE => {
            if !direct {
                return Err(TranslateError::NonSession("a linear coercion".into()));
            }
            let y = supply.fresh("y");
            let x = supply.fresh("x");
            let pl = rec(&d.children[0], &y, supply)?;
            let a = iface(&d.children[0]);
            Ok(Process::cut_annot(
                y.clone(),
                a,
                pl,
                Process::Query(y, x.clone(), Box::new(Process::LinkP(x, z.clone()))),
            ))
        }
        Rule::PairI => {
            if !direct {
                return Err(TranslateError::NonSession("a pair".into()));
            }
            let y = supply.fresh("y");
            let pm = rec(&d.children[0], &y, supply)?;
            let pn = rec(&d.children[1], z, supply)?;
            Ok(Process::Out(z.clone(), y, Box::new(pm), Box::new(pn)))
        }
    }
}

// ---- CP processes back into the pi fragment ----
//
// The lift is defined on derivations: it produces an HGV derivation that
// mirrors the CP one node for node, so Weaken and Contract land exactly at
// the images of the CP weakening, contraction, and x().P nodes. Lowering
// the result with tr_term_cp then reproduces the prefix structure of the
// source process instead of pushing dead end? channels to the root.

fn sess(s: SessionType) -> Type {
    Type::Session(s)
}

fn dv(x: &Name, t: Type) -> Derivation {
    Derivation {
        rule: Rule::Id,
        ctx: vec![(x.clone(), t.clone())],
        term: Term::Var(x.clone()),
        ty: t,
        children: vec![],
    }
}

fn ctx_minus(ctx: &[(Name, Type)], drop: &[&Name]) -> Vec<(Name, Type)> {
    ctx.iter().filter(|(n, _)| !drop.contains(&n)).cloned().collect()
}

fn ctx_join(a: &[(Name, Type)], b: &[(Name, Type)]) -> Vec<(Name, Type)> {
    let mut out = a.to_vec();
    out.extend(b.iter().cloned());
    out
}

/// Rename a free channel throughout a derivation. All binders in lifted
/// derivations are supply-fresh, so capture cannot occur.
fn rename_deriv(d: &Derivation, to: &Name, from: &Name) -> Derivation {
    let rule = match &d.rule {
        Rule::Weaken(x) if x == from => Rule::Weaken(to.clone()),
        Rule::Contract(x, f) => Rule::Contract(
            if x == from { to.clone() } else { x.clone() },
            if f == from { to.clone() } else { f.clone() },
        ),
        r => r.clone(),
    };
    Derivation {
        rule,
        ctx: d
            .ctx
            .iter()
            .map(|(n, t)| (if n == from { to.clone() } else { n.clone() }, t.clone()))
            .collect(),
        term: rename_term(&d.term, to, from),
        ty: d.ty.clone(),
        children: d.children.iter().map(|c| rename_deriv(c, to, from)).collect(),
    }
}

fn d_link(dm: Derivation, dn: Derivation) -> Derivation {
    Derivation {
        rule: Rule::LinkR,
        ctx: ctx_join(&dm.ctx, &dn.ctx),
        term: Term::Link(Box::new(dm.term.clone()), Box::new(dn.term.clone())),
        ty: sess(SessionType::EndOut),
        children: vec![dm, dn],
    }
}

fn d_fork(x: Name, s: SessionType, body: Derivation) -> Derivation {
    Derivation {
        rule: Rule::ForkR,
        ctx: ctx_minus(&body.ctx, &[&x]),
        term: Term::Fork(x, Some(s.clone()), Box::new(body.term.clone())),
        ty: sess(dual_session(&s)),
        children: vec![body],
    }
}

fn d_send(dm: Derivation, dn: Derivation) -> Derivation {
    let cont = match &dn.ty {
        Type::Session(SessionType::Output(_, cont)) => (**cont).clone(),
        _ => unreachable!("send over a non-output channel"),
    };
    Derivation {
        rule: Rule::SendR,
        ctx: ctx_join(&dm.ctx, &dn.ctx),
        term: Term::Send(Box::new(dm.term.clone()), Box::new(dn.term.clone())),
        ty: sess(cont),
        children: vec![dm, dn],
    }
}

fn d_weaken(x: Name, t: Type, inner: Derivation) -> Derivation {
    let mut ctx = inner.ctx.clone();
    ctx.push((x.clone(), t));
    Derivation {
        rule: Rule::Weaken(x),
        ctx,
        term: inner.term.clone(),
        ty: inner.ty.clone(),
        children: vec![inner],
    }
}

/// `let x = M in N` expanded into the pi fragment, as a derivation. `bound`
/// is the session type of the value of M; the body N must have type end!.
fn let_pi_deriv(
    supply: &mut NameSupply,
    x: Name,
    bound: SessionType,
    dm: Derivation,
    dn: Derivation,
) -> Derivation {
    let z = supply.fresh("z");
    let z2 = supply.fresh("z");
    let annot = SessionType::Input(
        Box::new(sess(bound.clone())),
        Box::new(SessionType::EndIn),
    );
    let d_z = dv(&z, sess(annot.clone()));
    let d_rcv = Derivation {
        rule: Rule::ReceiveR,
        ctx: d_z.ctx.clone(),
        term: Term::Receive(Box::new(Term::Var(z.clone()))),
        ty: Type::Tensor(Box::new(sess(bound)), Box::new(sess(SessionType::EndIn))),
        children: vec![d_z],
    };
    let d_lnk = d_link(dn, dv(&z2, sess(SessionType::EndIn)));
    let d_lp = Derivation {
        rule: Rule::PairE,
        ctx: {
            let mut c = vec![(z.clone(), sess(annot.clone()))];
            c.extend(ctx_minus(&d_lnk.ctx, &[&x, &z2]));
            c
        },
        term: Term::LetPair(
            x,
            z2,
            Box::new(d_rcv.term.clone()),
            Box::new(d_lnk.term.clone()),
        ),
        ty: sess(SessionType::EndOut),
        children: vec![d_rcv, d_lnk],
    };
    d_send(dm, d_fork(z, annot, d_lp))
}

/// Lift of a CP derivation into an HGV derivation in the pi fragment. The
/// conclusion types the image term at end! under the translated context.
pub fn tr_cp_gv_deriv(d: &CPDerivation, supply: &mut NameSupply) -> Derivation {
    match &d.rule {
        CPRule::Ax => {
            let (w, x) = match &d.process {
                Process::LinkP(w, x) => (w.clone(), x.clone()),
                _ => unreachable!(),
            };
            let tw = sess(premise_ty_of(d, &w));
            let tx = sess(premise_ty_of(d, &x));
            d_link(dv(&w, tw), dv(&x, tx))
        }
        CPRule::WeakenR(x) => {
            let t = sess(premise_ty_of(d, x));
            let inner = tr_cp_gv_deriv(&d.children[0], supply);
            d_weaken(x.clone(), t, inner)
        }
        CPRule::ContractR(x, fresh) => {
            let inner = tr_cp_gv_deriv(&d.children[0], supply);
            Derivation {
                rule: Rule::Contract(x.clone(), fresh.clone()),
                ctx: ctx_minus(&inner.ctx, &[fresh]),
                term: rename_term(&inner.term, x, fresh),
                ty: inner.ty.clone(),
                children: vec![inner],
            }
        }
        CPRule::CutR => {
            let x = match &d.process {
                Process::Cut(x, _, _, _) => x.clone(),
                _ => unreachable!(),
            };
            let left_ty = premise_ty_of(&d.children[0], &x);
            let right_ty = premise_ty_of(&d.children[1], &x);
            let dp = tr_cp_gv_deriv(&d.children[0], supply);
            let dq = tr_cp_gv_deriv(&d.children[1], supply);
            let x2 = supply.refresh(&x);
            let dq = rename_deriv(&dq, &x2, &x);
            let dm = d_fork(x, left_ty, dp);
            let_pi_deriv(supply, x2, right_ty, dm, dq)
        }
        CPRule::TensorR => {
            let (x, y) = match &d.process {
                Process::Out(x, y, _, _) => (x.clone(), y.clone()),
                _ => unreachable!(),
            };
            let y_ty = premise_ty_of(&d.children[0], &y);
            let x_cont_ty = premise_ty_of(&d.children[1], &x);
            let tx = sess(premise_ty_of(d, &x));
            let dp = tr_cp_gv_deriv(&d.children[0], supply);
            let dq = tr_cp_gv_deriv(&d.children[1], supply);
            let x2 = supply.refresh(&x);
            let dq = rename_deriv(&dq, &x2, &x);
            let dm = d_send(d_fork(y, y_ty, dp), dv(&x, tx));
            let_pi_deriv(supply, x2, x_cont_ty, dm, dq)
        }
        CPRule::ParR => {
            let (x, y) = match &d.process {
                Process::In(x, y, _) => (x.clone(), y.clone()),
                _ => unreachable!(),
            };
            let tx = sess(premise_ty_of(d, &x));
            let (payload, cont) = match &tx {
                Type::Session(SessionType::Input(t, cont)) => ((**t).clone(), (**cont).clone()),
                _ => unreachable!("receive over a non-input channel"),
            };
            let dp = tr_cp_gv_deriv(&d.children[0], supply);
            let x2 = supply.refresh(&x);
            let dp = rename_deriv(&dp, &x2, &x);
            let d_rcv = Derivation {
                rule: Rule::ReceiveR,
                ctx: vec![(x.clone(), tx.clone())],
                term: Term::Receive(Box::new(Term::Var(x.clone()))),
                ty: Type::Tensor(Box::new(payload), Box::new(sess(cont))),
                children: vec![dv(&x, tx.clone())],
            };
            Derivation {
                rule: Rule::PairE,
                ctx: {
                    let mut c = vec![(x, tx)];
                    c.extend(ctx_minus(&dp.ctx, &[&y, &x2]));
                    c
                },
                term: Term::LetPair(
                    y,
                    x2,
                    Box::new(d_rcv.term.clone()),
                    Box::new(dp.term.clone()),
                ),
                ty: dp.ty.clone(),
                children: vec![d_rcv, dp],
            }
        }
        CPRule::PlusR(l) => {
            let x = match &d.process {
                Process::Inject(x, _, _) => x.clone(),
                _ => unreachable!(),
            };
            let cont_ty = premise_ty_of(&d.children[0], &x);
            let tx = sess(premise_ty_of(d, &x));
            let dp = tr_cp_gv_deriv(&d.children[0], supply);
            let x2 = supply.refresh(&x);
            let dp = rename_deriv(&dp, &x2, &x);
            let d_sel = Derivation {
                rule: Rule::SelectR(l.clone()),
                ctx: vec![(x.clone(), tx.clone())],
                term: Term::Select(l.clone(), Box::new(Term::Var(x.clone()))),
                ty: sess(cont_ty.clone()),
                children: vec![dv(&x, tx)],
            };
            let_pi_deriv(supply, x2, cont_ty, d_sel, dp)
        }
        CPRule::WithR => {
            let (x, labels) = match &d.process {
                Process::CaseP(x, bs) => {
                    (x.clone(), bs.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>())
                }
                _ => unreachable!(),
            };
            let tx = sess(premise_ty_of(d, &x));
            let dm = dv(&x, tx.clone());
            let mut bs = Vec::new();
            let mut kids = vec![dm];
            let mut rest_ctx = Vec::new();
            for (l, child) in labels.iter().zip(&d.children) {
                let body = tr_cp_gv_deriv(child, supply);
                let xi = supply.refresh(&x);
                let body = rename_deriv(&body, &xi, &x);
                rest_ctx = ctx_minus(&body.ctx, &[&xi]);
                bs.push((l.clone(), xi, body.term.clone()));
                kids.push(body);
            }
            Derivation {
                rule: Rule::CaseR,
                ctx: {
                    let mut c = vec![(x.clone(), tx)];
                    c.extend(rest_ctx);
                    c
                },
                term: Term::Case(Box::new(Term::Var(x)), bs),
                ty: sess(SessionType::EndOut),
                children: kids,
            }
        }
        CPRule::BangR => {
            let (s, y) = match &d.process {
                Process::Bang(s, y, _) => (s.clone(), y.clone()),
                _ => unreachable!(),
            };
            let y_ty = premise_ty_of(&d.children[0], &y);
            let ts = sess(premise_ty_of(d, &s));
            let body = tr_cp_gv_deriv(&d.children[0], supply);
            let d_srv = Derivation {
                rule: Rule::ServeR,
                ctx: ctx_minus(&body.ctx, &[&y]),
                term: Term::Serve(y, Some(y_ty.clone()), Box::new(body.term.clone())),
                ty: sess(SessionType::Service(Box::new(dual_session(&y_ty)))),
                children: vec![body],
            };
            d_link(dv(&s, ts), d_srv)
        }
        CPRule::QueryR => {
            let (s, y) = match &d.process {
                Process::Query(s, y, _) => (s.clone(), y.clone()),
                _ => unreachable!(),
            };
            let y_ty = premise_ty_of(&d.children[0], &y);
            let ts = sess(premise_ty_of(d, &s));
            let dq = tr_cp_gv_deriv(&d.children[0], supply);
            let d_req = Derivation {
                rule: Rule::RequestR,
                ctx: vec![(s.clone(), ts.clone())],
                term: Term::Request(Box::new(Term::Var(s.clone()))),
                ty: sess(y_ty.clone()),
                children: vec![dv(&s, ts)],
            };
            let_pi_deriv(supply, y, y_ty, d_req, dq)
        }
        CPRule::ExistsR => {
            let (x, a) = match &d.process {
                Process::OutType(x, a, _) => (x.clone(), a.clone()),
                _ => unreachable!(),
            };
            let cont_ty = premise_ty_of(&d.children[0], &x);
            let tx = sess(premise_ty_of(d, &x));
            let dp = tr_cp_gv_deriv(&d.children[0], supply);
            let x2 = supply.refresh(&x);
            let dp = rename_deriv(&dp, &x2, &x);
            let d_sty = Derivation {
                rule: Rule::SendTypeR,
                ctx: vec![(x.clone(), tx.clone())],
                term: Term::SendType(tr_prop_gv(&a), Box::new(Term::Var(x.clone()))),
                ty: sess(cont_ty.clone()),
                children: vec![dv(&x, tx)],
            };
            let_pi_deriv(supply, x2, cont_ty, d_sty, dp)
        }
        CPRule::ForallR => {
            let (x, v) = match &d.process {
                Process::InType(x, v, _) => (x.clone(), v.clone()),
                _ => unreachable!(),
            };
            let cont_ty = premise_ty_of(&d.children[0], &x);
            let tx = sess(premise_ty_of(d, &x));
            let dp = tr_cp_gv_deriv(&d.children[0], supply);
            let x2 = supply.refresh(&x);
            let dp = rename_deriv(&dp, &x2, &x);
            let d_rty = Derivation {
                rule: Rule::ReceiveTypeR,
                ctx: vec![(x.clone(), tx.clone())],
                term: Term::ReceiveType(v, Box::new(Term::Var(x.clone()))),
                ty: sess(cont_ty.clone()),
                children: vec![dv(&x, tx)],
            };
            let_pi_deriv(supply, x2, cont_ty, d_rty, dp)
        }
        CPRule::OneR => {
            let x = match &d.process {
                Process::EmptyOut(x) => x.clone(),
                _ => unreachable!(),
            };
            dv(&x, sess(SessionType::EndOut))
        }
        CPRule::BotR => {
            let x = match &d.process {
                Process::EmptyIn(x, _) => x.clone(),
                _ => unreachable!(),
            };
            let inner = tr_cp_gv_deriv(&d.children[0], supply);
            d_weaken(x, sess(SessionType::EndIn), inner)
        }
    }
}

pub fn tr_cp_gv(d: &CPDerivation, supply: &mut NameSupply) -> Term {
    tr_cp_gv_deriv(d, supply).term
}

/// Type of `x` in the root sequent of `d` (a premise derivation),
/// translated to a session type.
fn premise_ty_of(d: &CPDerivation, x: &Name) -> SessionType {
    let a = d
        .ctx
        .iter()
        .find(|(n, _)| n == x)
        .map(|(_, a)| a.clone())
        .expect("premise channel");
    tr_prop_gv(&a)
}
