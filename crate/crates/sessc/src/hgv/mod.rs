//! HGV typechecking: algorithmic linear checking with explicit elaboration
//! of Weaken and Contract into the derivation, plus the pi-fragment check.

use std::collections::BTreeSet;

use crate::names::{Label, Name, NameSupply, TypeVar};
use crate::syntax::session::{
    dual_session, free_tyvars_type, subst_session, type_eq, SessionType, Type,
};
use crate::syntax::term::{free_vars, rename_term, Term};

/// The only unlimited types: services, unlimited functions, end-input.
pub fn is_unlimited(t: &Type) -> bool {
    matches!(
        t,
        Type::UnFun(..) | Type::Session(SessionType::Service(_)) | Type::Session(SessionType::EndIn)
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Id,
    Weaken(Name),
    /// The duplicated name and the fresh copy used in the subderivation.
    Contract(Name, Name),
    LamI,
    LamE,
    UnI,
    UnE,
    PairI,
    PairE,
    SendR,
    ReceiveR,
    SelectR(Label),
    CaseR,
    ForkR,
    LinkR,
    SendTypeR,
    ReceiveTypeR,
    ServeR,
    RequestR,
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule: Rule,
    pub ctx: Vec<(Name, Type)>,
    pub term: Term,
    pub ty: Type,
    pub children: Vec<Derivation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeError {
    Unbound(String),
    LinearUnused(String),
    LinearReused(String),
    Mismatch { expected: String, found: String },
    UnknownLabel(String),
    BranchMismatch(String),
    UnlimitedViolation(String),
    TyVarEscapes(String),
    AnnotationRequired(String),
    EmptyCase,
    NotPi(String),
}

impl std::fmt::Display for TypeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use TypeError::*;
        match self {
            Unbound(x) => write!(f, "unbound variable {}", x),
            LinearUnused(x) => write!(f, "linear variable {} is never used", x),
            LinearReused(x) => write!(f, "linear variable {} is used more than once", x),
            Mismatch { expected, found } => {
                write!(f, "type mismatch: expected {}, found {}", expected, found)
            }
            UnknownLabel(l) => write!(f, "label {} is not offered", l),
            BranchMismatch(m) => write!(f, "case branches disagree: {}", m),
            UnlimitedViolation(x) => {
                write!(f, "variable {} has a linear type but occurs in an unlimited scope", x)
            }
            TyVarEscapes(x) => write!(f, "type variable {} already occurs in the context", x),
            AnnotationRequired(m) => write!(f, "annotation required: {}", m),
            EmptyCase => write!(f, "case with no branches"),
            NotPi(m) => write!(f, "not in the pi fragment: {}", m),
        }
    }
}

fn show_ty(t: &Type) -> String {
    crate::print::print_type(t)
}

/// Typecheck under `ctx`; dead unlimited entries are discharged by Weaken
/// nodes at the root of the returned derivation.
pub fn typecheck(
    supply: &mut NameSupply,
    ctx: &[(Name, Type)],
    term: &Term,
) -> Result<Derivation, TypeError> {
    let fv = free_vars(term);
    let known: BTreeSet<&Name> = ctx.iter().map(|(n, _)| n).collect();
    for v in &fv {
        if !known.contains(v) {
            return Err(TypeError::Unbound(v.base.clone()));
        }
    }
    let mut live = Vec::new();
    let mut dead = Vec::new();
    for (n, t) in ctx {
        if fv.contains(n) {
            live.push((n.clone(), t.clone()));
        } else if is_unlimited(t) {
            dead.push((n.clone(), t.clone()));
        } else {
            return Err(TypeError::LinearUnused(n.base.clone()));
        }
    }
    let mut d = check_node(supply, live, term)?;
    for (n, t) in dead {
        let mut cctx = d.ctx.clone();
        cctx.push((n.clone(), t));
        d = Derivation {
            rule: Rule::Weaken(n),
            ctx: cctx,
            term: d.term.clone(),
            ty: d.ty.clone(),
            children: vec![d],
        };
    }
    Ok(d)
}

struct Split {
    ctx_l: Vec<(Name, Type)>,
    ctx_r: Vec<(Name, Type)>,
    /// (original, fresh copy, type) for each unlimited name used on both sides.
    contractions: Vec<(Name, Name, Type)>,
}

/// Partition a live context between two subterm free-variable sets,
/// renaming shared unlimited names apart on the right.
fn split(
    supply: &mut NameSupply,
    ctx: &[(Name, Type)],
    fv_l: &BTreeSet<Name>,
    fv_r: &BTreeSet<Name>,
) -> Result<Split, TypeError> {
    let mut s = Split { ctx_l: Vec::new(), ctx_r: Vec::new(), contractions: Vec::new() };
    for (n, t) in ctx {
        match (fv_l.contains(n), fv_r.contains(n)) {
            (true, true) => {
                if !is_unlimited(t) {
                    return Err(TypeError::LinearReused(n.base.clone()));
                }
                let fresh = supply.refresh(n);
                s.ctx_l.push((n.clone(), t.clone()));
                s.ctx_r.push((fresh.clone(), t.clone()));
                s.contractions.push((n.clone(), fresh, t.clone()));
            }
            (true, false) => s.ctx_l.push((n.clone(), t.clone())),
            (false, true) => s.ctx_r.push((n.clone(), t.clone())),
            (false, false) => unreachable!("dead entries are weakened before splitting"),
        }
    }
    Ok(s)
}

/// Wrap `d` in one Contract node per renamed copy, restoring the original
/// term and context.
fn contract_wrap(d: Derivation, contractions: &[(Name, Name, Type)]) -> Derivation {
    let mut d = d;
    for (orig, fresh, _) in contractions.iter().rev() {
        let ctx: Vec<(Name, Type)> =
            d.ctx.iter().filter(|(n, _)| n != fresh).cloned().collect();
        let term = rename_term(&d.term, orig, fresh);
        let ty = d.ty.clone();
        d = Derivation {
            rule: Rule::Contract(orig.clone(), fresh.clone()),
            ctx,
            term,
            ty,
            children: vec![d],
        };
    }
    d
}

fn expect_session(t: &Type) -> Result<&SessionType, TypeError> {
    match t {
        Type::Session(s) => Ok(s),
        other => Err(TypeError::Mismatch {
            expected: "a session type".into(),
            found: show_ty(other),
        }),
    }
}

/// Typecheck a term all of whose context entries occur free in it.
fn check_node(
    supply: &mut NameSupply,
    ctx: Vec<(Name, Type)>,
    term: &Term,
) -> Result<Derivation, TypeError> {
    use Term::*;
    match term {
        Var(_) => {
            // Live context for a variable is exactly that variable.
            debug_assert_eq!(ctx.len(), 1);
            let ty = ctx[0].1.clone();
            Ok(Derivation { rule: Rule::Id, ctx, term: term.clone(), ty, children: vec![] })
        }
        Lam(x, t, body) => {
            let mut inner = ctx.clone();
            inner.push((x.clone(), t.clone()));
            let d = typecheck(supply, &inner, body)?;
            let ty = Type::LinFun(Box::new(t.clone()), Box::new(d.ty.clone()));
            Ok(Derivation { rule: Rule::LamI, ctx, term: term.clone(), ty, children: vec![d] })
        }
        App(fun, arg) => {
            let s = split(supply, &ctx, &free_vars(fun), &free_vars(arg))?;
            let arg2 = s.contractions.iter().fold((**arg).clone(), |a, (o, f, _)| {
                rename_term(&a, f, o)
            });
            let df = typecheck(supply, &s.ctx_l, fun)?;
            let da = typecheck(supply, &s.ctx_r, &arg2)?;
            let (t, u) = match &df.ty {
                Type::LinFun(t, u) => (t.clone(), u.clone()),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a linear function".into(),
                        found: show_ty(other),
                    })
                }
            };
            if !type_eq(&t, &da.ty) {
                return Err(TypeError::Mismatch { expected: show_ty(&t), found: show_ty(&da.ty) });
            }
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let node = Derivation {
                rule: Rule::LamE,
                ctx: nctx,
                term: App(fun.clone(), Box::new(arg2)),
                ty: (*u).clone(),
                children: vec![df, da],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        CoerceLin(m, target) => {
            let d = typecheck(supply, &ctx, m)?;
            let (t, u) = match target {
                Type::LinFun(t, u) => (t, u),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a linear function annotation".into(),
                        found: show_ty(other),
                    })
                }
            };
            let want = Type::UnFun(t.clone(), u.clone());
            if !type_eq(&d.ty, &want) {
                return Err(TypeError::Mismatch { expected: show_ty(&want), found: show_ty(&d.ty) });
            }
            Ok(Derivation {
                rule: Rule::UnE,
                ctx,
                term: term.clone(),
                ty: target.clone(),
                children: vec![d],
            })
        }
        CoerceUn(m, target) => {
            let (t, u) = match target {
                Type::UnFun(t, u) => (t, u),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "an unlimited function annotation".into(),
                        found: show_ty(other),
                    })
                }
            };
            for (n, ty) in &ctx {
                if !is_unlimited(ty) {
                    return Err(TypeError::UnlimitedViolation(n.base.clone()));
                }
            }
            let d = typecheck(supply, &ctx, m)?;
            let want = Type::LinFun(t.clone(), u.clone());
            if !type_eq(&d.ty, &want) {
                return Err(TypeError::Mismatch { expected: show_ty(&want), found: show_ty(&d.ty) });
            }
            Ok(Derivation {
                rule: Rule::UnI,
                ctx,
                term: term.clone(),
                ty: target.clone(),
                children: vec![d],
            })
        }
        Pair(m, n) => {
            let s = split(supply, &ctx, &free_vars(m), &free_vars(n))?;
            let n2 = s.contractions.iter().fold((**n).clone(), |a, (o, f, _)| {
                rename_term(&a, f, o)
            });
            let dm = typecheck(supply, &s.ctx_l, m)?;
            let dn = typecheck(supply, &s.ctx_r, &n2)?;
            let ty = Type::Tensor(Box::new(dm.ty.clone()), Box::new(dn.ty.clone()));
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let node = Derivation {
                rule: Rule::PairI,
                ctx: nctx,
                term: Pair(m.clone(), Box::new(n2)),
                ty,
                children: vec![dm, dn],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        LetPair(x, y, m, body) => {
            let mut fv_body = free_vars(body);
            fv_body.remove(x);
            fv_body.remove(y);
            let s = split(supply, &ctx, &free_vars(m), &fv_body)?;
            let body2 = s.contractions.iter().fold((**body).clone(), |a, (o, f, _)| {
                rename_term(&a, f, o)
            });
            let dm = typecheck(supply, &s.ctx_l, m)?;
            let (t, u) = match &dm.ty {
                Type::Tensor(t, u) => (t.clone(), u.clone()),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a pair".into(),
                        found: show_ty(other),
                    })
                }
            };
            let mut inner = s.ctx_r.clone();
            inner.push((x.clone(), (*t).clone()));
            inner.push((y.clone(), (*u).clone()));
            let dn = typecheck(supply, &inner, &body2)?;
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let ty = dn.ty.clone();
            let node = Derivation {
                rule: Rule::PairE,
                ctx: nctx,
                term: LetPair(x.clone(), y.clone(), m.clone(), Box::new(body2)),
                ty,
                children: vec![dm, dn],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        Send(m, n) => {
            let s = split(supply, &ctx, &free_vars(m), &free_vars(n))?;
            let n2 = s.contractions.iter().fold((**n).clone(), |a, (o, f, _)| {
                rename_term(&a, f, o)
            });
            let dm = typecheck(supply, &s.ctx_l, m)?;
            let dn = typecheck(supply, &s.ctx_r, &n2)?;
            let (t, cont) = match expect_session(&dn.ty)? {
                SessionType::Output(t, cont) => (t.clone(), cont.clone()),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "an output session".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            if !type_eq(&t, &dm.ty) {
                return Err(TypeError::Mismatch { expected: show_ty(&t), found: show_ty(&dm.ty) });
            }
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let node = Derivation {
                rule: Rule::SendR,
                ctx: nctx,
                term: Send(m.clone(), Box::new(n2)),
                ty: Type::Session((*cont).clone()),
                children: vec![dm, dn],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        Receive(m) => {
            let d = typecheck(supply, &ctx, m)?;
            let (t, cont) = match expect_session(&d.ty)? {
                SessionType::Input(t, cont) => (t.clone(), cont.clone()),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "an input session".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            let ty = Type::Tensor(t, Box::new(Type::Session((*cont).clone())));
            Ok(Derivation { rule: Rule::ReceiveR, ctx, term: term.clone(), ty, children: vec![d] })
        }
        Select(l, m) => {
            let d = typecheck(supply, &ctx, m)?;
            let branches = match expect_session(&d.ty)? {
                SessionType::Select(bs) => bs.clone(),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a selection session".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            let ty = branches
                .iter()
                .find(|(bl, _)| bl == l)
                .map(|(_, s)| Type::Session(s.clone()))
                .ok_or_else(|| TypeError::UnknownLabel(l.0.clone()))?;
            Ok(Derivation {
                rule: Rule::SelectR(l.clone()),
                ctx,
                term: term.clone(),
                ty,
                children: vec![d],
            })
        }
        Case(m, branches) => {
            if branches.is_empty() {
                return Err(TypeError::EmptyCase);
            }
            let mut fv_br = BTreeSet::new();
            for (_, x, body) in branches {
                let mut f = free_vars(body);
                f.remove(x);
                fv_br.extend(f);
            }
            let s = split(supply, &ctx, &free_vars(m), &fv_br)?;
            let dm = typecheck(supply, &s.ctx_l, m)?;
            let offered = match expect_session(&dm.ty)? {
                SessionType::Choice(bs) => bs.clone(),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a choice session".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            let want: BTreeSet<&Label> = offered.iter().map(|(l, _)| l).collect();
            let have: BTreeSet<&Label> = branches.iter().map(|(l, _, _)| l).collect();
            if want != have {
                return Err(TypeError::BranchMismatch("labels differ from the scrutinee".into()));
            }
            let mut children = vec![dm];
            let mut result: Option<Type> = None;
            let mut new_branches = Vec::new();
            for (l, x, body) in branches {
                let body2 = s.contractions.iter().fold(body.clone(), |a, (o, f, _)| {
                    rename_term(&a, f, o)
                });
                let si = offered.iter().find(|(bl, _)| bl == l).unwrap().1.clone();
                let mut inner = s.ctx_r.clone();
                inner.push((x.clone(), Type::Session(si)));
                let db = typecheck(supply, &inner, &body2)?;
                match &result {
                    None => result = Some(db.ty.clone()),
                    Some(t) => {
                        if !type_eq(t, &db.ty) {
                            return Err(TypeError::BranchMismatch(format!(
                                "{} versus {}",
                                show_ty(t),
                                show_ty(&db.ty)
                            )));
                        }
                    }
                }
                new_branches.push((l.clone(), x.clone(), db.term.clone()));
                children.push(db);
            }
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let node = Derivation {
                rule: Rule::CaseR,
                ctx: nctx,
                term: Case(m.clone(), new_branches),
                ty: result.unwrap(),
                children,
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        Fork(x, annot, body) => {
            let sess = annot.clone().ok_or_else(|| {
                TypeError::AnnotationRequired(format!("fork binder {}", x.base))
            })?;
            let mut inner = ctx.clone();
            inner.push((x.clone(), Type::Session(sess.clone())));
            let d = typecheck(supply, &inner, body)?;
            if !type_eq(&d.ty, &Type::Session(SessionType::EndOut)) {
                return Err(TypeError::Mismatch {
                    expected: "end!".into(),
                    found: show_ty(&d.ty),
                });
            }
            let ty = Type::Session(dual_session(&sess));
            Ok(Derivation { rule: Rule::ForkR, ctx, term: term.clone(), ty, children: vec![d] })
        }
        Link(m, n) => {
            let s = split(supply, &ctx, &free_vars(m), &free_vars(n))?;
            let n2 = s.contractions.iter().fold((**n).clone(), |a, (o, f, _)| {
                rename_term(&a, f, o)
            });
            let dm = typecheck(supply, &s.ctx_l, m)?;
            let dn = typecheck(supply, &s.ctx_r, &n2)?;
            let sm = expect_session(&dm.ty)?;
            let want = Type::Session(dual_session(sm));
            if !type_eq(&dn.ty, &want) {
                return Err(TypeError::Mismatch { expected: show_ty(&want), found: show_ty(&dn.ty) });
            }
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let node = Derivation {
                rule: Rule::LinkR,
                ctx: nctx,
                term: Link(m.clone(), Box::new(n2)),
                ty: Type::Session(SessionType::EndOut),
                children: vec![dm, dn],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        SendType(arg, m) => {
            let d = typecheck(supply, &ctx, m)?;
            let (x, body) = match expect_session(&d.ty)? {
                SessionType::OutputType(x, body) => (x.clone(), body.clone()),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a type-output session".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            let ty = Type::Session(subst_session(&body, &x.ident, arg));
            Ok(Derivation { rule: Rule::SendTypeR, ctx, term: term.clone(), ty, children: vec![d] })
        }
        ReceiveType(x, m) => {
            for (_, t) in &ctx {
                if free_tyvars_type(t).contains(&x.ident) {
                    return Err(TypeError::TyVarEscapes(x.ident.clone()));
                }
            }
            let d = typecheck(supply, &ctx, m)?;
            let (y, body) = match expect_session(&d.ty)? {
                SessionType::InputType(y, body) => (y.clone(), body.clone()),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a type-input session".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            let renamed = subst_session(&body, &y.ident, &SessionType::Var(TypeVar::pos(&x.ident)));
            Ok(Derivation {
                rule: Rule::ReceiveTypeR,
                ctx,
                term: term.clone(),
                ty: Type::Session(renamed),
                children: vec![d],
            })
        }
        Serve(x, annot, body) => {
            let sess = annot.clone().ok_or_else(|| {
                TypeError::AnnotationRequired(format!("serve binder {}", x.base))
            })?;
            for (n, t) in &ctx {
                if !is_unlimited(t) {
                    return Err(TypeError::UnlimitedViolation(n.base.clone()));
                }
            }
            let mut inner = ctx.clone();
            inner.push((x.clone(), Type::Session(sess.clone())));
            let d = typecheck(supply, &inner, body)?;
            if !type_eq(&d.ty, &Type::Session(SessionType::EndOut)) {
                return Err(TypeError::Mismatch {
                    expected: "end!".into(),
                    found: show_ty(&d.ty),
                });
            }
            // dual(#S) = @(dual S)
            let ty = Type::Session(SessionType::Service(Box::new(dual_session(&sess))));
            Ok(Derivation { rule: Rule::ServeR, ctx, term: term.clone(), ty, children: vec![d] })
        }
        Request(m) => {
            let d = typecheck(supply, &ctx, m)?;
            let s = match expect_session(&d.ty)? {
                SessionType::Service(s) => (**s).clone(),
                other => {
                    return Err(TypeError::Mismatch {
                        expected: "a service".into(),
                        found: show_ty(&Type::Session(other.clone())),
                    })
                }
            };
            Ok(Derivation {
                rule: Rule::RequestR,
                ctx,
                term: term.clone(),
                ty: Type::Session(s),
                children: vec![d],
            })
        }
    }
}

/// Membership in the pi fragment: session constructs only, with receive
/// appearing exclusively in the fused `let (x,y) = receive M in N` form.
pub fn check_pi(term: &Term) -> Result<(), TypeError> {
    use Term::*;
    match term {
        Var(_) => Ok(()),
        LetPair(_, _, m, n) => match &**m {
            Receive(inner) => {
                check_pi(inner)?;
                check_pi(n)
            }
            _ => Err(TypeError::NotPi("let-pair over a non-receive".into())),
        },
        Send(m, n) | Link(m, n) => {
            check_pi(m)?;
            check_pi(n)
        }
        Select(_, m) | SendType(_, m) | ReceiveType(_, m) | Request(m) => check_pi(m),
        Fork(_, _, m) | Serve(_, _, m) => check_pi(m),
        Case(m, branches) => {
            check_pi(m)?;
            for (_, _, body) in branches {
                check_pi(body)?;
            }
            Ok(())
        }
        Receive(_) => Err(TypeError::NotPi("bare receive outside a let-pair".into())),
        Lam(..) => Err(TypeError::NotPi("lambda".into())),
        App(..) => Err(TypeError::NotPi("application".into())),
        Pair(..) => Err(TypeError::NotPi("pair construction".into())),
        CoerceUn(..) | CoerceLin(..) => Err(TypeError::NotPi("function coercion".into())),
    }
}
