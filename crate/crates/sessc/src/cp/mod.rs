//! CP typechecking: linear sequent checking with implicit Weaken/Contract
//! for ?-typed names elaborated into explicit derivation nodes.

use std::collections::{BTreeSet, HashMap};

use crate::names::{Label, Name, NameSupply, TypeVar};
use crate::syntax::process::{free_names, rename_process, Process};
use crate::syntax::prop::{dual_prop, free_tyvars_prop, prop_eq, subst_prop, Proposition};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CPRule {
    Ax,
    CutR,
    TensorR,
    ParR,
    PlusR(Label),
    WithR,
    BangR,
    QueryR,
    WeakenR(Name),
    ContractR(Name, Name),
    ExistsR,
    ForallR,
    OneR,
    BotR,
}

#[derive(Clone, Debug)]
pub struct CPDerivation {
    pub rule: CPRule,
    pub ctx: Vec<(Name, Proposition)>,
    pub process: Process,
    pub children: Vec<CPDerivation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CPError {
    Unbound(String),
    DuplicateName(String),
    LinearUnused(String),
    LinearReused(String),
    NotDual { left: String, right: String },
    Mismatch { name: String, expected: String, found: String },
    UnknownLabel(String),
    BranchMismatch(String),
    ExponentialContext(String),
    TyVarEscapes(String),
    AnnotationRequired(String),
}

impl std::fmt::Display for CPError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use CPError::*;
        match self {
            Unbound(x) => write!(f, "unbound name {}", x),
            DuplicateName(x) => write!(f, "duplicate context entry {}", x),
            LinearUnused(x) => write!(f, "linear name {} is never used", x),
            LinearReused(x) => write!(f, "linear name {} is used in both components", x),
            NotDual { left, right } => write!(f, "types are not dual: {} versus {}", left, right),
            Mismatch { name, expected, found } => {
                write!(f, "{}: expected {}, found {}", name, expected, found)
            }
            UnknownLabel(l) => write!(f, "label {} is not offered", l),
            BranchMismatch(m) => write!(f, "case branches disagree: {}", m),
            ExponentialContext(x) => {
                write!(f, "{} must have a ?-type to appear under a server", x)
            }
            TyVarEscapes(x) => write!(f, "type variable {} already occurs in the context", x),
            AnnotationRequired(x) => {
                write!(f, "cannot infer the cut type of {}; annotate the cut", x)
            }
        }
    }
}

fn show(a: &Proposition) -> String {
    crate::print::print_prop(a)
}

fn is_whynot(a: &Proposition) -> bool {
    matches!(a, Proposition::WhyNot(_))
}

pub fn cp_typecheck(
    supply: &mut NameSupply,
    ctx: &[(Name, Proposition)],
    p: &Process,
) -> Result<CPDerivation, CPError> {
    let mut seen = BTreeSet::new();
    for (n, _) in ctx {
        if !seen.insert(n) {
            return Err(CPError::DuplicateName(n.base.clone()));
        }
    }
    check(supply, ctx, p)
}

/// Check under `ctx`, discharging dead ?-entries with Weaken nodes.
fn check(
    supply: &mut NameSupply,
    ctx: &[(Name, Proposition)],
    p: &Process,
) -> Result<CPDerivation, CPError> {
    let fv = free_names(p);
    let known: BTreeSet<&Name> = ctx.iter().map(|(n, _)| n).collect();
    for v in &fv {
        if !known.contains(v) {
            return Err(CPError::Unbound(v.base.clone()));
        }
    }
    let mut live = Vec::new();
    let mut dead = Vec::new();
    for (n, a) in ctx {
        if fv.contains(n) {
            live.push((n.clone(), a.clone()));
        } else if is_whynot(a) {
            dead.push((n.clone(), a.clone()));
        } else {
            return Err(CPError::LinearUnused(n.base.clone()));
        }
    }
    let mut d = check_node(supply, live, p)?;
    for (n, a) in dead {
        let mut cctx = d.ctx.clone();
        cctx.push((n.clone(), a));
        d = CPDerivation {
            rule: CPRule::WeakenR(n),
            ctx: cctx,
            process: d.process.clone(),
            children: vec![d],
        };
    }
    Ok(d)
}

struct Split {
    ctx_l: Vec<(Name, Proposition)>,
    ctx_r: Vec<(Name, Proposition)>,
    contractions: Vec<(Name, Name, Proposition)>,
}

fn split(
    supply: &mut NameSupply,
    ctx: &[(Name, Proposition)],
    fv_l: &BTreeSet<Name>,
    fv_r: &BTreeSet<Name>,
) -> Result<Split, CPError> {
    let mut s = Split { ctx_l: Vec::new(), ctx_r: Vec::new(), contractions: Vec::new() };
    for (n, a) in ctx {
        match (fv_l.contains(n), fv_r.contains(n)) {
            (true, true) => {
                if !is_whynot(a) {
                    return Err(CPError::LinearReused(n.base.clone()));
                }
                let fresh = supply.refresh(n);
                s.ctx_l.push((n.clone(), a.clone()));
                s.ctx_r.push((fresh.clone(), a.clone()));
                s.contractions.push((n.clone(), fresh, a.clone()));
            }
            (true, false) => s.ctx_l.push((n.clone(), a.clone())),
            (false, true) => s.ctx_r.push((n.clone(), a.clone())),
            (false, false) => {}
        }
    }
    Ok(s)
}

fn contract_wrap(d: CPDerivation, contractions: &[(Name, Name, Proposition)]) -> CPDerivation {
    let mut d = d;
    for (orig, fresh, _) in contractions.iter().rev() {
        let ctx: Vec<(Name, Proposition)> =
            d.ctx.iter().filter(|(n, _)| n != fresh).cloned().collect();
        let process = rename_process(&d.process, orig, fresh);
        d = CPDerivation {
            rule: CPRule::ContractR(orig.clone(), fresh.clone()),
            ctx,
            process,
            children: vec![d],
        };
    }
    d
}

/// Take the entry for `x` out of a live context.
fn take(
    ctx: Vec<(Name, Proposition)>,
    x: &Name,
) -> Result<(Proposition, Vec<(Name, Proposition)>), CPError> {
    let mut rest = Vec::new();
    let mut found = None;
    for (n, a) in ctx {
        if &n == x {
            found = Some(a);
        } else {
            rest.push((n, a));
        }
    }
    found.map(|a| (a, rest)).ok_or_else(|| CPError::Unbound(x.base.clone()))
}

fn check_node(
    supply: &mut NameSupply,
    ctx: Vec<(Name, Proposition)>,
    p: &Process,
) -> Result<CPDerivation, CPError> {
    use Process::*;
    match p {
        LinkP(w, x) => {
            let (a, rest) = take(ctx.clone(), w)?;
            let (b, rest2) = take(rest, x)?;
            debug_assert!(rest2.is_empty());
            if !prop_eq(&a, &dual_prop(&b)) {
                return Err(CPError::NotDual { left: show(&a), right: show(&b) });
            }
            Ok(CPDerivation { rule: CPRule::Ax, ctx, process: p.clone(), children: vec![] })
        }
        Cut(x, annot, left, right) => {
            let a = match &annot.0 {
                Some(a) => a.clone(),
                None => infer_cut_type(&ctx, x, left, right)
                    .ok_or_else(|| CPError::AnnotationRequired(x.base.clone()))?,
            };
            let mut fv_l = free_names(left);
            fv_l.remove(x);
            let mut fv_r = free_names(right);
            fv_r.remove(x);
            let s = split(supply, &ctx, &fv_l, &fv_r)?;
            let right2 = s
                .contractions
                .iter()
                .fold((**right).clone(), |q, (o, f, _)| rename_process(&q, f, o));
            // Annotations record the type of x on one of the two sides;
            // reassociation during reduction may have flipped which, so
            // accept either orientation.
            let attempt = |supply: &mut NameSupply,
                           a: &Proposition|
             -> Result<(CPDerivation, CPDerivation), CPError> {
                let mut cl = s.ctx_l.clone();
                cl.push((x.clone(), a.clone()));
                let dl = check(supply, &cl, left)?;
                let mut cr = s.ctx_r.clone();
                cr.push((x.clone(), dual_prop(a)));
                let dr = check(supply, &cr, &right2)?;
                Ok((dl, dr))
            };
            let (dl, dr) = match attempt(supply, &a) {
                Ok(pair) => pair,
                Err(e) => attempt(supply, &dual_prop(&a)).map_err(|_: CPError| e)?,
            };
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            let node = CPDerivation {
                rule: CPRule::CutR,
                ctx: nctx,
                process: Process::Cut(
                    x.clone(),
                    annot.clone(),
                    left.clone(),
                    Box::new(right2),
                ),
                children: vec![dl, dr],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        Out(x, y, payload, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let (a, b) = match &xt {
                Proposition::Tensor(a, b) => ((**a).clone(), (**b).clone()),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "a tensor".into(),
                        found: show(other),
                    })
                }
            };
            let mut fv_l = free_names(payload);
            fv_l.remove(y);
            let mut fv_r = free_names(cont);
            fv_r.remove(x);
            let s = split(supply, &rest, &fv_l, &fv_r)?;
            let cont2 = s
                .contractions
                .iter()
                .fold((**cont).clone(), |q, (o, f, _)| rename_process(&q, f, o));
            let mut cl = s.ctx_l.clone();
            cl.push((y.clone(), a));
            let dl = check(supply, &cl, payload)?;
            let mut cr = s.ctx_r.clone();
            cr.push((x.clone(), b));
            let dr = check(supply, &cr, &cont2)?;
            let mut nctx = s.ctx_l.clone();
            nctx.extend(s.ctx_r.clone());
            nctx.push((x.clone(), xt));
            let node = CPDerivation {
                rule: CPRule::TensorR,
                ctx: nctx,
                process: Out(x.clone(), y.clone(), payload.clone(), Box::new(cont2)),
                children: vec![dl, dr],
            };
            Ok(contract_wrap(node, &s.contractions))
        }
        In(x, y, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let (a, b) = match &xt {
                Proposition::Par(a, b) => ((**a).clone(), (**b).clone()),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "a par".into(),
                        found: show(other),
                    })
                }
            };
            let mut inner = rest;
            inner.push((y.clone(), a));
            inner.push((x.clone(), b));
            let d = check(supply, &inner, cont)?;
            Ok(CPDerivation { rule: CPRule::ParR, ctx, process: p.clone(), children: vec![d] })
        }
        Inject(x, l, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let branches = match &xt {
                Proposition::Plus(bs) => bs.clone(),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "a sum".into(),
                        found: show(other),
                    })
                }
            };
            let al = branches
                .iter()
                .find(|(bl, _)| bl == l)
                .map(|(_, a)| a.clone())
                .ok_or_else(|| CPError::UnknownLabel(l.0.clone()))?;
            let mut inner = rest;
            inner.push((x.clone(), al));
            let d = check(supply, &inner, cont)?;
            Ok(CPDerivation {
                rule: CPRule::PlusR(l.clone()),
                ctx,
                process: p.clone(),
                children: vec![d],
            })
        }
        CaseP(x, branches) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let offered = match &xt {
                Proposition::With(bs) => bs.clone(),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "a choice".into(),
                        found: show(other),
                    })
                }
            };
            let want: BTreeSet<&Label> = offered.iter().map(|(l, _)| l).collect();
            let have: BTreeSet<&Label> = branches.iter().map(|(l, _)| l).collect();
            if want != have {
                return Err(CPError::BranchMismatch("labels differ from the subject".into()));
            }
            let mut children = Vec::new();
            for (l, q) in branches {
                let ai = offered.iter().find(|(bl, _)| bl == l).unwrap().1.clone();
                let mut inner = rest.clone();
                inner.push((x.clone(), ai));
                children.push(check(supply, &inner, q)?);
            }
            Ok(CPDerivation { rule: CPRule::WithR, ctx, process: p.clone(), children })
        }
        Bang(x, y, body) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let a = match &xt {
                Proposition::OfCourse(a) => (**a).clone(),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "an of-course".into(),
                        found: show(other),
                    })
                }
            };
            for (n, t) in &rest {
                if !is_whynot(t) {
                    return Err(CPError::ExponentialContext(n.base.clone()));
                }
            }
            let mut inner = rest;
            inner.push((y.clone(), a));
            let d = check(supply, &inner, body)?;
            Ok(CPDerivation { rule: CPRule::BangR, ctx, process: p.clone(), children: vec![d] })
        }
        Query(x, y, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let a = match &xt {
                Proposition::WhyNot(a) => (**a).clone(),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "a why-not".into(),
                        found: show(other),
                    })
                }
            };
            // Later uses of x in the continuation are a contraction; rename
            // them apart and record the Contract node.
            if free_names(cont).contains(x) && y != x {
                let fresh = supply.refresh(x);
                let cont2 = rename_process(cont, &fresh, x);
                let mut inner = rest.clone();
                inner.push((fresh.clone(), xt.clone()));
                let d = check_node(
                    supply,
                    {
                        let mut c = inner.clone();
                        c.push((x.clone(), xt.clone()));
                        c
                    },
                    &Query(x.clone(), y.clone(), Box::new(cont2)),
                )?;
                return Ok(contract_wrap(d, &[(x.clone(), fresh, xt)]));
            }
            let mut inner = rest;
            inner.push((y.clone(), a));
            let d = check(supply, &inner, cont)?;
            Ok(CPDerivation { rule: CPRule::QueryR, ctx, process: p.clone(), children: vec![d] })
        }
        OutType(x, arg, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let (v, body) = match &xt {
                Proposition::Exists(v, body) => (v.clone(), (**body).clone()),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "an existential".into(),
                        found: show(other),
                    })
                }
            };
            let mut inner = rest;
            inner.push((x.clone(), subst_prop(&body, &v.ident, arg)));
            let d = check(supply, &inner, cont)?;
            Ok(CPDerivation { rule: CPRule::ExistsR, ctx, process: p.clone(), children: vec![d] })
        }
        InType(x, v, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            let (w, body) = match &xt {
                Proposition::Forall(w, body) => (w.clone(), (**body).clone()),
                other => {
                    return Err(CPError::Mismatch {
                        name: x.base.clone(),
                        expected: "a universal".into(),
                        found: show(other),
                    })
                }
            };
            for (_, t) in &rest {
                if free_tyvars_prop(t).contains(&v.ident) {
                    return Err(CPError::TyVarEscapes(v.ident.clone()));
                }
            }
            let renamed =
                subst_prop(&body, &w.ident, &Proposition::Var(TypeVar::pos(&v.ident)));
            let mut inner = rest;
            inner.push((x.clone(), renamed));
            let d = check(supply, &inner, cont)?;
            Ok(CPDerivation { rule: CPRule::ForallR, ctx, process: p.clone(), children: vec![d] })
        }
        EmptyOut(x) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            if !rest.is_empty() {
                return Err(CPError::LinearUnused(rest[0].0.base.clone()));
            }
            if !prop_eq(&xt, &Proposition::One) {
                return Err(CPError::Mismatch {
                    name: x.base.clone(),
                    expected: "1".into(),
                    found: show(&xt),
                });
            }
            Ok(CPDerivation { rule: CPRule::OneR, ctx, process: p.clone(), children: vec![] })
        }
        EmptyIn(x, cont) => {
            let (xt, rest) = take(ctx.clone(), x)?;
            if !prop_eq(&xt, &Proposition::Bottom) {
                return Err(CPError::Mismatch {
                    name: x.base.clone(),
                    expected: "bot".into(),
                    found: show(&xt),
                });
            }
            let d = check(supply, &rest, cont)?;
            Ok(CPDerivation { rule: CPRule::BotR, ctx, process: p.clone(), children: vec![d] })
        }
    }
}

/// Best-effort synthesis of the type of `x` for an unannotated cut, from
/// either component. Returns None when neither side determines it.
fn infer_cut_type(
    ctx: &[(Name, Proposition)],
    x: &Name,
    left: &Process,
    right: &Process,
) -> Option<Proposition> {
    let env: HashMap<Name, Proposition> = ctx.iter().cloned().collect();
    syn(left, x, &env).or_else(|| syn(right, x, &env).map(|a| dual_prop(&a)))
}

fn syn(p: &Process, x: &Name, env: &HashMap<Name, Proposition>) -> Option<Proposition> {
    use Process::*;
    match p {
        LinkP(a, b) => {
            if a == x {
                env.get(b).map(dual_prop)
            } else if b == x {
                env.get(a).map(dual_prop)
            } else {
                None
            }
        }
        Cut(z, annot, l, r) => {
            if z == x {
                return None;
            }
            let mut env2 = env.clone();
            if let Some(a) = &annot.0 {
                env2.insert(z.clone(), a.clone());
                let mut env3 = env.clone();
                env3.insert(z.clone(), dual_prop(a));
                return syn(l, x, &env2).or_else(|| syn(r, x, &env3));
            }
            env2.remove(z);
            syn(l, x, &env2).or_else(|| syn(r, x, &env2))
        }
        Out(c, y, payload, cont) => {
            if c == x {
                let a = syn(payload, y, env)?;
                let b = syn(cont, x, env)?;
                return Some(Proposition::Tensor(Box::new(a), Box::new(b)));
            }
            let mut env_p = env.clone();
            let mut env_c = env.clone();
            if let Some(Proposition::Tensor(a, b)) = env.get(c) {
                env_p.insert(y.clone(), (**a).clone());
                env_c.insert(c.clone(), (**b).clone());
            } else {
                env_p.remove(y);
                env_c.remove(c);
            }
            if y == x {
                return syn(cont, x, &env_c);
            }
            syn(payload, x, &env_p).or_else(|| syn(cont, x, &env_c))
        }
        In(c, y, cont) => {
            if c == x {
                let mut env2 = env.clone();
                env2.remove(y);
                let a = syn(cont, y, &env2)?;
                let b = syn(cont, x, &env2)?;
                return Some(Proposition::Par(Box::new(a), Box::new(b)));
            }
            if y == x {
                return None;
            }
            let mut env2 = env.clone();
            if let Some(Proposition::Par(a, b)) = env.get(c) {
                env2.insert(y.clone(), (**a).clone());
                env2.insert(c.clone(), (**b).clone());
            } else {
                env2.remove(y);
                env2.remove(c);
            }
            syn(cont, x, &env2)
        }
        Inject(c, _, cont) => {
            if c == x {
                // The other labels of the sum are not recoverable here.
                return None;
            }
            let mut env2 = env.clone();
            env2.remove(c);
            syn(cont, x, &env2)
        }
        CaseP(c, branches) => {
            if c == x {
                let mut bs = Vec::new();
                for (l, q) in branches {
                    bs.push((l.clone(), syn(q, x, env)?));
                }
                return Some(Proposition::With(bs));
            }
            let env2 = {
                let mut e = env.clone();
                e.remove(c);
                e
            };
            branches.iter().find_map(|(_, q)| syn(q, x, &env2))
        }
        Bang(c, y, body) => {
            if c == x {
                let mut env2 = env.clone();
                env2.remove(y);
                return syn(body, y, &env2).map(|a| Proposition::OfCourse(Box::new(a)));
            }
            if y == x {
                return None;
            }
            let mut env2 = env.clone();
            env2.remove(y);
            syn(body, x, &env2)
        }
        Query(c, y, cont) => {
            if c == x {
                let mut env2 = env.clone();
                env2.remove(y);
                return syn(cont, y, &env2).map(|a| Proposition::WhyNot(Box::new(a)));
            }
            if y == x {
                return None;
            }
            let mut env2 = env.clone();
            if let Some(Proposition::WhyNot(a)) = env.get(c) {
                env2.insert(y.clone(), (**a).clone());
            } else {
                env2.remove(y);
            }
            syn(cont, x, &env2)
        }
        OutType(c, _, cont) => {
            if c == x {
                return None;
            }
            let mut env2 = env.clone();
            env2.remove(c);
            syn(cont, x, &env2)
        }
        InType(c, v, cont) => {
            if c == x {
                return syn(cont, x, env)
                    .map(|a| Proposition::Forall(v.clone(), Box::new(a)));
            }
            let mut env2 = env.clone();
            env2.remove(c);
            syn(cont, x, &env2)
        }
        EmptyOut(c) => {
            if c == x {
                Some(Proposition::One)
            } else {
                None
            }
        }
        EmptyIn(c, cont) => {
            if c == x {
                Some(Proposition::Bottom)
            } else {
                syn(cont, x, env)
            }
        }
    }
}

/// Recompute every node's conclusion from its children and rule; a
/// consistency check used by tests and the --audit path.
pub fn validate(d: &CPDerivation) -> bool {
    for c in &d.children {
        if !validate(c) {
            return false;
        }
    }
    let names: BTreeSet<&Name> = d.ctx.iter().map(|(n, _)| n).collect();
    if names.len() != d.ctx.len() {
        return false;
    }
    let fv = free_names(&d.process);
    fv.iter().all(|n| names.contains(n))
}
