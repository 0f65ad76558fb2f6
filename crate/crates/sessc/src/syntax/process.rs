//! CP process syntax, free names, renaming, alpha-canonical forms.

use std::collections::BTreeSet;

use crate::names::{Label, Name, NameSupply, TypeVar};
use crate::syntax::prop::Proposition;

/// An optional cut annotation, transparent to equality: two processes that
/// differ only in cut annotations are the same process.
#[derive(Clone, Debug, Default)]
pub struct CutAnnot(pub Option<Proposition>);

impl PartialEq for CutAnnot {
    fn eq(&self, _: &CutAnnot) -> bool {
        true
    }
}
impl Eq for CutAnnot {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Process {
    /// `x <-> y`
    LinkP(Name, Name),
    /// `new x (P | Q)`
    Cut(Name, CutAnnot, Box<Process>, Box<Process>),
    /// `x[y].(P | Q)` — `y` is bound in `P`; `x` continues in `Q`.
    Out(Name, Name, Box<Process>, Box<Process>),
    /// `x(y). P`
    In(Name, Name, Box<Process>),
    /// `x[l]. P`
    Inject(Name, Label, Box<Process>),
    /// `case x { l. P; ... }`
    CaseP(Name, Vec<(Label, Process)>),
    /// `!x(y). P`
    Bang(Name, Name, Box<Process>),
    /// `?x[y]. P`
    Query(Name, Name, Box<Process>),
    /// `x[A]. P`
    OutType(Name, Proposition, Box<Process>),
    /// `x(X). P`
    InType(Name, TypeVar, Box<Process>),
    /// `x[]`
    EmptyOut(Name),
    /// `x(). P`
    EmptyIn(Name, Box<Process>),
}

impl Process {
    pub fn cut(x: Name, left: Process, right: Process) -> Process {
        Process::Cut(x, CutAnnot(None), Box::new(left), Box::new(right))
    }

    pub fn cut_annot(x: Name, annot: Proposition, left: Process, right: Process) -> Process {
        Process::Cut(x, CutAnnot(Some(annot)), Box::new(left), Box::new(right))
    }

    /// The channel this process acts on first, if it is a prefix or link.
    pub fn head_subject(&self) -> Option<&Name> {
        use Process::*;
        match self {
            Cut(..) => None,
            LinkP(a, _) => Some(a),
            Out(x, ..) | In(x, ..) | Inject(x, ..) | CaseP(x, _) | Bang(x, ..) | Query(x, ..)
            | OutType(x, ..) | InType(x, ..) | EmptyOut(x) | EmptyIn(x, _) => Some(x),
        }
    }

    /// True if this process is a prefix (or link) acting on `x`.
    pub fn acts_on(&self, x: &Name) -> bool {
        match self {
            Process::LinkP(a, b) => a == x || b == x,
            Process::Cut(..) => false,
            _ => self.head_subject() == Some(x),
        }
    }
}

pub fn free_names(p: &Process) -> BTreeSet<Name> {
    use Process::*;
    let mut out = BTreeSet::new();
    match p {
        LinkP(a, b) => {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        Cut(x, _, l, r) => {
            let mut inner = free_names(l);
            inner.extend(free_names(r));
            inner.remove(x);
            out.extend(inner);
        }
        Out(x, y, payload, cont) => {
            out.insert(x.clone());
            let mut pf = free_names(payload);
            pf.remove(y);
            out.extend(pf);
            out.extend(free_names(cont));
        }
        In(x, y, cont) | Bang(x, y, cont) | Query(x, y, cont) => {
            out.insert(x.clone());
            let mut cf = free_names(cont);
            cf.remove(y);
            out.extend(cf);
        }
        Inject(x, _, cont) | OutType(x, _, cont) | InType(x, _, cont) | EmptyIn(x, cont) => {
            out.insert(x.clone());
            out.extend(free_names(cont));
        }
        CaseP(x, branches) => {
            out.insert(x.clone());
            for (_, q) in branches {
                out.extend(free_names(q));
            }
        }
        EmptyOut(x) => {
            out.insert(x.clone());
        }
    }
    out
}

/// Multiplicity of free uses of `x`, counting Case branches additively
/// (alternatives, so the maximum over branches). Used to detect the
/// contracted form that triggers server duplication.
pub fn count_uses(p: &Process, x: &Name) -> usize {
    use Process::*;
    match p {
        LinkP(a, b) => (a == x) as usize + (b == x) as usize,
        Cut(y, _, l, r) => {
            if y == x {
                0
            } else {
                count_uses(l, x) + count_uses(r, x)
            }
        }
        Out(c, y, payload, cont) => {
            let head = (c == x) as usize;
            let pay = if y == x { 0 } else { count_uses(payload, x) };
            head + pay + count_uses(cont, x)
        }
        In(c, y, cont) | Bang(c, y, cont) | Query(c, y, cont) => {
            let head = (c == x) as usize;
            head + if y == x { 0 } else { count_uses(cont, x) }
        }
        Inject(c, _, cont) | OutType(c, _, cont) | InType(c, _, cont) | EmptyIn(c, cont) => {
            (c == x) as usize + count_uses(cont, x)
        }
        CaseP(c, branches) => {
            (c == x) as usize
                + branches.iter().map(|(_, q)| count_uses(q, x)).max().unwrap_or(0)
        }
        EmptyOut(c) => (c == x) as usize,
    }
}

/// Rename every free occurrence of `from` to `to`.
pub fn rename_process(p: &Process, to: &Name, from: &Name) -> Process {
    use Process::*;
    let r = |q: &Process| rename_process(q, to, from);
    let rn = |n: &Name| if n == from { to.clone() } else { n.clone() };
    match p {
        LinkP(a, b) => LinkP(rn(a), rn(b)),
        Cut(x, ann, l, rgt) => {
            if x == from {
                p.clone()
            } else {
                Cut(x.clone(), ann.clone(), Box::new(r(l)), Box::new(r(rgt)))
            }
        }
        Out(c, y, payload, cont) => {
            let payload = if y == from { (**payload).clone() } else { r(payload) };
            Out(rn(c), y.clone(), Box::new(payload), Box::new(r(cont)))
        }
        In(c, y, cont) => {
            let cont = if y == from { (**cont).clone() } else { r(cont) };
            In(rn(c), y.clone(), Box::new(cont))
        }
        Bang(c, y, cont) => {
            let cont = if y == from { (**cont).clone() } else { r(cont) };
            Bang(rn(c), y.clone(), Box::new(cont))
        }
        Query(c, y, cont) => {
            let cont = if y == from { (**cont).clone() } else { r(cont) };
            Query(rn(c), y.clone(), Box::new(cont))
        }
        Inject(c, l, cont) => Inject(rn(c), l.clone(), Box::new(r(cont))),
        OutType(c, a, cont) => OutType(rn(c), a.clone(), Box::new(r(cont))),
        InType(c, x, cont) => InType(rn(c), x.clone(), Box::new(r(cont))),
        EmptyOut(c) => EmptyOut(rn(c)),
        EmptyIn(c, cont) => EmptyIn(rn(c), Box::new(r(cont))),
        CaseP(c, branches) => CaseP(
            rn(c),
            branches.iter().map(|(l, q)| (l.clone(), r(q))).collect(),
        ),
    }
}

/// Rename the first free occurrence of `from` (preorder) to `to`; returns
/// None if there is no free occurrence.
pub fn rename_first_use(p: &Process, to: &Name, from: &Name) -> Option<Process> {
    use Process::*;
    let rn = |_: &Name| to.clone();
    match p {
        LinkP(a, b) => {
            if a == from {
                Some(LinkP(rn(a), b.clone()))
            } else if b == from {
                Some(LinkP(a.clone(), rn(b)))
            } else {
                None
            }
        }
        Cut(x, ann, l, r) => {
            if x == from {
                return None;
            }
            if let Some(l2) = rename_first_use(l, to, from) {
                Some(Cut(x.clone(), ann.clone(), Box::new(l2), Box::new((**r).clone())))
            } else {
                rename_first_use(r, to, from)
                    .map(|r2| Cut(x.clone(), ann.clone(), Box::new((**l).clone()), Box::new(r2)))
            }
        }
        Query(c, y, cont) => {
            if c == from {
                Some(Query(rn(c), y.clone(), cont.clone()))
            } else if y == from {
                None
            } else {
                rename_first_use(cont, to, from).map(|c2| Query(c.clone(), y.clone(), Box::new(c2)))
            }
        }
        Out(c, y, payload, cont) => {
            if c == from {
                return Some(Out(rn(c), y.clone(), payload.clone(), cont.clone()));
            }
            if y != from {
                if let Some(p2) = rename_first_use(payload, to, from) {
                    return Some(Out(c.clone(), y.clone(), Box::new(p2), cont.clone()));
                }
            }
            rename_first_use(cont, to, from)
                .map(|c2| Out(c.clone(), y.clone(), payload.clone(), Box::new(c2)))
        }
        In(c, y, cont) | Bang(c, y, cont) => {
            let mk = |c2: Name, cont2: Process| match p {
                In(..) => In(c2, y.clone(), Box::new(cont2)),
                _ => Bang(c2, y.clone(), Box::new(cont2)),
            };
            if c == from {
                Some(mk(rn(c), (**cont).clone()))
            } else if y == from {
                None
            } else {
                rename_first_use(cont, to, from).map(|c2| mk(c.clone(), c2))
            }
        }
        Inject(c, l, cont) => {
            if c == from {
                Some(Inject(rn(c), l.clone(), cont.clone()))
            } else {
                rename_first_use(cont, to, from)
                    .map(|c2| Inject(c.clone(), l.clone(), Box::new(c2)))
            }
        }
        OutType(c, a, cont) => {
            if c == from {
                Some(OutType(rn(c), a.clone(), cont.clone()))
            } else {
                rename_first_use(cont, to, from)
                    .map(|c2| OutType(c.clone(), a.clone(), Box::new(c2)))
            }
        }
        InType(c, x, cont) => {
            if c == from {
                Some(InType(rn(c), x.clone(), cont.clone()))
            } else {
                rename_first_use(cont, to, from)
                    .map(|c2| InType(c.clone(), x.clone(), Box::new(c2)))
            }
        }
        EmptyOut(c) => {
            if c == from {
                Some(EmptyOut(rn(c)))
            } else {
                None
            }
        }
        EmptyIn(c, cont) => {
            if c == from {
                Some(EmptyIn(rn(c), cont.clone()))
            } else {
                rename_first_use(cont, to, from).map(|c2| EmptyIn(c.clone(), Box::new(c2)))
            }
        }
        CaseP(c, branches) => {
            if c == from {
                Some(CaseP(rn(c), branches.clone()))
            } else {
                // Alternatives: rename in every branch that uses the name.
                let mut any = false;
                let bs = branches
                    .iter()
                    .map(|(l, q)| match rename_first_use(q, to, from) {
                        Some(q2) => {
                            any = true;
                            (l.clone(), q2)
                        }
                        None => (l.clone(), q.clone()),
                    })
                    .collect();
                if any {
                    Some(CaseP(c.clone(), bs))
                } else {
                    None
                }
            }
        }
    }
}

/// Substitute a proposition for a type variable throughout the type
/// positions of `p` (cut annotations and output-type payloads).
pub fn subst_process_type(p: &Process, var: &str, repl: &Proposition) -> Process {
    use crate::syntax::prop::subst_prop;
    use Process::*;
    let r = |q: &Process| subst_process_type(q, var, repl);
    match p {
        LinkP(a, b) => LinkP(a.clone(), b.clone()),
        Cut(x, ann, l, rt) => {
            let ann2 = CutAnnot(ann.0.as_ref().map(|a| subst_prop(a, var, repl)));
            Cut(x.clone(), ann2, Box::new(r(l)), Box::new(r(rt)))
        }
        Out(x, y, pl, cont) => Out(x.clone(), y.clone(), Box::new(r(pl)), Box::new(r(cont))),
        In(x, y, cont) => In(x.clone(), y.clone(), Box::new(r(cont))),
        Inject(x, l, cont) => Inject(x.clone(), l.clone(), Box::new(r(cont))),
        CaseP(x, bs) => CaseP(x.clone(), bs.iter().map(|(l, q)| (l.clone(), r(q))).collect()),
        Bang(x, y, cont) => Bang(x.clone(), y.clone(), Box::new(r(cont))),
        Query(x, y, cont) => Query(x.clone(), y.clone(), Box::new(r(cont))),
        OutType(x, a, cont) => {
            OutType(x.clone(), subst_prop(a, var, repl), Box::new(r(cont)))
        }
        InType(x, v, cont) => {
            if v.ident == var {
                InType(x.clone(), v.clone(), Box::new((**cont).clone()))
            } else {
                InType(x.clone(), v.clone(), Box::new(r(cont)))
            }
        }
        EmptyOut(x) => EmptyOut(x.clone()),
        EmptyIn(x, cont) => EmptyIn(x.clone(), Box::new(r(cont))),
    }
}

/// Replace every bound name in `p` with a fresh one. Restores the
/// all-binders-distinct invariant after a server duplication.
pub fn refresh_binders(p: &Process, supply: &mut NameSupply) -> Process {
    fn go(p: &Process, supply: &mut NameSupply, env: &[(Name, Name)]) -> Process {
        use Process::*;
        let look = |n: &Name, env: &[(Name, Name)]| {
            env.iter()
                .rev()
                .find(|(old, _)| old == n)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| n.clone())
        };
        match p {
            LinkP(a, b) => LinkP(look(a, env), look(b, env)),
            Cut(x, ann, l, r) => {
                let x2 = supply.refresh(x);
                let mut env2 = env.to_vec();
                env2.push((x.clone(), x2.clone()));
                Cut(x2, ann.clone(), Box::new(go(l, supply, &env2)), Box::new(go(r, supply, &env2)))
            }
            Out(c, y, payload, cont) => {
                let y2 = supply.refresh(y);
                let mut envp = env.to_vec();
                envp.push((y.clone(), y2.clone()));
                Out(
                    look(c, env),
                    y2,
                    Box::new(go(payload, supply, &envp)),
                    Box::new(go(cont, supply, env)),
                )
            }
            In(c, y, cont) | Bang(c, y, cont) | Query(c, y, cont) => {
                let y2 = supply.refresh(y);
                let mut env2 = env.to_vec();
                env2.push((y.clone(), y2.clone()));
                let cont2 = Box::new(go(cont, supply, &env2));
                match p {
                    In(..) => In(look(c, env), y2, cont2),
                    Bang(..) => Bang(look(c, env), y2, cont2),
                    _ => Query(look(c, env), y2, cont2),
                }
            }
            Inject(c, l, cont) => Inject(look(c, env), l.clone(), Box::new(go(cont, supply, env))),
            OutType(c, a, cont) => OutType(look(c, env), a.clone(), Box::new(go(cont, supply, env))),
            InType(c, x, cont) => InType(look(c, env), x.clone(), Box::new(go(cont, supply, env))),
            EmptyOut(c) => EmptyOut(look(c, env)),
            EmptyIn(c, cont) => EmptyIn(look(c, env), Box::new(go(cont, supply, env))),
            CaseP(c, branches) => CaseP(
                look(c, env),
                branches.iter().map(|(l, q)| (l.clone(), go(q, supply, env))).collect(),
            ),
        }
    }
    go(p, supply, &[])
}

/// Plain alpha-canonical encoding (no structural-equivalence reasoning):
/// bound names become indices, free names stay rigid by base.
pub fn alpha_canonical_process(p: &Process) -> String {
    let mut out = String::new();
    enc(p, &mut Vec::new(), &mut out);
    out
}

fn enc_name(n: &Name, env: &[Name], out: &mut String) {
    match env.iter().rev().position(|b| b == n) {
        Some(ix) => out.push_str(&format!("b{}", ix)),
        None => out.push_str(&format!("f:{}", n.base)),
    }
}

fn enc(p: &Process, env: &mut Vec<Name>, out: &mut String) {
    use Process::*;
    match p {
        LinkP(a, b) => {
            out.push_str("(link ");
            enc_name(a, env, out);
            out.push(' ');
            enc_name(b, env, out);
            out.push(')');
        }
        Cut(x, _, l, r) => {
            out.push_str("(new.");
            env.push(x.clone());
            enc(l, env, out);
            out.push(' ');
            enc(r, env, out);
            env.pop();
            out.push(')');
        }
        Out(c, y, payload, cont) => {
            out.push_str("(out ");
            enc_name(c, env, out);
            out.push('.');
            env.push(y.clone());
            enc(payload, env, out);
            env.pop();
            out.push(' ');
            enc(cont, env, out);
            out.push(')');
        }
        In(c, y, cont) | Bang(c, y, cont) | Query(c, y, cont) => {
            out.push_str(match p {
                In(..) => "(in ",
                Bang(..) => "(bang ",
                _ => "(query ",
            });
            enc_name(c, env, out);
            out.push('.');
            env.push(y.clone());
            enc(cont, env, out);
            env.pop();
            out.push(')');
        }
        Inject(c, l, cont) => {
            out.push_str(&format!("(inj {} ", l));
            enc_name(c, env, out);
            out.push('.');
            enc(cont, env, out);
            out.push(')');
        }
        OutType(c, a, cont) => {
            out.push_str("(outty ");
            enc_name(c, env, out);
            out.push(' ');
            out.push_str(&crate::syntax::prop::canon_prop(a));
            out.push('.');
            enc(cont, env, out);
            out.push(')');
        }
        InType(c, _, cont) => {
            out.push_str("(inty ");
            enc_name(c, env, out);
            out.push('.');
            enc(cont, env, out);
            out.push(')');
        }
        EmptyOut(c) => {
            out.push_str("(eo ");
            enc_name(c, env, out);
            out.push(')');
        }
        EmptyIn(c, cont) => {
            out.push_str("(ei ");
            enc_name(c, env, out);
            out.push('.');
            enc(cont, env, out);
            out.push(')');
        }
        CaseP(c, branches) => {
            out.push_str("(case ");
            enc_name(c, env, out);
            let mut sorted: Vec<_> = branches.iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            for (l, q) in sorted {
                out.push_str(&format!(" {}:", l));
                enc(q, env, out);
            }
            out.push(')');
        }
    }
}
