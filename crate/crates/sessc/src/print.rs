//! Re-parseable pretty printers. Distinct names sharing a base string are
//! disambiguated with a uid suffix so printing never conflates them.

use std::collections::{HashMap, HashSet};

use crate::names::{Name, TypeVar};
use crate::syntax::process::Process;
use crate::syntax::prop::Proposition;
use crate::syntax::session::{SessionType, Type};
use crate::syntax::term::Term;

#[derive(Default)]
struct Names {
    map: HashMap<Name, String>,
    taken: HashSet<String>,
}

impl Names {
    fn str(&mut self, n: &Name) -> String {
        if let Some(s) = self.map.get(n) {
            return s.clone();
        }
        let mut cand = n.base.clone();
        if self.taken.contains(&cand) {
            cand = format!("{}_{}", n.base, n.uid);
            while self.taken.contains(&cand) {
                cand.push('x');
            }
        }
        self.taken.insert(cand.clone());
        self.map.insert(n.clone(), cand.clone());
        cand
    }
}

fn tv(x: &TypeVar) -> String {
    match x.polarity {
        crate::names::Polarity::Positive => x.ident.clone(),
        crate::names::Polarity::Dual => format!("~{}", x.ident),
    }
}

pub fn print_session(s: &SessionType) -> String {
    use SessionType::*;
    match s {
        Output(t, cont) => format!("!{}.{}", payload(t), print_session(cont)),
        Input(t, cont) => format!("?{}.{}", payload(t), print_session(cont)),
        Select(bs) => branches("(+)", bs),
        Choice(bs) => branches("(&)", bs),
        EndOut => "end!".into(),
        EndIn => "end?".into(),
        Var(x) => tv(x),
        OutputType(x, cont) => format!("!!{}.{}", x.ident, print_session(cont)),
        InputType(x, cont) => format!("??{}.{}", x.ident, print_session(cont)),
        Server(inner) => format!("#{}", print_session(inner)),
        Service(inner) => format!("@{}", print_session(inner)),
    }
}

fn branches(head: &str, bs: &[(crate::names::Label, SessionType)]) -> String {
    let body: Vec<String> =
        bs.iter().map(|(l, s)| format!("{}: {}", l, print_session(s))).collect();
    format!("{}{{{}}}", head, body.join(", "))
}

/// Message payloads must re-parse as a single unit; anything that is not a
/// session type gets parentheses.
fn payload(t: &Type) -> String {
    match t {
        Type::Session(s) => print_session(s),
        other => format!("({})", print_type(other)),
    }
}

pub fn print_type(t: &Type) -> String {
    arrow(t)
}

fn arrow(t: &Type) -> String {
    match t {
        Type::LinFun(a, b) => format!("{} -o {}", tensor(a), arrow(b)),
        Type::UnFun(a, b) => format!("{} -> {}", tensor(a), arrow(b)),
        other => tensor(other),
    }
}

fn tensor(t: &Type) -> String {
    match t {
        Type::Tensor(a, b) => format!("{} * {}", ty_atom(a), tensor(b)),
        other => ty_atom(other),
    }
}

fn ty_atom(t: &Type) -> String {
    match t {
        Type::Session(s) => print_session(s),
        other => format!("({})", arrow(other)),
    }
}

pub fn print_prop(p: &Proposition) -> String {
    quant(p)
}

fn quant(p: &Proposition) -> String {
    match p {
        Proposition::Exists(x, body) => format!("ex {}. {}", x.ident, quant(body)),
        Proposition::Forall(x, body) => format!("all {}. {}", x.ident, quant(body)),
        other => par(other),
    }
}

fn par(p: &Proposition) -> String {
    match p {
        Proposition::Par(a, b) => format!("{} || {}", ptensor(a), par(b)),
        other => ptensor(other),
    }
}

fn ptensor(p: &Proposition) -> String {
    match p {
        Proposition::Tensor(a, b) => format!("{} * {}", prop_atom(a), ptensor(b)),
        other => prop_atom(other),
    }
}

fn prop_atom(p: &Proposition) -> String {
    use Proposition::*;
    match p {
        One => "1".into(),
        Bottom => "bot".into(),
        Var(x) => tv(x),
        OfCourse(a) => format!("!{}", prop_atom(a)),
        WhyNot(a) => format!("?{}", prop_atom(a)),
        Plus(bs) => {
            let body: Vec<String> =
                bs.iter().map(|(l, a)| format!("{}: {}", l, quant(a))).collect();
            format!("(+){{{}}}", body.join(", "))
        }
        With(bs) => {
            let body: Vec<String> =
                bs.iter().map(|(l, a)| format!("{}: {}", l, quant(a))).collect();
            format!("(&){{{}}}", body.join(", "))
        }
        other => format!("({})", quant(other)),
    }
}

pub fn print_term(t: &Term) -> String {
    let mut ns = Names::default();
    term_low(t, &mut ns)
}

fn term_low(t: &Term, ns: &mut Names) -> String {
    use Term::*;
    match t {
        Lam(x, ty, body) => {
            let xs = ns.str(x);
            format!("fn {}:{}. {}", xs, print_type(ty), term_low(body, ns))
        }
        LetPair(x, y, m, body) => {
            let ms = term_low(m, ns);
            let xs = ns.str(x);
            let ys = ns.str(y);
            format!("let ({},{}) = {} in {}", xs, ys, ms, term_low(body, ns))
        }
        Fork(x, annot, body) => {
            let xs = ns.str(x);
            let a = annot.as_ref().map(|s| format!(":{}", print_session(s))).unwrap_or_default();
            format!("fork {}{}. {}", xs, a, term_low(body, ns))
        }
        Serve(x, annot, body) => {
            let xs = ns.str(x);
            let a = annot.as_ref().map(|s| format!(":{}", print_session(s))).unwrap_or_default();
            format!("serve {}{}. {}", xs, a, term_low(body, ns))
        }
        ReceiveType(x, m) => format!("recvty {}. {}", x.ident, term_low(m, ns)),
        _ => term_app(t, ns),
    }
}

fn term_app(t: &Term, ns: &mut Names) -> String {
    use Term::*;
    match t {
        App(f, a) => format!("{} {}", term_app(f, ns), term_atom(a, ns)),
        Send(m, n) => format!("send {} {}", term_atom(m, ns), term_atom(n, ns)),
        Link(m, n) => format!("link {} {}", term_atom(m, ns), term_atom(n, ns)),
        Receive(m) => format!("receive {}", term_atom(m, ns)),
        Request(m) => format!("request {}", term_atom(m, ns)),
        Select(l, m) => format!("select {} {}", l, term_atom(m, ns)),
        SendType(s, m) => format!("sendty {} {}", print_session(s), term_atom(m, ns)),
        _ => term_atom(t, ns),
    }
}

fn term_atom(t: &Term, ns: &mut Names) -> String {
    use Term::*;
    match t {
        Var(x) => ns.str(x),
        Pair(m, n) => format!("({}, {})", term_low(m, ns), term_low(n, ns)),
        CoerceUn(m, ty) | CoerceLin(m, ty) => {
            format!("({} : {})", term_low(m, ns), print_type(ty))
        }
        Case(m, bs) => {
            let ms = term_atom(m, ns);
            let body: Vec<String> = bs
                .iter()
                .map(|(l, x, n)| {
                    let xs = ns.str(x);
                    format!("{}({}). {}", l, xs, term_low(n, ns))
                })
                .collect();
            format!("case {} {{{}}}", ms, body.join("; "))
        }
        other => format!("({})", term_low(other, ns)),
    }
}

pub fn print_process(p: &Process) -> String {
    let mut ns = Names::default();
    proc(p, &mut ns)
}

fn proc(p: &Process, ns: &mut Names) -> String {
    use Process::*;
    match p {
        LinkP(a, b) => format!("{} <-> {}", ns.str(a), ns.str(b)),
        Cut(x, annot, l, r) => {
            let xs = ns.str(x);
            let a = annot.0.as_ref().map(|a| format!(":{}", print_prop(a))).unwrap_or_default();
            format!("new {}{} ({} | {})", xs, a, proc(l, ns), proc(r, ns))
        }
        Out(x, y, pl, cont) => {
            let xs = ns.str(x);
            let ys = ns.str(y);
            format!("{}[{}].({} | {})", xs, ys, proc(pl, ns), proc(cont, ns))
        }
        In(x, y, cont) => {
            let xs = ns.str(x);
            let ys = ns.str(y);
            format!("{}({}). {}", xs, ys, proc(cont, ns))
        }
        Inject(x, l, cont) => format!("{}[{}]. {}", ns.str(x), l, proc(cont, ns)),
        CaseP(x, bs) => {
            let xs = ns.str(x);
            let body: Vec<String> =
                bs.iter().map(|(l, q)| format!("{}. {}", l, proc(q, ns))).collect();
            format!("case {} {{{}}}", xs, body.join("; "))
        }
        Bang(x, y, cont) => {
            let xs = ns.str(x);
            let ys = ns.str(y);
            format!("!{}({}). {}", xs, ys, proc(cont, ns))
        }
        Query(x, y, cont) => {
            let xs = ns.str(x);
            let ys = ns.str(y);
            format!("?{}[{}]. {}", xs, ys, proc(cont, ns))
        }
        OutType(x, a, cont) => format!("{}[{}]. {}", ns.str(x), print_prop(a), proc(cont, ns)),
        InType(x, v, cont) => format!("{}({}). {}", ns.str(x), v.ident, proc(cont, ns)),
        EmptyOut(x) => format!("{}[]", ns.str(x)),
        EmptyIn(x, cont) => format!("{}(). {}", ns.str(x), proc(cont, ns)),
    }
}

pub fn print_hgv_file(ctx: &[(Name, Type)], term: &Term, expected: Option<&Type>) -> String {
    let mut ns = Names::default();
    let mut out = String::new();
    if !ctx.is_empty() {
        let entries: Vec<String> =
            ctx.iter().map(|(n, t)| format!("{}: {}", ns.str(n), print_type(t))).collect();
        out.push_str(&format!("ctx {}.\n", entries.join(", ")));
    }
    out.push_str(&term_low(term, &mut ns));
    out.push('\n');
    if let Some(t) = expected {
        out.push_str(&format!("-- type: {}\n", print_type(t)));
    }
    out
}

pub fn print_cp_file(ctx: &[(Name, Proposition)], p: &Process) -> String {
    let mut ns = Names::default();
    let mut out = String::new();
    if !ctx.is_empty() {
        let entries: Vec<String> =
            ctx.iter().map(|(n, a)| format!("{}: {}", ns.str(n), print_prop(a))).collect();
        out.push_str(&format!("ctx {}.\n", entries.join(", ")));
    }
    out.push_str(&proc(p, &mut ns));
    out.push('\n');
    out
}
