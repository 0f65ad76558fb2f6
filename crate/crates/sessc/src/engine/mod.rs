//! Cut elimination: equivalence modulo the structural rules, the principal
//! reductions, the commuting conversions, normalization under pluggable
//! strategies, and bounded reachability.
//!
//! Cuts are handled in flattened form. A maximal nest of cuts is a cluster:
//! a bag of cut names and a bag of non-cut components. For well-typed
//! processes each cut name connects exactly two components and the sharing
//! graph is a tree, so two nests are structurally equivalent exactly when
//! their clusters agree. Redexes are found between cluster components,
//! which makes reduction closed under the structural rules for free.

use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use crate::names::{Name, NameSupply};
use crate::syntax::process::{
    count_uses, free_names, refresh_binders, rename_first_use, rename_process,
    subst_process_type, CutAnnot, Process,
};
use crate::syntax::prop::{dual_prop, Proposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleTag {
    RedAx,
    RedTensorPar,
    RedPlusWith,
    RedBangQuery,
    RedWeaken,
    RedContract,
    RedExistsForall,
    RedOneBot,
    CcOutPayload,
    CcOutCont,
    CcIn,
    CcInject,
    CcCase,
    CcBang,
    CcQuery,
    CcOutType,
    CcInType,
    CcEmptyIn,
}

impl RuleTag {
    pub fn principal(&self) -> bool {
        use RuleTag::*;
        matches!(
            self,
            RedAx | RedTensorPar | RedPlusWith | RedBangQuery | RedWeaken | RedContract
                | RedExistsForall | RedOneBot
        )
    }
}

impl std::fmt::Display for RuleTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use RuleTag::*;
        let s = match self {
            RedAx => "red-link",
            RedTensorPar => "red-out-in",
            RedPlusWith => "red-select-case",
            RedBangQuery => "red-server-client",
            RedWeaken => "red-server-weaken",
            RedContract => "red-server-contract",
            RedExistsForall => "red-outty-inty",
            RedOneBot => "red-close-wait",
            CcOutPayload => "cc-out-payload",
            CcOutCont => "cc-out-cont",
            CcIn => "cc-in",
            CcInject => "cc-select",
            CcCase => "cc-case",
            CcBang => "cc-server",
            CcQuery => "cc-client",
            CcOutType => "cc-outty",
            CcInType => "cc-inty",
            CcEmptyIn => "cc-wait",
        };
        write!(f, "{}", s)
    }
}

// ---- clusters ----

#[derive(Clone, Debug)]
struct Cluster {
    cuts: Vec<(Name, Option<Proposition>)>,
    comps: Vec<Process>,
}

fn flatten(p: &Process) -> Cluster {
    fn go(p: &Process, cl: &mut Cluster) {
        match p {
            Process::Cut(x, CutAnnot(a), l, r) => {
                cl.cuts.push((x.clone(), a.clone()));
                go(l, cl);
                go(r, cl);
            }
            other => cl.comps.push(other.clone()),
        }
    }
    let mut cl = Cluster { cuts: Vec::new(), comps: Vec::new() };
    go(p, &mut cl);
    cl
}

/// Reassemble a cluster into a cut nest. Cuts whose name connects exactly
/// two components come out as ordinary binary cuts; degenerate cuts (no
/// user left after a reduction) are dropped.
fn rebuild(cl: Cluster) -> Process {
    let mut comps = cl.comps;
    let mut cuts = cl.cuts;
    while !cuts.is_empty() {
        let mut merged = false;
        let mut i = 0;
        while i < cuts.len() {
            let (x, _) = &cuts[i];
            let users: Vec<usize> = comps
                .iter()
                .enumerate()
                .filter(|(_, c)| free_names(c).contains(x))
                .map(|(k, _)| k)
                .collect();
            match users.len() {
                0 => {
                    cuts.remove(i);
                    merged = true;
                }
                2 => {
                    let (x, a) = cuts.remove(i);
                    let hi = users[1];
                    let lo = users[0];
                    let right = comps.remove(hi);
                    let left = comps.remove(lo);
                    comps.push(Process::Cut(
                        x,
                        CutAnnot(a),
                        Box::new(left),
                        Box::new(right),
                    ));
                    merged = true;
                }
                _ => {
                    i += 1;
                }
            }
        }
        if !merged {
            // Ill-typed sharing; nest what remains left to right.
            let (x, a) = cuts.remove(0);
            if comps.len() >= 2 {
                let right = comps.pop().expect("component");
                let left = comps.pop().expect("component");
                comps.push(Process::Cut(x, CutAnnot(a), Box::new(left), Box::new(right)));
            }
        }
    }
    let mut it = comps.into_iter();
    let first = it.next().expect("nonempty cluster");
    // Disconnected leftovers cannot arise from a well-typed process.
    it.fold(first, |acc, c| Process::cut(Name::new("junk", 0), acc, c))
}

// ---- canonical forms ----

fn stable_hash(s: &str) -> String {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    s.hash(&mut h);
    format!("{:016x}", h.finish())
}


fn canon_prop_env(a: &Proposition, tenv: &HashMap<String, String>, depth: usize) -> String {
    use Proposition::*;
    match a {
        Tensor(l, r) => format!(
            "(t {} {})",
            canon_prop_env(l, tenv, depth),
            canon_prop_env(r, tenv, depth)
        ),
        Par(l, r) => format!(
            "(p {} {})",
            canon_prop_env(l, tenv, depth),
            canon_prop_env(r, tenv, depth)
        ),
        Plus(bs) | With(bs) => {
            let tag = if matches!(a, Plus(_)) { "+" } else { "&" };
            let mut parts: Vec<String> = bs
                .iter()
                .map(|(l, b)| format!("{}:{}", l, canon_prop_env(b, tenv, depth)))
                .collect();
            parts.sort();
            format!("({} {})", tag, parts.join(" "))
        }
        One => "1".into(),
        Bottom => "bot".into(),
        OfCourse(b) => format!("(! {})", canon_prop_env(b, tenv, depth)),
        WhyNot(b) => format!("(? {})", canon_prop_env(b, tenv, depth)),
        Exists(v, b) | Forall(v, b) => {
            let tag = if matches!(a, Exists(..)) { "ex" } else { "all" };
            let mut t2 = tenv.clone();
            t2.insert(v.ident.clone(), format!("T{}", depth));
            format!("({} {})", tag, canon_prop_env(b, &t2, depth + 1))
        }
        Var(v) => {
            let base = tenv
                .get(&v.ident)
                .cloned()
                .unwrap_or_else(|| format!("F:{}", v.ident));
            match v.polarity {
                crate::names::Polarity::Positive => base,
                crate::names::Polarity::Dual => format!("~{}", base),
            }
        }
    }
}

/// A render with holes for names that are free at this level. Prefix-bound
/// names and already-numbered cut names are inlined as literals; a hole is
/// filled in only once the enclosing scope has fixed a label for the name.
#[derive(Clone, Debug)]
struct Tpl(Vec<Seg>);

#[derive(Clone, Debug)]
enum Seg {
    Lit(String),
    Hole(Name),
    /// A link; the endpoint order is settled at render time, once labels
    /// for the endpoints are known.
    Sym(Tpl, Tpl),
}

impl Tpl {
    fn new() -> Tpl {
        Tpl(Vec::new())
    }

    fn lit(&mut self, s: impl Into<String>) {
        if let Some(Seg::Lit(prev)) = self.0.last_mut() {
            prev.push_str(&s.into());
        } else {
            self.0.push(Seg::Lit(s.into()));
        }
    }

    fn name(&mut self, n: &Name, benv: &HashMap<Name, String>) {
        match benv.get(n) {
            Some(l) => self.lit(l.clone()),
            None => self.0.push(Seg::Hole(n.clone())),
        }
    }

    fn append(&mut self, other: Tpl) {
        for seg in other.0 {
            match seg {
                Seg::Lit(s) => self.lit(s),
                hole => self.0.push(hole),
            }
        }
    }

    fn holes(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for seg in &self.0 {
            match seg {
                Seg::Hole(n) => {
                    out.insert(n.clone());
                }
                Seg::Sym(a, b) => {
                    out.extend(a.holes());
                    out.extend(b.holes());
                }
                Seg::Lit(_) => {}
            }
        }
        out
    }

    fn render(
        &self,
        env: &HashMap<Name, String>,
        index_free: bool,
        seen: &mut HashMap<Name, usize>,
        out: &mut String,
    ) {
        for seg in &self.0 {
            match seg {
                Seg::Lit(s) => out.push_str(s),
                Seg::Hole(n) => match env.get(n) {
                    Some(l) => out.push_str(l),
                    None if index_free => {
                        let next = seen.len();
                        let i = *seen.entry(n.clone()).or_insert(next);
                        out.push_str(&format!("o{}", i));
                    }
                    None => out.push_str(&format!("f:{}", n.base)),
                },
                Seg::Sym(a, b) => {
                    // Orient by locally numbered renders; a tie means the
                    // endpoints are indistinguishable here.
                    let mut ka = String::new();
                    a.render(env, index_free, &mut HashMap::new(), &mut ka);
                    let mut kb = String::new();
                    b.render(env, index_free, &mut HashMap::new(), &mut kb);
                    let (first, second) = if ka <= kb { (a, b) } else { (b, a) };
                    out.push_str("(l ");
                    first.render(env, index_free, seen, out);
                    out.push(' ');
                    second.render(env, index_free, seen, out);
                    out.push(')');
                }
            }
        }
    }

    /// Render with the given labels for holes; unresolved holes show their
    /// surface spelling, which is how top-level free names are compared.
    fn instantiate(&self, env: &HashMap<Name, String>) -> String {
        let mut out = String::new();
        self.render(env, false, &mut HashMap::new(), &mut out);
        out
    }

    /// Render with unresolved holes numbered by first occurrence. Gives a
    /// deterministic key that does not depend on outer binder spellings.
    fn indexed(&self, env: &HashMap<Name, String>) -> String {
        let mut out = String::new();
        self.render(env, true, &mut HashMap::new(), &mut out);
        out
    }

    /// Replace the holes that `env` covers with literals; keep the rest.
    fn resolve(&self, env: &HashMap<Name, String>) -> Tpl {
        let mut out = Tpl::new();
        for seg in &self.0 {
            match seg {
                Seg::Lit(s) => out.lit(s.clone()),
                Seg::Hole(n) => match env.get(n) {
                    Some(l) => out.lit(l.clone()),
                    None => out.0.push(Seg::Hole(n.clone())),
                },
                Seg::Sym(a, b) => {
                    out.0.push(Seg::Sym(a.resolve(env), b.resolve(env)));
                }
            }
        }
        out
    }
}

fn canon_t(
    p: &Process,
    benv: &HashMap<Name, String>,
    tenv: &HashMap<String, String>,
    depth: usize,
) -> Tpl {
    use Process::*;
    let mut t = Tpl::new();
    match p {
        Cut(..) => {
            let cl = flatten(p);
            // Each component is rendered once as a template; the refinement
            // below only re-instantiates those templates, so nested clusters
            // are not re-canonicalized per round.
            let tpls: Vec<Tpl> = cl.comps.iter().map(|c| canon_t(c, benv, tenv, depth)).collect();
            let cut_names: BTreeSet<Name> = cl.cuts.iter().map(|(x, _)| x.clone()).collect();
            let fvs: Vec<BTreeSet<Name>> = tpls.iter().map(|t| t.holes()).collect();
            let mut labels: HashMap<Name, String> =
                cut_names.iter().map(|x| (x.clone(), "c".to_string())).collect();
            let rounds = cl.cuts.len() + 2;
            let mut partition: Vec<Vec<Name>> = Vec::new();
            for _ in 0..rounds {
                let env: HashMap<Name, String> = labels
                    .iter()
                    .map(|(x, l)| (x.clone(), format!("<{}>", l)))
                    .collect();
                let renders: Vec<String> = tpls.iter().map(|t| t.indexed(&env)).collect();
                let mut next = HashMap::new();
                for x in &cut_names {
                    let mut mine: Vec<&String> = fvs
                        .iter()
                        .zip(&renders)
                        .filter(|(fv, _)| fv.contains(x))
                        .map(|(_, r)| r)
                        .collect();
                    mine.sort();
                    let joined: String =
                        mine.into_iter().map(|s| s.as_str()).collect::<Vec<_>>().join("#");
                    next.insert(x.clone(), stable_hash(&joined));
                }
                // Stop once the partition induced by the labels is stable.
                let mut groups: HashMap<String, Vec<Name>> = HashMap::new();
                for (x, l) in &next {
                    groups.entry(l.clone()).or_default().push(x.clone());
                }
                let mut part: Vec<Vec<Name>> = groups.into_values().collect();
                for g in &mut part {
                    g.sort();
                }
                part.sort();
                labels = next.clone();
                if part == partition {
                    break;
                }
                partition = part;
            }
            // Number the cuts. Channels the refinement could not separate
            // are disambiguated by trial assignment: the candidate whose
            // numbering renders the smallest cluster string takes the next
            // index. The numbering never depends on bound-name spelling.
            let mut tied: HashMap<String, Vec<Name>> = HashMap::new();
            for (x, l) in &labels {
                tied.entry(l.clone()).or_default().push(x.clone());
            }
            let mut glist: Vec<(String, Vec<Name>)> = tied.into_iter().collect();
            for (_, g) in &mut glist {
                g.sort();
            }
            glist.sort();
            let render_with = |env0: &HashMap<Name, String>| -> String {
                let mut env = env0.clone();
                for x in &cut_names {
                    if !env.contains_key(x) {
                        env.insert(x.clone(), format!("<{}>", labels[x]));
                    }
                }
                let mut rs: Vec<String> = tpls.iter().map(|t| t.indexed(&env)).collect();
                rs.sort();
                rs.join("#")
            };
            let mut final_env: HashMap<Name, String> = HashMap::new();
            let mut idx = 0usize;
            for (_, group) in glist {
                let mut remaining = group;
                while !remaining.is_empty() {
                    let pick = if remaining.len() == 1 {
                        0
                    } else {
                        let mut best = 0;
                        let mut best_render: Option<String> = None;
                        for (i, cand) in remaining.iter().enumerate() {
                            let mut env = final_env.clone();
                            env.insert(cand.clone(), format!("c{}", idx));
                            let r = render_with(&env);
                            if best_render.as_ref().is_none_or(|b| r < *b) {
                                best = i;
                                best_render = Some(r);
                            }
                        }
                        best
                    };
                    let x = remaining.remove(pick);
                    final_env.insert(x, format!("c{}", idx));
                    idx += 1;
                }
            }
            let mut finals: Vec<(String, Tpl)> = tpls
                .iter()
                .map(|t| {
                    let r = t.resolve(&final_env);
                    (r.indexed(&HashMap::new()), r)
                })
                .collect();
            finals.sort_by(|a, b| a.0.cmp(&b.0));
            t.lit("(nu");
            for (_, tpl) in finals {
                t.lit(" ");
                t.append(tpl);
            }
            t.lit(")");
        }
        LinkP(a, b) => {
            // Links are symmetric; the render orders the endpoints.
            let mut t1 = Tpl::new();
            t1.name(a, benv);
            let mut t2 = Tpl::new();
            t2.name(b, benv);
            t.0.push(Seg::Sym(t1, t2));
        }
        Out(x, y, pl, cont) => {
            let mut b2 = benv.clone();
            b2.insert(y.clone(), format!("b{}", depth));
            t.lit("(out ");
            t.name(x, benv);
            t.lit(format!(" b{} ", depth));
            t.append(canon_t(pl, &b2, tenv, depth + 1));
            t.lit(" ");
            t.append(canon_t(cont, benv, tenv, depth + 1));
            t.lit(")");
        }
        In(x, y, cont) | Bang(x, y, cont) | Query(x, y, cont) => {
            let tag = match p {
                In(..) => "in",
                Bang(..) => "bang",
                _ => "query",
            };
            let mut b2 = benv.clone();
            b2.insert(y.clone(), format!("b{}", depth));
            t.lit(format!("({} ", tag));
            t.name(x, benv);
            t.lit(format!(" b{} ", depth));
            t.append(canon_t(cont, &b2, tenv, depth + 1));
            t.lit(")");
        }
        Inject(x, l, cont) => {
            t.lit("(inj ");
            t.name(x, benv);
            t.lit(format!(" {} ", l));
            t.append(canon_t(cont, benv, tenv, depth));
            t.lit(")");
        }
        CaseP(x, bs) => {
            let mut parts: Vec<(String, Tpl)> = bs
                .iter()
                .map(|(l, q)| (format!("{}", l), canon_t(q, benv, tenv, depth)))
                .collect();
            parts.sort_by(|a, b| a.0.cmp(&b.0));
            t.lit("(case ");
            t.name(x, benv);
            for (ls, tpl) in parts {
                t.lit(format!(" {}:", ls));
                t.append(tpl);
            }
            t.lit(")");
        }
        OutType(x, a, cont) => {
            t.lit("(outty ");
            t.name(x, benv);
            t.lit(format!(" {} ", canon_prop_env(a, tenv, depth)));
            t.append(canon_t(cont, benv, tenv, depth));
            t.lit(")");
        }
        InType(x, v, cont) => {
            let mut t2 = tenv.clone();
            t2.insert(v.ident.clone(), format!("T{}", depth));
            t.lit("(inty ");
            t.name(x, benv);
            t.lit(format!(" T{} ", depth));
            t.append(canon_t(cont, benv, &t2, depth + 1));
            t.lit(")");
        }
        EmptyOut(x) => {
            t.lit("(eo ");
            t.name(x, benv);
            t.lit(")");
        }
        EmptyIn(x, cont) => {
            t.lit("(ei ");
            t.name(x, benv);
            t.lit(" ");
            t.append(canon_t(cont, benv, tenv, depth));
            t.lit(")");
        }
    }
    t
}

/// A canonical string for `p` up to structural equivalence and alpha
/// renaming; free names are compared by their surface spelling.
pub fn canonicalize(p: &Process) -> String {
    canon_t(p, &HashMap::new(), &HashMap::new(), 0).instantiate(&HashMap::new())
}

/// Structural equivalence.
pub fn equiv(p: &Process, q: &Process) -> bool {
    canonicalize(p) == canonicalize(q)
}

// ---- reduction ----

/// Orient a cut annotation so that it matches the side recognised by
/// `want`; the stored annotation may describe either endpoint.
fn orient(a: &Option<Proposition>, want: impl Fn(&Proposition) -> bool) -> Option<Proposition> {
    match a {
        Some(t) if want(t) => Some(t.clone()),
        Some(t) if want(&dual_prop(t)) => Some(dual_prop(t)),
        _ => None,
    }
}

fn cluster_redexes(cl: &Cluster, supply: &mut NameSupply, out: &mut Vec<(RuleTag, Process)>) {
    let fvs: Vec<BTreeSet<Name>> = cl.comps.iter().map(free_names).collect();
    for (k, (x, annot)) in cl.cuts.iter().enumerate() {
        let users: Vec<usize> =
            (0..cl.comps.len()).filter(|i| fvs[*i].contains(x)).collect();

        // Server weakening: a replicated input whose channel nobody uses.
        if users.len() == 1 {
            if let Process::Bang(s, _, _) = &cl.comps[users[0]] {
                if s == x {
                    let mut cl2 = cl.clone();
                    cl2.cuts.remove(k);
                    cl2.comps.remove(users[0]);
                    out.push((RuleTag::RedWeaken, rebuild(cl2)));
                }
            }
            continue;
        }
        if users.len() != 2 {
            continue;
        }
        let (i, j) = (users[0], users[1]);

        for (me, other) in [(i, j), (j, i)] {
            let ci = &cl.comps[me];
            let cj = &cl.comps[other];
            match ci {
                Process::LinkP(a, b) if a == x || b == x => {
                    let w = if a == x { b } else { a };
                    // A self-link never arises from a typed process.
                    if w != x {
                        let mut cl2 = cl.clone();
                        cl2.cuts.remove(k);
                        cl2.comps[other] = rename_process(cj, w, x);
                        cl2.comps.remove(me);
                        out.push((RuleTag::RedAx, rebuild(cl2)));
                    }
                }
                Process::Out(s, y, pl, cont) if s == x => {
                    if let Process::In(s2, y2, body) = cj {
                        if s2 == x {
                            let t = orient(annot, |a| matches!(a, Proposition::Tensor(..)));
                            let (ay, ax) = match &t {
                                Some(Proposition::Tensor(a, b)) => {
                                    (Some((**a).clone()), Some((**b).clone()))
                                }
                                _ => (None, None),
                            };
                            let mut cl2 = cl.clone();
                            cl2.cuts[k].1 = ax;
                            cl2.cuts.push((y.clone(), ay));
                            let body2 = rename_process(body, y, y2);
                            let mut comps = Vec::new();
                            for (idx, c) in cl.comps.iter().enumerate() {
                                if idx == me {
                                    comps.push((**pl).clone());
                                    comps.push((**cont).clone());
                                } else if idx == other {
                                    comps.push(body2.clone());
                                } else {
                                    comps.push(c.clone());
                                }
                            }
                            cl2.comps = comps;
                            out.push((RuleTag::RedTensorPar, rebuild(cl2)));
                        }
                    }
                }
                Process::Inject(s, l, cont) if s == x => {
                    if let Process::CaseP(s2, bs) = cj {
                        if s2 == x {
                            if let Some((_, body)) = bs.iter().find(|(l2, _)| l2 == l) {
                                let t = orient(annot, |a| matches!(a, Proposition::Plus(_)));
                                let al = match &t {
                                    Some(Proposition::Plus(abs)) => abs
                                        .iter()
                                        .find(|(l2, _)| l2 == l)
                                        .map(|(_, a)| a.clone()),
                                    _ => None,
                                };
                                let mut cl2 = cl.clone();
                                cl2.cuts[k].1 = al;
                                cl2.comps[me] = (**cont).clone();
                                cl2.comps[other] = body.clone();
                                out.push((RuleTag::RedPlusWith, rebuild(cl2)));
                            }
                        }
                    }
                }
                Process::Bang(s, y, body) if s == x => {
                    // Principal cut against a single client.
                    if let Process::Query(s2, y2, qbody) = cj {
                        if s2 == x && count_uses(cj, x) == 1 {
                            let t = orient(annot, |a| matches!(a, Proposition::OfCourse(_)));
                            let ay = match &t {
                                Some(Proposition::OfCourse(a)) => Some((**a).clone()),
                                _ => None,
                            };
                            let mut cl2 = cl.clone();
                            cl2.cuts.remove(k);
                            cl2.cuts.push((y2.clone(), ay));
                            cl2.comps[me] = rename_process(body, y2, y);
                            cl2.comps[other] = (**qbody).clone();
                            out.push((RuleTag::RedBangQuery, rebuild(cl2)));
                            continue;
                        }
                    }
                    // Contraction: the client side uses the channel twice.
                    if count_uses(cj, x) >= 2 {
                        let x2 = supply.refresh(x);
                        let cj2 = rename_first_use(cj, &x2, x).expect("use exists");
                        let copy = refresh_binders(&rename_process(ci, &x2, x), supply);
                        let mut cl2 = cl.clone();
                        cl2.cuts.push((x2, annot.clone()));
                        cl2.comps[other] = cj2;
                        cl2.comps.push(copy);
                        out.push((RuleTag::RedContract, rebuild(cl2)));
                    }
                }
                Process::OutType(s, a, cont) if s == x => {
                    if let Process::InType(s2, v, body) = cj {
                        if s2 == x {
                            let t = orient(annot, |t| matches!(t, Proposition::Exists(..)));
                            let ak = match &t {
                                Some(Proposition::Exists(w, b)) => {
                                    Some(crate::syntax::prop::subst_prop(b, &w.ident, a))
                                }
                                _ => None,
                            };
                            let mut cl2 = cl.clone();
                            cl2.cuts[k].1 = ak;
                            cl2.comps[me] = (**cont).clone();
                            cl2.comps[other] = subst_process_type(body, &v.ident, a);
                            out.push((RuleTag::RedExistsForall, rebuild(cl2)));
                        }
                    }
                }
                Process::EmptyOut(s) if s == x => {
                    if let Process::EmptyIn(s2, body) = cj {
                        if s2 == x {
                            let mut cl2 = cl.clone();
                            cl2.cuts.remove(k);
                            cl2.comps[other] = (**body).clone();
                            cl2.comps.remove(me);
                            out.push((RuleTag::RedOneBot, rebuild(cl2)));
                        }
                    }
                }
                _ => {}
            }
        }

        // Commuting conversions: push the cut under a blocked prefix.
        for (me, other) in [(i, j), (j, i)] {
            let ci = &cl.comps[me];
            if ci.acts_on(x) {
                continue;
            }
            let r = cl.comps[other].clone();
            let pushed = push_cut(ci, x, annot, r, supply);
            for (tag, c2) in pushed {
                let mut cl2 = cl.clone();
                cl2.cuts.remove(k);
                cl2.comps[me] = c2;
                cl2.comps.remove(other);
                out.push((tag, rebuild(cl2)));
            }
        }
    }
}

/// `new z (C | R)` with C blocked on another channel: move the cut inside
/// C past its head prefix. Returns at most one converted form.
fn push_cut(
    c: &Process,
    z: &Name,
    annot: &Option<Proposition>,
    r: Process,
    supply: &mut NameSupply,
) -> Vec<(RuleTag, Process)> {
    use Process::*;
    let cut = |p: Process, r: Process| {
        Cut(z.clone(), CutAnnot(annot.clone()), Box::new(p), Box::new(r))
    };
    match c {
        Out(x, y, pl, cont) => {
            if free_names(pl).contains(z) {
                vec![(
                    RuleTag::CcOutPayload,
                    Out(
                        x.clone(),
                        y.clone(),
                        Box::new(cut((**pl).clone(), r)),
                        cont.clone(),
                    ),
                )]
            } else if free_names(cont).contains(z) {
                vec![(
                    RuleTag::CcOutCont,
                    Out(
                        x.clone(),
                        y.clone(),
                        pl.clone(),
                        Box::new(cut((**cont).clone(), r)),
                    ),
                )]
            } else {
                vec![]
            }
        }
        In(x, y, cont) => vec![(
            RuleTag::CcIn,
            In(x.clone(), y.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        Inject(x, l, cont) => vec![(
            RuleTag::CcInject,
            Inject(x.clone(), l.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        CaseP(x, bs) => {
            let mut bs2 = Vec::new();
            for (n, (l, q)) in bs.iter().enumerate() {
                let copy = if n == 0 { r.clone() } else { refresh_binders(&r, supply) };
                bs2.push((l.clone(), cut(q.clone(), copy)));
            }
            vec![(RuleTag::CcCase, CaseP(x.clone(), bs2))]
        }
        Bang(x, y, cont) => vec![(
            RuleTag::CcBang,
            Bang(x.clone(), y.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        Query(x, y, cont) => vec![(
            RuleTag::CcQuery,
            Query(x.clone(), y.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        OutType(x, a, cont) => vec![(
            RuleTag::CcOutType,
            OutType(x.clone(), a.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        InType(x, v, cont) => vec![(
            RuleTag::CcInType,
            InType(x.clone(), v.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        EmptyIn(x, cont) => vec![(
            RuleTag::CcEmptyIn,
            EmptyIn(x.clone(), Box::new(cut((**cont).clone(), r))),
        )],
        // Links are handled by the link reduction; x[] has no conversion.
        LinkP(..) | EmptyOut(_) | Cut(..) => vec![],
    }
}

/// Every single-step reduct of `p`, closed under structural equivalence
/// and under arbitrary process contexts.
pub fn successors(p: &Process, supply: &mut NameSupply) -> Vec<(RuleTag, Process)> {
    use Process::*;
    let mut out = Vec::new();
    match p {
        Cut(..) => {
            let cl = flatten(p);
            cluster_redexes(&cl, supply, &mut out);
            for i in 0..cl.comps.len() {
                for (tag, q) in successors(&cl.comps[i], supply) {
                    let mut cl2 = cl.clone();
                    cl2.comps[i] = q;
                    out.push((tag, rebuild(cl2)));
                }
            }
        }
        Out(x, y, pl, cont) => {
            for (tag, q) in successors(pl, supply) {
                out.push((tag, Out(x.clone(), y.clone(), Box::new(q), cont.clone())));
            }
            for (tag, q) in successors(cont, supply) {
                out.push((tag, Out(x.clone(), y.clone(), pl.clone(), Box::new(q))));
            }
        }
        In(x, y, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, In(x.clone(), y.clone(), Box::new(q))));
            }
        }
        Bang(x, y, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, Bang(x.clone(), y.clone(), Box::new(q))));
            }
        }
        Query(x, y, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, Query(x.clone(), y.clone(), Box::new(q))));
            }
        }
        Inject(x, l, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, Inject(x.clone(), l.clone(), Box::new(q))));
            }
        }
        CaseP(x, bs) => {
            for (n, (_, b)) in bs.iter().enumerate() {
                for (tag, q) in successors(b, supply) {
                    let mut bs2 = bs.clone();
                    bs2[n].1 = q;
                    out.push((tag, CaseP(x.clone(), bs2)));
                }
            }
        }
        OutType(x, a, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, OutType(x.clone(), a.clone(), Box::new(q))));
            }
        }
        InType(x, v, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, InType(x.clone(), v.clone(), Box::new(q))));
            }
        }
        EmptyIn(x, cont) => {
            for (tag, q) in successors(cont, supply) {
                out.push((tag, EmptyIn(x.clone(), Box::new(q))));
            }
        }
        LinkP(..) | EmptyOut(_) => {}
    }
    out
}

// ---- strategies ----

pub trait NormalizeStrategy {
    fn name(&self) -> &'static str;
    /// Choose one of `n` candidate redexes (enumerated outermost first,
    /// left to right).
    fn pick(&self, n: usize) -> usize;
}

pub struct LeftmostOutermost;
impl NormalizeStrategy for LeftmostOutermost {
    fn name(&self) -> &'static str {
        "leftmost-outermost"
    }
    fn pick(&self, _n: usize) -> usize {
        0
    }
}

pub struct RightmostInnermost;
impl NormalizeStrategy for RightmostInnermost {
    fn name(&self) -> &'static str {
        "rightmost-innermost"
    }
    fn pick(&self, n: usize) -> usize {
        n - 1
    }
}

pub fn strategy_registry() -> Vec<Box<dyn NormalizeStrategy>> {
    vec![Box::new(LeftmostOutermost), Box::new(RightmostInnermost)]
}

pub fn lookup_strategy(name: &str) -> Option<Box<dyn NormalizeStrategy>> {
    strategy_registry().into_iter().find(|s| s.name() == name)
}

// ---- normalization ----

pub struct NormalizeOutcome {
    pub result: Process,
    pub steps: usize,
    pub trace: Vec<(RuleTag, Process)>,
    pub exhausted: bool,
}

/// Run cut elimination to a normal form, principal reductions before
/// commuting conversions, ties broken by the strategy.
pub fn normalize(
    p: &Process,
    max_steps: usize,
    strategy: &dyn NormalizeStrategy,
    supply: &mut NameSupply,
) -> NormalizeOutcome {
    let mut cur = p.clone();
    let mut trace = Vec::new();
    let mut steps = 0;
    while steps < max_steps {
        let opts = successors(&cur, supply);
        if opts.is_empty() {
            return NormalizeOutcome { result: cur, steps, trace, exhausted: false };
        }
        let principal: Vec<&(RuleTag, Process)> =
            opts.iter().filter(|(t, _)| t.principal()).collect();
        let (tag, next) = if principal.is_empty() {
            let k = strategy.pick(opts.len());
            opts[k].clone()
        } else {
            let k = strategy.pick(principal.len());
            principal[k].clone()
        };
        trace.push((tag, next.clone()));
        cur = next;
        steps += 1;
    }
    let exhausted = !successors(&cur, supply).is_empty();
    NormalizeOutcome { result: cur, steps, trace, exhausted }
}

// ---- bounded reachability ----

/// Breadth-first search for `to` in the reduction graph of `from`, both
/// taken up to structural equivalence. `bound` caps explored states.
/// Returns the number of reduction steps, if found.
pub fn reaches(
    from: &Process,
    to: &Process,
    bound: usize,
    supply: &mut NameSupply,
) -> Option<usize> {
    let target = canonicalize(to);
    let start = canonicalize(from);
    if start == target {
        return Some(0);
    }
    // Best-first: states whose canonical form shares a longer prefix with
    // the target's are expanded first. Reduction order mostly differs in
    // which independent prefix is hoisted out of a cut next, and prefix
    // similarity steers the search toward the target's hoisting order.
    // Ties prefer deeper states, which drills along one reduction path and
    // backtracks through the seen set only when it goes stale. The bound
    // still caps the total number of distinct states explored.
    let score = |key: &str| -> usize {
        key.bytes().zip(target.bytes()).take_while(|(a, b)| a == b).count()
    };
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::BinaryHeap::new();
    let s0 = score(&start);
    seen.insert(start);
    queue.push((s0, 0usize, PqItem(from.clone())));
    let mut explored = 1usize;
    while let Some((_, d, PqItem(cur))) = queue.pop() {
        for (_, next) in successors(&cur, supply) {
            let key = canonicalize(&next);
            if key == target {
                return Some(d + 1);
            }
            let sc = score(&key);
            if seen.insert(key) {
                explored += 1;
                if explored > bound {
                    return None;
                }
                queue.push((sc, d + 1, PqItem(next)));
            }
        }
    }
    None
}

/// Heap payload whose ordering is decided entirely by the score fields
/// that precede it in the tuple.
struct PqItem(Process);

impl PartialEq for PqItem {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for PqItem {}
impl PartialOrd for PqItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PqItem {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}
