//! Seeded random generation of well-typed processes and terms.
//!
//! Processes are grown forward: a pool of sequents is seeded with axiom
//! leaves and repeatedly extended by applying a rule to pool entries. Every
//! step is total, so generation never fails or backtracks. Terms are grown
//! the same way, with lifted processes as one source of leaves.

use rand_chacha::ChaCha8Rng;
use rand::{Rng, SeedableRng};

use crate::cp::cp_typecheck;
use crate::names::{Label, Name, NameSupply, TypeVar};
use crate::syntax::process::{rename_process, Process};
use crate::syntax::prop::{dual_prop, prop_eq, Proposition};
use crate::syntax::session::{dual_session, SessionType, Type};
use crate::syntax::term::Term;
use crate::translate::{tr_cp_gv, tr_ctx_gv};

pub struct GenConfig {
    pub seed: u64,
    /// Number of growth steps applied to the pool.
    pub size: usize,
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- random types ----

pub fn gen_prop(rng: &mut ChaCha8Rng, depth: usize) -> Proposition {
    use Proposition::*;
    if depth == 0 {
        return if rng.gen_bool(0.5) { One } else { Bottom };
    }
    match rng.gen_range(0..10u32) {
        0 => One,
        1 => Bottom,
        2 => Tensor(
            Box::new(gen_prop(rng, depth - 1)),
            Box::new(gen_prop(rng, depth - 1)),
        ),
        3 => Par(
            Box::new(gen_prop(rng, depth - 1)),
            Box::new(gen_prop(rng, depth - 1)),
        ),
        4 => Plus(gen_branches(rng, depth)),
        5 => With(gen_branches(rng, depth)),
        6 => OfCourse(Box::new(gen_prop(rng, depth - 1))),
        7 => WhyNot(Box::new(gen_prop(rng, depth - 1))),
        8 => {
            let v = TypeVar::pos("X");
            if rng.gen_bool(0.5) {
                // ex X. ~X || X is inhabited by x(X). x(y). y <-> x.
                Exists(
                    v.clone(),
                    Box::new(Par(Box::new(Var(v.flip())), Box::new(Var(v)))),
                )
            } else {
                Exists(v, Box::new(gen_prop(rng, depth - 1)))
            }
        }
        _ => {
            let v = TypeVar::pos("X");
            if rng.gen_bool(0.5) {
                Forall(
                    v.clone(),
                    Box::new(Par(Box::new(Var(v.flip())), Box::new(Var(v)))),
                )
            } else {
                Forall(v, Box::new(gen_prop(rng, depth - 1)))
            }
        }
    }
}

fn gen_branches(rng: &mut ChaCha8Rng, depth: usize) -> Vec<(Label, Proposition)> {
    let n = rng.gen_range(1..=3usize);
    (0..n)
        .map(|i| (Label::new(format!("l{}", i)), gen_prop(rng, depth - 1)))
        .collect()
}

pub fn gen_session(rng: &mut ChaCha8Rng, depth: usize) -> SessionType {
    crate::translate::tr_prop_gv(&gen_prop(rng, depth))
}

pub fn gen_type(rng: &mut ChaCha8Rng, depth: usize) -> Type {
    if depth == 0 {
        return Type::Session(gen_session(rng, 0));
    }
    match rng.gen_range(0..6u32) {
        0 => Type::LinFun(
            Box::new(gen_type(rng, depth - 1)),
            Box::new(gen_type(rng, depth - 1)),
        ),
        1 => Type::UnFun(
            Box::new(gen_type(rng, depth - 1)),
            Box::new(gen_type(rng, depth - 1)),
        ),
        2 => Type::Tensor(
            Box::new(gen_type(rng, depth - 1)),
            Box::new(gen_type(rng, depth - 1)),
        ),
        _ => Type::Session(gen_session(rng, depth)),
    }
}

// ---- forward process generation ----

type Sequent = (Process, Vec<(Name, Proposition)>);

fn leaf(rng: &mut ChaCha8Rng, supply: &mut NameSupply) -> Sequent {
    match rng.gen_range(0..4u32) {
        0 => {
            let x = supply.fresh("x");
            (Process::EmptyOut(x.clone()), vec![(x, Proposition::One)])
        }
        1 => {
            let a = gen_prop(rng, 2);
            let x = supply.fresh("x");
            let y = supply.fresh("y");
            (
                Process::LinkP(x.clone(), y.clone()),
                vec![(x, dual_prop(&a)), (y, a)],
            )
        }
        2 => {
            // case x { a. x[]; b. x(y). y <-> x } at (&){a: 1, b: ~A || A}.
            let a = gen_prop(rng, 1);
            let x = supply.fresh("x");
            let y = supply.fresh("y");
            let b1 = Process::EmptyOut(x.clone());
            let b2 = Process::In(
                x.clone(),
                y.clone(),
                Box::new(Process::LinkP(y, x.clone())),
            );
            let ty = Proposition::With(vec![
                (Label::new("a"), Proposition::One),
                (
                    Label::new("b"),
                    Proposition::Par(Box::new(dual_prop(&a)), Box::new(a.clone())),
                ),
            ]);
            (
                Process::CaseP(x.clone(), vec![(Label::new("a"), b1), (Label::new("b"), b2)]),
                vec![(x, ty)],
            )
        }
        _ => {
            // x(X). x(y). y <-> x at forall X. ~A || A with X vacuous. Keeping
            // the body X-free keeps the forall side condition satisfiable after
            // the process is lifted to a term and lowered again.
            let v = TypeVar::pos("X");
            let a = gen_prop(rng, 1);
            let x = supply.fresh("x");
            let y = supply.fresh("y");
            let body = Process::In(
                x.clone(),
                y.clone(),
                Box::new(Process::LinkP(y, x.clone())),
            );
            let ty = Proposition::Forall(
                v.clone(),
                Box::new(Proposition::Par(
                    Box::new(dual_prop(&a)),
                    Box::new(a),
                )),
            );
            (
                Process::InType(x.clone(), v, Box::new(body)),
                vec![(x, ty)],
            )
        }
    }
}

fn grow(pool: &mut Vec<Sequent>, rng: &mut ChaCha8Rng, supply: &mut NameSupply) {
    let pick = rng.gen_range(0..pool.len());
    let (p, ctx) = pool.swap_remove(pick);
    let grown = grow_one(p, ctx, pool, rng, supply);
    pool.push(grown);
}

fn grow_one(
    p: Process,
    ctx: Vec<(Name, Proposition)>,
    pool: &mut Vec<Sequent>,
    rng: &mut ChaCha8Rng,
    supply: &mut NameSupply,
) -> Sequent {
    use Proposition as P;
    match rng.gen_range(0..10u32) {
        // Wait: fresh bottom channel in front.
        0 => {
            let x = supply.fresh("x");
            let mut ctx2 = ctx;
            ctx2.push((x.clone(), P::Bottom));
            (Process::EmptyIn(x.clone(), Box::new(p)), ctx2)
        }
        // Par: fuse two channels into one.
        1 if ctx.len() >= 2 => {
            let i = rng.gen_range(0..ctx.len());
            let mut j = rng.gen_range(0..ctx.len() - 1);
            if j >= i {
                j += 1;
            }
            let (u, a) = ctx[i].clone();
            let (v, b) = ctx[j].clone();
            let ctx2: Vec<_> = ctx
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, e)| e)
                .chain(std::iter::once((
                    v.clone(),
                    P::Par(Box::new(a), Box::new(b)),
                )))
                .collect();
            (Process::In(v, u, Box::new(p)), ctx2)
        }
        // Tensor: combine with another pool sequent.
        2 if !pool.is_empty() => {
            let k = rng.gen_range(0..pool.len());
            let (q, qctx) = pool.swap_remove(k);
            let i = rng.gen_range(0..ctx.len());
            let j = rng.gen_range(0..qctx.len());
            let (u, a) = ctx[i].clone();
            let (v, b) = qctx[j].clone();
            let mut ctx2: Vec<_> = ctx
                .into_iter()
                .enumerate()
                .filter(|(k2, _)| *k2 != i)
                .map(|(_, e)| e)
                .collect();
            ctx2.extend(qctx.into_iter().enumerate().filter(|(k2, _)| *k2 != j).map(|(_, e)| e));
            ctx2.push((v.clone(), P::Tensor(Box::new(a), Box::new(b))));
            (Process::Out(v, u, Box::new(p), Box::new(q)), ctx2)
        }
        // Select: inject into a wider internal choice.
        3 => {
            let i = rng.gen_range(0..ctx.len());
            let (u, a) = ctx[i].clone();
            let l = Label::new("go");
            let mut bs = vec![(l.clone(), a)];
            if rng.gen_bool(0.5) {
                bs.push((Label::new("alt"), gen_prop(rng, 1)));
            }
            let mut ctx2 = ctx;
            ctx2[i] = (u.clone(), P::Plus(bs));
            (Process::Inject(u, l, Box::new(p)), ctx2)
        }
        // Offer: single-branch external choice.
        4 => {
            let i = rng.gen_range(0..ctx.len());
            let (u, a) = ctx[i].clone();
            let l = Label::new("only");
            let mut ctx2 = ctx;
            ctx2[i] = (u.clone(), P::With(vec![(l.clone(), a)]));
            (Process::CaseP(u, vec![(l, p)]), ctx2)
        }
        // Client request.
        5 => {
            let i = rng.gen_range(0..ctx.len());
            let (u, a) = ctx[i].clone();
            let s = supply.fresh("s");
            let ctx2: Vec<_> = ctx
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, e)| e)
                .chain(std::iter::once((s.clone(), P::WhyNot(Box::new(a)))))
                .collect();
            (Process::Query(s, u, Box::new(p)), ctx2)
        }
        // Server: only when the remaining context is all-client.
        6 => {
            let i = rng.gen_range(0..ctx.len());
            let rest_all_query = ctx
                .iter()
                .enumerate()
                .all(|(k, (_, a))| k == i || matches!(a, P::WhyNot(_)));
            if !rest_all_query {
                return (p, ctx);
            }
            let (u, a) = ctx[i].clone();
            let s = supply.fresh("s");
            let ctx2: Vec<_> = ctx
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, e)| e)
                .chain(std::iter::once((s.clone(), P::OfCourse(Box::new(a)))))
                .collect();
            (Process::Bang(s, u, Box::new(p)), ctx2)
        }
        // Existential witness over a vacuous body.
        7 => {
            let i = rng.gen_range(0..ctx.len());
            let (u, a) = ctx[i].clone();
            let b = gen_prop(rng, 1);
            let v = TypeVar::pos("Y");
            let mut ctx2 = ctx;
            ctx2[i] = (u.clone(), P::Exists(v, Box::new(a)));
            (Process::OutType(u, b, Box::new(p)), ctx2)
        }
        // Universal over a vacuous body.
        8 => {
            let i = rng.gen_range(0..ctx.len());
            let (u, a) = ctx[i].clone();
            let v = TypeVar::pos("Z");
            let mut ctx2 = ctx;
            ctx2[i] = (u.clone(), P::Forall(v.clone(), Box::new(a)));
            (Process::InType(u, v, Box::new(p)), ctx2)
        }
        // Cut, either against a fresh link or against a dual pool entry.
        _ => {
            let i = rng.gen_range(0..ctx.len());
            let (u, a) = ctx[i].clone();
            // Look for a dual partner elsewhere in the pool.
            let partner = pool.iter().enumerate().find_map(|(k, (_, qctx))| {
                qctx.iter()
                    .position(|(_, b)| prop_eq(b, &dual_prop(&a)))
                    .map(|j| (k, j))
            });
            let c = supply.fresh("c");
            if let Some((k, j)) = partner {
                let (q, qctx) = pool.swap_remove(k);
                let (v, _) = qctx[j].clone();
                let q2 = rename_process(&q, &c, &v);
                let p2 = rename_process(&p, &c, &u);
                let mut ctx2: Vec<_> = ctx
                    .into_iter()
                    .enumerate()
                    .filter(|(k2, _)| *k2 != i)
                    .map(|(_, e)| e)
                    .collect();
                ctx2.extend(
                    qctx.into_iter().enumerate().filter(|(k2, _)| *k2 != j).map(|(_, e)| e),
                );
                (Process::cut_annot(c, a, p2, q2), ctx2)
            } else {
                let w = supply.fresh("w");
                let p2 = rename_process(&p, &c, &u);
                let link = Process::LinkP(c.clone(), w.clone());
                let mut ctx2: Vec<_> = ctx
                    .into_iter()
                    .enumerate()
                    .filter(|(k2, _)| *k2 != i)
                    .map(|(_, e)| e)
                    .collect();
                ctx2.push((w, a.clone()));
                (Process::cut_annot(c, a, p2, link), ctx2)
            }
        }
    }
}

/// A random well-typed process with its context. The result is checked
/// before being returned; generation is correct by construction and the
/// check guards the generator itself.
pub fn gen_cp(cfg: &GenConfig, supply: &mut NameSupply) -> (Vec<(Name, Proposition)>, Process) {
    let mut rng = rng_for(cfg.seed);
    let mut pool: Vec<Sequent> = (0..3).map(|_| leaf(&mut rng, supply)).collect();
    for _ in 0..cfg.size {
        grow(&mut pool, &mut rng, supply);
    }
    let (p, ctx) = pool.pop().expect("pool nonempty");
    cp_typecheck(supply, &ctx, &p).expect("generated process is well typed");
    (ctx, p)
}

// ---- forward term generation ----

type TermSequent = (Term, Vec<(Name, Type)>, Type);

fn term_leaf(rng: &mut ChaCha8Rng, supply: &mut NameSupply) -> TermSequent {
    match rng.gen_range(0..4u32) {
        0 => {
            let s = gen_session(rng, 2);
            let x = supply.fresh("v");
            (
                Term::Var(x.clone()),
                vec![(x, Type::Session(s.clone()))],
                Type::Session(s),
            )
        }
        1 => {
            // fn x: S. x, a closed identity.
            let s = Type::Session(gen_session(rng, 1));
            let x = supply.fresh("a");
            (
                Term::Lam(x.clone(), s.clone(), Box::new(Term::Var(x))),
                vec![],
                Type::LinFun(Box::new(s.clone()), Box::new(s)),
            )
        }
        2 => {
            // serve x: end!. x, a closed service.
            let x = supply.fresh("r");
            (
                Term::Serve(x.clone(), Some(SessionType::EndOut), Box::new(Term::Var(x))),
                vec![],
                Type::Session(SessionType::Service(Box::new(SessionType::EndIn))),
            )
        }
        _ => {
            // Lift a small random process; the result has type end!.
            let sub = GenConfig { seed: rng.gen(), size: rng.gen_range(1..5) };
            let mut pool: Vec<Sequent> = (0..2).map(|_| leaf(rng, supply)).collect();
            let mut sub_rng = rng_for(sub.seed);
            for _ in 0..sub.size {
                grow(&mut pool, &mut sub_rng, supply);
            }
            let (p, ctx) = pool.pop().expect("pool nonempty");
            let d = cp_typecheck(supply, &ctx, &p).expect("generated process is well typed");
            let m = tr_cp_gv(&d, supply);
            (m, tr_ctx_gv(&ctx), Type::Session(SessionType::EndOut))
        }
    }
}

fn term_grow(pool: &mut Vec<TermSequent>, rng: &mut ChaCha8Rng, supply: &mut NameSupply) {
    let pick = rng.gen_range(0..pool.len());
    let (m, ctx, ty) = pool.swap_remove(pick);
    let grown = term_grow_one(m, ctx, ty, pool, rng, supply);
    pool.push(grown);
}

fn term_grow_one(
    m: Term,
    ctx: Vec<(Name, Type)>,
    ty: Type,
    pool: &mut Vec<TermSequent>,
    rng: &mut ChaCha8Rng,
    supply: &mut NameSupply,
) -> TermSequent {
    match rng.gen_range(0..8u32) {
        // Abstract a context variable.
        0 if !ctx.is_empty() => {
            let i = rng.gen_range(0..ctx.len());
            let (x, t) = ctx[i].clone();
            let ctx2: Vec<_> = ctx
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, e)| e)
                .collect();
            let fun = Type::LinFun(Box::new(t.clone()), Box::new(ty));
            (Term::Lam(x, t, Box::new(m)), ctx2, fun)
        }
        // Apply to a fresh variable of the argument type.
        1 => {
            if let Type::LinFun(t, u) = &ty {
                let x = supply.fresh("b");
                let mut ctx2 = ctx;
                ctx2.push((x.clone(), (**t).clone()));
                (
                    Term::App(Box::new(m), Box::new(Term::Var(x))),
                    ctx2,
                    (**u).clone(),
                )
            } else {
                (m, ctx, ty)
            }
        }
        // Pair with another pool entry.
        2 if !pool.is_empty() => {
            let k = rng.gen_range(0..pool.len());
            let (n, nctx, nty) = pool.swap_remove(k);
            let mut ctx2 = ctx;
            ctx2.extend(nctx);
            (
                Term::Pair(Box::new(m), Box::new(n)),
                ctx2,
                Type::Tensor(Box::new(ty), Box::new(nty)),
            )
        }
        // Send along a fresh channel.
        3 => {
            let x = supply.fresh("k");
            let cont = gen_session(rng, 1);
            let chan = SessionType::Output(Box::new(ty), Box::new(cont.clone()));
            let mut ctx2 = ctx;
            ctx2.push((x.clone(), Type::Session(chan)));
            (
                Term::Send(Box::new(m), Box::new(Term::Var(x))),
                ctx2,
                Type::Session(cont),
            )
        }
        // Link against a forked copy of the dual.
        4 => {
            if let Type::Session(s) = &ty {
                if matches!(s, SessionType::EndOut) {
                    // fork x: end?. link M x would need M to consume x; use
                    // the simpler wait-style wrapper instead.
                    let x = supply.fresh("e");
                    let mut ctx2 = ctx;
                    ctx2.push((x.clone(), Type::Session(SessionType::EndIn)));
                    (
                        Term::Link(Box::new(Term::Var(x)), Box::new(m)),
                        ctx2,
                        Type::Session(SessionType::EndOut),
                    )
                } else {
                    let x = supply.fresh("d");
                    let mut ctx2 = ctx;
                    ctx2.push((x.clone(), Type::Session(dual_session(s))));
                    (
                        Term::Link(Box::new(Term::Var(x)), Box::new(m)),
                        ctx2,
                        Type::Session(SessionType::EndOut),
                    )
                }
            } else {
                (m, ctx, ty)
            }
        }
        // Receive on a fresh channel carrying the current type: only for
        // a session-typed payload channel from the context instead.
        5 => {
            let x = supply.fresh("p");
            let payload = gen_type(rng, 1);
            let cont = gen_session(rng, 1);
            let chan = SessionType::Input(Box::new(payload.clone()), Box::new(cont.clone()));
            let pair = Type::Tensor(Box::new(payload), Box::new(Type::Session(cont)));
            let mut ctx2 = ctx;
            ctx2.push((x.clone(), Type::Session(chan)));
            // The grown term ignores m? Keep m: pair it afterwards.
            let recv = Term::Receive(Box::new(Term::Var(x)));
            (
                Term::Pair(Box::new(m), Box::new(recv)),
                ctx2,
                Type::Tensor(Box::new(ty), Box::new(pair)),
            )
        }
        // Select into a wider choice on a fresh variable, then pair.
        6 => {
            let x = supply.fresh("q");
            let s = gen_session(rng, 1);
            let chan = SessionType::Select(vec![(Label::new("go"), s.clone())]);
            let mut ctx2 = ctx;
            ctx2.push((x.clone(), Type::Session(chan)));
            let sel = Term::Select(Label::new("go"), Box::new(Term::Var(x)));
            (
                Term::Pair(Box::new(m), Box::new(sel)),
                ctx2,
                Type::Tensor(Box::new(ty), Box::new(Type::Session(s))),
            )
        }
        _ => (m, ctx, ty),
    }
}

/// A random well-typed term with its context and type.
pub fn gen_hgv(cfg: &GenConfig, supply: &mut NameSupply) -> (Vec<(Name, Type)>, Term, Type) {
    let mut rng = rng_for(cfg.seed);
    let mut pool: Vec<TermSequent> = (0..2).map(|_| term_leaf(&mut rng, supply)).collect();
    for _ in 0..cfg.size {
        term_grow(&mut pool, &mut rng, supply);
    }
    let (m, ctx, ty) = pool.pop().expect("pool nonempty");
    let d = crate::hgv::typecheck(supply, &ctx, &m).expect("generated term is well typed");
    debug_assert!(crate::syntax::session::type_eq(&d.ty, &ty));
    (ctx, m, ty)
}

/// A random well-typed term in the session fragment.
pub fn gen_hgv_pi(cfg: &GenConfig, supply: &mut NameSupply) -> (Vec<(Name, Type)>, Term, Type) {
    // Lift a generated process; the lift lands in the fragment.
    let mut rng = rng_for(cfg.seed);
    let mut pool: Vec<Sequent> = (0..2).map(|_| leaf(&mut rng, supply)).collect();
    for _ in 0..cfg.size {
        grow(&mut pool, &mut rng, supply);
    }
    let (p, ctx) = pool.pop().expect("pool nonempty");
    let d = cp_typecheck(supply, &ctx, &p).expect("generated process is well typed");
    let m = tr_cp_gv(&d, supply);
    (tr_ctx_gv(&ctx), m, Type::Session(SessionType::EndOut))
}
