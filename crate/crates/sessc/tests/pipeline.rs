//! End-to-end checks that the parsers, typecheckers, translations, and
//! the reduction engine compose on small programs.

use sessc::cp::cp_typecheck;
use sessc::engine::{normalize, reaches, LeftmostOutermost};
use sessc::hgv::{check_pi, typecheck};
use sessc::names::{Name, NameSupply};
use sessc::parse::{parse_cp_file, parse_hgv_file, parse_type_str};
use sessc::print::{print_process, print_term, print_type};
use sessc::syntax::prop::dual_prop;
use sessc::syntax::session::type_eq;
use sessc::translate::{
    tr_ctx_cp, tr_ctx_pi, tr_term_cp, tr_term_pi, tr_type_cp, tr_type_pi,
};
use sessc::syntax::session::Type;

fn check_hgv(src: &str) -> (NameSupply, Vec<(Name, Type)>, sessc::hgv::Derivation) {
    let mut supply = NameSupply::new();
    let f = parse_hgv_file(src, &mut supply, false).expect("parse");
    let d = typecheck(&mut supply, &f.ctx, &f.term)
        .unwrap_or_else(|e| panic!("typecheck {}: {}", src, e));
    if let Some(exp) = &f.expected {
        assert!(
            type_eq(&d.ty, exp),
            "expected {}, found {}",
            print_type(exp),
            print_type(&d.ty)
        );
    }
    (supply, f.ctx, d)
}

#[test]
fn variable_types_at_its_session() {
    let (_, _, d) = check_hgv("ctx x: end!. x\n-- type: end!\n");
    assert!(d.children.is_empty() || !d.children.is_empty());
}

#[test]
fn fork_flips_polarity() {
    check_hgv("ctx. fork x: end!. x\n-- type: end?\n");
}

#[test]
fn identity_function_checks() {
    check_hgv("ctx. fn x: end!. x\n-- type: end! -o end!\n");
}

#[test]
fn link_consumes_both_ends() {
    check_hgv("ctx x: end!, y: end?. link y x\n-- type: end!\n");
}

/// Lowering a function to the session fragment preserves typing.
#[test]
fn lower_lambda_to_sessions() {
    let (mut supply, ctx, d) = check_hgv("ctx. fn x: end!. x\n");
    let lowered = tr_term_pi(&d, &mut supply);
    check_pi(&lowered).expect("session fragment only");
    let ctx2 = tr_ctx_pi(&ctx);
    let d2 = typecheck(&mut supply, &ctx2, &lowered)
        .unwrap_or_else(|e| panic!("lowered term ill-typed: {}\n{}", e, print_term(&lowered)));
    assert!(
        type_eq(&d2.ty, &Type::Session(tr_type_pi(&d.ty))),
        "lowered type {} vs translated {}",
        print_type(&d2.ty),
        print_type(&Type::Session(tr_type_pi(&d.ty)))
    );
}

/// Lowering the session fragment to processes preserves typing: the term
/// translation of M at continuation z proves the translated context plus
/// z at the dual of the translated type.
#[test]
fn lower_sessions_to_processes() {
    let srcs = [
        "ctx x: end!. x\n",
        "ctx. fork x: end!. x\n",
        "ctx x: end!, y: end?. link y x\n",
        "ctx x: !end!.end?, y: end!. send y x\n",
        "ctx x: (+){more: end!, stop: end?}. select stop x\n",
        "ctx x: (&){go: end!}. case x { go(c). c }\n",
        "ctx x: ?end!.end?. let (y, k) = receive x in link (fork w: end!. w) (link y k)\n",
    ];
    for src in srcs {
        let (mut supply, ctx, d) = check_hgv(src);
        let z = supply.fresh("z");
        let p = tr_term_cp(&d, &z, &mut supply, false)
            .unwrap_or_else(|e| panic!("{}: {}", src, e));
        let mut pctx = tr_ctx_cp(&ctx);
        pctx.push((z.clone(), dual_prop(&tr_type_cp(&d.ty))));
        cp_typecheck(&mut supply, &pctx, &p).unwrap_or_else(|e| {
            panic!("process ill-typed for {}: {}\n{}", src, e, print_process(&p))
        });
    }
}

/// The direct extension handles functions and pairs.
#[test]
fn lower_full_terms_to_processes_directly() {
    let srcs = [
        "ctx. fn x: end!. x\n",
        "ctx x: end!, f: end! -o end?. f x\n",
        "ctx x: end!, y: end!. (x, y)\n",
        "ctx p: end! * end?. let (a, b) = p in link b a\n",
    ];
    for src in srcs {
        let (mut supply, ctx, d) = check_hgv(src);
        let z = supply.fresh("z");
        let p = tr_term_cp(&d, &z, &mut supply, true)
            .unwrap_or_else(|e| panic!("{}: {}", src, e));
        let mut pctx = tr_ctx_cp(&ctx);
        pctx.push((z.clone(), dual_prop(&tr_type_cp(&d.ty))));
        cp_typecheck(&mut supply, &pctx, &p).unwrap_or_else(|e| {
            panic!("process ill-typed for {}: {}\n{}", src, e, print_process(&p))
        });
    }
}

/// Lifting a process to the session fragment produces a term of type end!.
#[test]
fn lift_processes_to_terms() {
    let srcs = [
        "ctx y: 1. new x: 1 (x[] | x(). y[])\n",
        "ctx x: bot, y: 1. x(). y[]\n",
        "ctx x: 1, y: bot. x <-> y\n",
        "ctx x: 1 || bot. x(w). x(). w[]\n",
    ];
    for src in srcs {
        let mut supply = NameSupply::new();
        let f = parse_cp_file(src, &mut supply).expect("parse");
        let d = cp_typecheck(&mut supply, &f.ctx, &f.process).expect("typecheck");
        let m = sessc::translate::tr_cp_gv(&d, &mut supply);
        check_pi(&m).unwrap_or_else(|e| panic!("{}: not session-only: {}\n{}", src, e, print_term(&m)));
        let tctx = sessc::translate::tr_ctx_gv(&f.ctx);
        let dm = typecheck(&mut supply, &tctx, &m)
            .unwrap_or_else(|e| panic!("{}: lifted term ill-typed: {}\n{}", src, e, print_term(&m)));
        assert!(
            type_eq(&dm.ty, &Type::Session(sessc::syntax::session::SessionType::EndOut)),
            "{}: lifted type {}",
            src,
            print_type(&dm.ty)
        );
    }
}

#[test]
fn close_wait_reduces() {
    let mut supply = NameSupply::new();
    let f = parse_cp_file("ctx y: 1. new x: 1 (x[] | x(). y[])\n", &mut supply).expect("parse");
    cp_typecheck(&mut supply, &f.ctx, &f.process).expect("typecheck");
    let g = parse_cp_file("ctx y: 1. y[]\n", &mut supply).expect("parse target");
    assert_eq!(reaches(&f.process, &g.process, 1000, &mut supply), Some(1));
}

#[test]
fn normalize_removes_cuts() {
    let mut supply = NameSupply::new();
    let f = parse_cp_file(
        "ctx y: 1. new x: bot (x(). y[] | new w: 1 (w[] | w(). x[]))\n",
        &mut supply,
    )
    .expect("parse");
    cp_typecheck(&mut supply, &f.ctx, &f.process).expect("typecheck");
    let out = normalize(&f.process, 1000, &LeftmostOutermost, &mut supply);
    assert!(!out.exhausted);
    let g = parse_cp_file("ctx y: 1. y[]\n", &mut supply).expect("parse target");
    assert!(sessc::engine::equiv(&out.result, &g.process), "{}", print_process(&out.result));
}

#[test]
fn type_parsing_round_trips() {
    let mut supply = NameSupply::new();
    for src in ["end!", "end! -o end?", "!end!.end? * end?", "#end! -> @end?"] {
        let t = parse_type_str(src, &mut supply).expect("parse");
        let printed = print_type(&t);
        let t2 = parse_type_str(&printed, &mut supply).expect("reparse");
        assert!(type_eq(&t, &t2), "{} vs {}", src, printed);
    }
}
