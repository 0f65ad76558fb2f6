//! Pointwise checks of the individual operations: duality, parsing and
//! printing, the term and process translations, and single reductions.

use sessc::cp::cp_typecheck;
use sessc::engine::{equiv, successors, RuleTag};
use sessc::hgv::typecheck;
use sessc::names::NameSupply;
use sessc::parse::{
    parse_cp_file, parse_hgv_file, parse_prop_str, parse_type_str,
};
use sessc::print::{print_process, print_prop, print_term, print_type};
use sessc::syntax::process::Process;
use sessc::syntax::prop::{dual_prop, Proposition};
use sessc::syntax::session::{dual_session, SessionType, Type};
use sessc::translate::{tr_term_cp, tr_type_cp};

fn session(src: &str) -> SessionType {
    let mut supply = NameSupply::new();
    match parse_type_str(src, &mut supply).expect("session type") {
        Type::Session(s) => s,
        other => panic!("not a session type: {}", print_type(&other)),
    }
}

fn prop(src: &str) -> Proposition {
    let mut supply = NameSupply::new();
    parse_prop_str(src, &mut supply).expect("proposition")
}

#[test]
fn session_duality_flips_actions_not_payloads() {
    assert_eq!(dual_session(&session("!end?.end!")), session("?end?.end?"));
    assert_eq!(dual_session(&session("#end!")), session("@end?"));
    assert_eq!(dual_session(&session("(+){a: end!}")), session("(&){a: end?}"));
    assert_eq!(dual_session(&session("!!X.!X.end!")), session("??X.?X.end?"));
}

#[test]
fn prop_duality_is_de_morgan() {
    assert_eq!(dual_prop(&prop("1 * bot")), prop("bot || 1"));
    assert_eq!(dual_prop(&prop("!(ex X. X)")), prop("?(all X. ~X)"));
    assert_eq!(dual_prop(&prop("(+){a: 1, b: bot}")), prop("(&){a: bot, b: 1}"));
}

#[test]
fn unannotated_fork_parses() {
    let mut supply = NameSupply::new();
    let f = parse_hgv_file("ctx x: end?. fork y. link y x", &mut supply, false)
        .expect("parse");
    assert!(matches!(f.term, sessc::syntax::term::Term::Fork(_, None, _)));
}

#[test]
fn pi_let_desugars_to_send_fork() {
    let mut supply = NameSupply::new();
    let f = parse_hgv_file(
        "ctx c: !end!.end?, x: end!. let y: end! = x in send y c",
        &mut supply,
        true,
    )
    .expect("parse");
    let s = print_term(&f.term);
    assert!(s.starts_with("send x (fork "), "got: {}", s);
}

#[test]
fn identity_let_collapses() {
    let mut supply = NameSupply::new();
    let f = parse_hgv_file("ctx x: end!. let y: end! = x in y", &mut supply, true)
        .expect("parse");
    assert_eq!(print_term(&f.term), "x");
}

#[test]
fn cp_process_forms_parse() {
    let mut supply = NameSupply::new();
    let f = parse_cp_file("ctx y: bot. new x (x[] | x(). y(). x?)", &mut supply);
    assert!(f.is_err(), "trailing garbage must be rejected");
    let f = parse_cp_file("ctx y: 1. new x (x[] | x(). y[])", &mut supply)
        .expect("parse");
    assert!(matches!(f.process, Process::Cut(..)));
    let f = parse_cp_file(
        "ctx x: ex X. ~X || X. x[1]. x(w). w(). x[]",
        &mut supply,
    )
    .expect("parse");
    assert!(matches!(f.process, Process::OutType(..)));
}

#[test]
fn variable_translates_to_a_link() {
    let mut supply = NameSupply::new();
    let f = parse_hgv_file("ctx x: end!. x", &mut supply, true).expect("parse");
    let d = typecheck(&mut supply, &f.ctx, &f.term).expect("typecheck");
    let z = supply.fresh("z");
    let p = tr_term_cp(&d, &z, &mut supply, false).expect("translate");
    assert!(matches!(p, Process::LinkP(..)), "got: {}", print_process(&p));
    assert_eq!(print_prop(&tr_type_cp(&Type::Session(SessionType::EndOut))), "1");
    assert_eq!(
        print_prop(&dual_prop(&tr_type_cp(&Type::Session(SessionType::EndOut)))),
        "bot"
    );
}

#[test]
fn fork_translates_to_nested_cuts() {
    let mut supply = NameSupply::new();
    let f = parse_hgv_file("ctx. fork x: end!. x", &mut supply, true).expect("parse");
    let d = typecheck(&mut supply, &f.ctx, &f.term).expect("typecheck");
    let z = supply.fresh("z");
    let p = tr_term_cp(&d, &z, &mut supply, false).expect("translate");
    let mut s2 = NameSupply::new();
    let want = parse_cp_file(
        "ctx z: bot. new x:1 (new y:bot (x <-> y | y[]) | x <-> z)",
        &mut s2,
    )
    .expect("parse expected");
    assert!(equiv(&p, &want.process), "got: {}", print_process(&p));
}

#[test]
fn unused_server_is_collected_in_one_step() {
    let mut supply = NameSupply::new();
    let f = parse_cp_file("ctx z: 1. new s:!1 (!s(y). y[] | z[])", &mut supply)
        .expect("parse");
    cp_typecheck(&mut supply, &f.ctx, &f.process).expect("typecheck");
    let succ = successors(&f.process, &mut supply);
    let hit = succ.iter().find(|(tag, _)| *tag == RuleTag::RedWeaken);
    let (_, next) = hit.expect("server weakening applies");
    let mut s2 = NameSupply::new();
    let want = parse_cp_file("ctx z: 1. z[]", &mut s2).expect("parse");
    assert!(equiv(next, &want.process), "got: {}", print_process(next));
}

#[test]
fn printing_is_a_fixpoint_of_parsing() {
    for entry in std::fs::read_dir("../../corpus/hgv").expect("corpus/hgv") {
        let path = entry.expect("entry").path();
        let src = std::fs::read_to_string(&path).expect("read");
        let mut supply = NameSupply::new();
        let f = parse_hgv_file(&src, &mut supply, false).expect("parse");
        let once = print_term(&f.term);
        let mut s2 = NameSupply::new();
        let header = format!(
            "ctx {}. {}",
            f.ctx
                .iter()
                .map(|(n, t)| format!("{}: {}", n.base, print_type(t)))
                .collect::<Vec<_>>()
                .join(", "),
            once
        );
        let f2 = parse_hgv_file(&header, &mut s2, false).expect("reparse");
        assert_eq!(print_term(&f2.term), once, "in {:?}", path);
    }
    for entry in std::fs::read_dir("../../corpus/cp").expect("corpus/cp") {
        let path = entry.expect("entry").path();
        let src = std::fs::read_to_string(&path).expect("read");
        let mut supply = NameSupply::new();
        let f = parse_cp_file(&src, &mut supply).expect("parse");
        let once = print_process(&f.process);
        let mut s2 = NameSupply::new();
        let header = format!(
            "ctx {}. {}",
            f.ctx
                .iter()
                .map(|(n, a)| format!("{}: {}", n.base, print_prop(a)))
                .collect::<Vec<_>>()
                .join(", "),
            once
        );
        let f2 = parse_cp_file(&header, &mut s2).expect("reparse");
        assert_eq!(print_process(&f2.process), once, "in {:?}", path);
    }
}
