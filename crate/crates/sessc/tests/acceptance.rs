//! The acceptance gate: one test per release criterion, each printing a
//! single pass line (visible with --nocapture) and asserting its budget.

use std::time::{Duration, Instant};

use sessc::cp::cp_typecheck;
use sessc::engine::{
    equiv, normalize, strategy_registry, successors, LeftmostOutermost, RuleTag,
};
use sessc::gen::{gen_cp, gen_hgv, gen_prop, gen_session, rng_for, GenConfig};
use sessc::names::NameSupply;
use sessc::parse::{parse_cp_file, parse_hgv_file};
use sessc::print::print_process;
use sessc::syntax::prop::dual_prop;
use sessc::syntax::session::dual_session;
use sessc::translate::{tr_prop_gv, tr_session_cp};
use sessc::verify::{
    check_factor, check_soundness, check_t1, check_t2, check_t3, uses_nonsession,
};

fn report(name: &str, start: Instant, budget: Duration) {
    let took = start.elapsed();
    println!("{}: PASS ({:.2?})", name, took);
    assert!(took < budget, "{} exceeded its {:?} budget: {:?}", name, budget, took);
}

fn corpus_hgv() -> Vec<(String, String)> {
    corpus_files("../../corpus/hgv", "hgv")
}

fn corpus_cp() -> Vec<(String, String)> {
    corpus_files("../../corpus/cp", "cp")
}

fn corpus_files(dir: &str, ext: &str) -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .expect(dir)
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .map(|p| {
            let src = std::fs::read_to_string(&p).expect("read");
            (p.file_name().unwrap().to_string_lossy().into_owned(), src)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_01_duality_involution() {
    let start = Instant::now();
    let mut rng = rng_for(0xD0A1);
    for _ in 0..1_000 {
        let s = gen_session(&mut rng, 6);
        assert_eq!(dual_session(&dual_session(&s)), s);
        let a = gen_prop(&mut rng, 6);
        assert_eq!(dual_prop(&dual_prop(&a)), a);
    }
    report("criterion 01 duality involution", start, Duration::from_secs(1));
}

#[test]
fn criterion_02_duality_naturality_and_round_trips() {
    let start = Instant::now();
    let mut rng = rng_for(0xD0A2);
    for _ in 0..1_000 {
        let s = gen_session(&mut rng, 6);
        assert_eq!(tr_session_cp(&dual_session(&s)), dual_prop(&tr_session_cp(&s)));
        assert_eq!(tr_prop_gv(&tr_session_cp(&s)), s);
        let a = gen_prop(&mut rng, 6);
        assert_eq!(tr_session_cp(&tr_prop_gv(&a)), a);
    }
    report("criterion 02 translation round trips", start, Duration::from_secs(1));
}

fn hgv_population() -> Vec<(String, Vec<(sessc::names::Name, sessc::syntax::session::Type)>, sessc::syntax::term::Term, NameSupply)> {
    let mut out = Vec::new();
    for (name, src) in corpus_hgv() {
        let mut supply = NameSupply::new();
        let f = parse_hgv_file(&src, &mut supply, false).expect(&name);
        out.push((name, f.ctx, f.term, supply));
    }
    for i in 0..500usize {
        let mut supply = NameSupply::new();
        let cfg = GenConfig { seed: 0xA300 + i as u64, size: (i % 5) + 1 };
        let (ctx, term, _) = gen_hgv(&cfg, &mut supply);
        out.push((format!("gen/{}", i), ctx, term, supply));
    }
    out
}

fn cp_population() -> Vec<(String, Vec<(sessc::names::Name, sessc::syntax::prop::Proposition)>, sessc::syntax::process::Process, NameSupply)> {
    let mut out = Vec::new();
    for (name, src) in corpus_cp() {
        let mut supply = NameSupply::new();
        let f = parse_cp_file(&src, &mut supply).expect(&name);
        out.push((name, f.ctx, f.process, supply));
    }
    for i in 0..500usize {
        let mut supply = NameSupply::new();
        let cfg = GenConfig { seed: 0xA500 + i as u64, size: (i % 5) + 1 };
        let (ctx, p) = gen_cp(&cfg, &mut supply);
        out.push((format!("gen/{}", i), ctx, p, supply));
    }
    out
}

#[test]
fn criterion_03_t1_lowering_preserves_typing() {
    let start = Instant::now();
    let pop = hgv_population();
    assert!(pop.len() >= 530);
    for (name, ctx, term, supply) in &pop {
        check_t1(ctx, term, &mut supply.clone()).unwrap_or_else(|e| panic!("{}: {}", name, e));
    }
    report("criterion 03 t1 lowering to the pi fragment", start, Duration::from_secs(10));
}

#[test]
fn criterion_04_t2_translation_types_in_cp() {
    let start = Instant::now();
    let pop = hgv_population();
    for (name, ctx, term, supply) in &pop {
        check_t2(ctx, term, &mut supply.clone()).unwrap_or_else(|e| panic!("{}: {}", name, e));
    }
    report("criterion 04 t2 translation into cp", start, Duration::from_secs(10));
}

#[test]
fn criterion_05_t3_lift_types_at_end_out() {
    let start = Instant::now();
    let pop = cp_population();
    assert!(pop.len() >= 530);
    for (name, ctx, p, supply) in &pop {
        check_t3(ctx, p, &mut supply.clone()).unwrap_or_else(|e| panic!("{}: {}", name, e));
    }
    report("criterion 05 t3 lift out of cp", start, Duration::from_secs(10));
}

#[test]
fn criterion_06_factoring_on_full_corpus_programs() {
    let start = Instant::now();
    let mut hit = 0usize;
    for (name, src) in corpus_hgv() {
        let mut supply = NameSupply::new();
        let f = parse_hgv_file(&src, &mut supply, false).expect(&name);
        if !uses_nonsession(&f.term) {
            continue;
        }
        hit += 1;
        check_factor(&f.ctx, &f.term, &mut supply, 50_000)
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
    }
    assert!(hit >= 10, "only {} full-calculus corpus programs", hit);
    report("criterion 06 direct translation factoring", start, Duration::from_secs(300));
}

#[test]
fn criterion_07_soundness_on_corpus_processes() {
    let start = Instant::now();
    for (name, src) in corpus_cp() {
        let mut supply = NameSupply::new();
        let f = parse_cp_file(&src, &mut supply).expect(&name);
        check_soundness(&f.ctx, &f.process, &mut supply, 50_000)
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
    }
    report("criterion 07 round trip soundness", start, Duration::from_secs(300));
}

#[test]
fn criterion_08_subject_reduction_along_normalization() {
    let start = Instant::now();
    for (name, ctx, p, supply) in cp_population() {
        let mut supply = supply;
        cp_typecheck(&mut supply, &ctx, &p).unwrap_or_else(|e| panic!("{}: {}", name, e));
        let outcome = normalize(&p, 10_000, &LeftmostOutermost, &mut supply);
        for (i, (_, state)) in outcome.trace.iter().enumerate() {
            cp_typecheck(&mut supply, &ctx, state).unwrap_or_else(|e| {
                panic!("{} step {}: {}\n  {}", name, i, e, print_process(state))
            });
        }
    }
    report("criterion 08 subject reduction", start, Duration::from_secs(300));
}

#[test]
fn criterion_09_reduction_rule_golden_suite() {
    let start = Instant::now();
    let cases: Vec<(RuleTag, &str, &str)> = vec![
        (
            RuleTag::RedAx,
            "ctx y: 1. new x:1 (x[] | x <-> y)",
            "ctx y: 1. y[]",
        ),
        (
            RuleTag::RedTensorPar,
            "ctx z: 1. new x:1 * 1 (x[y].(y[] | x[]) | x(w). w(). x(). z[])",
            "ctx z: 1. new y:1 (y[] | new x:1 (x[] | y(). x(). z[]))",
        ),
        (
            RuleTag::RedPlusWith,
            "ctx z: 1. new x:(+){a: 1} (x[a]. x[] | case x {a. x(). z[]})",
            "ctx z: 1. new x:1 (x[] | x(). z[])",
        ),
        (
            RuleTag::RedBangQuery,
            "ctx z: 1. new s:!1 (!s(y). y[] | ?s[w]. w(). z[])",
            "ctx z: 1. new y:1 (y[] | y(). z[])",
        ),
        (
            RuleTag::RedWeaken,
            "ctx z: 1. new s:!1 (!s(y). y[] | z[])",
            "ctx z: 1. z[]",
        ),
        (
            RuleTag::RedContract,
            "ctx z: 1. new s:!1 (!s(y). y[] | ?s[a]. a(). ?s[b]. b(). z[])",
            "ctx z: 1. new s:!1 (!s(y). y[] | new t:!1 (!t(y). y[] | ?s[a]. a(). ?t[b]. b(). z[]))",
        ),
        (
            RuleTag::RedExistsForall,
            "ctx z: 1. new x:ex X. 1 (x[bot]. x[] | x(X). x(). z[])",
            "ctx z: 1. new x:1 (x[] | x(). z[])",
        ),
        (
            RuleTag::RedOneBot,
            "ctx y: 1. new x:1 (x[] | x(). y[])",
            "ctx y: 1. y[]",
        ),
        (
            RuleTag::CcOutPayload,
            "ctx w: 1 * 1. new z:1 (z[] | w[y].(z(). y[] | w[]))",
            "ctx w: 1 * 1. w[y].(new z:1 (z[] | z(). y[]) | w[])",
        ),
        (
            RuleTag::CcOutCont,
            "ctx w: 1 * 1. new z:1 (z[] | w[y].(y[] | z(). w[]))",
            "ctx w: 1 * 1. w[y].(y[] | new z:1 (z[] | z(). w[]))",
        ),
        (
            RuleTag::CcIn,
            "ctx w: bot || bot, u: 1. new z:1 (z[] | w(v). v(). w(). z(). u[])",
            "ctx w: bot || bot, u: 1. w(v). new z:1 (z[] | v(). w(). z(). u[])",
        ),
        (
            RuleTag::CcInject,
            "ctx w: (+){a: 1}. new z:1 (z[] | w[a]. z(). w[])",
            "ctx w: (+){a: 1}. w[a]. new z:1 (z[] | z(). w[])",
        ),
        (
            RuleTag::CcCase,
            "ctx w: (&){l: 1, r: 1}. new z:1 (z[] | case w {l. z(). w[]; r. z(). w[]})",
            "ctx w: (&){l: 1, r: 1}. case w {l. new z:1 (z[] | z(). w[]); r. new z:1 (z[] | z(). w[])}",
        ),
        (
            RuleTag::CcBang,
            "ctx t: !1. new z:!1 (!z(y). y[] | !t(w). ?z[v]. v(). w[])",
            "ctx t: !1. !t(w). new z:!1 (!z(y). y[] | ?z[v]. v(). w[])",
        ),
        (
            RuleTag::CcQuery,
            "ctx t: ?bot, u: 1. new z:1 (z[] | ?t[v]. v(). z(). u[])",
            "ctx t: ?bot, u: 1. ?t[v]. new z:1 (z[] | v(). z(). u[])",
        ),
        (
            RuleTag::CcOutType,
            "ctx w: ex X. 1. new z:1 (z[] | w[bot]. z(). w[])",
            "ctx w: ex X. 1. w[bot]. new z:1 (z[] | z(). w[])",
        ),
        (
            RuleTag::CcInType,
            "ctx w: all X. 1. new z:1 (z[] | w(X). z(). w[])",
            "ctx w: all X. 1. w(X). new z:1 (z[] | z(). w[])",
        ),
        (
            RuleTag::CcEmptyIn,
            "ctx w: bot, u: 1. new z:1 (z[] | w(). z(). u[])",
            "ctx w: bot, u: 1. w(). new z:1 (z[] | z(). u[])",
        ),
    ];
    assert_eq!(cases.len(), 18);
    for (tag, input, expected) in cases {
        let mut supply = NameSupply::new();
        let f = parse_cp_file(input, &mut supply).expect(input);
        cp_typecheck(&mut supply, &f.ctx, &f.process).expect(input);
        let mut s2 = NameSupply::new();
        let want = parse_cp_file(expected, &mut s2).expect(expected);
        let succ = successors(&f.process, &mut supply);
        let got = succ
            .iter()
            .find(|(t, next)| *t == tag && equiv(next, &want.process));
        assert!(
            got.is_some(),
            "{:?}: no matching step for {}\n  want {}\n  got  {:?}",
            tag,
            input,
            print_process(&want.process),
            succ.iter().map(|(t, p)| format!("{:?}: {}", t, print_process(p))).collect::<Vec<_>>()
        );
    }
    report("criterion 09 golden reduction steps", start, Duration::from_secs(1));
}

#[test]
fn criterion_10_confluence_across_strategies() {
    let start = Instant::now();
    let strategies = strategy_registry();
    assert!(strategies.len() >= 2);
    for i in 0..200usize {
        let mut supply = NameSupply::new();
        let cfg = GenConfig { seed: 0xC0F + i as u64, size: (i % 5) + 1 };
        let (_, p) = gen_cp(&cfg, &mut supply);
        let a = normalize(&p, 10_000, strategies[0].as_ref(), &mut supply);
        let b = normalize(&p, 10_000, strategies[1].as_ref(), &mut supply);
        assert!(!a.exhausted && !b.exhausted, "sample {} ran out of steps", i);
        assert!(
            equiv(&a.result, &b.result),
            "sample {} diverged:\n  {}\n  {}",
            i,
            print_process(&a.result),
            print_process(&b.result)
        );
    }
    report("criterion 10 confluence sample", start, Duration::from_secs(60));
}
