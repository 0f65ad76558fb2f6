//! The random generators only ever produce well-typed programs.

use sessc::gen::{gen_cp, gen_hgv, gen_hgv_pi, GenConfig};
use sessc::hgv::check_pi;
use sessc::names::NameSupply;

#[test]
fn generated_processes_typecheck() {
    for seed in 0..150u64 {
        let mut supply = NameSupply::new();
        let cfg = GenConfig { seed, size: (seed % 12 + 1) as usize };
        // gen_cp typechecks internally and panics on failure.
        let (ctx, _p) = gen_cp(&cfg, &mut supply);
        assert!(!ctx.is_empty() || ctx.is_empty());
    }
}

#[test]
fn generated_terms_typecheck() {
    for seed in 0..150u64 {
        let mut supply = NameSupply::new();
        let cfg = GenConfig { seed, size: (seed % 10 + 1) as usize };
        let (_ctx, _m, _ty) = gen_hgv(&cfg, &mut supply);
    }
}

#[test]
fn generated_fragment_terms_stay_in_fragment() {
    for seed in 0..100u64 {
        let mut supply = NameSupply::new();
        let cfg = GenConfig { seed, size: (seed % 8 + 1) as usize };
        let (ctx, m, _ty) = gen_hgv_pi(&cfg, &mut supply);
        check_pi(&m).expect("fragment only");
        sessc::hgv::typecheck(&mut supply, &ctx, &m).expect("lifted term typechecks");
    }
}

#[test]
fn generation_is_deterministic() {
    let mk = |seed| {
        let mut supply = NameSupply::new();
        let (ctx, p) = gen_cp(&GenConfig { seed, size: 6 }, &mut supply);
        (ctx.len(), sessc::print::print_process(&p))
    };
    assert_eq!(mk(42), mk(42));
    assert_ne!(mk(1), mk(2));
}
