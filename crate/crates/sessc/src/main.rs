use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sessc::cp::cp_typecheck;
use sessc::engine::{lookup_strategy, normalize, reaches};
use sessc::hgv::{check_pi, typecheck};
use sessc::names::NameSupply;
use sessc::parse::{parse_cp_file, parse_hgv_file};
use sessc::print::{print_cp_file, print_hgv_file, print_process, print_type};
use sessc::syntax::prop::dual_prop;
use sessc::syntax::session::{type_eq, SessionType, Type};
use sessc::translate::{tr_cp_gv, tr_ctx_cp, tr_ctx_gv, tr_ctx_pi, tr_term_cp, tr_term_pi, tr_type_cp, tr_type_pi};
use sessc::verify::{run_verify, VerifyOpts};

#[derive(Parser)]
#[command(name = "sessc", about = "Session-typed calculus workbench", version)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Operations on functional-calculus terms.
    Hgv {
        #[command(subcommand)]
        cmd: HgvCmd,
    },
    /// Operations on processes.
    Cp {
        #[command(subcommand)]
        cmd: CpCmd,
    },
    /// Lift a process to a term of the session fragment.
    Lift { file: PathBuf },
    /// Run the metatheory checks over a corpus plus generated programs.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum HgvCmd {
    /// Typecheck a term file; with --pi, also require the session fragment.
    Check {
        #[arg(long)]
        pi: bool,
        file: PathBuf,
    },
    /// Translate a term to the session fragment or to a process.
    Lower {
        #[arg(value_enum)]
        target: LowerTarget,
        /// For the process target, use the one-pass translation.
        #[arg(long)]
        direct: bool,
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LowerTarget {
    Pi,
    Cp,
}

#[derive(Subcommand)]
enum CpCmd {
    /// Typecheck a process file.
    Check { file: PathBuf },
    /// Cut-eliminate a process to normal form.
    Normalize {
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Print each reduction step.
        #[arg(long)]
        trace: bool,
        /// Re-typecheck the process after every step.
        #[arg(long)]
        audit: bool,
        /// Reduction strategy to use.
        #[arg(long, default_value = "leftmost-outermost")]
        strategy: String,
        file: PathBuf,
    },
    /// Search for a reduction sequence from one process to another.
    Reaches {
        from: PathBuf,
        to: PathBuf,
        #[arg(long, default_value_t = 50_000)]
        bound: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Which check to run: t1, t2, t3, factor, soundness, or all.
    theorem: String,
    #[arg(long, default_value = "corpus")]
    corpus: PathBuf,
    /// Number of generated programs to add to each population.
    #[arg(long, default_value_t = 50)]
    random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// State bound for reduction searches.
    #[arg(long, default_value_t = 50_000)]
    bound: usize,
}

fn fail(json: bool, msg: &str) -> ExitCode {
    if json {
        println!("{}", serde_json::json!({ "ok": false, "error": msg }));
    } else {
        eprintln!("error: {}", msg);
    }
    ExitCode::from(1)
}

fn parse_fail(json: bool, msg: &str) -> ExitCode {
    if json {
        println!("{}", serde_json::json!({ "ok": false, "error": msg }));
    } else {
        eprintln!("error: {}", msg);
    }
    ExitCode::from(2)
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match cli.cmd {
        Cmd::Hgv { cmd } => match cmd {
            HgvCmd::Check { pi, file } => hgv_check(json, pi, &file),
            HgvCmd::Lower { target, direct, file } => hgv_lower(json, target, direct, &file),
        },
        Cmd::Cp { cmd } => match cmd {
            CpCmd::Check { file } => cp_check(json, &file),
            CpCmd::Normalize { max_steps, trace, audit, strategy, file } => {
                cp_normalize(json, max_steps, trace, audit, &strategy, &file)
            }
            CpCmd::Reaches { from, to, bound } => cp_reaches(json, &from, &to, bound),
        },
        Cmd::Lift { file } => lift(json, &file),
        Cmd::Verify(args) => verify(json, &args),
    }
}

fn hgv_check(json: bool, pi: bool, file: &PathBuf) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return parse_fail(json, &e),
    };
    let mut supply = NameSupply::new();
    let parsed = match parse_hgv_file(&text, &mut supply, pi) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &format!("{}: {}", file.display(), e)),
    };
    if pi {
        if let Err(e) = check_pi(&parsed.term) {
            return fail(json, &format!("not in the session fragment: {}", e));
        }
    }
    let d = match typecheck(&mut supply, &parsed.ctx, &parsed.term) {
        Ok(d) => d,
        Err(e) => return fail(json, &e.to_string()),
    };
    if let Some(want) = &parsed.expected {
        if !type_eq(&d.ty, want) {
            return fail(
                json,
                &format!("type is {}, expected {}", print_type(&d.ty), print_type(want)),
            );
        }
    }
    if json {
        println!("{}", serde_json::json!({ "ok": true, "type": print_type(&d.ty) }));
    } else {
        println!("ok: {}", print_type(&d.ty));
    }
    ExitCode::SUCCESS
}

fn hgv_lower(json: bool, target: LowerTarget, direct: bool, file: &PathBuf) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return parse_fail(json, &e),
    };
    let mut supply = NameSupply::new();
    let parsed = match parse_hgv_file(&text, &mut supply, false) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &format!("{}: {}", file.display(), e)),
    };
    let d = match typecheck(&mut supply, &parsed.ctx, &parsed.term) {
        Ok(d) => d,
        Err(e) => return fail(json, &e.to_string()),
    };
    match target {
        LowerTarget::Pi => {
            if direct {
                return parse_fail(json, "--direct only applies to the process target");
            }
            let lowered = tr_term_pi(&d, &mut supply);
            let tctx = tr_ctx_pi(&parsed.ctx);
            let ty = Type::Session(tr_type_pi(&d.ty));
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "ok": true,
                        "program": print_hgv_file(&tctx, &lowered, Some(&ty)),
                    })
                );
            } else {
                print!("{}", print_hgv_file(&tctx, &lowered, Some(&ty)));
            }
            ExitCode::SUCCESS
        }
        LowerTarget::Cp => {
            let z = supply.fresh("z");
            let result = if direct {
                tr_term_cp(&d, &z, &mut supply, true)
            } else {
                let lowered = tr_term_pi(&d, &mut supply);
                let tctx = tr_ctx_pi(&parsed.ctx);
                match typecheck(&mut supply, &tctx, &lowered) {
                    Ok(d2) => tr_term_cp(&d2, &z, &mut supply, false),
                    Err(e) => return fail(json, &format!("lowered term ill-typed: {}", e)),
                }
            };
            let p = match result {
                Ok(p) => p,
                Err(e) => return fail(json, &e.to_string()),
            };
            let mut pctx = tr_ctx_cp(&tr_ctx_pi(&parsed.ctx));
            pctx.push((z, dual_prop(&tr_type_cp(&d.ty))));
            if json {
                println!(
                    "{}",
                    serde_json::json!({ "ok": true, "program": print_cp_file(&pctx, &p) })
                );
            } else {
                print!("{}", print_cp_file(&pctx, &p));
            }
            ExitCode::SUCCESS
        }
    }
}

fn cp_check(json: bool, file: &PathBuf) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return parse_fail(json, &e),
    };
    let mut supply = NameSupply::new();
    let parsed = match parse_cp_file(&text, &mut supply) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &format!("{}: {}", file.display(), e)),
    };
    match cp_typecheck(&mut supply, &parsed.ctx, &parsed.process) {
        Ok(_) => {
            if json {
                println!("{}", serde_json::json!({ "ok": true }));
            } else {
                println!("ok");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(json, &e.to_string()),
    }
}

fn cp_normalize(
    json: bool,
    max_steps: usize,
    trace: bool,
    audit: bool,
    strategy: &str,
    file: &PathBuf,
) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return parse_fail(json, &e),
    };
    let mut supply = NameSupply::new();
    let parsed = match parse_cp_file(&text, &mut supply) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &format!("{}: {}", file.display(), e)),
    };
    let strat = match lookup_strategy(strategy) {
        Some(s) => s,
        None => return parse_fail(json, &format!("unknown strategy: {}", strategy)),
    };
    if audit {
        if let Err(e) = cp_typecheck(&mut supply, &parsed.ctx, &parsed.process) {
            return fail(json, &format!("initial process ill-typed: {}", e));
        }
    }
    let out = normalize(&parsed.process, max_steps, strat.as_ref(), &mut supply);
    let mut audit_failures = Vec::new();
    if audit {
        for (i, (tag, p)) in out.trace.iter().enumerate() {
            if let Err(e) = cp_typecheck(&mut supply, &parsed.ctx, p) {
                audit_failures.push(format!("step {} ({}): {}", i + 1, tag, e));
            }
        }
    }
    if json {
        let steps: Vec<_> = out
            .trace
            .iter()
            .scan(print_process(&parsed.process), |before, (tag, p)| {
                let after = print_process(p);
                let entry = serde_json::json!({
                    "rule": tag.to_string(),
                    "before": before.clone(),
                    "after": after,
                });
                *before = print_process(p);
                Some(entry)
            })
            .collect();
        println!(
            "{}",
            serde_json::json!({
                "ok": !out.exhausted && audit_failures.is_empty(),
                "steps": out.steps,
                "exhausted": out.exhausted,
                "result": print_process(&out.result),
                "trace": if trace { Some(steps) } else { None },
                "audit_failures": audit_failures,
            })
        );
    } else {
        if trace {
            for (tag, p) in &out.trace {
                println!("{:<16} {}", tag.to_string(), print_process(p));
            }
        }
        for f in &audit_failures {
            eprintln!("audit: {}", f);
        }
        println!("{} ({} steps)", print_process(&out.result), out.steps);
        if out.exhausted {
            eprintln!("step budget exhausted before normal form");
        }
    }
    if out.exhausted || !audit_failures.is_empty() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cp_reaches(json: bool, from: &PathBuf, to: &PathBuf, bound: usize) -> ExitCode {
    let mut supply = NameSupply::new();
    let pf = match read(from).and_then(|t| {
        parse_cp_file(&t, &mut supply).map_err(|e| format!("{}: {}", from.display(), e))
    }) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &e),
    };
    let pt = match read(to).and_then(|t| {
        parse_cp_file(&t, &mut supply).map_err(|e| format!("{}: {}", to.display(), e))
    }) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &e),
    };
    match reaches(&pf.process, &pt.process, bound, &mut supply) {
        Some(n) => {
            if json {
                println!("{}", serde_json::json!({ "ok": true, "steps": n }));
            } else {
                println!("reached in {} steps", n);
            }
            ExitCode::SUCCESS
        }
        None => fail(json, "not reached within the bound"),
    }
}

fn lift(json: bool, file: &PathBuf) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return parse_fail(json, &e),
    };
    let mut supply = NameSupply::new();
    let parsed = match parse_cp_file(&text, &mut supply) {
        Ok(f) => f,
        Err(e) => return parse_fail(json, &format!("{}: {}", file.display(), e)),
    };
    let d = match cp_typecheck(&mut supply, &parsed.ctx, &parsed.process) {
        Ok(d) => d,
        Err(e) => return fail(json, &e.to_string()),
    };
    let m = tr_cp_gv(&d, &mut supply);
    let tctx = tr_ctx_gv(&parsed.ctx);
    let ty = Type::Session(SessionType::EndOut);
    if json {
        println!(
            "{}",
            serde_json::json!({ "ok": true, "program": print_hgv_file(&tctx, &m, Some(&ty)) })
        );
    } else {
        print!("{}", print_hgv_file(&tctx, &m, Some(&ty)));
    }
    ExitCode::SUCCESS
}

fn verify(json: bool, args: &VerifyArgs) -> ExitCode {
    if !matches!(args.theorem.as_str(), "t1" | "t2" | "t3" | "factor" | "soundness" | "all") {
        return parse_fail(json, &format!("unknown check: {}", args.theorem));
    }
    let opts = VerifyOpts {
        corpus: args.corpus.clone(),
        random: args.random,
        seed: args.seed,
        bound: args.bound,
    };
    let reports = run_verify(&args.theorem, &opts);
    let all_ok = reports.iter().all(|r| r.ok());
    if json {
        println!(
            "{}",
            serde_json::json!({ "ok": all_ok, "reports": reports })
        );
    } else {
        for r in &reports {
            println!("{}: {}/{} passed", r.theorem, r.passed, r.total);
            for item in &r.items {
                if !item.ok {
                    println!("  FAIL {}: {}", item.name, item.detail);
                }
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
