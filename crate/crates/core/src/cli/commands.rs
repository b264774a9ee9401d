//! One function per subcommand, each returning the payload and exit code.

use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::acceptance;
use crate::cli::config::Config;
use crate::cli::input::{load_counterstrategy, load_program, Loaded};
use crate::cli::output::{interval, proof, rat, verdict};
use crate::cli::{interactive, Command, Form, Mode};
use crate::equivalence::proof::bisim_proof;
use crate::equivalence::{bisimilar, tensor_equiv_finitary, trace_equiv, EquivVerdict, TensorOptions};
use crate::error::CoreError;
use crate::games::{adversarial_rho, cont_prob_detailed, fail_mass, sample_many, victorious, Counterstrategy, Outcome};
use crate::normalforms::light::light_components;
use crate::normalforms::{certify_steady, ff_nf, impersonate, light_nf, shallow_nf, steady_nf, subsplit, wf_nf};
use crate::play::Play;
use crate::rational::parse_rational;
use crate::semantics::eval::trace_value;
use crate::semantics::measure::MeasureView;
use crate::semantics::support::support_enum;
use crate::term::Term;

const OMEGA_INPUTS: u64 = 4;

type Reply = Result<(Value, u8), CoreError>;

pub fn dispatch(cmd: &Command, cfg: &Config, sig: Option<&Path>) -> Reply {
    let load = |p: &Path| load_program(p, sig, cfg.g);
    match cmd {
        Command::Trace { prog, plays } => trace(&load(prog)?, plays, cfg),
        Command::Support { prog, omega_inputs } => support(&load(prog)?.term, *omega_inputs, cfg),
        Command::Equiv { m, n, mode } => equiv(&load(m)?.term, &load(n)?.term, *mode, cfg),
        Command::Normalize { prog, form, show } => normalize(&load(prog)?, *form, *show, cfg),
        Command::Subsplit { m, l, p } => split(&load(m)?.term, &load(l)?.term, p, cfg),
        Command::Impersonate { m, n } => impersonation(&load(m)?.term, &load(n)?.term, cfg),
        Command::Play { prog, cs, interactive: true, .. } => {
            let t = load(prog)?.term;
            let rho = cs.as_deref().map(load_counterstrategy).transpose()?;
            let stdin = std::io::stdin();
            let tallies = interactive::repl(&t, rho.as_ref(), cfg, &mut stdin.lock(), &mut std::io::stderr())?;
            Ok((tallies.to_json(), 0))
        }
        Command::Play { prog, cs, n, max_steps, .. } => {
            let t = load(prog)?.term;
            let steps = max_steps.unwrap_or(cfg.depth);
            let rho = given_or_adversary(&t, cs.as_deref(), steps)?;
            batch(&t, &rho, steps, *n, cfg)
        }
        Command::Victorious { prog, steps, cs } => {
            let t = load(prog)?.term;
            let rho = cs.as_deref().map(load_counterstrategy).transpose()?;
            victory(&t, rho.as_ref(), *steps, cfg)
        }
        Command::Sample { prog, cs, n, max_steps } => {
            let t = load(prog)?.term;
            let steps = max_steps.unwrap_or(cfg.depth);
            let rho = given_or_adversary(&t, cs.as_deref(), steps)?;
            let runs = sample_many(&t, &rho, steps, cfg.seed, *n, &cfg.eps)?;
            let plays: Vec<Value> = runs.iter().map(|r| json!({ "play": r.play.to_string(), "outcome": outcome(&r.outcome) })).collect();
            Ok((json!({ "counterstrategy": rho.to_string(), "plays": plays }), 0))
        }
        Command::Selftest { only } => selftest(only),
    }
}

fn given_or_adversary(t: &Term, cs: Option<&Path>, steps: usize) -> Result<Counterstrategy, CoreError> {
    match cs {
        Some(p) => load_counterstrategy(p),
        None => adversarial_rho(t, steps),
    }
}

fn outcome(o: &Outcome) -> &'static str {
    match o {
        Outcome::Failed => "Failed",
        Outcome::Exhausted => "Exhausted",
    }
}

fn trace(l: &Loaded, plays: &[String], cfg: &Config) -> Reply {
    let mut out = vec![];
    for text in plays {
        let s = match &l.sig {
            Some(sig) => Play::parse(text, sig)?,
            None => Play::parse_loose(text)?,
        };
        out.push(json!({ "play": s.to_string(), "value": interval(&trace_value(&l.term, &s, &cfg.eps)) }));
    }
    let payload = if out.len() == 1 { out.pop().unwrap() } else { json!({ "values": out }) };
    Ok((payload, 0))
}

fn support(t: &Term, omega: u64, cfg: &Config) -> Reply {
    let plays: Vec<Value> = support_enum(&MeasureView::of_term(t), cfg.depth, &cfg.eps, omega)?
        .into_iter()
        .map(|(s, v)| json!({ "play": s.to_string(), "value": interval(&v) }))
        .collect();
    Ok((json!({ "plays": plays }), 0))
}

fn verdict_code(v: &EquivVerdict) -> u8 {
    match v {
        EquivVerdict::Distinguished { .. } => 1,
        _ => 0,
    }
}

fn equiv(m: &Term, n: &Term, mode: Mode, cfg: &Config) -> Reply {
    match mode {
        Mode::Bisim => {
            let b = bisimilar(m, n)?;
            if !b.bisimilar {
                return Ok((json!({ "verdict": "NotBisimilar" }), 1));
            }
            let mut v = json!({ "verdict": "Bisimilar", "relation_size": b.relation.len() });
            if let Some(p) = bisim_proof(m, n)? {
                v["proof"] = proof(&p);
            }
            Ok((v, 0))
        }
        Mode::Trace => {
            let v: EquivVerdict = trace_equiv(m, n, cfg.depth, &cfg.eps, OMEGA_INPUTS)?.into();
            Ok((verdict(&v), verdict_code(&v)))
        }
        Mode::Tensor => {
            let opts = TensorOptions { rounds: cfg.rounds, depth: cfg.depth, eps: cfg.eps.clone(), ..TensorOptions::default() };
            let report = tensor_equiv_finitary(m, n, &opts)?;
            let mut v = verdict(&report.verdict);
            if let Some(il) = &report.interleaving {
                v["interleaving"] = json!({
                    "m": il.m,
                    "n": il.n,
                    "a": il.a.iter().map(rat).collect::<Vec<_>>(),
                    "b": il.b.iter().map(rat).collect::<Vec<_>>(),
                    "margins": il.margins.iter().map(|(x, y)| json!([rat(x), rat(y)])).collect::<Vec<_>>(),
                    "blocks": il.block_proofs.len(),
                    "blocks_replayed": il.block_proofs.iter().all(|p| p.replay().is_ok()),
                    "residual": rat(&il.residual),
                });
            }
            Ok((v, verdict_code(&report.verdict)))
        }
    }
}

fn normalize(l: &Loaded, form: Form, show: u64, cfg: &Config) -> Reply {
    let t = &l.term;
    if form == Form::Steady {
        if let Some(sig) = &l.sig {
            if !sig.is_finitary() {
                return Err(CoreError::SignatureNotFinitary("the signature has an ω-ary operation".into()));
            }
        }
    }
    let payload = match form {
        Form::Shallow => json!({ "term": shallow_nf(t, &cfg.eps)?.to_dsl() }),
        Form::Ff => json!({ "term": ff_nf(t)?.to_dsl() }),
        Form::Wf => json!({ "term": wf_nf(t, &cfg.eps)?.to_dsl() }),
        Form::Light => {
            let comps = light_components(&Arc::new(t.clone()));
            json!({
                "term": light_nf(t).to_dsl(),
                "components": (0..show).map(|n| comps.get(n).to_dsl()).collect::<Vec<_>>(),
            })
        }
        Form::Steady => {
            let f = steady_nf(t)?;
            certify_steady(&f, t, show, cfg.depth.min(8), &cfg.eps)?;
            json!({
                "term": f.term().to_dsl(),
                "components": (0..show).map(|n| f.components.get(n).to_dsl()).collect::<Vec<_>>(),
                "margins": (1..=show).map(|m| rat(&f.witness.get(m))).collect::<Vec<_>>(),
                "certified_prefixes": show,
            })
        }
    };
    Ok((payload, 0))
}

fn split(m: &Term, l: &Term, p: &str, cfg: &Config) -> Reply {
    let p = parse_rational(p).ok_or_else(|| CoreError::InvalidInput(format!("bad probability `{p}`")))?;
    let n = subsplit(m, l, &p, &cfg.eps)?;
    let back = Term::choice(p, l.clone(), n.clone());
    let check: EquivVerdict = trace_equiv(&back, m, cfg.depth, &cfg.eps, OMEGA_INPUTS)?.into();
    Ok((json!({ "term": n.to_dsl(), "check": verdict(&check) }), verdict_code(&check)))
}

fn impersonation(m: &Term, n: &Term, cfg: &Config) -> Reply {
    let cert = impersonate(m, n, cfg.rounds, &cfg.eps)?;
    let depth = cfg.depth.min(6);
    let rounds: Vec<EquivVerdict> = cert.check_rounds(depth, &cfg.eps, OMEGA_INPUTS)?.into_iter().map(Into::into).collect();
    let cancel: EquivVerdict = cert.check_cancellation(m, n, depth, &cfg.eps, OMEGA_INPUTS)?.into();
    let code = if rounds.iter().chain([&cancel]).any(|v| verdict_code(v) == 1) { 1 } else { 0 };
    let payload = json!({
        "rounds": cert.rounds,
        "components": cert.components.iter().map(|c| c.to_dsl()).collect::<Vec<_>>(),
        "solution_sizes": cert.solutions.iter().map(|q| q.size()).collect::<Vec<_>>(),
        "round_checks": rounds.iter().map(verdict).collect::<Vec<_>>(),
        "cancellation": verdict(&cancel),
    });
    Ok((payload, code))
}

fn batch(t: &Term, rho: &Counterstrategy, steps: usize, n: usize, cfg: &Config) -> Reply {
    let m = MeasureView::of_term(t);
    let cp = cont_prob_detailed(&m, rho, steps, &cfg.eps)?;
    let fm = fail_mass(&m, rho, steps, &cfg.eps)?;
    let runs = sample_many(t, rho, steps, cfg.seed, n, &cfg.eps)?;
    let failed = runs.iter().filter(|r| r.outcome == Outcome::Failed).count();
    let rounds: usize = runs.iter().map(|r| r.play.moves.len()).sum();
    let payload = json!({
        "counterstrategy": rho.to_string(),
        "continuation": cp.levels.iter().map(interval).collect::<Vec<_>>(),
        "failures": cp.fails.iter().map(interval).collect::<Vec<_>>(),
        "fail_mass": interval(&fm),
        "samples": { "n": n, "failed": failed, "exhausted": n - failed, "rounds": rounds },
    });
    Ok((payload, 0))
}

fn victory(t: &Term, rho: Option<&Counterstrategy>, steps: usize, cfg: &Config) -> Reply {
    let r = victorious(t, rho, steps, cfg.g, &cfg.eps)?;
    let w = MeasureView::of_term(t).weight();
    let evidence = r.fail_mass.lo >= &w - &cfg.eps;
    let payload = json!({
        "syntactic_certificate": r.syntactic,
        "given": r.given.as_ref().map(|v| v.iter().map(interval).collect::<Vec<_>>()),
        "adversarial": r.adversarial.iter().map(interval).collect::<Vec<_>>(),
        "adversary": r.adversary.to_string(),
        "fail_mass": interval(&r.fail_mass),
        "evidence": evidence,
    });
    Ok((payload, if r.syntactic || evidence { 0 } else { 2 }))
}

fn selftest(only: &[usize]) -> Reply {
    if let Some(bad) = only.iter().find(|i| !(1..=10).contains(*i)) {
        return Err(CoreError::InvalidInput(format!("no criterion {bad}")));
    }
    let ids: Vec<usize> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    let results: Vec<_> = ids.into_iter().map(acceptance::run).collect();
    for c in &results {
        eprintln!("{c}");
    }
    let passed = results.iter().all(|c| c.passed);
    let payload = json!({
        "passed": passed,
        "criteria": results.iter().map(|c| json!({ "id": c.id, "name": c.name, "passed": c.passed, "detail": c.detail })).collect::<Vec<_>>(),
    });
    Ok((payload, if passed { 0 } else { 1 }))
}
