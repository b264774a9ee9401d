use std::sync::Arc;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use probstrat::equivalence::{bisimilar, check_law_soundness, trace_equiv, Law, TraceVerdict};
use probstrat::games::{adversarial_rho, cont_prob, cont_prob_detailed, extract_ff, sample_many, Counterstrategy, Outcome};
use probstrat::normalforms::{ff_nf, light_nf};
use probstrat::random::{random_instance, random_rewrite, random_term, Ops};
use probstrat::rational::{pow2_neg, rat};
use probstrat::semantics::{support_enum, trace_value, MeasureView};
use probstrat::{corpus, parse_program, parse_term, CoeffFamily, Play, PolyGeo, Rational, Symbol, Term};

const NOTWNF: &str = "sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }";

fn eps() -> Rational {
    pow2_neg(40)
}

fn term(seed: u64, depth: usize) -> Term {
    random_term(&mut ChaCha8Rng::seed_from_u64(seed), &Ops::default(), depth)
}

fn plays(t: &Term, depth: usize) -> Vec<Play> {
    support_enum(&MeasureView::of_term(t), depth, &eps(), 4).unwrap().into_iter().map(|(s, _)| s).collect()
}

fn exact(t: &Term, s: &Play) -> Rational {
    let v = trace_value(t, s, &eps());
    assert_eq!(v.lo, v.hi, "{s}");
    v.lo
}

fn ratio() -> impl Strategy<Value = Rational> {
    (1i64..=7, 2i64..=8).prop_filter("below one", |(n, d)| n < d).prop_map(|(n, d)| rat(n, d))
}

fn play_strategy() -> impl Strategy<Value = Play> {
    let names = prop::sample::select(vec!["Bye", "Happy", "a", "star", "c"]);
    prop::collection::vec((names, prop::option::of(0u64..5), prop::collection::vec(0u64..4, 0..2)), 0..5).prop_map(|steps| {
        let mut s = Play::empty();
        for (name, input, idx) in steps {
            let k = if idx.is_empty() { Symbol::new(name) } else { Symbol::indexed(name, idx) };
            s = s.with_output(k);
            match input {
                Some(i) => s = s.with_input(i),
                None => break,
            }
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tails_satisfy_the_recurrence(
        explicit in prop::collection::vec((0i64..4, 1i64..9), 0..4),
        poly in prop::collection::vec(0i64..4, 1..4),
        r in ratio(),
        m in 0u64..12,
    ) {
        let explicit: Vec<Rational> = explicit.into_iter().map(|(a, b)| rat(a, b)).collect();
        let pg = PolyGeo::new(poly.into_iter().map(|c| rat(c, 1)).collect(), r);
        let f = CoeffFamily::with_tail(explicit, pg);
        prop_assert_eq!(f.tail(m), f.coeff(m) + f.tail(m + 1));
        let partial: Rational = (0..m).map(|n| f.coeff(n)).sum();
        prop_assert_eq!(f.total(), partial + f.tail(m));
        prop_assert!(f.tail(m + 1) <= f.tail(m));
    }

    #[test]
    fn plays_print_and_parse_back(s in play_strategy()) {
        prop_assert_eq!(Play::parse_loose(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn terms_print_and_parse_back(seed in any::<u64>()) {
        let t = term(seed, 4);
        prop_assert_eq!(parse_term(&t.to_dsl()).unwrap(), t);
    }

    #[test]
    fn mass_is_conserved_on_every_input(seed in any::<u64>()) {
        let t = term(seed, 4);
        let ops = Ops::default();
        prop_assert_eq!(exact(&t, &Play::empty()), Rational::one());
        for s in plays(&t, 3) {
            let Some(k) = &s.last else { continue };
            let arity = ops.0.iter().find(|(o, _)| o == k).unwrap().1 as u64;
            let here = exact(&t, &s);
            for i in 0..arity {
                let si = s.with_input(i);
                let below: Rational = plays(&t, 4).into_iter().filter(|p| p.last.is_some() && p.moves == si.moves).map(|p| exact(&t, &p)).sum();
                prop_assert_eq!(&below, &here, "{}", si);
            }
        }
    }

    #[test]
    fn laws_are_sound(seed in any::<u64>(), which in 0usize..Law::ALL.len()) {
        let law = Law::ALL[which];
        let (l, r) = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &Ops::default(), law, 2);
        prop_assert!(law.holds(&l, &r));
        prop_assert_eq!(check_law_soundness(law, &l, &r, 4).unwrap(), None);
    }

    #[test]
    fn convex_rewrites_stay_bisimilar(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_term(&mut rng, &Ops::default(), 3);
        let (_, u) = random_rewrite(&mut rng, &Ops::default(), &t, false);
        prop_assert!(bisimilar(&t, &u).unwrap().bisimilar);
        let v = trace_equiv(&t, &u, 4, &eps(), 4).unwrap();
        prop_assert!(v.is_equivalent(), "{:?}", v);
    }

    #[test]
    fn normal_forms_keep_traces(seed in any::<u64>()) {
        let t = term(seed, 3);
        let ff = ff_nf(&t).unwrap();
        let light = light_nf(&t);
        for s in plays(&t, 4) {
            prop_assert_eq!(exact(&ff, &s), exact(&t, &s));
            let v = trace_value(&light, &s, &eps());
            let want = exact(&t, &s);
            prop_assert!(v.lo <= want && want <= v.hi && &v.hi - &v.lo <= eps(), "{}", s);
        }
        prop_assert_eq!(ff_nf(&ff).unwrap(), ff);
    }

    #[test]
    fn continuation_follows_the_recurrence(seed in any::<u64>(), rho in 0usize..3) {
        let t = term(seed, 5);
        let rho = match rho { 0 => Counterstrategy::constant(0), 1 => Counterstrategy::constant(1), _ => Counterstrategy::round_robin() };
        let cp = cont_prob_detailed(&MeasureView::of_term(&t), &rho, 7, &eps()).unwrap();
        for k in 0..7 {
            prop_assert_eq!(cp.levels[k].clone(), cp.fails[k].clone() + cp.levels[k + 1].clone());
            prop_assert!(cp.levels[k + 1].hi <= cp.levels[k].lo);
        }
        // a generator-free term of depth d stops within d rounds
        prop_assert!(cp.levels[6].hi.is_zero());
    }

    #[test]
    fn continuation_is_linear_in_choice(a in any::<u64>(), b in any::<u64>(), p in ratio()) {
        let (m, n) = (term(a, 4), term(b, 4));
        let mix = Term::choice(p.clone(), m.clone(), n.clone());
        let rho = Counterstrategy::round_robin();
        let at = |t: &Term| cont_prob(&MeasureView::of_term(t), &rho, 5, &eps()).unwrap();
        let (pm, pn, px) = (at(&m), at(&n), at(&mix));
        for k in 0..=5 {
            prop_assert_eq!(&px[k].lo, &(&p * &pm[k].lo + (Rational::one() - &p) * &pn[k].lo));
        }
    }

    #[test]
    fn a_request_shifts_continuation_by_one_round(a in any::<u64>(), b in any::<u64>()) {
        let (m, n) = (term(a, 4), term(b, 4));
        let t = Term::req(Symbol::new("f"), vec![Arc::new(m.clone()), Arc::new(n)]);
        let rho = Counterstrategy::constant(0);
        let pt = cont_prob(&MeasureView::of_term(&t), &rho, 6, &eps()).unwrap();
        let pm = cont_prob(&MeasureView::of_term(&m), &rho, 5, &eps()).unwrap();
        for k in 0..=5 {
            prop_assert_eq!(&pt[k + 1], &pm[k]);
        }
    }

    #[test]
    fn extraction_is_dominated(seed in any::<u64>(), p in ratio(), x in ratio()) {
        let head = term(seed, 2).to_dsl();
        let t = parse_term(&format!("({head}) +[{p}] f({NOTWNF}, {head})")).unwrap();
        let (lam, tau) = extract_ff(&t, &x).unwrap();
        prop_assert!(lam >= x);
        prop_assert!(tau.is_generator_free());
        for s in plays(&tau, 4) {
            prop_assert!(&lam * exact(&tau, &s) <= trace_value(&t, &s, &eps()).hi, "{}", s);
        }
    }

    #[test]
    fn the_adversary_cannot_outlast_a_finite_term(seed in any::<u64>()) {
        let t = term(seed, 4);
        let rho = adversarial_rho(&t, 6).unwrap();
        let p = cont_prob(&MeasureView::of_term(&t), &rho, 10, &eps()).unwrap();
        prop_assert!(p[10].hi <= pow2_neg(8));
    }
}

#[test]
fn corpus_programs_print_and_parse_back() {
    for (sig, prog) in [
        (corpus::HAPPY_SIG, corpus::HAPPY),
        (corpus::TRACE1_SIG, corpus::TRACE1_M),
        (corpus::TRACE2_SIG, corpus::TRACE2_N),
        (corpus::NOTWNF_SIG, corpus::NOTWNF),
        (corpus::INF_SIG, corpus::INF),
    ] {
        let (sig, t) = corpus::load(sig, prog).unwrap();
        let back = parse_program(&t.to_dsl(), &sig, corpus::G).unwrap();
        for s in plays(&t, 3) {
            assert_eq!(trace_value(&back, &s, &eps()), trace_value(&t, &s, &eps()), "{s}");
        }
    }
}

#[test]
fn exhausted_frequency_matches_continuation() {
    let t = parse_term("Happy(Bye, Happy(Bye, Bye) +[1/2] Bye) +[3/4] sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
    let (n, steps) = (10_000, 30);
    for (rho, m) in [(Counterstrategy::round_robin(), steps), (Counterstrategy::constant(0), 2)] {
        let runs = sample_many(&t, &rho, m, 11, n, &pow2_neg(40)).unwrap();
        let freq = runs.iter().filter(|r| r.outcome == Outcome::Exhausted).count() as f64 / n as f64;
        let p = cont_prob(&MeasureView::of_term(&t), &rho, m, &pow2_neg(60)).unwrap()[m].lo.clone();
        let p = num_traits::ToPrimitive::to_f64(&p).unwrap();
        let sd = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
        assert!((freq - p).abs() <= 4.0 * sd, "{m} steps: {freq} vs {p}");
        assert!(!runs.iter().any(|r| r.outcome == Outcome::Failed && r.play.last.is_none()));
    }
}

#[test]
fn trace_equiv_separates_unequal_choices() {
    let m = parse_term("Happy(Bye, Bye) +[1/3] Bye").unwrap();
    let n = parse_term("Happy(Bye, Bye) +[1/2] Bye").unwrap();
    assert!(matches!(trace_equiv(&m, &n, 2, &eps(), 4).unwrap(), TraceVerdict::Distinguished { .. }));
    assert!(!Zero::is_zero(&exact(&m, &Play::parse_loose("Bye").unwrap())));
}
