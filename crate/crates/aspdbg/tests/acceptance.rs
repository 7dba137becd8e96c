//! Acceptance criteria 1-8. Prints one line per criterion and exits
//! non-zero if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aspdbg::cli::run_json;
use aspdbg::engine::{DebugInput, Engine};
use aspdbg::source::Sources;
use aspdbg_core::diagnosis::{Finding, SampleLimit, Session};
use aspdbg_core::instrument::{assemble_gamma, default_background, make_test_constraints};
use aspdbg_core::solver::{
    brute_force_answer_sets, check_coherence, enumerate_answer_sets, Coherence,
};
use aspdbg_core::{
    ground, parse_program, parse_test_case, Atom, GroundMode, GroundOptions, GroundProgram,
    Program, RuleId, TestCase,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn no_simplify(p: &Program) -> GroundProgram {
    ground(p, GroundOptions::mode(GroundMode::NoSimplify)).unwrap()
}

fn names(s: &Session, ids: &[aspdbg_core::AtomId]) -> Vec<String> {
    ids.iter().map(|a| s.atom(*a).to_string()).collect()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

/// Every element's removal restores coherence.
fn audit(s: &Session) -> bool {
    let r = &s.reason().facts;
    (0..r.len()).all(|i| {
        let mut rest = r.clone();
        rest.remove(i);
        check_coherence(s.current_ground(), &rest) == Coherence::Coherent
    })
}

struct Audit {
    checked: usize,
}

impl Audit {
    fn record(&mut self, s: &Session) -> Result<(), String> {
        if s.reason().minimal {
            self.checked += 1;
            ensure!(
                audit(s),
                "reason {:?} flagged minimal but is not",
                s.reason_atoms()
            );
        }
        Ok(())
    }
}

fn criterion_1(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let p = parse_program(support::COLORING).unwrap();
    let t = parse_test_case(support::COLORING_TEST).unwrap();
    let g = assemble_gamma(&p, &t, &default_background(&p)).unwrap();
    ensure!(
        check_coherence(&g.ground, &g.assumptions) == Coherence::Incoherent,
        "Γ with P_A is coherent"
    );
    let s = Session::start(&p, g, SampleLimit::default()).map_err(|e| e.to_string())?;
    let reason = names(&s, &s.reason().facts);
    ensure!(reason == ["_debug4(1,2,blue,red)"], "reason {reason:?}");
    ensure!(s.reason().minimal, "reason not flagged minimal");
    let findings = s.findings();
    let [Finding::Rule { rule, instances }] = findings.as_slice() else {
        return Err(format!("findings {findings:?}"));
    };
    ensure!(*rule == RuleId(4), "mapped to rule {rule}");
    let sub = instances
        .iter()
        .map(|i| i.substitution.to_string())
        .collect::<Vec<_>>();
    ensure!(sub == ["X=1, Y=2, C1=blue, C2=red"], "substitution {sub:?}");
    audit.record(&s)?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "R* = {{_debug4(1,2,blue,red)}} -> rule 4 [{sub:?}] in {elapsed:?}"
    ))
}

fn criterion_2(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let p = parse_program(support::P2).unwrap();
    let t = parse_test_case("assertTrue(a).").unwrap();
    let g = assemble_gamma(&p, &t, &BTreeSet::new()).unwrap();
    let s = Session::start(&p, g, SampleLimit::ALL).map_err(|e| e.to_string())?;
    audit.record(&s)?;
    let r0 = names(&s, &s.reason().facts);
    ensure!(
        r0 == ["_debug4", "_support(a)", "_support(b)"],
        "initial reason {r0:?}"
    );
    let pools: Vec<usize> = (0..3).map(|i| s.removal_models(i).len()).collect();
    ensure!(pools == [6, 6, 4], "pool sizes {pools:?}");
    let q: Vec<(String, usize, usize)> = s
        .queries()
        .iter()
        .map(|q| (s.atom(q.atom).to_string(), q.q_plus, q.q_minus))
        .collect();
    ensure!(
        q == [("b".to_string(), 8, 8), ("c".to_string(), 10, 6)],
        "queries {q:?}"
    );
    let s1 = s
        .answer(&Atom::prop("b"), true)
        .map_err(|e| e.to_string())?;
    audit.record(&s1)?;
    let r1 = names(&s1, &s1.reason().facts);
    ensure!(r1 == ["_support(a)", "_support(b)"], "after b=true {r1:?}");
    let s2 = s1
        .answer(&Atom::prop("c"), false)
        .map_err(|e| e.to_string())?;
    audit.record(&s2)?;
    let r2 = names(&s2, &s2.reason().facts);
    ensure!(r2 == ["_support(a)"], "after c=false {r2:?}");
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "pools 6/6/4, b 8/8, c 10/6, reasons 3 -> 2 -> 1 in {elapsed:?}"
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut models = 0;
    for i in 0..200 {
        let text = support::random_propositional(&mut rng, 15, 10);
        let g = no_simplify(&parse_program(&text).unwrap());
        ensure!(
            g.atoms.len() <= 15,
            "program {i} has {} atoms",
            g.atoms.len()
        );
        let mut ours = enumerate_answer_sets(&g, usize::MAX).models().to_vec();
        ours.sort();
        let oracle = brute_force_answer_sets(&g).map_err(|e| e.to_string())?;
        ensure!(ours == oracle, "program {i} disagrees:\n{text}");
        models += oracle.len();
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "200/200 agree ({models} answer sets) in {elapsed:?}"
    ))
}

fn random_pair(rng: &mut ChaCha8Rng) -> Option<(Program, TestCase)> {
    let p = parse_program(&support::random_nonground(rng, 4)).unwrap();
    let g = no_simplify(&p);
    let base: Vec<Atom> = g
        .herbrand_base()
        .into_iter()
        .map(|a| g.atoms.atom(a).clone())
        .collect();
    if base.is_empty() {
        return None;
    }
    let t = support::random_test(rng, &base);
    Some((p, t))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut pairs, mut failing) = (0, 0);
    while pairs < 100 {
        let Some((p, t)) = random_pair(&mut rng) else {
            continue;
        };
        pairs += 1;
        let mut with_test = p.clone();
        for c in make_test_constraints(&t) {
            with_test.push(c);
        }
        let g = no_simplify(&with_test);
        ensure!(g.atoms.len() <= 12, "{} ground atoms", g.atoms.len());
        let expected = brute_force_answer_sets(&g).unwrap().is_empty();
        let bg = if rng.gen_bool(0.5) {
            default_background(&p)
        } else {
            BTreeSet::new()
        };
        let gamma = assemble_gamma(&p, &t, &bg).unwrap();
        let got = check_coherence(&gamma.ground, &gamma.assumptions) == Coherence::Incoherent;
        ensure!(got == expected, "disagreement on\n{p}\n{t}");
        failing += usize::from(expected);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "100/100 agree ({failing} failing tests) in {elapsed:?}"
    ))
}

/// Sessions for criterion 5: each returned reason plus answers along a
/// random query path.
fn criterion_5(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut sessions, mut reasons, mut supersets, mut brute_checked) = (0, 0, 0, 0);
    while sessions < 50 {
        let Some((p, t)) = random_pair(&mut rng) else {
            continue;
        };
        let g = assemble_gamma(&p, &t, &default_background(&p)).unwrap();
        let Ok(mut s) = Session::start(&p, g, SampleLimit::default()) else {
            continue;
        };
        sessions += 1;
        loop {
            audit.record(&s)?;
            let r = s.reason().facts.clone();
            let pa = s.gamma().assumptions.clone();
            reasons += 1;
            for _ in 0..20 {
                let mut sup = r.clone();
                sup.extend(pa.iter().filter(|_| rng.gen_bool(0.5)));
                sup.sort();
                sup.dedup();
                ensure!(
                    s.is_reason(&sup),
                    "superset of a reason is coherent\n{p}\n{t}"
                );
                if s.current_ground().atoms.len() <= 12 {
                    let oracle = s.current_ground().with_facts(&sup);
                    ensure!(
                        brute_force_answer_sets(&oracle).unwrap().is_empty(),
                        "brute force finds an answer set for a superset\n{p}\n{t}"
                    );
                    brute_checked += 1;
                }
                supersets += 1;
            }
            let Some(q) = s.queries().choose(&mut rng) else {
                break;
            };
            s = s
                .apply_answer(q.atom, rng.gen_bool(0.5))
                .map_err(|e| e.to_string())?;
            if s.reason().facts.is_empty() {
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "50 sessions, {reasons} reasons, {supersets} supersets incoherent ({brute_checked} also by brute force) in {elapsed:?}"
    ))
}

fn criterion_6(audit: &Audit) -> Outcome {
    ensure!(audit.checked > 50, "only {} reasons audited", audit.checked);
    Ok(format!(
        "{} minimal reasons pass the removal check",
        audit.checked
    ))
}

/// Both sides of the size identity, and the ratio to `|ground(P)|`.
fn overhead(p: &Program, t: &TestCase) -> Result<(usize, usize, f64), String> {
    let bg = default_background(p);
    let gamma = assemble_gamma(p, t, &bg).unwrap();
    let base = &gamma.base_grounding;
    let in_bg = |r: &aspdbg_core::ground::GroundRule| r.origin.is_some_and(|id| bg.contains(&id));
    let grnd_p_minus_b = base.rules.iter().filter(|r| !in_bg(r)).count();
    let grnd_b = base.rules.iter().filter(|r| in_bg(r)).count();
    let b_p = base.herbrand_base().len();
    let a_d = gamma.instrumentation.debug_atoms.len();
    let a_s = gamma.instrumentation.support_atoms.len();
    let p_t = make_test_constraints(t).len();
    let formula = grnd_p_minus_b + b_p + 2 * (a_d + a_s) + grnd_b + p_t;
    let actual = gamma.ground.rules.len() + gamma.assumptions.len();
    ensure!(actual == formula, "|Γ| = {actual}, formula gives {formula}");
    Ok((
        actual,
        base.rules.len(),
        actual as f64 / base.rules.len() as f64,
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let p = parse_program(support::COLORING).unwrap();
    let t = parse_test_case(support::COLORING_TEST).unwrap();
    let (gamma, plain, ratio) = overhead(&p, &t)?;
    ensure!(ratio <= 5.0, "3-col ratio {ratio:.3}");
    let mut worst = ratio;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = rng.gen_range(3..=8);
        let p = support::coloring_instance(&support::random_graph(&mut rng, n));
        let t = parse_test_case("assertTrue(col(1,blue)).").unwrap();
        let (_, _, r) = overhead(&p, &t)?;
        ensure!(r <= 5.0, "ratio {r:.3} on\n{p}");
        worst = worst.max(r);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!(
        "3-col {gamma}/{plain} = {ratio:.3}; worst of 11 instances {worst:.3} <= 5; identity exact; {elapsed:?}"
    ))
}

fn replay() -> Vec<u8> {
    let mut sources = Sources::new();
    sources.add("p2.lp", support::P2);
    let engine = Engine::start(DebugInput::new(sources, "p2.test", "assertTrue(a).\n")).unwrap();
    let input = concat!(
        r#"{"kind":"answer","atom":"b","value":true,"seq":1}"#,
        "\n",
        r#"{"kind":"answer","atom":"c","value":false,"seq":2}"#,
        "\n",
        r#"{"kind":"undo","to_step":1,"seq":3}"#,
        "\n",
        r#"{"kind":"answer","atom":"c","value":false,"seq":4}"#,
        "\n",
        r#"{"kind":"stop","seq":5}"#,
        "\n"
    );
    let mut out = Vec::new();
    run_json(engine, input.as_bytes(), &mut out).unwrap();
    out
}

fn criterion_8() -> Outcome {
    let a = replay();
    let b = replay();
    ensure!(a == b, "protocol transcripts differ");
    let lines = a.split(|c| *c == b'\n').filter(|l| !l.is_empty()).count();
    Ok(format!(
        "two replays byte-identical ({} bytes, {lines} messages)",
        a.len()
    ))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let mut audit = Audit { checked: 0 };
    let results = [
        (
            1,
            "3-colorability golden session",
            guarded(|| criterion_1(&mut audit)),
        ),
        (2, "propositional golden session", guarded(|| criterion_2(&mut audit))),
        (3, "solver vs brute force", guarded(criterion_3)),
        (4, "coherence of Γ vs P ∪ P_T", guarded(criterion_4)),
        (
            5,
            "monotonicity of reasons",
            guarded(|| criterion_5(&mut audit)),
        ),
        (6, "minimality audit", guarded(|| criterion_6(&audit))),
        (7, "grounding overhead", guarded(criterion_7)),
        (8, "determinism", guarded(criterion_8)),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
