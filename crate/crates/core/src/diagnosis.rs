//! Interactive diagnosis over a grounded debugging program.
//!
//! A [`Session`] holds `Γ \ P_A` plus the constraints injected by the
//! user's answers. Each step minimizes a reason of incoherence with
//! QuickXplain, samples answer sets of the reason with one element
//! removed, and ranks the original atoms by how evenly they split those
//! samples. Sessions are immutable: answering or undoing returns a new one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Atom, Program, RuleId, Substitution};
use crate::ground::{AtomId, GroundProgram, GroundRule};
use crate::instrument::{Gamma, Instrumentation};
use crate::solver::{check_coherence, enumerate_answer_sets, Coherence, Interpretation};

/// Default number of answer sets sampled per reason element.
pub const DEFAULT_SAMPLE_LIMIT: usize = 10;

/// Answer sets sampled per removed reason element. `None` samples all.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleLimit(pub Option<usize>);

impl Default for SampleLimit {
    fn default() -> Self {
        SampleLimit(Some(DEFAULT_SAMPLE_LIMIT))
    }
}

impl SampleLimit {
    pub const ALL: SampleLimit = SampleLimit(None);

    fn cap(self) -> usize {
        self.0.unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reason {
    /// Elements of `P_A`, in minimization order.
    pub facts: Vec<AtomId>,
    pub minimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub atom: AtomId,
    pub q_plus: usize,
    pub q_minus: usize,
    pub score: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub substitution: Substitution,
    /// The instantiated source rule.
    pub ground_instance: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    /// Instances of a source rule taking part in the reason.
    Rule {
        rule: RuleId,
        instances: Vec<RuleInstance>,
    },
    /// An atom that cannot be supported; the rules defining its predicate
    /// are the candidates.
    Unsupported {
        atom: Atom,
        candidate_rules: Vec<RuleId>,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Rule { rule, instances } => {
                write!(f, "rule {rule}")?;
                for i in instances {
                    write!(f, "\n  {}  [{}]", i.ground_instance, i.substitution)?;
                }
                Ok(())
            }
            Finding::Unsupported {
                atom,
                candidate_rules,
            } => {
                write!(f, "atom {atom} is unsupported; candidate rules:")?;
                if candidate_rules.is_empty() {
                    write!(f, " none")?;
                }
                for r in candidate_rules {
                    write!(f, " {r}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionStatus {
    /// Queries remain to be answered.
    Open,
    /// The reason is pinned down, or no informative query is left.
    Finished,
    /// The answers rule out every candidate fix.
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosisError {
    /// `Γ` with all of `P_A` is coherent: there is nothing to debug.
    TestPassed,
    AlreadyConstrained(Atom),
    NotAnOriginalAtom(Atom),
    UndoOutOfRange {
        to_step: usize,
        steps: usize,
    },
}

impl fmt::Display for DiagnosisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagnosisError::TestPassed => {
                f.write_str("test passed: program coherent with assertions")
            }
            DiagnosisError::AlreadyConstrained(a) => write!(f, "atom already constrained: {a}"),
            DiagnosisError::NotAnOriginalAtom(a) => write!(f, "not an atom of the program: {a}"),
            DiagnosisError::UndoOutOfRange { to_step, steps } => {
                write!(f, "undo step {to_step} out of range (0..={steps})")
            }
        }
    }
}

/// `:- not q` for `true`, `:- q` for `false`.
fn answer_constraint(atom: AtomId, value: bool) -> GroundRule {
    if value {
        GroundRule::constraint(Vec::new(), alloc::vec![atom])
    } else {
        GroundRule::constraint(alloc::vec![atom], Vec::new())
    }
}

/// Answer sets of `gamma` with the facts `with`, at most `cap`.
fn sample(gamma: &GroundProgram, with: &[AtomId], cap: usize) -> Vec<Interpretation> {
    enumerate_answer_sets(&gamma.with_facts(with), cap)
        .models()
        .to_vec()
}

fn incoherent(gamma: &GroundProgram, facts: &[AtomId]) -> bool {
    check_coherence(gamma, facts) == Coherence::Incoherent
}

/// QuickXplain over `candidates`, assuming `gamma ∪ candidates` is
/// incoherent. Earlier elements are preferred.
pub fn quickxplain(gamma: &GroundProgram, candidates: &[AtomId]) -> Vec<AtomId> {
    fn qx(
        g: &GroundProgram,
        background: &mut Vec<AtomId>,
        delta_nonempty: bool,
        c: &[AtomId],
    ) -> Vec<AtomId> {
        if delta_nonempty && incoherent(g, background) {
            return Vec::new();
        }
        if c.len() == 1 {
            return c.to_vec();
        }
        let (c1, c2) = c.split_at(c.len() / 2);
        let mark = background.len();
        background.extend_from_slice(c1);
        let d2 = qx(g, background, !c1.is_empty(), c2);
        background.truncate(mark);
        background.extend_from_slice(&d2);
        let d1 = qx(g, background, !d2.is_empty(), c1);
        background.truncate(mark);
        let mut out = d1;
        out.extend(d2);
        out
    }
    if candidates.is_empty() || incoherent(gamma, &[]) {
        return Vec::new();
    }
    let mut out = qx(gamma, &mut Vec::new(), false, candidates);
    let rank: BTreeMap<AtomId, usize> = candidates
        .iter()
        .enumerate()
        .map(|(i, a)| (*a, i))
        .collect();
    out.sort_by_key(|a| rank[a]);
    out
}

/// Maps reason atoms back to the rules of `p`.
pub fn map_to_source(reason: &[Atom], instr: &Instrumentation, p: &Program) -> Vec<Finding> {
    let mut rules: BTreeMap<RuleId, Vec<RuleInstance>> = BTreeMap::new();
    let mut order: Vec<RuleId> = Vec::new();
    let mut unsupported: Vec<Finding> = Vec::new();
    for atom in reason {
        if let Some((id, sub)) = instr.rule_index.get(atom) {
            let Some(rule) = p.rule(*id) else { continue };
            let instance = RuleInstance {
                substitution: sub.clone(),
                ground_instance: rule.substitute(sub).to_string(),
            };
            let entry = rules.entry(*id).or_insert_with(|| {
                order.push(*id);
                Vec::new()
            });
            if !entry.contains(&instance) {
                entry.push(instance);
            }
        } else if let Some(a) = instr.support_index.get(atom) {
            let candidate_rules = p
                .rules
                .iter()
                .filter(|r| {
                    r.head
                        .iter()
                        .any(|h| h.predicate == a.predicate && h.arity() == a.arity())
                })
                .map(|r| r.id)
                .collect();
            unsupported.push(Finding::Unsupported {
                atom: a.clone(),
                candidate_rules,
            });
        }
    }
    let mut out: Vec<Finding> = order
        .into_iter()
        .map(|id| Finding::Rule {
            rule: id,
            instances: rules.remove(&id).unwrap_or_default(),
        })
        .collect();
    out.extend(unsupported);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    initial: Gamma,
    /// `Γ \ P_A` plus one constraint per answer.
    gamma: GroundProgram,
    answered: Vec<(AtomId, bool)>,
    reason: Reason,
    queries: Vec<Query>,
    status: SessionStatus,
    sample_limit: SampleLimit,
    program: Program,
}

impl Session {
    /// Opens a session on the original program `p` and its `gamma`.
    pub fn start(
        p: &Program,
        gamma: Gamma,
        sample_limit: SampleLimit,
    ) -> Result<Self, DiagnosisError> {
        if !incoherent(&gamma.ground, &gamma.assumptions) {
            return Err(DiagnosisError::TestPassed);
        }
        let mut s = Session {
            gamma: gamma.ground.clone(),
            initial: gamma,
            answered: Vec::new(),
            reason: Reason {
                facts: Vec::new(),
                minimal: false,
            },
            queries: Vec::new(),
            status: SessionStatus::Open,
            sample_limit,
            program: p.clone(),
        };
        s.recompute();
        Ok(s)
    }

    fn recompute(&mut self) {
        if incoherent(&self.gamma, &[]) {
            self.reason = Reason {
                facts: Vec::new(),
                minimal: true,
            };
            self.queries = Vec::new();
            self.status = SessionStatus::Inconsistent;
            return;
        }
        self.reason = self.minimize_reason();
        self.queries = self.compute_queries();
        let pinned = self.reason.facts.len() == 1 && self.findings().len() == 1;
        self.status = if self.queries.is_empty() || pinned {
            SessionStatus::Finished
        } else {
            SessionStatus::Open
        };
    }

    pub fn gamma(&self) -> &Gamma {
        &self.initial
    }

    /// `Γ \ P_A` with the answer constraints.
    pub fn current_ground(&self) -> &GroundProgram {
        &self.gamma
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn reason(&self) -> &Reason {
        &self.reason
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn answered(&self) -> &[(AtomId, bool)] {
        &self.answered
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn is_finished(&self) -> bool {
        self.status != SessionStatus::Open
    }

    pub fn sample_limit(&self) -> SampleLimit {
        self.sample_limit
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        self.gamma.atoms.atom(id)
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.gamma.atoms.get(atom)
    }

    pub fn reason_atoms(&self) -> Vec<Atom> {
        self.reason
            .facts
            .iter()
            .map(|a| self.atom(*a).clone())
            .collect()
    }

    /// Whether `facts` with the current constraints is incoherent.
    pub fn is_reason(&self, facts: &[AtomId]) -> bool {
        incoherent(&self.gamma, facts)
    }

    /// A minimal reason, found by QuickXplain over `P_A` in its fixed
    /// order, then checked element by element.
    pub fn minimize_reason(&self) -> Reason {
        let facts = quickxplain(&self.gamma, &self.initial.assumptions);
        let minimal = self.audit_minimal(&facts);
        Reason { facts, minimal }
    }

    /// True if removing any single element of `facts` restores coherence.
    pub fn audit_minimal(&self, facts: &[AtomId]) -> bool {
        (0..facts.len()).all(|i| {
            let mut rest = facts.to_vec();
            rest.remove(i);
            !self.is_reason(&rest)
        })
    }

    /// Answer sets of the current reason with element `i` removed.
    pub fn removal_models(&self, i: usize) -> Vec<Interpretation> {
        let mut rest = self.reason.facts.clone();
        rest.remove(i);
        sample(&self.gamma, &rest, self.sample_limit.cap())
    }

    /// Ranked queries for the current reason.
    pub fn compute_queries(&self) -> Vec<Query> {
        let mut pool: BTreeSet<Interpretation> = BTreeSet::new();
        for i in 0..self.reason.facts.len() {
            pool.extend(self.removal_models(i));
        }
        let excluded: BTreeSet<AtomId> = self
            .initial
            .test
            .iter()
            .chain(&self.answered)
            .map(|(a, _)| *a)
            .collect();
        let mut out: Vec<Query> = self
            .initial
            .herbrand_base
            .iter()
            .filter(|a| !excluded.contains(a))
            .filter_map(|&atom| {
                let q_plus = pool.iter().filter(|m| m.contains(atom)).count();
                let q_minus = pool.len() - q_plus;
                (q_plus > 0 && q_minus > 0).then(|| Query {
                    atom,
                    q_plus,
                    q_minus,
                    score: q_plus.abs_diff(q_minus),
                })
            })
            .collect();
        out.sort_by_key(|q| (q.score, q.atom));
        out
    }

    /// The current reason in terms of source rules.
    pub fn findings(&self) -> Vec<Finding> {
        map_to_source(
            &self.reason_atoms(),
            &self.initial.instrumentation,
            &self.program,
        )
    }

    /// Records that `atom` is `value` in the intended answer set.
    pub fn apply_answer(&self, atom: AtomId, value: bool) -> Result<Session, DiagnosisError> {
        let a = self.atom(atom).clone();
        if !self.initial.herbrand_base.contains(&atom) {
            return Err(DiagnosisError::NotAnOriginalAtom(a));
        }
        let constrained = self
            .initial
            .test
            .iter()
            .chain(&self.answered)
            .any(|(x, _)| *x == atom);
        if constrained {
            return Err(DiagnosisError::AlreadyConstrained(a));
        }
        let mut next = self.clone();
        next.gamma.rules.push(answer_constraint(atom, value));
        next.answered.push((atom, value));
        next.recompute();
        Ok(next)
    }

    /// [`Session::apply_answer`] by atom.
    pub fn answer(&self, atom: &Atom, value: bool) -> Result<Session, DiagnosisError> {
        match self.atom_id(atom) {
            Some(id) => self.apply_answer(id, value),
            None => Err(DiagnosisError::NotAnOriginalAtom(atom.clone())),
        }
    }

    /// Keeps the first `to_step` answers and replays them from the start.
    pub fn undo(&self, to_step: usize) -> Result<Session, DiagnosisError> {
        if to_step > self.answered.len() {
            return Err(DiagnosisError::UndoOutOfRange {
                to_step,
                steps: self.answered.len(),
            });
        }
        let mut s = Session::start(&self.program, self.initial.clone(), self.sample_limit)?;
        for (atom, value) in &self.answered[..to_step] {
            s = s.apply_answer(*atom, *value)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::{assemble_gamma, support_atom};
    use crate::parser::{parse_program, parse_test_case};
    use alloc::vec;

    const P2: &str = "a :- c. b :- not c. c :- not b. :- c, not b.";

    fn p2_session(limit: SampleLimit) -> Session {
        let p = parse_program(P2).unwrap();
        let t = parse_test_case("assertTrue(a).").unwrap();
        let g = assemble_gamma(&p, &t, &BTreeSet::new()).unwrap();
        Session::start(&p, g, limit).unwrap()
    }

    fn names(s: &Session, ids: &[AtomId]) -> Vec<String> {
        ids.iter().map(|a| s.atom(*a).to_string()).collect()
    }

    #[test]
    fn p2_reason_and_queries() {
        let s = p2_session(SampleLimit::ALL);
        assert_eq!(
            names(&s, &s.reason().facts),
            ["_debug4", "_support(a)", "_support(b)"]
        );
        assert!(s.reason().minimal);
        let sizes: Vec<usize> = (0..3).map(|i| s.removal_models(i).len()).collect();
        assert_eq!(sizes, [6, 6, 4]);
        let q: Vec<(String, usize, usize, usize)> = s
            .queries()
            .iter()
            .map(|q| (s.atom(q.atom).to_string(), q.q_plus, q.q_minus, q.score))
            .collect();
        assert_eq!(q, [("b".to_string(), 8, 8, 0), ("c".to_string(), 10, 6, 4)]);
        assert_eq!(s.status(), SessionStatus::Open);
    }

    #[test]
    fn p2_answers_shrink_reason() {
        let s = p2_session(SampleLimit::default());
        let s1 = s.answer(&Atom::prop("b"), true).unwrap();
        assert_eq!(
            names(&s1, &s1.reason().facts),
            ["_support(a)", "_support(b)"]
        );
        let s2 = s1.answer(&Atom::prop("c"), false).unwrap();
        assert_eq!(names(&s2, &s2.reason().facts), ["_support(a)"]);
        assert!(s2.is_finished());
        assert_eq!(
            s2.findings(),
            vec![Finding::Unsupported {
                atom: Atom::prop("a"),
                candidate_rules: vec![RuleId(1)]
            }]
        );
        assert_eq!(s2.undo(0).unwrap(), s);
        assert_eq!(s2.undo(1).unwrap(), s1);
        assert_eq!(s2.undo(2).unwrap(), s2);
        assert_eq!(
            s2.undo(3).unwrap_err(),
            DiagnosisError::UndoOutOfRange {
                to_step: 3,
                steps: 2
            }
        );
    }

    #[test]
    fn constrained_atoms_are_rejected() {
        let s = p2_session(SampleLimit::default());
        let err = s.answer(&Atom::prop("a"), true).unwrap_err();
        assert_eq!(err.to_string(), "atom already constrained: a");
        let s1 = s.answer(&Atom::prop("b"), true).unwrap();
        assert!(s1.answer(&Atom::prop("b"), false).is_err());
        assert!(matches!(
            s.answer(&Atom::prop("_debug1"), true),
            Err(DiagnosisError::NotAnOriginalAtom(_))
        ));
    }

    #[test]
    fn is_reason_examples() {
        let s = p2_session(SampleLimit::default());
        let id = |n: &str| s.atom_id(&support_atom(&Atom::prop(n))).unwrap();
        let d4 = s.atom_id(&Atom::prop("_debug4")).unwrap();
        assert!(s.is_reason(&[d4, id("a"), id("b")]));
        assert!(!s.is_reason(&[d4, id("a")]));
        assert!(s.is_reason(&s.gamma().assumptions));
    }

    #[test]
    fn passing_test_is_reported() {
        let p = parse_program(P2).unwrap();
        let t = parse_test_case("assertTrue(b).").unwrap();
        let g = assemble_gamma(&p, &t, &BTreeSet::new()).unwrap();
        assert_eq!(
            Session::start(&p, g, SampleLimit::default()).unwrap_err(),
            DiagnosisError::TestPassed
        );
    }

    #[test]
    fn contradicting_background_is_inconsistent() {
        let p = parse_program("e. a :- e.").unwrap();
        let t = parse_test_case("assertFalse(a).").unwrap();
        let bg = crate::instrument::default_background(&p);
        let g = assemble_gamma(&p, &t, &bg).unwrap();
        let s = Session::start(&p, g, SampleLimit::default()).unwrap();
        assert_eq!(names(&s, &s.reason().facts), ["_debug2"]);
        assert_eq!(s.status(), SessionStatus::Finished);
        let s = s.answer(&Atom::prop("e"), false).unwrap();
        assert_eq!(s.status(), SessionStatus::Inconsistent);
        assert!(s.reason().facts.is_empty());
        assert!(s.findings().is_empty());
    }

    #[test]
    fn sample_cap_bounds_counts() {
        let s = p2_session(SampleLimit(Some(1)));
        for q in s.queries() {
            assert!(q.q_plus + q.q_minus <= s.reason().facts.len());
        }
    }

    #[test]
    fn empty_reason_has_no_findings() {
        let instr = Instrumentation::default();
        assert!(map_to_source(&[], &instr, &Program::new()).is_empty());
    }
}
