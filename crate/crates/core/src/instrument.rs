//! Debugging-program construction.
//!
//! Every non-background rule `r` gets a marker atom `_debug<id>(vars)` in
//! its body, and every atom `a` of the Herbrand base gets a rule
//! `a :- not _support(a)`. The extended program adds a choice rule per
//! marker and supporting atom, so that asserting any subset of them as
//! facts selects which rules are active. The test case becomes one
//! constraint per asserted literal.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{
    Atom, BodyElement, Literal, Program, Rule, RuleId, Substitution, Term, DEBUG_PREFIX,
    SUPPORT_PREDICATE,
};
use crate::ground::{ground, AtomId, GroundError, GroundMode, GroundOptions, GroundProgram};
use crate::parser::TestCase;

/// `_debug<id>(values)` for a rule and a ground tuple of its variables.
pub fn debug_atom(rule: RuleId, values: &[Term]) -> Atom {
    Atom::new(&format!("{DEBUG_PREFIX}{}", rule.0), values.to_vec())
}

/// `_support(a)`.
pub fn support_atom(atom: &Atom) -> Atom {
    Atom::new(SUPPORT_PREDICATE, alloc::vec![atom.to_term()])
}

/// The marker and supporting atoms of a debugging program and what they
/// stand for.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instrumentation {
    /// Markers, ordered by rule id then by substitution.
    pub debug_atoms: Vec<Atom>,
    /// Supporting atoms, ordered by the atom they support.
    pub support_atoms: Vec<Atom>,
    pub rule_index: BTreeMap<Atom, (RuleId, Substitution)>,
    pub support_index: BTreeMap<Atom, Atom>,
}

impl Instrumentation {
    /// `A^D` followed by `A^S`: the order in which reasons are minimized.
    pub fn assumable(&self) -> impl Iterator<Item = &Atom> {
        self.debug_atoms.iter().chain(&self.support_atoms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstrumentError {
    Ground(GroundError),
    UnknownAssertedAtom(Atom),
    UnknownBackgroundRule(RuleId),
}

impl fmt::Display for InstrumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstrumentError::Ground(e) => e.fmt(f),
            InstrumentError::UnknownAssertedAtom(a) => {
                write!(f, "asserted atom has no occurrence in the program: {a}")
            }
            InstrumentError::UnknownBackgroundRule(id) => {
                write!(f, "background rule {id} does not exist")
            }
        }
    }
}

impl From<GroundError> for InstrumentError {
    fn from(e: GroundError) -> Self {
        InstrumentError::Ground(e)
    }
}

/// `:- not a.` for `assertTrue(a)`, `:- a.` for `assertFalse(a)`.
pub fn make_test_constraints(t: &TestCase) -> Vec<Rule> {
    t.asserted
        .iter()
        .map(|l| Rule::constraint(alloc::vec![BodyElement::Literal(l.complement())]))
        .collect()
}

/// Ids of all facts.
pub fn default_background(p: &Program) -> BTreeSet<RuleId> {
    p.rules
        .iter()
        .filter(|r| r.is_fact())
        .map(|r| r.id)
        .collect()
}

/// Checks an explicit background list against the rule ids of `p`.
pub fn validate_background(p: &Program, ids: &BTreeSet<RuleId>) -> Result<(), InstrumentError> {
    match ids.iter().find(|id| p.rule(**id).is_none()) {
        Some(bad) => Err(InstrumentError::UnknownBackgroundRule(*bad)),
        None => Ok(()),
    }
}

/// A debugging program with its instrumentation. The original rules keep
/// their ids; support rules follow them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebuggingProgram {
    pub program: Program,
    pub instrumentation: Instrumentation,
    /// Ground instances of `p` in no-simplify mode, which fix `A^D` and the
    /// Herbrand base.
    pub base_grounding: GroundProgram,
}

pub fn build_debugging_program(
    p: &Program,
    background: &BTreeSet<RuleId>,
) -> Result<DebuggingProgram, InstrumentError> {
    build_debugging_program_with(p, background, GroundOptions::default().budget)
}

pub fn build_debugging_program_with(
    p: &Program,
    background: &BTreeSet<RuleId>,
    budget: usize,
) -> Result<DebuggingProgram, InstrumentError> {
    validate_background(p, background)?;
    let base = ground(
        p,
        GroundOptions {
            mode: GroundMode::NoSimplify,
            budget,
        },
    )?;

    let mut out = Program {
        rules: Vec::new(),
        background: background.clone(),
        fresh_counter: p.fresh_counter,
    };
    for rule in &p.rules {
        let mut r = rule.clone();
        if !background.contains(&rule.id) {
            let vars: Vec<Term> = rule.variables().into_iter().map(Term::var).collect();
            r.body.push(BodyElement::Literal(Literal::pos(debug_atom(
                rule.id, &vars,
            ))));
        }
        out.push(r);
    }

    let mut instr = Instrumentation::default();
    let mut debug: Vec<(RuleId, Vec<Term>, Substitution)> = Vec::new();
    for gr in &base.rules {
        let Some(origin) = gr.origin else { continue };
        if background.contains(&origin) {
            continue;
        }
        let values: Vec<Term> = gr.substitution.values().cloned().collect();
        debug.push((origin, values, gr.substitution.clone()));
    }
    debug.sort();
    debug.dedup();
    for (origin, values, sub) in debug {
        let atom = debug_atom(origin, &values);
        if instr
            .rule_index
            .insert(atom.clone(), (origin, sub))
            .is_none()
        {
            instr.debug_atoms.push(atom);
        }
    }

    let mut herbrand: Vec<Atom> = base
        .herbrand_base()
        .into_iter()
        .map(|id| base.atoms.atom(id).clone())
        .collect();
    herbrand.sort();
    for a in herbrand {
        let s = support_atom(&a);
        out.push(Rule::new(
            alloc::vec![a.clone()],
            alloc::vec![BodyElement::Literal(Literal::neg(s.clone()))],
        ));
        instr.support_index.insert(s.clone(), a);
        instr.support_atoms.push(s);
    }

    Ok(DebuggingProgram {
        program: out,
        instrumentation: instr,
        base_grounding: base,
    })
}

/// Adds one choice rule per marker and supporting atom.
pub fn extend_debugging_program(d: &Program, instr: &Instrumentation) -> Program {
    let mut out = d.clone();
    for a in instr.assumable() {
        out.push_choice(a.clone(), Vec::new(), Default::default())
            .expect("instrumentation atoms are ground");
    }
    out
}

/// The ground program `Γ \ P_A` together with everything a session needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gamma {
    /// Ground extended debugging program plus test constraints.
    pub ground: GroundProgram,
    /// Extended debugging program plus test constraints, before grounding.
    pub program: Program,
    pub instrumentation: Instrumentation,
    /// `P_A` as atom ids of `ground`, in minimization order.
    pub assumptions: Vec<AtomId>,
    /// Asserted atoms with their expected truth value.
    pub test: Vec<(AtomId, bool)>,
    /// Herbrand base of the original program, as ids of `ground`.
    pub herbrand_base: Vec<AtomId>,
    /// Ground instances of the original program (no-simplify).
    pub base_grounding: GroundProgram,
    /// Number of test constraints appended to `program`.
    pub test_constraints: usize,
}

/// Builds and grounds `D*_P ∪ P_T`, keeping `P_A` apart.
pub fn assemble_gamma(
    p: &Program,
    t: &TestCase,
    background: &BTreeSet<RuleId>,
) -> Result<Gamma, InstrumentError> {
    assemble_gamma_with(p, t, background, GroundOptions::default().budget)
}

pub fn assemble_gamma_with(
    p: &Program,
    t: &TestCase,
    background: &BTreeSet<RuleId>,
    budget: usize,
) -> Result<Gamma, InstrumentError> {
    let debugging = build_debugging_program_with(p, background, budget)?;
    let base = &debugging.base_grounding;
    for l in &t.asserted {
        let known = base
            .atoms
            .get(&l.atom)
            .is_some_and(|id| !base.atoms.atom(id).is_reserved());
        if !known {
            return Err(InstrumentError::UnknownAssertedAtom(l.atom.clone()));
        }
    }

    let mut program = extend_debugging_program(&debugging.program, &debugging.instrumentation);
    let constraints = make_test_constraints(t);
    let test_constraints = constraints.len();
    for c in constraints {
        program.push(c);
    }
    let g = ground(
        &program,
        GroundOptions {
            mode: GroundMode::NoSimplify,
            budget,
        },
    )?;

    let id_of = |a: &Atom| g.atoms.get(a).expect("instrumented atom is grounded");
    let assumptions = debugging.instrumentation.assumable().map(id_of).collect();
    let test = t
        .asserted
        .iter()
        .map(|l| (id_of(&l.atom), !l.negated))
        .collect();
    let herbrand_base = base
        .herbrand_base()
        .into_iter()
        .map(|id| id_of(base.atoms.atom(id)))
        .collect();
    Ok(Gamma {
        ground: g,
        program,
        instrumentation: debugging.instrumentation,
        assumptions,
        test,
        herbrand_base,
        base_grounding: debugging.base_grounding,
        test_constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_test_case};
    use crate::solver::{check_coherence, Coherence};
    use alloc::string::{String, ToString};
    use alloc::vec;

    const P2: &str = "a :- c. b :- not c. c :- not b. :- c, not b.";

    #[test]
    fn test_constraints() {
        let t = parse_test_case(
            "assertTrue(col(1,blue)). assertTrue(col(2,red)). assertTrue(col(3,blue)).",
        )
        .unwrap();
        let texts: Vec<String> = make_test_constraints(&t)
            .iter()
            .map(|r| r.to_string())
            .collect();
        assert_eq!(
            texts,
            [
                ":- not col(1,blue).",
                ":- not col(2,red).",
                ":- not col(3,blue)."
            ]
        );
        let t = parse_test_case("assertFalse(a).").unwrap();
        assert_eq!(make_test_constraints(&t)[0].to_string(), ":- a.");
        assert!(make_test_constraints(&TestCase::default()).is_empty());
    }

    #[test]
    fn background_defaults_to_facts() {
        let p = parse_program("a :- b. b. c | d.").unwrap();
        assert_eq!(default_background(&p), BTreeSet::from([RuleId(2)]));
        let p = parse_program("a :- b.").unwrap();
        assert!(default_background(&p).is_empty());
        let err = validate_background(&p, &BTreeSet::from([RuleId(5)])).unwrap_err();
        assert_eq!(err, InstrumentError::UnknownBackgroundRule(RuleId(5)));
    }

    #[test]
    fn propositional_debugging_program() {
        let p = parse_program(P2).unwrap();
        let d = build_debugging_program(&p, &BTreeSet::new()).unwrap();
        assert_eq!(
            d.program.to_string(),
            "a :- c, _debug1.\n\
             b :- not c, _debug2.\n\
             c :- not b, _debug3.\n\
             :- c, not b, _debug4.\n\
             a :- not _support(a).\n\
             b :- not _support(b).\n\
             c :- not _support(c).\n"
        );
        let ext = extend_debugging_program(&d.program, &d.instrumentation);
        assert_eq!(ext.len(), 7 + 4 + 3);
        assert!(ext.rules[7..].iter().all(|r| r.choice));
    }

    #[test]
    fn empty_program() {
        let d = build_debugging_program(&Program::new(), &BTreeSet::new()).unwrap();
        assert!(d.program.is_empty());
        let ext = extend_debugging_program(&d.program, &d.instrumentation);
        assert!(ext.is_empty());
    }

    #[test]
    fn all_background_has_no_markers() {
        let p = parse_program("a. b.").unwrap();
        let bg = default_background(&p);
        let d = build_debugging_program(&p, &bg).unwrap();
        assert!(d.instrumentation.debug_atoms.is_empty());
        let none = Instrumentation::default();
        assert_eq!(extend_debugging_program(&d.program, &none), d.program);
    }

    #[test]
    fn gamma_for_propositional_program() {
        let p = parse_program(P2).unwrap();
        let t = parse_test_case("assertTrue(a).").unwrap();
        let gamma = assemble_gamma(&p, &t, &BTreeSet::new()).unwrap();
        assert_eq!(gamma.assumptions.len(), 7);
        assert_eq!(
            check_coherence(&gamma.ground, &gamma.assumptions),
            Coherence::Incoherent
        );
        assert_eq!(check_coherence(&gamma.ground, &[]), Coherence::Coherent);
    }

    #[test]
    fn unknown_asserted_atom() {
        let p = parse_program(P2).unwrap();
        let t = parse_test_case("assertTrue(zzz).").unwrap();
        let err = assemble_gamma(&p, &t, &BTreeSet::new()).unwrap_err();
        assert_eq!(err, InstrumentError::UnknownAssertedAtom(Atom::prop("zzz")));
        assert!(err.to_string().contains("has no occurrence"));
    }

    #[test]
    fn debug_index_reinstantiates_rules() {
        let p = parse_program("node(X) :- edge(Y,X). edge(1,2). edge(2,3).").unwrap();
        let d = build_debugging_program(&p, &default_background(&p)).unwrap();
        let names: Vec<String> = d
            .instrumentation
            .debug_atoms
            .iter()
            .map(|a| a.to_string())
            .collect();
        assert_eq!(names, ["_debug1(1,2)", "_debug1(2,3)"]);
        let (id, sub) = &d.instrumentation.rule_index[&d.instrumentation.debug_atoms[0]];
        assert_eq!(
            p.rule(*id).unwrap().substitute(sub).to_string(),
            "node(2) :- edge(1,2)."
        );
        assert_eq!(vec![sub.to_string()], ["Y=1, X=2"]);
    }
}
