//! Instantiation of non-ground programs.
//!
//! Substitutions are enumerated by joining positive body literals against
//! predicate extents, where the extents are a least fixpoint that ignores
//! negation and treats every head atom of an instance as derivable. Rules
//! are re-joined only when the extent of one of their positive predicates
//! grew in the previous round.
//!
//! Two modes are provided. `NoSimplify` keeps every instance verbatim: the
//! extents also absorb atoms that occur only in bodies, and positive
//! literals over predicates that no rule defines do not filter instances
//! once their variables are bound. This is what keeps `_debug` markers in
//! place. `Simplify` behaves like an optimizing grounder and deletes every
//! instance with a positive body atom that no rule can derive, reporting
//! the affected non-ground rules.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Atom, BodyElement, Comparison, Program, Rule, RuleId, Substitution, Term};

/// Handle of a ground atom in an [`AtomTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijection between ground atoms and dense indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    index: BTreeMap<Atom, AtomId>,
}

impl AtomTable {
    pub fn new() -> Self {
        AtomTable::default()
    }

    pub fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(id) = self.index.get(&atom) {
            return *id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push(atom.clone());
        self.index.insert(atom, id);
        id
    }

    pub fn get(&self, atom: &Atom) -> Option<AtomId> {
        self.index.get(atom).copied()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.index()]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &Atom)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (AtomId(i as u32), a))
    }
}

/// One instance of a non-ground rule, or a synthetic rule when `origin`
/// is `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub origin: Option<RuleId>,
    pub substitution: Substitution,
    pub head: Vec<AtomId>,
    pub positive: Vec<AtomId>,
    pub negative: Vec<AtomId>,
}

impl GroundRule {
    pub fn fact(atom: AtomId) -> Self {
        GroundRule {
            origin: None,
            substitution: Substitution::new(),
            head: vec![atom],
            positive: Vec::new(),
            negative: Vec::new(),
        }
    }

    pub fn constraint(positive: Vec<AtomId>, negative: Vec<AtomId>) -> Self {
        GroundRule {
            origin: None,
            substitution: Substitution::new(),
            head: Vec::new(),
            positive,
            negative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DroppedRule {
    pub rule_id: RuleId,
}

impl fmt::Display for DroppedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule {} was removed by simplification (missing support)",
            self.rule_id
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub atoms: AtomTable,
    pub rules: Vec<GroundRule>,
    pub warnings: Vec<DroppedRule>,
}

impl GroundProgram {
    pub fn new() -> Self {
        GroundProgram::default()
    }

    /// Original-signature atoms, in atom-table order.
    pub fn herbrand_base(&self) -> Vec<AtomId> {
        self.atoms
            .iter()
            .filter(|(_, a)| !a.is_reserved())
            .map(|(id, _)| id)
            .collect()
    }

    /// A copy with one fact `a.` appended per atom of `facts`.
    pub fn with_facts(&self, facts: &[AtomId]) -> GroundProgram {
        let mut g = self.clone();
        g.rules.extend(facts.iter().map(|a| GroundRule::fact(*a)));
        g
    }

    /// Textual form of one ground rule.
    pub fn rule_text(&self, rule: &GroundRule) -> String {
        let mut s = String::new();
        for (i, h) in rule.head.iter().enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            s.push_str(&alloc::format!("{}", self.atoms.atom(*h)));
        }
        let body: Vec<String> = rule
            .positive
            .iter()
            .map(|a| alloc::format!("{}", self.atoms.atom(*a)))
            .chain(
                rule.negative
                    .iter()
                    .map(|a| alloc::format!("not {}", self.atoms.atom(*a))),
            )
            .collect();
        if !body.is_empty() {
            s.push_str(if rule.head.is_empty() { ":- " } else { " :- " });
            s.push_str(&body.join(", "));
        }
        s.push('.');
        s
    }
}

/// Rules, then one `% atom <index> <atom>` line per table entry, then
/// warnings.
impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", self.rule_text(r))?;
        }
        for (id, a) in self.atoms.iter() {
            writeln!(f, "% atom {} {}", id.0, a)?;
        }
        for w in &self.warnings {
            writeln!(f, "% warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GroundMode {
    Simplify,
    #[default]
    NoSimplify,
}

pub const DEFAULT_GROUNDING_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundOptions {
    pub mode: GroundMode,
    /// Maximum number of ground rules before grounding aborts.
    pub budget: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            mode: GroundMode::NoSimplify,
            budget: DEFAULT_GROUNDING_BUDGET,
        }
    }
}

impl GroundOptions {
    pub fn mode(mode: GroundMode) -> Self {
        GroundOptions {
            mode,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundError {
    BudgetExceeded { budget: usize },
}

impl fmt::Display for GroundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundError::BudgetExceeded { budget } => {
                write!(f, "grounding budget exceeded ({budget} ground rules)")
            }
        }
    }
}

/// Every constant occurring in `p`.
pub fn herbrand_universe(p: &Program) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for r in &p.rules {
        r.constants(&mut out);
    }
    out
}

type Signature = (String, usize);

fn signature(a: &Atom) -> Signature {
    (a.predicate.clone(), a.arity())
}

#[derive(Clone, Debug)]
enum Pattern {
    Var(usize),
    Const(Term),
}

#[derive(Clone, Debug)]
struct AtomPattern {
    sig: Signature,
    args: Vec<Pattern>,
}

impl AtomPattern {
    fn compile(atom: &Atom, vars: &[&str]) -> Self {
        AtomPattern {
            sig: signature(atom),
            args: atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Pattern::Var(vars.iter().position(|x| x == v).unwrap()),
                    other => Pattern::Const(other.clone()),
                })
                .collect(),
        }
    }

    fn instantiate(&self, binding: &[Option<Term>]) -> Option<Vec<Term>> {
        self.args
            .iter()
            .map(|p| match p {
                Pattern::Var(i) => binding[*i].clone(),
                Pattern::Const(t) => Some(t.clone()),
            })
            .collect()
    }
}

/// A rule prepared for joining.
struct CompiledRule<'a> {
    rule: &'a Rule,
    vars: Vec<&'a str>,
    /// Positive literals in join order, with a flag telling whether a
    /// fully bound literal must be found in the extent.
    positive: Vec<(AtomPattern, bool)>,
    comparisons: Vec<&'a Comparison>,
}

impl<'a> CompiledRule<'a> {
    fn new(rule: &'a Rule, defined: &BTreeSet<Signature>, mode: GroundMode) -> Self {
        let vars = rule.variables();
        let mut filtering = Vec::new();
        let mut open = Vec::new();
        for a in rule.positive() {
            let pat = AtomPattern::compile(a, &vars);
            if mode == GroundMode::NoSimplify && !defined.contains(&pat.sig) {
                open.push((pat, false));
            } else {
                filtering.push((pat, true));
            }
        }
        filtering.extend(open);
        CompiledRule {
            rule,
            vars,
            positive: filtering,
            comparisons: rule.comparisons().collect(),
        }
    }

    fn substitution(&self, binding: &[Option<Term>]) -> Substitution {
        Substitution(
            self.vars
                .iter()
                .zip(binding)
                .map(|(v, t)| (String::from(*v), t.clone().expect("complete binding")))
                .collect(),
        )
    }

    fn comparisons_hold(&self, binding: &[Option<Term>]) -> bool {
        let sub = Substitution(
            self.vars
                .iter()
                .zip(binding)
                .filter_map(|(v, t)| t.clone().map(|t| (String::from(*v), t)))
                .collect(),
        );
        self.comparisons
            .iter()
            .all(|c| c.substitute(&sub).eval().unwrap_or(true))
    }

    /// All complete bindings against `extent`, sorted.
    fn join(&self, extent: &Extent, budget: usize) -> Result<Vec<Vec<Term>>, GroundError> {
        let mut out = Vec::new();
        let mut binding = vec![None; self.vars.len()];
        self.join_from(0, &mut binding, extent, &mut out, budget)?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn join_from(
        &self,
        k: usize,
        binding: &mut Vec<Option<Term>>,
        extent: &Extent,
        out: &mut Vec<Vec<Term>>,
        budget: usize,
    ) -> Result<(), GroundError> {
        if !self.comparisons_hold(binding) {
            return Ok(());
        }
        let Some((pat, filters)) = self.positive.get(k) else {
            if out.len() >= budget {
                return Err(GroundError::BudgetExceeded { budget });
            }
            out.push(
                binding
                    .iter()
                    .map(|t| t.clone().expect("safe rule"))
                    .collect(),
            );
            return Ok(());
        };
        if let Some(args) = pat.instantiate(binding) {
            let present = extent.get(&pat.sig).is_some_and(|s| s.contains(&args));
            if present || !filters {
                self.join_from(k + 1, binding, extent, out, budget)?;
            }
            return Ok(());
        }
        let Some(tuples) = extent.get(&pat.sig) else {
            return Ok(());
        };
        for tuple in tuples {
            let saved = binding.clone();
            if unify(pat, tuple, binding) {
                self.join_from(k + 1, binding, extent, out, budget)?;
            }
            *binding = saved;
        }
        Ok(())
    }

    fn instance_atoms(&self, values: &[Term]) -> InstanceAtoms {
        let sub = Substitution(
            self.vars
                .iter()
                .zip(values)
                .map(|(v, t)| (String::from(*v), t.clone()))
                .collect(),
        );
        let mut head: Vec<Atom> = Vec::new();
        for h in &self.rule.head {
            let a = h.substitute(&sub);
            if !head.contains(&a) {
                head.push(a);
            }
        }
        let mut positive: Vec<Atom> = Vec::new();
        let mut negative: Vec<Atom> = Vec::new();
        for b in &self.rule.body {
            if let BodyElement::Literal(l) = b {
                let a = l.atom.substitute(&sub);
                let target = if l.negated {
                    &mut negative
                } else {
                    &mut positive
                };
                if !target.contains(&a) {
                    target.push(a);
                }
            }
        }
        InstanceAtoms {
            head,
            positive,
            negative,
        }
    }
}

fn unify(pat: &AtomPattern, tuple: &[Term], binding: &mut [Option<Term>]) -> bool {
    for (p, t) in pat.args.iter().zip(tuple) {
        match p {
            Pattern::Const(c) => {
                if c != t {
                    return false;
                }
            }
            Pattern::Var(i) => match &binding[*i] {
                Some(bound) if bound != t => return false,
                Some(_) => {}
                None => binding[*i] = Some(t.clone()),
            },
        }
    }
    true
}

struct InstanceAtoms {
    head: Vec<Atom>,
    positive: Vec<Atom>,
    negative: Vec<Atom>,
}

type Extent = BTreeMap<Signature, BTreeSet<Vec<Term>>>;

/// Instances of one rule: sorted bindings.
struct Instances {
    bindings: Vec<Vec<Term>>,
}

fn instantiate(
    p: &Program,
    mode: GroundMode,
    budget: usize,
) -> Result<Vec<Instances>, GroundError> {
    let defined: BTreeSet<Signature> = p
        .rules
        .iter()
        .flat_map(|r| r.head.iter().map(signature))
        .collect();
    let compiled: Vec<CompiledRule<'_>> = p
        .rules
        .iter()
        .map(|r| CompiledRule::new(r, &defined, mode))
        .collect();

    let mut extent: Extent = BTreeMap::new();
    let mut results: Vec<Option<Instances>> = p.rules.iter().map(|_| None).collect();
    // Predicates whose extent grew in the last round; `None` = first round.
    let mut changed: Option<BTreeSet<Signature>> = None;
    loop {
        let mut total = 0usize;
        for (i, c) in compiled.iter().enumerate() {
            let stale = match (&changed, &results[i]) {
                (None, _) | (_, None) => true,
                (Some(ch), Some(_)) => c.positive.iter().any(|(pat, _)| ch.contains(&pat.sig)),
            };
            if stale {
                let remaining = budget.saturating_sub(total);
                let bindings = c
                    .join(&extent, remaining)
                    .map_err(|_| GroundError::BudgetExceeded { budget })?;
                results[i] = Some(Instances { bindings });
            }
            total += results[i].as_ref().map_or(0, |r| r.bindings.len());
            if total > budget {
                return Err(GroundError::BudgetExceeded { budget });
            }
        }

        let mut grew = BTreeSet::new();
        for (c, inst) in compiled.iter().zip(&results) {
            for values in &inst.as_ref().expect("computed").bindings {
                let atoms = c.instance_atoms(values);
                let mut add = |a: Atom| {
                    let sig = signature(&a);
                    if extent.entry(sig.clone()).or_default().insert(a.args) {
                        grew.insert(sig);
                    }
                };
                atoms.head.into_iter().for_each(&mut add);
                if mode == GroundMode::NoSimplify {
                    atoms.positive.into_iter().for_each(&mut add);
                    atoms.negative.into_iter().for_each(&mut add);
                }
            }
        }
        if grew.is_empty() {
            break;
        }
        changed = Some(grew);
    }
    Ok(results.into_iter().map(|r| r.expect("computed")).collect())
}

/// Grounds `p`. Rules appear in program order, instances of one rule in
/// ascending order of their variable tuples; the atom table lists atoms in
/// order of first occurrence (head, positive body, negative body).
pub fn ground(p: &Program, opts: GroundOptions) -> Result<GroundProgram, GroundError> {
    let full = instantiate(p, GroundMode::NoSimplify, opts.budget)?;
    let (kept, warnings) = match opts.mode {
        GroundMode::NoSimplify => (full, Vec::new()),
        GroundMode::Simplify => {
            let simplified = instantiate(p, GroundMode::Simplify, opts.budget)?;
            let mut warnings = Vec::new();
            for ((rule, all), kept) in p.rules.iter().zip(&full).zip(&simplified) {
                let kept: BTreeSet<&Vec<Term>> = kept.bindings.iter().collect();
                if all.bindings.iter().any(|b| !kept.contains(b)) {
                    warnings.push(DroppedRule { rule_id: rule.id });
                }
            }
            (simplified, warnings)
        }
    };

    let defined = BTreeSet::new();
    let mut g = GroundProgram {
        warnings,
        ..GroundProgram::default()
    };
    for (rule, inst) in p.rules.iter().zip(kept) {
        let c = CompiledRule::new(rule, &defined, GroundMode::Simplify);
        for values in inst.bindings {
            let atoms = c.instance_atoms(&values);
            let head = atoms.head.into_iter().map(|a| g.atoms.intern(a)).collect();
            let positive = atoms
                .positive
                .into_iter()
                .map(|a| g.atoms.intern(a))
                .collect();
            let negative = atoms
                .negative
                .into_iter()
                .map(|a| g.atoms.intern(a))
                .collect();
            g.rules.push(GroundRule {
                origin: Some(rule.id),
                substitution: c.substitution(&values.into_iter().map(Some).collect::<Vec<_>>()),
                head,
                positive,
                negative,
            });
        }
    }
    Ok(g)
}

/// Adds a choice rule `{a}` for every atom of `g`'s table so that an
/// optimizing grounder can no longer delete instances. The added rules get
/// ids above `p.len()`; [`strip_added_rules`] removes their instances.
/// Fresh `_f_` atoms are skipped, each already heads its own choice rule.
pub fn anti_simplification_closure(g: &GroundProgram, p: &Program) -> Program {
    let mut out = p.clone();
    for (_, atom) in g.atoms.iter() {
        if atom.predicate.starts_with(crate::ast::FRESH_PREFIX) {
            continue;
        }
        out.push_choice(atom.clone(), Vec::new(), Default::default())
            .expect("atom-table entries are ground");
    }
    out
}

/// Removes ground rules that instantiate rules with ids above `original`,
/// the postprocessing step for [`anti_simplification_closure`].
pub fn strip_added_rules(g: &GroundProgram, original: usize) -> Vec<String> {
    g.rules
        .iter()
        .filter(|r| r.origin.is_none_or(|id| (id.0 as usize) <= original))
        .map(|r| g.rule_text(r))
        .collect()
}
