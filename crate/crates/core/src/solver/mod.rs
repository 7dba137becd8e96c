//! Answer sets of ground programs.
//!
//! Candidates come from a clause encoding of the rules plus their support
//! (completion) conditions, searched by [`cdcl::Cdcl`]. Every total
//! candidate is checked for stability: either it is a minimal model of its
//! reduct, or an unfounded subset is extracted and its loop nogood is added
//! before the search continues. Stable candidates are recorded and blocked.

pub mod brute;
pub mod cdcl;

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::ground::{AtomId, GroundProgram, GroundRule};
use cdcl::{Cdcl, Lit};

pub use brute::{brute_force_answer_sets, BruteForceError, BRUTE_FORCE_MAX_ATOMS};

/// A set of true atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation(pub BTreeSet<AtomId>);

impl Interpretation {
    pub fn new() -> Self {
        Interpretation::default()
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.0.contains(&atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().copied()
    }

    fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for a in &self.0 {
            if a.index() < n {
                m[a.index()] = true;
            }
        }
        m
    }
}

impl FromIterator<AtomId> for Interpretation {
    fn from_iter<T: IntoIterator<Item = AtomId>>(iter: T) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Coherent(Vec<Interpretation>),
    Incoherent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    /// Set when enumeration stopped at the limit while more answer sets
    /// exist.
    pub model_limit_hit: bool,
}

impl SolveResult {
    pub fn models(&self) -> &[Interpretation] {
        match &self.status {
            Status::Coherent(m) => m,
            Status::Incoherent => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coherence {
    Coherent,
    Incoherent,
}

fn body_true(rule: &GroundRule, i: &[bool]) -> bool {
    rule.positive.iter().all(|a| i[a.index()]) && rule.negative.iter().all(|a| !i[a.index()])
}

/// `i` satisfies every rule whose body it satisfies.
pub fn is_model(g: &GroundProgram, i: &Interpretation) -> bool {
    let m = i.mask(g.atoms.len());
    g.rules
        .iter()
        .all(|r| !body_true(r, &m) || r.head.iter().any(|h| m[h.index()]))
}

/// Gelfond-Lifschitz reduct: rules with a true negative body atom are
/// removed, negative literals are dropped from the rest.
pub fn reduct(g: &GroundProgram, i: &Interpretation) -> GroundProgram {
    GroundProgram {
        atoms: g.atoms.clone(),
        rules: g
            .rules
            .iter()
            .filter(|r| r.negative.iter().all(|a| !i.contains(*a)))
            .map(|r| GroundRule {
                negative: Vec::new(),
                ..r.clone()
            })
            .collect(),
        warnings: g.warnings.clone(),
    }
}

/// Finds a non-empty unfounded subset of the model `m`, or `None` when `m`
/// is a minimal model of its reduct.
fn unfounded_set(g: &GroundProgram, m: &[bool]) -> Option<Vec<AtomId>> {
    let n = g.atoms.len();
    let applicable: Vec<&GroundRule> = g
        .rules
        .iter()
        .filter(|r| {
            r.negative.iter().all(|a| !m[a.index()]) && r.positive.iter().all(|a| m[a.index()])
        })
        .collect();

    // Atoms every model J ⊆ m of the reduct must contain.
    let mut derived = vec![false; n];
    loop {
        let mut changed = false;
        for r in &applicable {
            if !r.positive.iter().all(|a| derived[a.index()]) {
                continue;
            }
            let mut true_heads = r.head.iter().filter(|h| m[h.index()]);
            if let (Some(h), None) = (true_heads.next(), true_heads.next()) {
                if !derived[h.index()] {
                    derived[h.index()] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let rest: Vec<AtomId> = (0..n)
        .filter(|&a| m[a] && !derived[a])
        .map(|a| AtomId(a as u32))
        .collect();
    if rest.is_empty() {
        return None;
    }
    let head_cycle_free = applicable
        .iter()
        .all(|r| r.head.iter().filter(|h| m[h.index()]).count() <= 1);
    if head_cycle_free {
        return Some(rest);
    }

    // Search J with derived ⊆ J ⊊ m modelling the reduct.
    let var_of = |a: AtomId| rest.iter().position(|x| *x == a);
    let mut sat = Cdcl::new();
    sat.ensure_vars(rest.len());
    for r in &applicable {
        if r.head.iter().any(|h| derived[h.index()]) {
            continue;
        }
        let clause: Vec<Lit> = r
            .head
            .iter()
            .filter(|h| m[h.index()])
            .filter_map(|h| var_of(*h).map(Lit::pos))
            .chain(r.positive.iter().filter_map(|a| var_of(*a).map(Lit::neg)))
            .collect();
        sat.add_clause(&clause);
    }
    let some_false: Vec<Lit> = (0..rest.len()).map(Lit::neg).collect();
    sat.add_clause(&some_false);
    let smaller = sat.solve()?;
    Some(
        rest.iter()
            .zip(smaller)
            .filter(|(_, kept)| !kept)
            .map(|(a, _)| *a)
            .collect(),
    )
}

/// `i` is a model of `g` and no proper subset of `i` models the reduct.
pub fn is_answer_set(g: &GroundProgram, i: &Interpretation) -> bool {
    if i.iter().any(|a| a.index() >= g.atoms.len()) || !is_model(g, i) {
        return false;
    }
    unfounded_set(g, &i.mask(g.atoms.len())).is_none()
}

/// Clause encoding of a ground program together with its search state.
struct Search<'a> {
    g: &'a GroundProgram,
    sat: Cdcl,
    n: usize,
}

impl<'a> Search<'a> {
    fn new(g: &'a GroundProgram) -> Self {
        let n = g.atoms.len();
        let mut sat = Cdcl::new();
        sat.ensure_vars(n);
        let mut search = Search { g, sat, n };
        search.encode();
        search
    }

    /// A literal equivalent to the conjunction, introducing an auxiliary
    /// variable when it has more than one conjunct. `None` = empty
    /// conjunction (true).
    fn conjunction(&mut self, lits: &[Lit]) -> Option<Lit> {
        match lits {
            [] => None,
            [l] => Some(*l),
            _ => {
                let aux = self.sat.new_var();
                let mut back = vec![Lit::pos(aux)];
                for l in lits {
                    self.sat.add_clause(&[Lit::neg(aux), *l]);
                    back.push(l.negate());
                }
                self.sat.add_clause(&back);
                Some(Lit::pos(aux))
            }
        }
    }

    fn encode(&mut self) {
        let g = self.g;
        let mut supports: Vec<Vec<Lit>> = vec![Vec::new(); self.n];
        let mut unconditional = vec![false; self.n];
        for r in &g.rules {
            let clause: Vec<Lit> = r
                .head
                .iter()
                .map(|h| Lit::pos(h.index()))
                .chain(r.positive.iter().map(|a| Lit::neg(a.index())))
                .chain(r.negative.iter().map(|a| Lit::pos(a.index())))
                .collect();
            self.sat.add_clause(&clause);

            for &a in &r.head {
                if unconditional[a.index()] {
                    continue;
                }
                let conj: Vec<Lit> = r
                    .positive
                    .iter()
                    .map(|b| Lit::pos(b.index()))
                    .chain(r.negative.iter().map(|b| Lit::neg(b.index())))
                    .chain(
                        r.head
                            .iter()
                            .filter(|h| **h != a)
                            .map(|h| Lit::neg(h.index())),
                    )
                    .collect();
                match self.conjunction(&conj) {
                    Some(l) => supports[a.index()].push(l),
                    None => unconditional[a.index()] = true,
                }
            }
        }
        for a in 0..self.n {
            if unconditional[a] {
                continue;
            }
            let mut clause = vec![Lit::neg(a)];
            clause.extend(supports[a].iter().copied());
            self.sat.add_clause(&clause);
        }
    }

    /// Every answer set satisfies: if an atom of `u` is true, some rule
    /// supports `u` from outside.
    /// Returns false if `u` turned out to have unconditional external
    /// support.
    fn add_loop_nogood(&mut self, u: &[AtomId]) -> bool {
        let in_u = |a: &AtomId| u.contains(a);
        let g = self.g;
        let mut external = Vec::new();
        for r in &g.rules {
            if !r.head.iter().any(in_u) || r.positive.iter().any(in_u) {
                continue;
            }
            let conj: Vec<Lit> = r
                .positive
                .iter()
                .map(|b| Lit::pos(b.index()))
                .chain(r.negative.iter().map(|b| Lit::neg(b.index())))
                .chain(
                    r.head
                        .iter()
                        .filter(|h| !in_u(h))
                        .map(|h| Lit::neg(h.index())),
                )
                .collect();
            match self.conjunction(&conj) {
                Some(l) => external.push(l),
                None => return false,
            }
        }
        for a in u {
            let mut clause = vec![Lit::neg(a.index())];
            clause.extend(external.iter().copied());
            self.sat.add_clause(&clause);
        }
        true
    }

    fn block(&mut self, m: &[bool]) {
        let block: Vec<Lit> = (0..self.n).map(|a| Lit::new(a, !m[a])).collect();
        self.sat.add_clause(&block);
    }

    /// The next answer set not yet blocked.
    fn next_answer_set(&mut self) -> Option<Interpretation> {
        loop {
            let assignment = self.sat.solve()?;
            let m = &assignment[..self.n];
            match unfounded_set(self.g, m) {
                Some(u) => {
                    if !self.add_loop_nogood(&u) {
                        let m = m.to_vec();
                        self.block(&m);
                    }
                }
                None => {
                    let m = m.to_vec();
                    self.block(&m);
                    return Some(
                        (0..self.n)
                            .filter(|&a| m[a])
                            .map(|a| AtomId(a as u32))
                            .collect(),
                    );
                }
            }
        }
    }
}

/// Up to `limit` answer sets in deterministic order (`usize::MAX` for all).
pub fn enumerate_answer_sets(g: &GroundProgram, limit: usize) -> SolveResult {
    let mut search = Search::new(g);
    let mut models = Vec::new();
    let mut hit = false;
    while let Some(m) = search.next_answer_set() {
        if models.len() == limit {
            hit = true;
            break;
        }
        models.push(m);
    }
    let status = if models.is_empty() && !hit {
        Status::Incoherent
    } else {
        Status::Coherent(models)
    };
    SolveResult {
        status,
        model_limit_hit: hit,
    }
}

/// Decides whether `g` plus the facts `extra_facts` has an answer set.
pub fn check_coherence(g: &GroundProgram, extra_facts: &[AtomId]) -> Coherence {
    let with = g.with_facts(extra_facts);
    let mut search = Search::new(&with);
    match search.next_answer_set() {
        Some(_) => Coherence::Coherent,
        None => Coherence::Incoherent,
    }
}
