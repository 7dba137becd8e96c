//! Non-ground program representation.
//!
//! Rules keep their body in source order (literals and comparisons
//! interleaved) so that printing, safety diagnostics and the variable tuple
//! used by instrumentation are all reproducible from the source text.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Predicate prefix of the fresh atoms introduced by choice desugaring.
pub const FRESH_PREFIX: &str = "_f_";
/// Predicate prefix of the rule markers added by instrumentation.
pub const DEBUG_PREFIX: &str = "_debug";
/// Predicate of the supporting atoms added by instrumentation.
pub const SUPPORT_PREDICATE: &str = "_support";

/// True for predicates in one of the namespaces owned by the debugger.
pub fn is_reserved(predicate: &str) -> bool {
    predicate.starts_with(FRESH_PREFIX)
        || predicate.starts_with(DEBUG_PREFIX)
        || predicate.starts_with(SUPPORT_PREDICATE)
}

/// A term.
///
/// The derived order is the evaluation order used by comparisons: every
/// integer precedes every symbolic constant, symbols compare
/// lexicographically. `Func` only appears inside internal atoms such as
/// `_support(col(1,blue))`; user programs cannot contain it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(i64),
    Sym(String),
    Func(String, Vec<Term>),
    Var(String),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn sym(name: &str) -> Self {
        Term::Sym(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            Term::Int(_) | Term::Sym(_) => true,
        }
    }

    /// Replaces bound variables; unbound ones are left in place.
    pub fn substitute(&self, sub: &Substitution) -> Term {
        match self {
            Term::Var(v) => sub.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Func(f, args) => {
                Term::Func(f.clone(), args.iter().map(|t| t.substitute(sub)).collect())
            }
            _ => self.clone(),
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::Func(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            _ => {}
        }
    }

    fn collect_constants(&self, out: &mut BTreeSet<Term>) {
        match self {
            Term::Var(_) => {}
            Term::Func(_, args) => args.iter().for_each(|t| t.collect_constants(out)),
            _ => {
                out.insert(self.clone());
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) => write!(f, "{i}"),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
            Term::Func(name, args) => {
                f.write_str(name)?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, t) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{t}")?;
    }
    f.write_str(")")
}

/// `p(t1,...,tk)`. Ground atoms double as the entries of the atom table.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn is_reserved(&self) -> bool {
        is_reserved(&self.predicate)
    }

    pub fn substitute(&self, sub: &Substitution) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|t| t.substitute(sub)).collect(),
        }
    }

    /// The atom as a term, used as the argument of `_support(..)`.
    pub fn to_term(&self) -> Term {
        Term::Func(self.predicate.clone(), self.args.clone())
    }

    /// Inverse of [`Atom::to_term`].
    pub fn from_term(term: &Term) -> Option<Atom> {
        match term {
            Term::Func(p, args) => Some(Atom::new(p, args.clone())),
            Term::Sym(p) => Some(Atom::prop(p)),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        write_args(f, &self.args)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    pub fn complement(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparison {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

impl Comparison {
    pub fn new(left: Term, op: CmpOp, right: Term) -> Self {
        Comparison { left, op, right }
    }

    /// Evaluates a comparison between ground terms; `None` if either side
    /// still contains a variable.
    pub fn eval(&self) -> Option<bool> {
        if !self.left.is_ground() || !self.right.is_ground() {
            return None;
        }
        let ord = self.left.cmp(&self.right);
        Some(match self.op {
            CmpOp::Eq => ord.is_eq(),
            CmpOp::Ne => ord.is_ne(),
            CmpOp::Lt => ord.is_lt(),
            CmpOp::Le => ord.is_le(),
            CmpOp::Gt => ord.is_gt(),
            CmpOp::Ge => ord.is_ge(),
        })
    }

    pub fn substitute(&self, sub: &Substitution) -> Comparison {
        Comparison {
            left: self.left.substitute(sub),
            op: self.op,
            right: self.right.substitute(sub),
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.left, self.op.symbol(), self.right)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyElement {
    Literal(Literal),
    Comparison(Comparison),
}

impl fmt::Display for BodyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElement::Literal(l) => l.fmt(f),
            BodyElement::Comparison(c) => c.fmt(f),
        }
    }
}

/// Dense rule identifier, assigned in source order starting at 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u32);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

/// Variable bindings in the order of a rule's variable tuple.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(pub Vec<(String, Term)>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(Vec::new())
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }

    pub fn bind(&mut self, var: &str, value: Term) {
        match self.0.iter_mut().find(|(v, _)| v == var) {
            Some(slot) => slot.1 = value,
            None => self.0.push((var.into(), value)),
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &Term> {
        self.0.iter().map(|(_, t)| t)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}={t}")?;
        }
        Ok(())
    }
}

/// `h1 | ... | hm :- b1, ..., bn.`
///
/// A choice rule `{a}` is stored desugared: `head` is `[a, a_F]` with `a_F`
/// a fresh `_f_<n>` atom, and `choice` remembers the surface form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: RuleId,
    pub head: Vec<Atom>,
    pub body: Vec<BodyElement>,
    pub choice: bool,
    pub span: Span,
}

impl Rule {
    /// A rule with an unassigned id (0); [`Program::push`] assigns one.
    pub fn new(head: Vec<Atom>, body: Vec<BodyElement>) -> Self {
        Rule {
            id: RuleId(0),
            head,
            body,
            choice: false,
            span: Span::default(),
        }
    }

    pub fn fact(atom: Atom) -> Self {
        Rule::new(alloc::vec![atom], Vec::new())
    }

    pub fn constraint(body: Vec<BodyElement>) -> Self {
        Rule::new(Vec::new(), body)
    }

    pub fn is_fact(&self) -> bool {
        !self.choice && self.head.len() == 1 && self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.variables().is_empty()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(|b| match b {
            BodyElement::Literal(l) => Some(l),
            BodyElement::Comparison(_) => None,
        })
    }

    pub fn positive(&self) -> impl Iterator<Item = &Atom> {
        self.literals().filter(|l| !l.negated).map(|l| &l.atom)
    }

    pub fn negative(&self) -> impl Iterator<Item = &Atom> {
        self.literals().filter(|l| l.negated).map(|l| &l.atom)
    }

    pub fn comparisons(&self) -> impl Iterator<Item = &Comparison> {
        self.body.iter().filter_map(|b| match b {
            BodyElement::Comparison(c) => Some(c),
            BodyElement::Literal(_) => None,
        })
    }

    /// The variable tuple of the rule: first occurrences in comparisons,
    /// then in body literals, then in the head. Instrumentation markers and
    /// substitutions list variables in this order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for c in self.comparisons() {
            c.left.collect_vars(&mut out);
            c.right.collect_vars(&mut out);
        }
        for l in self.literals() {
            l.atom.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        for h in &self.head {
            h.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }

    /// Variables in order of first appearance in the source text.
    fn source_order_variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for h in &self.head {
            h.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        for b in &self.body {
            match b {
                BodyElement::Literal(l) => {
                    l.atom.args.iter().for_each(|t| t.collect_vars(&mut out))
                }
                BodyElement::Comparison(c) => {
                    c.left.collect_vars(&mut out);
                    c.right.collect_vars(&mut out);
                }
            }
        }
        out
    }

    /// Applies `sub` to every head atom, literal and comparison.
    pub fn substitute(&self, sub: &Substitution) -> Rule {
        Rule {
            id: self.id,
            head: self.head.iter().map(|a| a.substitute(sub)).collect(),
            body: self
                .body
                .iter()
                .map(|b| match b {
                    BodyElement::Literal(l) => BodyElement::Literal(Literal {
                        atom: l.atom.substitute(sub),
                        negated: l.negated,
                    }),
                    BodyElement::Comparison(c) => BodyElement::Comparison(c.substitute(sub)),
                })
                .collect(),
            choice: self.choice,
            span: self.span,
        }
    }

    /// Constants in head, body and comparisons.
    pub fn constants(&self, out: &mut BTreeSet<Term>) {
        for h in &self.head {
            h.args.iter().for_each(|t| t.collect_constants(out));
        }
        for b in &self.body {
            match b {
                BodyElement::Literal(l) => {
                    l.atom.args.iter().for_each(|t| t.collect_constants(out))
                }
                BodyElement::Comparison(c) => {
                    c.left.collect_constants(out);
                    c.right.collect_constants(out);
                }
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.choice {
            write!(f, "{{{}}}", self.head[0])?;
        } else {
            for (i, h) in self.head.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write!(f, "{h}")?;
            }
        }
        if !self.body.is_empty() {
            if self.head.is_empty() {
                f.write_str(":- ")?;
            } else {
                f.write_str(" :- ")?;
            }
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AstError {
    /// A choice construct over an atom that still contains variables.
    NonGroundChoice(Atom),
    UnknownBackgroundRule(RuleId),
}

impl fmt::Display for AstError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AstError::NonGroundChoice(a) => write!(f, "choice over non-ground atom {a}"),
            AstError::UnknownBackgroundRule(id) => {
                write!(f, "background rule {id} does not exist")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyViolation {
    pub variable: String,
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unsafe variable {}: it does not occur in a positive body literal",
            self.variable
        )
    }
}

/// Every variable must occur in some positive body literal. Reports the
/// first offender in source order.
pub fn check_safety(rule: &Rule) -> Result<(), SafetyViolation> {
    let mut bound = Vec::new();
    for a in rule.positive() {
        a.args.iter().for_each(|t| t.collect_vars(&mut bound));
    }
    match rule
        .source_order_variables()
        .into_iter()
        .find(|v| !bound.contains(v))
    {
        Some(v) => Err(SafetyViolation { variable: v.into() }),
        None => Ok(()),
    }
}

/// Desugars `{atom}` into `atom | _f_<n>.`, drawing `n` from `counter`.
pub fn desugar_choice(atom: Atom, counter: &mut usize) -> Result<Rule, AstError> {
    if !atom.is_ground() {
        return Err(AstError::NonGroundChoice(atom));
    }
    let fresh = Atom::prop(&format!("{FRESH_PREFIX}{counter}"));
    *counter += 1;
    let mut rule = Rule::new(alloc::vec![atom, fresh], Vec::new());
    rule.choice = true;
    Ok(rule)
}

/// An ordered rule list with dense ids and a background set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub background: BTreeSet<RuleId>,
    /// Next index for a fresh `_f_<n>` atom.
    pub fresh_counter: usize,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    /// Appends `rule` with the next dense id.
    pub fn push(&mut self, mut rule: Rule) -> RuleId {
        let id = RuleId(self.rules.len() as u32 + 1);
        rule.id = id;
        self.rules.push(rule);
        id
    }

    /// Appends a desugared choice rule `{atom}` with an optional body.
    pub fn push_choice(
        &mut self,
        atom: Atom,
        body: Vec<BodyElement>,
        span: Span,
    ) -> Result<RuleId, AstError> {
        let mut rule = desugar_choice(atom, &mut self.fresh_counter)?;
        rule.body = body;
        rule.span = span;
        Ok(self.push(rule))
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        let idx = (id.0 as usize).checked_sub(1)?;
        self.rules.get(idx).filter(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn set_background(&mut self, ids: BTreeSet<RuleId>) -> Result<(), AstError> {
        if let Some(bad) = ids.iter().find(|id| self.rule(**id).is_none()) {
            return Err(AstError::UnknownBackgroundRule(*bad));
        }
        self.background = ids;
        Ok(())
    }

    pub fn is_background(&self, id: RuleId) -> bool {
        self.background.contains(&id)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn col(n: i64, c: &str) -> Atom {
        Atom::new("col", vec![Term::Int(n), Term::sym(c)])
    }

    #[test]
    fn complement_flips_negation() {
        let a = Literal::pos(Atom::prop("a"));
        assert_eq!(a.complement(), Literal::neg(Atom::prop("a")));
        let n = Literal::neg(col(1, "blue"));
        assert_eq!(n.complement(), Literal::pos(col(1, "blue")));
        let b = Literal::pos(Atom::prop("b"));
        assert_eq!(b.complement().complement(), b);
    }

    #[test]
    fn choice_desugars_with_fresh_atoms() {
        let mut counter = 0;
        let d = Atom::new(
            "_debug4",
            vec![
                Term::Int(1),
                Term::Int(2),
                Term::sym("blue"),
                Term::sym("red"),
            ],
        );
        let r = desugar_choice(d.clone(), &mut counter).unwrap();
        assert_eq!(r.head, vec![d, Atom::prop("_f_0")]);
        assert!(r.body.is_empty());

        let p = desugar_choice(Atom::prop("p"), &mut counter).unwrap();
        let q = desugar_choice(Atom::prop("q"), &mut counter).unwrap();
        assert_eq!(p.head[1], Atom::prop("_f_1"));
        assert_eq!(q.head[1], Atom::prop("_f_2"));
    }

    #[test]
    fn non_ground_choice_is_rejected() {
        let mut counter = 0;
        let err = desugar_choice(Atom::new("p", vec![Term::var("X")]), &mut counter).unwrap_err();
        assert!(err.to_string().contains("choice over non-ground atom"));
        assert_eq!(counter, 0);
    }

    #[test]
    fn safety() {
        let edge = |a: &str, b: &str| Atom::new("edge", vec![Term::var(a), Term::var(b)]);
        let r = Rule::new(
            vec![Atom::new("node", vec![Term::var("X")])],
            vec![BodyElement::Literal(Literal::pos(edge("X", "Y")))],
        );
        assert_eq!(check_safety(&r), Ok(()));

        let r = Rule::new(
            vec![Atom::new("p", vec![Term::var("X")])],
            vec![BodyElement::Literal(Literal::neg(Atom::new(
                "q",
                vec![Term::var("X")],
            )))],
        );
        assert_eq!(check_safety(&r).unwrap_err().variable, "X");

        let cv = |v: &str, c: &str| Atom::new("col", vec![Term::var(v), Term::var(c)]);
        let ne = |a: &str, b: &str| {
            BodyElement::Comparison(Comparison::new(Term::var(a), CmpOp::Ne, Term::var(b)))
        };
        let r = Rule::constraint(vec![
            BodyElement::Literal(Literal::pos(cv("X", "C1"))),
            BodyElement::Literal(Literal::pos(cv("Y", "C2"))),
            BodyElement::Literal(Literal::pos(edge("X", "Y"))),
            ne("X", "Y"),
            ne("C1", "C2"),
        ]);
        assert_eq!(check_safety(&r), Ok(()));
        assert_eq!(r.variables(), vec!["X", "Y", "C1", "C2"]);
    }

    #[test]
    fn comparison_order_puts_integers_first() {
        let lt = |a: Term, b: Term| Comparison::new(a, CmpOp::Lt, b).eval();
        assert_eq!(lt(Term::Int(3), Term::Int(10)), Some(true));
        assert_eq!(lt(Term::Int(99), Term::sym("a")), Some(true));
        assert_eq!(lt(Term::sym("blue"), Term::sym("red")), Some(true));
        assert_eq!(lt(Term::var("X"), Term::Int(1)), None);
    }

    #[test]
    fn display_round_shapes() {
        let mut p = Program::new();
        p.push(Rule::fact(Atom::new(
            "edge",
            vec![Term::Int(1), Term::Int(2)],
        )));
        p.push_choice(Atom::prop("a"), Vec::new(), Span::default())
            .unwrap();
        p.push(Rule::new(
            vec![Atom::prop("a"), Atom::prop("b")],
            Vec::new(),
        ));
        p.push(Rule::constraint(vec![BodyElement::Literal(Literal::neg(
            Atom::prop("a"),
        ))]));
        assert_eq!(p.to_string(), "edge(1,2).\n{a}.\na | b.\n:- not a.\n");
    }
}
