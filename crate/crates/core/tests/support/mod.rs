//! Random program generators shared by the property tests.

#![allow(dead_code)]

use aspdbg_core::ast::{Atom, Literal};
use aspdbg_core::{parse_program, Program, TestCase};
use rand::seq::SliceRandom;
use rand::Rng;

pub const COLORING: &str = "\
node(X) :- edge(X,Y).
node(X) :- edge(Y,X).
col(X,blue) | col(X,red) | col(X,green) :- node(X).
:- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2.
edge(1,2).
edge(2,3).
";

pub const COLORING_TEST: &str = "\
assertTrue(col(1,blue)).
assertTrue(col(2,red)).
assertTrue(col(3,blue)).
";

pub const P2: &str = "a :- c. b :- not c. c :- not b. :- c, not b.";

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

/// Propositional program over `p0..p<atoms>` with disjunction, negation
/// and constraints.
pub fn random_propositional<R: Rng>(rng: &mut R, atoms: usize, max_rules: usize) -> String {
    let names: Vec<String> = (0..atoms).map(|i| format!("p{i}")).collect();
    let rules = rng.gen_range(1..=max_rules);
    let mut out = String::new();
    for _ in 0..rules {
        let heads = rng.gen_range(0..=3);
        let pos = rng.gen_range(0..=2);
        let neg = rng.gen_range(0..=2);
        if heads == 0 && pos + neg == 0 {
            continue;
        }
        let mut head: Vec<&str> = (0..heads)
            .map(|_| names.choose(rng).unwrap().as_str())
            .collect();
        head.dedup();
        let mut body: Vec<String> = (0..pos)
            .map(|_| names.choose(rng).unwrap().clone())
            .collect();
        body.extend((0..neg).map(|_| format!("not {}", names.choose(rng).unwrap())));
        out.push_str(&head.join(" | "));
        if !body.is_empty() {
            out.push_str(" :- ");
            out.push_str(&body.join(", "));
        }
        out.push_str(".\n");
    }
    out
}

/// Small non-ground program: propositions `a..d`, unary `p`, `q` and
/// binary `e` over the constants 1 and 2, at most twelve ground atoms.
/// Every rule is safe by construction.
pub fn random_nonground<R: Rng>(rng: &mut R, max_rules: usize) -> String {
    const PROPS: [&str; 4] = ["a", "b", "c", "d"];
    let mut out = String::new();
    for _ in 0..rng.gen_range(0..=2) {
        match rng.gen_range(0..3) {
            0 => out.push_str(&format!("p({}).\n", rng.gen_range(1..=2))),
            1 => out.push_str(&format!(
                "e({},{}).\n",
                rng.gen_range(1..=2),
                rng.gen_range(1..=2)
            )),
            _ => out.push_str(&format!("{}.\n", pick(rng, &PROPS))),
        }
    }
    let rules = rng.gen_range(1..=max_rules);
    for _ in 0..rules {
        // Positive body binds the variables used elsewhere.
        let mut vars: Vec<&str> = Vec::new();
        let mut body: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            match rng.gen_range(0..4) {
                0 => body.push(pick(rng, &PROPS).to_string()),
                1 => {
                    body.push("p(X)".to_string());
                    vars.push("X");
                }
                2 => {
                    body.push("q(Y)".to_string());
                    vars.push("Y");
                }
                _ => {
                    body.push("e(X,Y)".to_string());
                    vars.extend(["X", "Y"]);
                }
            }
        }
        vars.sort();
        vars.dedup();
        let term = |rng: &mut R, vars: &[&str]| -> String {
            if !vars.is_empty() && rng.gen_bool(0.7) {
                vars.choose(rng).unwrap().to_string()
            } else {
                rng.gen_range(1..=2).to_string()
            }
        };
        let atom = |rng: &mut R, vars: &[&str]| -> String {
            match rng.gen_range(0..4) {
                0 => format!("p({})", term(rng, vars)),
                1 => format!("q({})", term(rng, vars)),
                2 => format!("e({},{})", term(rng, vars), term(rng, vars)),
                _ => pick(rng, &PROPS).to_string(),
            }
        };
        for _ in 0..rng.gen_range(0..=2) {
            body.push(format!("not {}", atom(rng, &vars)));
        }
        if vars.len() == 2 && rng.gen_bool(0.2) {
            body.push("X != Y".to_string());
        }
        let heads = rng.gen_range(0..=2);
        if heads == 0 && body.is_empty() {
            continue;
        }
        let head: Vec<String> = (0..heads).map(|_| atom(rng, &vars)).collect();
        out.push_str(&head.join(" | "));
        if !body.is_empty() {
            out.push_str(" :- ");
            out.push_str(&body.join(", "));
        }
        out.push_str(".\n");
    }
    out
}

/// A test case over atoms of `base`, one to three literals.
pub fn random_test<R: Rng>(rng: &mut R, base: &[Atom]) -> TestCase {
    let mut atoms: Vec<Atom> = base.to_vec();
    atoms.shuffle(rng);
    let n = rng.gen_range(1..=3).min(atoms.len());
    TestCase::from_literals(
        atoms
            .into_iter()
            .take(n)
            .map(|a| {
                if rng.gen_bool(0.6) {
                    Literal::pos(a)
                } else {
                    Literal::neg(a)
                }
            })
            .collect(),
    )
}

/// A connected graph on `n` nodes: a random spanning tree plus extra edges.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push((rng.gen_range(1..v), v));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a, b));
        }
    }
    edges
}

/// The coloring encoding over `edges`.
pub fn coloring_instance(edges: &[(usize, usize)]) -> Program {
    let mut text = String::from(
        "node(X) :- edge(X,Y).\n\
         node(X) :- edge(Y,X).\n\
         col(X,blue) | col(X,red) | col(X,green) :- node(X).\n\
         :- col(X,C1), col(Y,C2), edge(X,Y), X != Y, C1 != C2.\n",
    );
    for (a, b) in edges {
        text.push_str(&format!("edge({a},{b}).\n"));
    }
    parse_program(&text).unwrap()
}
