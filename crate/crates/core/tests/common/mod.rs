//! Oracles and generators shared by the integration tests. Nothing here calls
//! into the engine's unifier or solver.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use nanolog::{Program, Rule, Term};
use rand::Rng;

// ---------------------------------------------------------------------------
// Random terms

pub const SYMBOLS: [&str; 5] = ["a", "b", "f", "g", "h"];
pub const VARIABLES: [&str; 4] = ["W", "X", "Y", "Z"];

/// A term of depth at most `depth` over [`SYMBOLS`] (arity 0 to 3) and
/// [`VARIABLES`].
pub fn random_term(rng: &mut impl Rng, depth: usize) -> Term {
    if depth <= 1 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) {
            Term::var(VARIABLES[rng.gen_range(0..VARIABLES.len())])
        } else {
            Term::constant(SYMBOLS[rng.gen_range(0..SYMBOLS.len())])
        };
    }
    let name = SYMBOLS[rng.gen_range(0..SYMBOLS.len())];
    let arity = rng.gen_range(0..=3);
    Term::compound(name, (0..arity).map(|_| random_term(rng, depth - 1)).collect())
}

pub fn random_compound(rng: &mut impl Rng, depth: usize) -> Term {
    loop {
        let t = random_term(rng, depth);
        if !t.is_var() {
            return t;
        }
    }
}

pub fn random_rule(rng: &mut impl Rng, depth: usize) -> Rule {
    let head = random_compound(rng, depth);
    let premises = (0..rng.gen_range(0..=3)).map(|_| random_compound(rng, depth)).collect();
    Rule::new(head, premises).unwrap()
}

// ---------------------------------------------------------------------------
// Robinson unification with occurs check

pub type Subst = HashMap<String, Term>;

fn walk(s: &Subst, t: &Term) -> Term {
    match t {
        Term::Var(v) => match s.get(v) {
            Some(b) => walk(s, b),
            None => t.clone(),
        },
        other => other.clone(),
    }
}

pub fn resolve(s: &Subst, t: &Term) -> Term {
    match walk(s, t) {
        Term::Compound(name, args) => Term::Compound(name, args.iter().map(|a| resolve(s, a)).collect()),
        v => v,
    }
}

fn occurs(s: &Subst, v: &str, t: &Term) -> bool {
    match walk(s, t) {
        Term::Var(w) => w == v,
        Term::Compound(_, args) => args.iter().any(|a| occurs(s, v, a)),
    }
}

/// Most general unifier in triangular form, or `None`.
pub fn robinson(a: &Term, b: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        match (walk(&s, &x), walk(&s, &y)) {
            (Term::Var(v), Term::Var(w)) if v == w => {}
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                if occurs(&s, &v, &t) {
                    return None;
                }
                s.insert(v, t);
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.into_iter().zip(ys));
            }
        }
    }
    Some(s)
}

/// True if `a` and `b` are equal up to a consistent renaming of variables.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fwd: &mut HashMap<String, String>, back: &mut HashMap<String, String>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let f = fwd.entry(x.clone()).or_insert_with(|| y.clone()).clone();
                let g = back.entry(y.clone()).or_insert_with(|| x.clone()).clone();
                f == *y && g == *x
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fwd, back))
            }
            _ => false,
        }
    }
    go(a, b, &mut HashMap::new(), &mut HashMap::new())
}

// ---------------------------------------------------------------------------
// Bounded bottom-up enumerator

/// Every ground term the enumerator may use. Rule variables that no premise
/// binds range over the whole universe, and derived facts must have all
/// their arguments inside it.
pub struct Universe {
    terms: Vec<Term>,
    members: HashSet<Term>,
}

impl Universe {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut members = HashSet::new();
        let mut ordered = Vec::new();
        for t in terms {
            if members.insert(t.clone()) {
                ordered.push(t);
            }
        }
        Universe {
            terms: ordered,
            members,
        }
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.members.contains(t)
    }
}

pub fn numeral(n: usize) -> Term {
    (0..n).fold(Term::constant("zero"), |t, _| Term::compound("s", vec![t]))
}

pub fn numerals(max: usize) -> Vec<Term> {
    (0..=max).map(numeral).collect()
}

pub fn list(items: &[Term]) -> Term {
    items.iter().rev().fold(Term::constant("nil"), |tail, x| {
        Term::compound("cons", vec![x.clone(), tail])
    })
}

/// Every list of length at most `max_len` over `elems`.
pub fn lists(elems: &[Term], max_len: usize) -> Vec<Term> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let next: Vec<Vec<Term>> = layer
            .iter()
            .flat_map(|l: &Vec<Term>| {
                elems.iter().map(move |e| {
                    let mut l = l.clone();
                    l.push(e.clone());
                    l
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out.iter().map(|l| list(l)).collect()
}

/// Constants appearing in a program.
pub fn constants(program: &Program) -> Vec<Term> {
    fn walk(t: &Term, out: &mut BTreeSet<String>) {
        if let Term::Compound(name, args) = t {
            if args.is_empty() {
                out.insert(name.clone());
            }
            args.iter().for_each(|a| walk(a, out));
        }
    }
    let mut names = BTreeSet::new();
    for r in program.rules() {
        walk(r.conclusion(), &mut names);
        r.premises().iter().for_each(|p| walk(p, &mut names));
    }
    names.into_iter().map(Term::constant).collect()
}

type Binding = HashMap<String, Term>;

/// One-way matching of a pattern against a ground term.
fn matches(pattern: &Term, ground: &Term, b: &mut Binding) -> bool {
    match pattern {
        Term::Var(v) => match b.get(v) {
            Some(t) => t == ground,
            None => {
                b.insert(v.clone(), ground.clone());
                true
            }
        },
        Term::Compound(f, ps) => match ground {
            Term::Compound(g, gs) => f == g && ps.len() == gs.len() && ps.iter().zip(gs).all(|(p, g)| matches(p, g, b)),
            Term::Var(_) => false,
        },
    }
}

fn instantiate(t: &Term, b: &Binding) -> Term {
    match t {
        Term::Var(v) => b[v].clone(),
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| instantiate(a, b)).collect()),
    }
}

fn vars_of(t: &Term, out: &mut Vec<String>) {
    match t {
        Term::Var(v) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        Term::Compound(_, args) => args.iter().for_each(|a| vars_of(a, out)),
    }
}

/// All bindings that make every goal a fact, extending `start`. Variables no
/// goal binds are left unbound.
fn join(goals: &[Term], facts: &HashMap<(String, usize), Vec<Term>>, start: Binding) -> Vec<Binding> {
    let mut partial = vec![start];
    for g in goals {
        let key = match g {
            Term::Compound(f, args) => (f.clone(), args.len()),
            Term::Var(_) => return Vec::new(),
        };
        let candidates = facts.get(&key).map(Vec::as_slice).unwrap_or(&[]);
        let mut next = Vec::new();
        for b in &partial {
            for fact in candidates {
                let mut b2 = b.clone();
                if matches(g, fact, &mut b2) {
                    next.push(b2);
                }
            }
        }
        partial = next;
    }
    partial
}

/// Extends each binding so that all of `vars` are bound, trying every
/// universe member for the missing ones.
fn complete(bindings: Vec<Binding>, vars: &[String], universe: &Universe) -> Vec<Binding> {
    let mut out = bindings;
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|b| {
                if b.contains_key(v) {
                    vec![b]
                } else {
                    universe
                        .terms
                        .iter()
                        .map(|t| {
                            let mut b = b.clone();
                            b.insert(v.clone(), t.clone());
                            b
                        })
                        .collect()
                }
            })
            .collect();
    }
    out
}

/// The least model of `program` restricted to facts whose arguments all lie
/// in `universe`, computed by naive iteration to a fixpoint.
pub fn least_model(program: &Program, universe: &Universe) -> HashSet<Term> {
    let mut model: HashSet<Term> = HashSet::new();
    loop {
        let mut index: HashMap<(String, usize), Vec<Term>> = HashMap::new();
        for f in &model {
            if let Term::Compound(name, args) = f {
                index.entry((name.clone(), args.len())).or_default().push(f.clone());
            }
        }
        let mut added = false;
        for rule in program.rules() {
            let mut head_vars = Vec::new();
            vars_of(rule.conclusion(), &mut head_vars);
            for b in complete(join(rule.premises(), &index, Binding::new()), &head_vars, universe) {
                let fact = instantiate(rule.conclusion(), &b);
                let inside = match &fact {
                    Term::Compound(_, args) => args.iter().all(|a| universe.contains(a)),
                    Term::Var(_) => false,
                };
                if inside && model.insert(fact) {
                    added = true;
                }
            }
        }
        if !added {
            return model;
        }
    }
}

/// Answers to a conjunctive query against a model, as canonical-text
/// bindings of the query variables in order of first occurrence.
pub fn answers(model: &HashSet<Term>, goals: &[Term], universe: &Universe) -> BTreeSet<Vec<(String, String)>> {
    let mut index: HashMap<(String, usize), Vec<Term>> = HashMap::new();
    for f in model {
        if let Term::Compound(name, args) = f {
            index.entry((name.clone(), args.len())).or_default().push(f.clone());
        }
    }
    let mut vars = Vec::new();
    goals.iter().for_each(|g| vars_of(g, &mut vars));
    complete(join(goals, &index, Binding::new()), &vars, universe)
        .into_iter()
        .map(|b| vars.iter().map(|v| (v.clone(), b[v].to_string())).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Constructor-style printing: `(Fun "p" [Var "X"]) :<-: [...]`

pub fn shape_term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("Var {v:?}"),
        Term::Compound(f, args) => {
            format!(
                "Fun {f:?} [{}]",
                args.iter().map(shape_term).collect::<Vec<_>>().join(",")
            )
        }
    }
}

pub fn shape_rule(r: &Rule) -> String {
    format!(
        "({}) :<-: [{}]",
        shape_term(r.conclusion()),
        r.premises().iter().map(shape_term).collect::<Vec<_>>().join(",")
    )
}

/// Solver bindings as a sortable record.
pub fn binding_record(bindings: &[(String, Term)]) -> Vec<(String, String)> {
    bindings.iter().map(|(v, t)| (v.clone(), t.to_string())).collect()
}

pub fn counts<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i).or_insert(0) += 1;
    }
    m
}

// ---------------------------------------------------------------------------
// Corpus queries with the universe each one needs

pub struct OracleCase {
    pub program: &'static str,
    pub source: &'static str,
    pub query: &'static str,
}

pub const ORACLE_CASES: &[OracleCase] = &[
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "parent(X,Y)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "grandparent(X,Y)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "grandparent(alice,Q)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "grandparent(X,ivy)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "ancestor(X,Y)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "ancestor(X,dave)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "ancestor(alice,Y)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "parent(X,Y), parent(Y,Z)",
    },
    OracleCase {
        program: "family",
        source: nanolog::corpus::FAMILY,
        query: "ancestor(X,X)",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "add(s(zero),s(zero),R)",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "add(X,Y,s(s(s(zero))))",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "add(X,s(zero),s(s(s(s(zero)))))",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "mult(s(s(zero)),s(s(zero)),R)",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "mult(s(s(zero)),s(s(s(zero))),R)",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "mult(zero,s(zero),R)",
    },
    OracleCase {
        program: "peano",
        source: nanolog::corpus::PEANO,
        query: "mult(s(zero),Y,s(s(zero)))",
    },
    OracleCase {
        program: "lists",
        source: nanolog::corpus::LISTS,
        query: "length(cons(a,cons(b,nil)),N)",
    },
    OracleCase {
        program: "lists",
        source: nanolog::corpus::LISTS,
        query: "length(L,zero)",
    },
    OracleCase {
        program: "lists",
        source: nanolog::corpus::LISTS,
        query: "append(X,Y,cons(a,cons(b,cons(a,nil))))",
    },
    OracleCase {
        program: "lists",
        source: nanolog::corpus::LISTS,
        query: "append(cons(a,nil),cons(b,nil),Z)",
    },
    OracleCase {
        program: "lists",
        source: nanolog::corpus::LISTS,
        query: "append(X,cons(b,nil),cons(a,cons(b,nil)))",
    },
    OracleCase {
        program: "lists",
        source: nanolog::corpus::LISTS,
        query: "append(X,Y,cons(b,cons(a,nil))), length(X,N)",
    },
];

/// Ground terms large enough for every derivation behind the queries above.
pub fn universe_for(program: &str) -> Universe {
    match program {
        "family" => Universe::new(constants(&nanolog::corpus::load("family").unwrap())),
        "peano" => Universe::new(numerals(6)),
        "lists" => {
            let elems = [Term::constant("a"), Term::constant("b")];
            Universe::new(elems.iter().cloned().chain(numerals(3)).chain(lists(&elems, 3)))
        }
        other => panic!("no universe for {other}"),
    }
}

// ---------------------------------------------------------------------------
// Solutions to replay

/// Single-goal corpus queries, including open-ended ones cut off by
/// `max_solutions`, with every solution each yields.
pub fn replay_pool() -> Vec<(Term, nanolog::Solution)> {
    use nanolog::{solve, SolveOptions, Strategy};
    let mut runs: Vec<(&str, &str, SolveOptions)> = ORACLE_CASES
        .iter()
        .map(|c| {
            (
                c.source,
                c.query,
                SolveOptions::default().with_max_depth(8).with_max_solutions(100),
            )
        })
        .collect();
    let open = SolveOptions::default().with_max_solutions(15);
    runs.extend([
        (nanolog::corpus::PEANO, "add(X,Y,Z)", open.clone()),
        (nanolog::corpus::PEANO, "mult(X,Y,Z)", open.clone()),
        (nanolog::corpus::LISTS, "length(L,N)", open.clone()),
        (nanolog::corpus::LISTS, "append(X,Y,Z)", open.clone()),
        (
            nanolog::corpus::PATH,
            "path(a,Y)",
            open.clone().with_strategy(Strategy::Bfs).with_max_solutions(1),
        ),
        (
            nanolog::corpus::FAMILY,
            "ancestor(X,Y)",
            open.clone().with_strategy(Strategy::Iddfs).with_max_solutions(30),
        ),
        (
            nanolog::corpus::FAMILY,
            "grandparent(X,Y)",
            open.clone().with_strategy(Strategy::Bfs),
        ),
    ]);
    let mut pool = Vec::new();
    for (source, query, opts) in runs {
        let goals = nanolog::parse_query(query).unwrap();
        if goals.len() != 1 {
            continue;
        }
        let program = nanolog::parse_program(source).unwrap();
        for s in solve(&program, &goals, opts).unwrap().solutions {
            pool.push((goals[0].clone(), s));
        }
    }
    pool
}
