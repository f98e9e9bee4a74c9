//! Terms, rules, programs and substitution environments.
//!
//! A [`Term`] is either a named variable or a functor applied to an ordered
//! list of argument terms; constants are functors with no arguments. An
//! [`Env`] is a triangular substitution: bindings may mention other bound
//! variables, and lookups chase the chain until an unbound variable or a
//! functor is reached. No occurs check is ever performed, so an `Env` can be
//! cyclic. Every chase is therefore bounded by a depth budget.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Separator between a variable's source name and its instance id in renamed
/// variables (`X.3`). The parser never produces it.
pub const RENAME_SEPARATOR: char = '.';

/// Default number of chase steps allowed when resolving a binding chain.
pub const DEFAULT_SUBST_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Compound(name.into(), Vec::new())
    }

    pub fn compound(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Compound(name.into(), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Compound(_, args) if args.is_empty())
    }

    /// Functor name and arity, or `None` for a variable.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Var(_) => None,
            Term::Compound(name, args) => Some((name, args.len())),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variable names in order of first occurrence, without duplicates.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>, seen: &mut HashSet<String>) {
        match self {
            Term::Var(name) => {
                if seen.insert(name.clone()) {
                    out.push(name.clone());
                }
            }
            Term::Compound(_, args) => {
                for arg in args {
                    arg.collect_vars(out, seen);
                }
            }
        }
    }

    fn map_vars(&self, f: &impl Fn(&str) -> String) -> Term {
        match self {
            Term::Var(name) => Term::Var(f(name)),
            Term::Compound(name, args) => Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    /// Nesting depth: variables and constants have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(name) => f.write_str(name),
            Term::Compound(name, args) => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, arg) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{arg}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// Variables in order of first occurrence across a list of terms.
pub fn term_list_vars(terms: &[Term]) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for t in terms {
        t.collect_vars(&mut out, &mut seen);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule head must be a compound term, found variable {0}")]
    VariableHead(String),
}

/// A Horn clause: the conclusion holds if every premise holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    conclusion: Term,
    premises: Vec<Term>,
}

impl Rule {
    pub fn new(conclusion: Term, premises: Vec<Term>) -> Result<Self, RuleError> {
        if let Term::Var(name) = &conclusion {
            return Err(RuleError::VariableHead(name.clone()));
        }
        Ok(Rule { conclusion, premises })
    }

    pub fn fact(conclusion: Term) -> Result<Self, RuleError> {
        Rule::new(conclusion, Vec::new())
    }

    pub fn conclusion(&self) -> &Term {
        &self.conclusion
    }

    pub fn premises(&self) -> &[Term] {
        &self.premises
    }

    pub fn is_fact(&self) -> bool {
        self.premises.is_empty()
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.conclusion.collect_vars(&mut out, &mut seen);
        for p in &self.premises {
            p.collect_vars(&mut out, &mut seen);
        }
        out
    }

    /// Gives every variable a name unique to this application: `V` becomes
    /// `V.<instance_id>`.
    pub fn rename(&self, instance_id: u64) -> Rule {
        let f = |name: &str| format!("{name}{RENAME_SEPARATOR}{instance_id}");
        Rule {
            conclusion: self.conclusion.map_vars(&f),
            premises: self.premises.iter().map(|p| p.map_vars(&f)).collect(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.conclusion)?;
        if !self.premises.is_empty() {
            f.write_str(" :- ")?;
            for (i, p) in self.premises.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
        }
        f.write_str(".")
    }
}

/// Rewrites every variable of `rule` to a name unique to `instance_id`.
pub fn rename_rule(rule: &Rule, instance_id: u64) -> Rule {
    rule.rename(instance_id)
}

/// Strips an instance suffix from a renamed variable name.
pub fn base_name(var: &str) -> &str {
    var.split(RENAME_SEPARATOR).next().unwrap_or(var)
}

/// An ordered list of rules; resolution tries them in this order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn push(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
    }
}

impl FromIterator<Rule> for Program {
    fn from_iter<I: IntoIterator<Item = Rule>>(iter: I) -> Self {
        Program {
            rules: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    /// A binding chain did not bottom out within the budget. Chains only get
    /// this long when the environment is cyclic.
    #[error("substitution budget of {budget} chase steps exhausted while resolving {var}")]
    BudgetExhausted { var: String, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("cannot bind variable {0} to itself")]
    SelfBinding(String),
}

/// A finite map from variable names to terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Env {
    bindings: BTreeMap<String, Term>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    /// Binds `var` to `term`, replacing any previous binding.
    pub fn bind(&mut self, var: impl Into<String>, term: Term) -> Result<(), EnvError> {
        let var = var.into();
        if matches!(&term, Term::Var(name) if *name == var) {
            return Err(EnvError::SelfBinding(var));
        }
        self.bindings.insert(var, term);
        Ok(())
    }

    pub fn with(mut self, var: impl Into<String>, term: Term) -> Result<Self, EnvError> {
        self.bind(var, term)?;
        Ok(self)
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// True when every binding resolves within `budget` chase steps.
    pub fn is_acyclic(&self, budget: usize) -> bool {
        self.bindings
            .keys()
            .all(|v| apply_subst_term(self, &Term::Var(v.clone()), budget).is_ok())
    }

    /// Fully chased values of `vars`, in the given order.
    pub fn resolve_vars(&self, vars: &[String], budget: usize) -> Result<Vec<(String, Term)>, SubstError> {
        let mut resolver = Resolver::new(self, budget);
        vars.iter()
            .map(|v| Ok((v.clone(), resolver.term(&Term::Var(v.clone()))?)))
            .collect()
    }
}

impl FromIterator<(String, Term)> for Env {
    /// Collects bindings, silently dropping self-bindings.
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        let mut env = Env::new();
        for (k, v) in iter {
            let _ = env.bind(k, v);
        }
        env
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

/// Chases bindings with a shared memo so each bound variable is resolved once
/// per call. Variables on the active chase stack are tracked: re-entering one
/// means the chain is infinite, which is reported as an exhausted budget
/// straight away.
struct Resolver<'e> {
    env: &'e Env,
    budget: usize,
    resolved: HashMap<String, Term>,
    active: HashSet<String>,
}

impl<'e> Resolver<'e> {
    fn new(env: &'e Env, budget: usize) -> Self {
        Resolver {
            env,
            budget,
            resolved: HashMap::new(),
            active: HashSet::new(),
        }
    }

    fn term(&mut self, t: &Term) -> Result<Term, SubstError> {
        self.walk(t, self.budget)
    }

    fn walk(&mut self, t: &Term, remaining: usize) -> Result<Term, SubstError> {
        match t {
            Term::Var(name) => {
                let Some(bound) = self.env.get(name) else {
                    return Ok(t.clone());
                };
                if let Some(done) = self.resolved.get(name) {
                    return Ok(done.clone());
                }
                if remaining == 0 || self.active.contains(name) {
                    return Err(SubstError::BudgetExhausted {
                        var: name.clone(),
                        budget: self.budget,
                    });
                }
                self.active.insert(name.clone());
                let out = self.walk(bound, remaining - 1);
                self.active.remove(name);
                let out = out?;
                self.resolved.insert(name.clone(), out.clone());
                Ok(out)
            }
            Term::Compound(name, args) => {
                let args = args
                    .iter()
                    .map(|a| self.walk(a, remaining))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::Compound(name.clone(), args))
            }
        }
    }
}

/// Replaces every bound variable in `t` by the fully chased value of its
/// binding. Each step along a binding chain consumes one unit of `budget`.
pub fn apply_subst_term(env: &Env, t: &Term, budget: usize) -> Result<Term, SubstError> {
    if env.is_empty() {
        return Ok(t.clone());
    }
    Resolver::new(env, budget).term(t)
}

pub fn apply_subst_terms(env: &Env, ts: &[Term], budget: usize) -> Result<Vec<Term>, SubstError> {
    let mut resolver = Resolver::new(env, budget);
    ts.iter().map(|t| resolver.term(t)).collect()
}

pub fn apply_subst_rule(env: &Env, rule: &Rule, budget: usize) -> Result<Rule, SubstError> {
    let mut resolver = Resolver::new(env, budget);
    Ok(Rule {
        conclusion: resolver.term(&rule.conclusion)?,
        premises: rule
            .premises
            .iter()
            .map(|p| resolver.term(p))
            .collect::<Result<_, _>>()?,
    })
}

/// Variable names of `t` in order of first occurrence.
pub fn term_vars(t: &Term) -> Vec<String> {
    t.vars()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn f(n: &str, args: Vec<Term>) -> Term {
        Term::compound(n, args)
    }

    /// Naive oracle: apply one level of bindings until nothing changes.
    fn fixpoint(env: &Env, t: &Term) -> Term {
        fn once(env: &Env, t: &Term) -> Term {
            match t {
                Term::Var(n) => env.get(n).cloned().unwrap_or_else(|| t.clone()),
                Term::Compound(n, args) => Term::Compound(n.clone(), args.iter().map(|a| once(env, a)).collect()),
            }
        }
        let mut cur = t.clone();
        loop {
            let next = once(env, &cur);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    #[test]
    fn direct_lookup() {
        let env = Env::new().with("X", c("a")).unwrap();
        assert_eq!(apply_subst_term(&env, &v("X"), 16).unwrap(), c("a"));
    }

    #[test]
    fn chased_lookup_matches_fixpoint() {
        let env = Env::new().with("X", v("Y")).unwrap().with("Y", c("b")).unwrap();
        let t = f("f", vec![v("X"), v("Z")]);
        let got = apply_subst_term(&env, &t, 16).unwrap();
        assert_eq!(got, f("f", vec![c("b"), v("Z")]));
        assert_eq!(got, fixpoint(&env, &t));
    }

    #[test]
    fn cyclic_binding_exhausts_budget() {
        let env = Env::new().with("X", f("f", vec![v("X")])).unwrap();
        assert!(matches!(
            apply_subst_term(&env, &v("X"), 16),
            Err(SubstError::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn long_chain_respects_budget() {
        let mut env = Env::new();
        for i in 0..10 {
            env.bind(format!("V{i}"), v(&format!("V{}", i + 1))).unwrap();
        }
        env.bind("V10", c("end")).unwrap();
        assert_eq!(apply_subst_term(&env, &v("V0"), 11).unwrap(), c("end"));
        assert!(apply_subst_term(&env, &v("V0"), 10).is_err());
    }

    #[test]
    fn term_lists() {
        assert_eq!(
            apply_subst_terms(&Env::new(), &[v("X"), c("a")], 16).unwrap(),
            vec![v("X"), c("a")]
        );
        let env = Env::new().with("X", c("a")).unwrap();
        assert_eq!(
            apply_subst_terms(&env, &[v("X"), v("X")], 16).unwrap(),
            vec![c("a"), c("a")]
        );
        let env = Env::new()
            .with("X", v("Y"))
            .unwrap()
            .with("Y", f("g", vec![c("b")]))
            .unwrap();
        let ts = [f("f", vec![v("X")])];
        let got = apply_subst_terms(&env, &ts, 16).unwrap();
        assert_eq!(got, vec![f("f", vec![f("g", vec![c("b")])])]);
        assert_eq!(got[0], fixpoint(&env, &ts[0]));
    }

    #[test]
    fn rules() {
        let r = Rule::new(f("p", vec![v("X")]), vec![f("q", vec![v("X")])]).unwrap();
        assert_eq!(apply_subst_rule(&Env::new(), &r, 16).unwrap(), r);
        let env = Env::new().with("X", c("a")).unwrap();
        assert_eq!(
            apply_subst_rule(&env, &r, 16).unwrap(),
            Rule::new(f("p", vec![c("a")]), vec![f("q", vec![c("a")])]).unwrap()
        );
        let add = Rule::fact(f("add", vec![c("zero"), v("Y"), v("Y")])).unwrap();
        let env = Env::new().with("Y", f("s", vec![v("Z")])).unwrap();
        let s_z = f("s", vec![v("Z")]);
        assert_eq!(
            apply_subst_rule(&env, &add, 16).unwrap(),
            Rule::fact(f("add", vec![c("zero"), s_z.clone(), s_z])).unwrap()
        );
    }

    #[test]
    fn renaming() {
        let r = Rule::new(f("p", vec![v("X")]), vec![f("q", vec![v("X")])]).unwrap();
        assert_eq!(
            rename_rule(&r, 3),
            Rule::new(f("p", vec![v("X.3")]), vec![f("q", vec![v("X.3")])]).unwrap()
        );
        let fact = Rule::fact(c("a")).unwrap();
        assert_eq!(rename_rule(&fact, 7), fact);
        let r = Rule::new(
            f("add", vec![f("s", vec![v("X")]), v("Y"), f("s", vec![v("Z")])]),
            vec![f("add", vec![v("X"), v("Y"), v("Z")])],
        )
        .unwrap();
        assert_eq!(
            rename_rule(&r, 1).to_string(),
            "add(s(X.1),Y.1,s(Z.1)) :- add(X.1,Y.1,Z.1)."
        );
    }

    #[test]
    fn vars_in_first_occurrence_order() {
        assert_eq!(
            term_vars(&f("f", vec![v("X"), f("g", vec![v("Y"), v("X")])])),
            ["X", "Y"]
        );
        assert!(term_vars(&c("a")).is_empty());
        assert_eq!(
            term_vars(&f("p", vec![v("Z"), v("Y"), v("Z"), v("X")])),
            ["Z", "Y", "X"]
        );
    }

    #[test]
    fn self_binding_rejected() {
        assert_eq!(Env::new().bind("X", v("X")), Err(EnvError::SelfBinding("X".into())));
    }

    #[test]
    fn variable_head_rejected() {
        assert!(Rule::new(v("X"), vec![f("p", vec![v("X")])]).is_err());
    }

    #[test]
    fn printing() {
        assert_eq!(f("f", vec![c("a"), v("X")]).to_string(), "f(a,X)");
        let g = Rule::new(
            f("grandparent", vec![v("X"), v("Y")]),
            vec![f("parent", vec![v("X"), v("Z")]), f("parent", vec![v("Z"), v("Y")])],
        )
        .unwrap();
        assert_eq!(g.to_string(), "grandparent(X,Y) :- parent(X,Z), parent(Z,Y).");
        assert_eq!(
            Rule::fact(f("parent", vec![c("alice"), c("bob")])).unwrap().to_string(),
            "parent(alice,bob)."
        );
    }
}
