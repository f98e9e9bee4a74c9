//! SLD resolution over an explicit search tree.
//!
//! A search node holds the pending goals, the environment accumulated so far
//! and the trace of rule applications that led to it. Expanding a node takes
//! the leftmost goal, tries every program rule in order (each freshly renamed),
//! and yields one child per rule whose conclusion unifies with the goal; the
//! child's goals are the rule's premises followed by the remaining goals. A
//! node with no goals left is a solution, a node with no children a dead end.
//!
//! [`SolveRun`] walks this tree lazily under one of three strategies and stops
//! as soon as any budget runs out. [`build_tree`] materializes the same tree.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{apply_subst_term, term_list_vars, Env, Program, Rule, SubstError, Term};
use crate::unify::{heads_compatible, unify_in_place};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Left-to-right depth first, the standard Prolog order.
    #[default]
    Dfs,
    /// Level order over search nodes.
    Bfs,
    /// Depth-first passes with a depth limit raised by one each pass.
    Iddfs,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Dfs => "dfs",
            Strategy::Bfs => "bfs",
            Strategy::Iddfs => "iddfs",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfs" => Ok(Strategy::Dfs),
            "bfs" => Ok(Strategy::Bfs),
            "iddfs" => Ok(Strategy::Iddfs),
            other => Err(format!("unknown strategy `{other}` (expected dfs, bfs or iddfs)")),
        }
    }
}

/// The budget that stopped a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    MaxDepth,
    MaxSolutions,
    Steps,
    Subst,
    Time,
}

impl Budget {
    pub fn as_str(self) -> &'static str {
        match self {
            Budget::MaxDepth => "max_depth",
            Budget::MaxSolutions => "max_solutions",
            Budget::Steps => "steps",
            Budget::Subst => "subst",
            Budget::Time => "time",
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub strategy: Strategy,
    /// Rule applications allowed along one path from the root.
    pub max_depth: usize,
    pub max_solutions: usize,
    /// Total unification attempts across the whole search.
    pub step_budget: usize,
    /// Chase steps per substitution.
    pub subst_budget: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            strategy: Strategy::Dfs,
            max_depth: 256,
            max_solutions: 10,
            step_budget: 100_000,
            subst_budget: crate::term::DEFAULT_SUBST_BUDGET,
            time_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn with_max_solutions(mut self, max_solutions: usize) -> Self {
        self.max_solutions = max_solutions;
        self
    }

    fn validate(&self) -> Result<(), SolveError> {
        for (name, value) in [
            ("max_depth", self.max_depth),
            ("max_solutions", self.max_solutions),
            ("step_budget", self.step_budget),
            ("subst_budget", self.subst_budget),
        ] {
            if value == 0 {
                return Err(SolveError::InvalidOption(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("a query needs at least one goal")]
    EmptyQuery,
    #[error("option {0} must be at least 1")]
    InvalidOption(&'static str),
}

/// One rule application on the path to a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// The program rule as written, before renaming.
    pub rule: Rule,
    pub instance_id: u64,
    /// The goal the rule was applied to, substituted at the time.
    pub goal: Term,
}

pub type Trace = Vec<TraceStep>;

/// Proof-tree depth of each step in `trace`. Every step closes the leftmost
/// open goal and opens one goal per premise one level below it.
pub fn trace_depths(trace: &[TraceStep]) -> Vec<usize> {
    let mut open = vec![0usize];
    let mut out = Vec::with_capacity(trace.len());
    for step in trace {
        let depth = open.pop().unwrap_or(0);
        out.push(depth);
        open.extend(std::iter::repeat_n(depth + 1, step.rule.premises().len()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub env: Env,
    pub trace: Trace,
    /// Query variables in order of first occurrence, fully chased.
    pub bindings: Vec<(String, Term)>,
    /// Set when some binding could not be chased within the substitution
    /// budget; that binding then holds its unchased value.
    pub cyclic: bool,
}

impl Solution {
    /// The environment restricted to the query variables.
    pub fn restricted_env(&self) -> Env {
        self.bindings.iter().cloned().collect()
    }

    pub fn binding(&self, var: &str) -> Option<&Term> {
        self.bindings.iter().find(|(v, _)| v == var).map(|(_, t)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub solutions: Vec<Solution>,
    /// The whole search space was explored within budgets.
    pub exhausted: bool,
    pub budget_hit: Option<Budget>,
}

/// Persistent cons list; search nodes share tails.
#[derive(Debug)]
struct Cell<T> {
    head: T,
    tail: List<T>,
}

type List<T> = Option<Arc<Cell<T>>>;

fn cons<T>(head: T, tail: List<T>) -> List<T> {
    Some(Arc::new(Cell { head, tail }))
}

fn list_iter<T>(mut list: &List<T>) -> impl Iterator<Item = &T> {
    std::iter::from_fn(move || {
        let cell = list.as_ref()?;
        list = &cell.tail;
        Some(&cell.head)
    })
}

#[derive(Debug, Clone)]
struct Node {
    goals: List<Term>,
    env: Env,
    depth: usize,
    /// Most recent step first.
    trace: List<Arc<TraceStep>>,
}

impl Node {
    fn root(goals: &[Term]) -> Node {
        let mut list = None;
        for g in goals.iter().rev() {
            list = cons(g.clone(), list);
        }
        Node {
            goals: list,
            env: Env::new(),
            depth: 0,
            trace: None,
        }
    }

    fn trace(&self) -> Trace {
        let mut steps: Trace = list_iter(&self.trace).map(|s| (**s).clone()).collect();
        steps.reverse();
        steps
    }
}

struct Child {
    renamed: Rule,
    node: Node,
}

/// Shared expansion machinery: rule renaming, step accounting, deadlines.
struct Expander<'p> {
    program: &'p Program,
    opts: SolveOptions,
    next_instance: u64,
    steps: usize,
    deadline: Option<Instant>,
}

impl<'p> Expander<'p> {
    fn new(program: &'p Program, opts: SolveOptions) -> Self {
        let deadline = opts.time_limit.map(|d| Instant::now() + d);
        Expander {
            program,
            opts,
            next_instance: 1,
            steps: 0,
            deadline,
        }
    }

    /// Children of a node with at least one pending goal. Instance ids are
    /// only consumed by applications that unify.
    fn expand(&mut self, node: &Node) -> Result<(Term, Vec<Child>), Budget> {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Budget::Time);
        }
        let cell = node.goals.as_ref().expect("expand called on a solved node");
        let budget = self.opts.subst_budget;
        let goal = apply_subst_term(&node.env, &cell.head, budget).map_err(|_| Budget::Subst)?;
        let mut children = Vec::new();
        for rule in self.program.rules() {
            if !heads_compatible(&goal, rule.conclusion()) {
                continue;
            }
            self.steps += 1;
            if self.steps > self.opts.step_budget {
                return Err(Budget::Steps);
            }
            let id = self.next_instance;
            let renamed = rule.rename(id);
            let mut env = node.env.clone();
            match unify_in_place(renamed.conclusion(), &goal, &mut env, budget) {
                Ok(true) => {}
                Ok(false) => continue,
                Err(SubstError::BudgetExhausted { .. }) => return Err(Budget::Subst),
            }
            self.next_instance += 1;
            let mut goals = cell.tail.clone();
            for p in renamed.premises().iter().rev() {
                goals = cons(p.clone(), goals);
            }
            let step = TraceStep {
                rule: rule.clone(),
                instance_id: id,
                goal: goal.clone(),
            };
            children.push(Child {
                renamed,
                node: Node {
                    goals,
                    env,
                    depth: node.depth + 1,
                    trace: cons(Arc::new(step), node.trace.clone()),
                },
            });
        }
        Ok((goal, children))
    }
}

/// A lazily evaluated search. Each call to `next` resumes the traversal until
/// the next solution; dropping the run abandons the rest of the search.
pub struct SolveRun<'p> {
    expander: Expander<'p>,
    query_vars: Vec<String>,
    root: Node,
    frontier: std::collections::VecDeque<Node>,
    iddfs_limit: usize,
    cutoff: bool,
    found: usize,
    finished: bool,
    budget_hit: Option<Budget>,
}

impl<'p> SolveRun<'p> {
    pub fn new(program: &'p Program, goals: &[Term], opts: SolveOptions) -> Result<Self, SolveError> {
        if goals.is_empty() {
            return Err(SolveError::EmptyQuery);
        }
        opts.validate()?;
        let root = Node::root(goals);
        let mut frontier = std::collections::VecDeque::new();
        frontier.push_back(root.clone());
        Ok(SolveRun {
            expander: Expander::new(program, opts),
            query_vars: term_list_vars(goals),
            root,
            frontier,
            iddfs_limit: 1,
            cutoff: false,
            found: 0,
            finished: false,
            budget_hit: None,
        })
    }

    fn opts(&self) -> &SolveOptions {
        &self.expander.opts
    }

    /// True once the traversal has ended, for whatever reason.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn is_exhausted(&self) -> bool {
        self.finished && self.budget_hit.is_none()
    }

    pub fn budget_hit(&self) -> Option<Budget> {
        self.budget_hit
    }

    /// Unification attempts so far.
    pub fn steps(&self) -> usize {
        self.expander.steps
    }

    fn stop(&mut self, budget: Option<Budget>) {
        self.finished = true;
        self.budget_hit = budget;
        self.frontier.clear();
    }

    fn pop(&mut self) -> Option<Node> {
        match self.opts().strategy {
            Strategy::Bfs => self.frontier.pop_front(),
            Strategy::Dfs | Strategy::Iddfs => self.frontier.pop_back(),
        }
    }

    fn solution(&self, node: &Node) -> Solution {
        let budget = self.opts().subst_budget;
        let mut cyclic = false;
        let bindings = self
            .query_vars
            .iter()
            .map(|v| {
                let var = Term::Var(v.clone());
                let value = apply_subst_term(&node.env, &var, budget).unwrap_or_else(|_| {
                    cyclic = true;
                    node.env.get(v).cloned().unwrap_or(var)
                });
                (v.clone(), value)
            })
            .collect();
        Solution {
            env: node.env.clone(),
            trace: node.trace(),
            bindings,
            cyclic,
        }
    }

    /// Runs the search to completion and collects everything it produced.
    pub fn into_outcome(mut self) -> SolveOutcome {
        let solutions: Vec<Solution> = self.by_ref().collect();
        SolveOutcome {
            solutions,
            exhausted: self.is_exhausted(),
            budget_hit: self.budget_hit,
        }
    }
}

impl Iterator for SolveRun<'_> {
    type Item = Solution;

    fn next(&mut self) -> Option<Solution> {
        if self.finished {
            return None;
        }
        if self.found >= self.opts().max_solutions {
            self.stop(Some(Budget::MaxSolutions));
            return None;
        }
        let strategy = self.opts().strategy;
        let max_depth = self.opts().max_depth;
        loop {
            let Some(node) = self.pop() else {
                if strategy == Strategy::Iddfs && self.cutoff {
                    self.iddfs_limit += 1;
                    self.cutoff = false;
                    self.frontier.push_back(self.root.clone());
                    continue;
                }
                self.stop(None);
                return None;
            };
            if node.goals.is_none() {
                // A pass with limit L only reports solutions at depth L; the
                // shallower ones were reported by earlier passes.
                if strategy == Strategy::Iddfs && node.depth < self.iddfs_limit {
                    continue;
                }
                self.found += 1;
                return Some(self.solution(&node));
            }
            let limit = if strategy == Strategy::Iddfs {
                self.iddfs_limit
            } else {
                max_depth
            };
            if node.depth >= limit {
                if limit >= max_depth {
                    self.stop(Some(Budget::MaxDepth));
                    return None;
                }
                self.cutoff = true;
                continue;
            }
            let children = match self.expander.expand(&node) {
                Ok((_, children)) => children,
                Err(budget) => {
                    self.stop(Some(budget));
                    return None;
                }
            };
            match strategy {
                Strategy::Bfs => self.frontier.extend(children.into_iter().map(|c| c.node)),
                Strategy::Dfs | Strategy::Iddfs => self.frontier.extend(children.into_iter().rev().map(|c| c.node)),
            }
        }
    }
}

/// Searches for solutions of `goals` and collects them.
pub fn solve(program: &Program, goals: &[Term], opts: SolveOptions) -> Result<SolveOutcome, SolveError> {
    Ok(SolveRun::new(program, goals, opts)?.into_outcome())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchTree {
    Solution(Env),
    /// One edge per applicable rule, in program order. No edges is a dead end.
    Branch(Vec<Edge>),
    /// Not expanded: the depth limit or another budget was reached here.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// The renamed rule whose application produced `child`.
    pub rule: Rule,
    pub goal: Term,
    pub child: SearchTree,
}

impl SearchTree {
    pub fn is_dead_end(&self) -> bool {
        matches!(self, SearchTree::Branch(edges) if edges.is_empty())
    }

    /// Solution environments in left-to-right depth-first order.
    pub fn solutions(&self) -> Vec<&Env> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Env>) {
        match self {
            SearchTree::Solution(env) => out.push(env),
            SearchTree::Branch(edges) => edges.iter().for_each(|e| e.child.collect(out)),
            SearchTree::Truncated => {}
        }
    }

    pub fn has_truncation(&self) -> bool {
        match self {
            SearchTree::Truncated => true,
            SearchTree::Solution(_) => false,
            SearchTree::Branch(edges) => edges.iter().any(|e| e.child.has_truncation()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            SearchTree::Branch(edges) => 1 + edges.iter().map(|e| e.child.node_count()).sum::<usize>(),
            _ => 1,
        }
    }
}

/// Materializes the search tree down to `opts.max_depth`. Nodes at the limit
/// that still have goals, and any node reached after another budget ran out,
/// become [`SearchTree::Truncated`]. Instance ids are allocated in the same
/// order as a depth-first [`solve`].
pub fn build_tree(program: &Program, goals: &[Term], opts: SolveOptions) -> Result<SearchTree, SolveError> {
    if goals.is_empty() {
        return Err(SolveError::EmptyQuery);
    }
    opts.validate()?;
    let mut expander = Expander::new(program, opts);
    let mut stopped = false;
    Ok(grow(&mut expander, Node::root(goals), &mut stopped))
}

fn grow(expander: &mut Expander<'_>, node: Node, stopped: &mut bool) -> SearchTree {
    if node.goals.is_none() {
        return SearchTree::Solution(node.env);
    }
    if *stopped || node.depth >= expander.opts.max_depth {
        return SearchTree::Truncated;
    }
    match expander.expand(&node) {
        Err(_) => {
            *stopped = true;
            SearchTree::Truncated
        }
        Ok((goal, children)) => SearchTree::Branch(
            children
                .into_iter()
                .map(|c| Edge {
                    rule: c.renamed,
                    goal: goal.clone(),
                    child: grow(expander, c.node, stopped),
                })
                .collect(),
        ),
    }
}
