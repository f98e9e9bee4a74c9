//! Interactive proof trees.
//!
//! A proof starts as a single open goal. Applying a rule to an open node
//! unifies the rule's (renamed) conclusion with the node's goal; on success the
//! node records the rule, gains one open child per premise, and the extended
//! substitution is applied to every goal in the tree. A node whose subtree has
//! no open goals left is complete, and the proof is done when the root is.
//!
//! Every successful mutation pushes a snapshot so it can be undone. Failed
//! operations leave the state untouched.

use thiserror::Error;

use crate::parser::is_variable_name;
use crate::solver::TraceStep;
use crate::term::{apply_subst_term, Env, Rule, SubstError, Term, DEFAULT_SUBST_BUDGET, RENAME_SEPARATOR};
use crate::unify::unify_with_budget;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("no node at path {0:?}")]
    BadPath(Vec<usize>),
    #[error("a rule has already been applied to this node")]
    NodeNotOpen,
    #[error("the rule's conclusion does not unify with the goal")]
    UnificationFailed,
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("trace does not fit the proof at step {step}: {reason}")]
    ReplayMismatch { step: usize, reason: String },
    #[error("`{0}` is not a variable name")]
    InvalidVariable(String),
    #[error("the substitution makes a goal infinite: {0}")]
    Cyclic(SubstError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedRule {
    /// The rule as written in the program.
    pub rule: Rule,
    pub instance_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    /// The goal as it entered the tree, before any substitution.
    source: Term,
    goal: Term,
    applied: Option<AppliedRule>,
    children: Vec<ProofNode>,
}

impl ProofNode {
    fn open(source: Term) -> Self {
        ProofNode {
            goal: source.clone(),
            source,
            applied: None,
            children: Vec::new(),
        }
    }

    /// The goal under the proof's current substitution.
    pub fn goal(&self) -> &Term {
        &self.goal
    }

    pub fn source(&self) -> &Term {
        &self.source
    }

    pub fn applied(&self) -> Option<&AppliedRule> {
        self.applied.as_ref()
    }

    pub fn children(&self) -> &[ProofNode] {
        &self.children
    }

    pub fn is_open(&self) -> bool {
        self.applied.is_none()
    }

    pub fn is_complete(&self) -> bool {
        self.applied.is_some() && self.children.iter().all(ProofNode::is_complete)
    }

    pub fn status(&self) -> StatusTree {
        let children: Vec<StatusTree> = self.children.iter().map(ProofNode::status).collect();
        let complete = self.applied.is_some() && children.iter().all(|c| c.status == NodeStatus::Complete);
        StatusTree {
            status: if complete {
                NodeStatus::Complete
            } else {
                NodeStatus::Open
            },
            has_rule: self.applied.is_some(),
            children,
        }
    }

    fn at(&self, path: &[usize]) -> Option<&ProofNode> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children.get(i)?.at(rest),
        }
    }

    fn at_mut(&mut self, path: &[usize]) -> Option<&mut ProofNode> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children.get_mut(i)?.at_mut(rest),
        }
    }

    fn redisplay(&mut self, env: &Env, budget: usize) -> Result<(), SubstError> {
        self.goal = apply_subst_term(env, &self.source, budget)?;
        self.children.iter_mut().try_for_each(|c| c.redisplay(env, budget))
    }

    fn leftmost_open(&self, path: &mut Vec<usize>) -> bool {
        if self.applied.is_none() {
            return true;
        }
        for (i, child) in self.children.iter().enumerate() {
            path.push(i);
            if child.leftmost_open(path) {
                return true;
            }
            path.pop();
        }
        false
    }

    fn for_each<'a>(&'a self, f: &mut impl FnMut(&'a ProofNode)) {
        f(self);
        self.children.iter().for_each(|c| c.for_each(f));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    Complete,
}

impl NodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Open => "open",
            NodeStatus::Complete => "complete",
        }
    }
}

/// Per-node status, shaped like the proof tree. `has_rule` distinguishes a
/// node that was closed by a rule but still has open goals below it from a
/// node that is itself open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusTree {
    pub status: NodeStatus,
    pub has_rule: bool,
    pub children: Vec<StatusTree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Snapshot {
    root: ProofNode,
    env: Env,
    next_instance: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofState {
    root: ProofNode,
    env: Env,
    next_instance: u64,
    history: Vec<Snapshot>,
    subst_budget: usize,
}

impl ProofState {
    pub fn new(goal: Term) -> Self {
        ProofState {
            root: ProofNode::open(goal),
            env: Env::new(),
            next_instance: 1,
            history: Vec::new(),
            subst_budget: DEFAULT_SUBST_BUDGET,
        }
    }

    pub fn root(&self) -> &ProofNode {
        &self.root
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn next_instance(&self) -> u64 {
        self.next_instance
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn node(&self, path: &[usize]) -> Option<&ProofNode> {
        self.root.at(path)
    }

    pub fn status(&self) -> StatusTree {
        self.root.status()
    }

    pub fn is_complete(&self) -> bool {
        self.root.is_complete()
    }

    /// Path to the first open node in pre-order, if any.
    pub fn leftmost_open(&self) -> Option<Vec<usize>> {
        let mut path = Vec::new();
        self.root.leftmost_open(&mut path).then_some(path)
    }

    /// Fully substituted values of `vars` under the proof's substitution.
    pub fn bindings(&self, vars: &[String]) -> Result<Vec<(String, Term)>, SubstError> {
        self.env.resolve_vars(vars, self.subst_budget)
    }

    /// Applies `rule` to the open node at `path`, renaming it with the next
    /// free instance id.
    pub fn apply_rule(&mut self, path: &[usize], rule: &Rule) -> Result<(), ProofError> {
        self.apply_instance(path, rule, self.next_instance)
    }

    fn apply_instance(&mut self, path: &[usize], rule: &Rule, instance_id: u64) -> Result<(), ProofError> {
        let node = self.root.at(path).ok_or_else(|| ProofError::BadPath(path.to_vec()))?;
        if !node.is_open() {
            return Err(ProofError::NodeNotOpen);
        }
        let renamed = rule.rename(instance_id);
        let env = unify_with_budget(
            renamed.conclusion(),
            node.goal(),
            Some(self.env.clone()),
            self.subst_budget,
        )
        .map_err(ProofError::Cyclic)?
        .ok_or(ProofError::UnificationFailed)?;

        let mut root = self.root.clone();
        let target = root.at_mut(path).expect("path checked above");
        target.applied = Some(AppliedRule {
            rule: rule.clone(),
            instance_id,
        });
        target.children = renamed.premises().iter().cloned().map(ProofNode::open).collect();
        root.redisplay(&env, self.subst_budget).map_err(ProofError::Cyclic)?;

        self.commit(root, env, self.next_instance.max(instance_id + 1));
        Ok(())
    }

    /// Binds `var` to `replacement` by unification and re-displays the tree.
    pub fn apply_manual_subst(&mut self, var: &str, replacement: &Term) -> Result<(), ProofError> {
        if !is_proof_variable(var) {
            return Err(ProofError::InvalidVariable(var.to_string()));
        }
        let env = unify_with_budget(&Term::var(var), replacement, Some(self.env.clone()), self.subst_budget)
            .map_err(ProofError::Cyclic)?
            .ok_or(ProofError::UnificationFailed)?;
        let mut root = self.root.clone();
        root.redisplay(&env, self.subst_budget).map_err(ProofError::Cyclic)?;
        self.commit(root, env, self.next_instance);
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), ProofError> {
        let snap = self.history.pop().ok_or(ProofError::EmptyHistory)?;
        self.root = snap.root;
        self.env = snap.env;
        self.next_instance = snap.next_instance;
        Ok(())
    }

    fn commit(&mut self, root: ProofNode, env: Env, next_instance: u64) {
        let prev = Snapshot {
            root: std::mem::replace(&mut self.root, root),
            env: std::mem::replace(&mut self.env, env),
            next_instance: std::mem::replace(&mut self.next_instance, next_instance),
        };
        self.history.push(prev);
    }

    /// Rebuilds the proof a solver trace describes: each step is applied, with
    /// its recorded instance id, to the leftmost open node.
    pub fn replay(goal: Term, trace: &[TraceStep]) -> Result<ProofState, ProofError> {
        let mut state = ProofState::new(goal);
        for (step, record) in trace.iter().enumerate() {
            let mismatch = |reason: String| ProofError::ReplayMismatch { step, reason };
            let path = state
                .leftmost_open()
                .ok_or_else(|| mismatch("no open goal left".into()))?;
            let shown = state.node(&path).expect("open path exists").goal();
            if *shown != record.goal {
                return Err(mismatch(format!("expected goal {}, found {}", record.goal, shown)));
            }
            state
                .apply_instance(&path, &record.rule, record.instance_id)
                .map_err(|e| mismatch(e.to_string()))?;
        }
        if !state.is_complete() {
            return Err(ProofError::ReplayMismatch {
                step: trace.len(),
                reason: "open goals remain after the last step".into(),
            });
        }
        Ok(state)
    }

    /// All nodes in pre-order.
    pub fn nodes(&self) -> Vec<&ProofNode> {
        let mut out = Vec::new();
        self.root.for_each(&mut |n| out.push(n));
        out
    }
}

/// Source variable names, optionally carrying an instance suffix (`Z.1`).
fn is_proof_variable(name: &str) -> bool {
    match name.split_once(RENAME_SEPARATOR) {
        None => is_variable_name(name),
        Some((base, id)) => is_variable_name(base) && !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()),
    }
}

/// Free-function form of [`ProofState::replay`].
pub fn replay(goal: Term, trace: &[TraceStep]) -> Result<ProofState, ProofError> {
    ProofState::replay(goal, trace)
}
