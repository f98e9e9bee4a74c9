//! JSON shapes shared by the HTTP service, the CLI's `--json` output and the
//! C bindings. Terms always cross the wire as canonical text.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::proof::{ProofNode, ProofState};
use crate::solver::{trace_depths, Budget, Solution, SolveOptions, SolveOutcome, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub goals: String,
    #[serde(default)]
    pub options: Option<QueryOptions>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryOptions {
    #[serde(default)]
    pub strategy: Option<Strategy>,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default)]
    pub max_solutions: Option<usize>,
}

impl QueryOptions {
    /// Overrides the fields of `base` that were given.
    pub fn apply(&self, mut base: SolveOptions) -> SolveOptions {
        if let Some(s) = self.strategy {
            base.strategy = s;
        }
        if let Some(d) = self.max_depth {
            base.max_depth = d;
        }
        if let Some(n) = self.max_solutions {
            base.max_solutions = n;
        }
        base
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub solutions: Vec<SolutionView>,
    pub exhausted: bool,
    pub budget_hit: Option<Budget>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionView {
    pub bindings: IndexMap<String, String>,
    pub trace: Vec<TraceStepView>,
    pub cyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStepView {
    pub rule: String,
    pub goal: String,
    pub instance_id: u64,
    /// Depth of the goal in the proof tree; the query goals are at depth 0.
    pub depth: usize,
}

impl From<&Solution> for SolutionView {
    fn from(s: &Solution) -> Self {
        let depths = trace_depths(&s.trace);
        SolutionView {
            bindings: s.bindings.iter().map(|(v, t)| (v.clone(), t.to_string())).collect(),
            trace: s
                .trace
                .iter()
                .zip(depths)
                .map(|(step, depth)| TraceStepView {
                    rule: step.rule.to_string(),
                    goal: step.goal.to_string(),
                    instance_id: step.instance_id,
                    depth,
                })
                .collect(),
            cyclic: s.cyclic,
        }
    }
}

impl From<&SolveOutcome> for QueryResponse {
    fn from(o: &SolveOutcome) -> Self {
        QueryResponse {
            solutions: o.solutions.iter().map(SolutionView::from).collect(),
            exhausted: o.exhausted,
            budget_hit: o.budget_hit,
        }
    }
}

impl QueryResponse {
    /// The exact body the service sends for this response.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("query response serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofNodeView {
    pub goal: String,
    pub applied_rule: Option<AppliedRuleView>,
    /// `open` or `complete`, for the whole subtree.
    pub status: String,
    pub has_rule: bool,
    pub children: Vec<ProofNodeView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedRuleView {
    pub rule: String,
    pub instance_id: u64,
}

impl From<&ProofNode> for ProofNodeView {
    fn from(n: &ProofNode) -> Self {
        let children: Vec<ProofNodeView> = n.children().iter().map(ProofNodeView::from).collect();
        let complete = n.applied().is_some() && children.iter().all(|c| c.status == "complete");
        ProofNodeView {
            goal: n.goal().to_string(),
            applied_rule: n.applied().map(|a| AppliedRuleView {
                rule: a.rule.to_string(),
                instance_id: a.instance_id,
            }),
            status: if complete { "complete" } else { "open" }.to_string(),
            has_rule: n.applied().is_some(),
            children,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofView {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub proof_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub workspace: Option<String>,
    pub complete: bool,
    /// Current bindings, fully substituted.
    pub substitution: IndexMap<String, String>,
    pub can_undo: bool,
    pub tree: ProofNodeView,
}

impl ProofView {
    pub fn new(state: &ProofState) -> Self {
        let substitution = state
            .env()
            .iter()
            .map(|(v, t)| {
                let value = crate::term::apply_subst_term(state.env(), t, crate::term::DEFAULT_SUBST_BUDGET)
                    .unwrap_or_else(|_| t.clone());
                (v.to_string(), value.to_string())
            })
            .collect();
        ProofView {
            proof_id: None,
            workspace: None,
            complete: state.is_complete(),
            substitution,
            can_undo: state.history_len() > 0,
            tree: ProofNodeView::from(state.root()),
        }
    }
}
