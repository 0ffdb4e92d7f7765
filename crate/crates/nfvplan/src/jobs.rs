//! Job requests, their records, and the work they run. The CLI runs the
//! same [`execute`] so both front ends emit identical documents.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use nfvplan_core::analysis::{compare_models, sweep, ComparisonReport, SweepReport, SweepSpec};
use nfvplan_core::formulation::{solve_scenario, Plan, SolveOptions, SolveOutcome};
use nfvplan_core::model::Scenario;

pub const JOB_FORMAT: &str = "nfv-job/1";
pub const INFEASIBLE_FORMAT: &str = "nfv-infeasible/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Solve,
    Compare,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    fn rank(self) -> u8 {
        match self {
            JobStatus::Queued => 0,
            JobStatus::Running => 1,
            JobStatus::Done | JobStatus::Failed => 2,
        }
    }

    pub fn finished(self) -> bool {
        self.rank() == 2
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct SolveRequest {
    #[serde(default)]
    pub node_budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct CompareRequest {
    /// Free-text label copied into the report.
    #[serde(default = "unspecified")]
    pub variability: String,
    #[serde(default)]
    pub node_budget: Option<usize>,
}

fn unspecified() -> String {
    "unspecified".into()
}

impl Default for CompareRequest {
    fn default() -> Self {
        CompareRequest {
            variability: unspecified(),
            node_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JobRequest {
    Solve(SolveRequest),
    Compare(CompareRequest),
    Sweep(SweepSpec),
}

impl JobRequest {
    pub fn kind(&self) -> JobKind {
        match self {
            JobRequest::Solve(_) => JobKind::Solve,
            JobRequest::Compare(_) => JobKind::Compare,
            JobRequest::Sweep(_) => JobKind::Sweep,
        }
    }

    fn options(&self, default_budget: usize) -> SolveOptions {
        let budget = match self {
            JobRequest::Solve(r) => r.node_budget,
            JobRequest::Compare(r) => r.node_budget,
            JobRequest::Sweep(_) => None,
        };
        SolveOptions {
            node_budget: budget.unwrap_or(default_budget),
            ..SolveOptions::default()
        }
    }
}

/// What a job produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Plan(Plan),
    Infeasible { scenario: String, nodes: usize },
    Comparison(ComparisonReport),
    Sweep(SweepReport),
}

impl Artifact {
    /// The document stored as the job result; for a plan these are exactly
    /// the bytes of `plan.json`.
    pub fn to_json(&self) -> String {
        match self {
            Artifact::Plan(plan) => plan.to_json(),
            Artifact::Infeasible { scenario, nodes } => {
                let doc = serde_json::json!({
                    "format": INFEASIBLE_FORMAT,
                    "scenario": scenario,
                    "status": "infeasible",
                    "nodes": nodes,
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
                text.push('\n');
                text
            }
            Artifact::Comparison(r) => r.to_json(),
            Artifact::Sweep(r) => r.to_json(),
        }
    }
}

pub fn execute(s: &Scenario, request: &JobRequest, default_budget: usize) -> nfvplan_core::Result<Artifact> {
    let opts = request.options(default_budget);
    Ok(match request {
        JobRequest::Solve(_) => match solve_scenario(s, &opts)? {
            SolveOutcome::Optimal(plan) => Artifact::Plan(plan),
            SolveOutcome::Infeasible { nodes } => Artifact::Infeasible {
                scenario: s.content_hash(),
                nodes,
            },
        },
        JobRequest::Compare(r) => Artifact::Comparison(compare_models(s, &r.variability, &opts)?),
        JobRequest::Sweep(spec) => Artifact::Sweep(sweep(spec, s, &opts)?),
    })
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub submitted_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub format: String,
    pub id: String,
    pub kind: JobKind,
    /// Content hash of the scenario the job runs on.
    pub scenario: String,
    pub status: JobStatus,
    /// Result file relative to the store root; set once done.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings: Timings,
}

impl JobRecord {
    pub fn new(id: String, kind: JobKind, scenario: String) -> JobRecord {
        JobRecord {
            format: JOB_FORMAT.into(),
            id,
            kind,
            scenario,
            status: JobStatus::Queued,
            result: None,
            error: None,
            timings: Timings {
                submitted_ms: now_ms(),
                ..Timings::default()
            },
        }
    }

    /// Moves to `next` if that is a step forward; returns whether it moved.
    pub fn advance(&mut self, next: JobStatus) -> bool {
        if next.rank() <= self.status.rank() {
            return false;
        }
        self.status = next;
        match next {
            JobStatus::Running => self.timings.started_ms = Some(now_ms()),
            JobStatus::Done | JobStatus::Failed => self.timings.finished_ms = Some(now_ms()),
            JobStatus::Queued => {}
        }
        true
    }
}
