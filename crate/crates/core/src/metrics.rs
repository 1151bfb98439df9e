use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanStatus {
    GoalReached,
    BudgetExhaustedPartial,
    OpenExhaustedNoSolution,
}

impl PlanStatus {
    pub fn name(&self) -> &'static str {
        match self {
            PlanStatus::GoalReached => "GoalReached",
            PlanStatus::BudgetExhaustedPartial => "BudgetExhaustedPartial",
            PlanStatus::OpenExhaustedNoSolution => "OpenExhaustedNoSolution",
        }
    }
}

/// One record per planner run. Serialized as a JSON line by the harness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub planner: String,
    #[serde(default)]
    pub instance: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub repetition: u32,
    pub success: bool,
    /// `None` when the run aborted with an error.
    pub status: Option<PlanStatus>,
    /// Seconds.
    pub wall_time: f64,
    pub solution_cost: Option<f64>,
    pub expansions: u64,
    pub evaluations: u64,
    #[serde(default)]
    pub max_expansions_per_state: u32,
    #[serde(default)]
    pub lock_violations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replans: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executed_actions: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executed_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunMetrics {
    pub fn new(planner: &str) -> Self {
        RunMetrics {
            planner: planner.to_string(),
            instance: String::new(),
            seed: 0,
            repetition: 0,
            success: false,
            status: None,
            wall_time: 0.0,
            solution_cost: None,
            expansions: 0,
            evaluations: 0,
            max_expansions_per_state: 0,
            lock_violations: 0,
            replans: None,
            executed_actions: None,
            executed_cost: None,
            error: None,
        }
    }

    /// Copy with the machine-dependent field zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> Self {
        RunMetrics {
            wall_time: 0.0,
            ..self.clone()
        }
    }

    pub fn failed(planner: &str, error: String) -> Self {
        RunMetrics {
            error: Some(error),
            ..RunMetrics::new(planner)
        }
    }
}
