//! Solver result reporting.

use serde::{Deserialize, Serialize};

use crate::rational::{rat, to_decimal_6, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "min-avg")]
    MinAvg,
    #[serde(rename = "min-max")]
    MinMax,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MinAvg => "min-avg",
            Objective::MinMax => "min-max",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-avg" => Ok(Objective::MinAvg),
            "min-max" => Ok(Objective::MinMax),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

/// Outcome of one solver run. `feasible` is always the verifier's verdict on
/// the emitted schedule, never the solver's claim.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: String,
    pub objective: Objective,
    /// Objective value of the emitted schedule (avg or max tour length).
    pub cost: Rational,
    pub lower_bound: Rational,
    pub oracle_value: Option<Rational>,
    pub feasible: bool,
    pub period: u64,
    pub stats: SolveStats,
}

/// Optional per-algorithm diagnostics checked by the test suite.
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    /// Recursive calls made by the tree congruence assignment.
    pub call_count: Option<u64>,
    /// Violations of the per-call cost inequality (must stay 0).
    pub cost_inequality_violations: Option<u64>,
    /// Vertices rescued at a split boundary of the tree recursion.
    pub rescued_vertices: Option<u64>,
    /// Distinct turnover classes used by per-class solvers.
    pub class_count: Option<u64>,
    /// Sizes of the unsaturated packing sets `(index, len)`.
    pub wset_sizes: Option<Vec<(u64, u64)>>,
    /// Largest number of unsaturated clients visited on one day.
    pub max_unsaturated_per_day: Option<u64>,
    /// Set when a combined schedule could not be materialized (period cap);
    /// the report's value is still exact.
    pub value_only: bool,
}

impl SolveReport {
    /// `cost / max(lower_bound, oracle)`, display only.
    pub fn ratio(&self) -> String {
        let denom = match &self.oracle_value {
            Some(o) if *o > self.lower_bound => o.clone(),
            _ => self.lower_bound.clone(),
        };
        if denom == rat(0) {
            return "1.000000".to_string();
        }
        to_decimal_6(&(self.cost.clone() / denom))
    }

    pub fn summary(&self) -> String {
        format!(
            "algo={} objective={} cost={} lb={} ratio={} feasible={} period={}",
            self.algorithm,
            self.objective.as_str(),
            self.cost,
            self.lower_bound,
            self.ratio(),
            self.feasible,
            self.period
        )
    }
}
