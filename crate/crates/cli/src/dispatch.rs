//! Maps CLI algorithm names onto solver entry points.

use serde::{Deserialize, Serialize};

use rftt_core::general::{solve_minavg_sync, solve_minmax_logn, solve_per_class};
use rftt_core::instance::{metric_closure, Instance};
use rftt_core::line::solve_minavg_line;
use rftt_core::oracle::{exact_minavg, exact_minmax};
use rftt_core::report::{Objective, SolveReport, SolveStats};
use rftt_core::schedule::{verify, Schedule};
use rftt_core::tree::{solve_minavg_tree, solve_minmax_tree};
use rftt_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Tree2,
    Tree6,
    LineDp,
    Classes,
    LognMinmax,
    Sync,
    Oracle,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Tree2 => "tree2",
            Algo::Tree6 => "tree6",
            Algo::LineDp => "line-dp",
            Algo::Classes => "classes",
            Algo::LognMinmax => "logn-minmax",
            Algo::Sync => "sync",
            Algo::Oracle => "oracle",
        }
    }

    pub fn supports(self, objective: Objective) -> bool {
        match self {
            Algo::Tree2 | Algo::LineDp | Algo::Sync => objective == Objective::MinAvg,
            Algo::Tree6 | Algo::LognMinmax => objective == Objective::MinMax,
            Algo::Classes | Algo::Oracle => true,
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "tree2" => Algo::Tree2,
            "tree6" => Algo::Tree6,
            "line-dp" => Algo::LineDp,
            "classes" => Algo::Classes,
            "logn-minmax" => Algo::LognMinmax,
            "sync" => Algo::Sync,
            "oracle" => Algo::Oracle,
            other => return Err(format!("unknown algorithm `{other}`")),
        })
    }
}

/// Runs one algorithm on one instance. The schedule is `None` only for
/// value-only reports (line DP beyond its period cap).
pub fn solve(
    algo: Algo,
    objective: Objective,
    instance: &Instance,
) -> Result<(Option<Schedule>, SolveReport)> {
    if !algo.supports(objective) {
        return Err(Error::InvalidInstance(format!(
            "algorithm `{}` does not solve {}",
            algo.as_str(),
            objective.as_str()
        )));
    }
    match algo {
        Algo::Tree2 => solve_minavg_tree(instance).map(|(s, r)| (Some(s), r)),
        Algo::Tree6 => solve_minmax_tree(instance).map(|(s, r)| (Some(s), r)),
        Algo::LineDp => solve_minavg_line(instance),
        Algo::Classes => solve_per_class(instance, objective).map(|(s, r)| (Some(s), r)),
        Algo::LognMinmax => solve_minmax_logn(instance).map(|(s, r)| (Some(s), r)),
        Algo::Sync => solve_minavg_sync(instance).map(|(s, r)| (Some(s), r)),
        Algo::Oracle => {
            let (value, schedule) = match objective {
                Objective::MinAvg => exact_minavg(instance)?,
                Objective::MinMax => exact_minmax(instance)?,
            };
            let dist = metric_closure(instance)?;
            let (avg, max, _) = rftt_core::schedule::evaluate(instance, &dist, &schedule)?;
            debug_assert_eq!(
                match objective {
                    Objective::MinAvg => avg,
                    Objective::MinMax => max,
                },
                value
            );
            let feasible = verify(instance, &schedule)?.feasible;
            let period = schedule.period;
            let report = SolveReport {
                algorithm: "oracle".into(),
                objective,
                cost: value.clone(),
                lower_bound: value,
                oracle_value: None,
                feasible,
                period,
                stats: SolveStats::default(),
            };
            Ok((Some(schedule), report))
        }
    }
}
