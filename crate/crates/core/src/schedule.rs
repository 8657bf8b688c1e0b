//! Periodic schedules: representation, feasibility verification and exact
//! objective evaluation.
//!
//! A schedule repeats forever with period `ℓ`; day `d` (1-based) of the cycle
//! stands for all days `d, d+ℓ, d+2ℓ, …`. Feasibility of client `j` is the
//! circular-gap criterion: within the infinite repetition, consecutive visits
//! of `j` must never be more than `τ_j` days apart. This is equivalent to the
//! sliding-window condition (every window of `τ_j` days contains a visit),
//! including the requirement that the first visit happens within `τ_j` days.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance, VertexId};
use crate::rational::{rat, Rational};

/// Explicit periodic schedule. `days[d]` is the ordered list of clients
/// visited on day `d+1`; the depot is implied at both ends of every tour.
/// An empty list is an idle day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub period: u64,
    pub days: Vec<Vec<VertexId>>,
}

/// Compact congruence-class schedule: each class visits `vertices` on every
/// day `d` with `d ≡ residue (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactSchedule {
    pub classes: Vec<CongruenceClass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceClass {
    pub residue: u64,
    pub modulus: u64,
    pub vertices: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NeverVisited {
        vertex: VertexId,
    },
    GapTooLarge {
        vertex: VertexId,
        gap: u64,
        turnover: u32,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NeverVisited { vertex } => write!(f, "vertex {} never visited", vertex.0),
            Violation::GapTooLarge {
                vertex,
                gap,
                turnover,
            } => write!(
                f,
                "vertex {}: visit gap {} exceeds turnover {}",
                vertex.0, gap, turnover
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Maximum cycle length a compact schedule may expand to.
const MAX_EXPANSION: u64 = 1 << 20;

impl CompactSchedule {
    pub fn validate(&self) -> Result<()> {
        for c in &self.classes {
            if c.modulus == 0 {
                return Err(Error::InvalidSchedule("zero modulus".into()));
            }
            if c.residue >= c.modulus {
                return Err(Error::InvalidSchedule(format!(
                    "residue {} not canonical for modulus {}",
                    c.residue, c.modulus
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> Result<u64> {
        self.validate()?;
        let mut l: u64 = 1;
        for c in &self.classes {
            l = l.lcm(&c.modulus);
            if l > MAX_EXPANSION {
                return Err(Error::SizeGuard {
                    what: "compact schedule period",
                    limit: MAX_EXPANSION,
                    actual: l,
                });
            }
        }
        Ok(l)
    }

    /// Expands to an explicit schedule. Day visit sets are emitted in
    /// ascending vertex-id order; expansion is feasibility-oriented, solvers
    /// emit explicit tours when the visit order matters for cost.
    pub fn expand(&self) -> Result<Schedule> {
        let period = self.period()?;
        let mut days = vec![Vec::new(); period as usize];
        for (d, set) in days.iter_mut().enumerate() {
            let day = d as u64 + 1;
            let mut ids: Vec<VertexId> = Vec::new();
            for c in &self.classes {
                if day % c.modulus == c.residue {
                    ids.extend(c.vertices.iter().copied());
                }
            }
            ids.sort();
            ids.dedup();
            *set = ids;
        }
        Ok(Schedule { period, days })
    }
}

impl Schedule {
    pub fn idle() -> Schedule {
        Schedule {
            period: 1,
            days: vec![Vec::new()],
        }
    }

    fn validate(&self, instance: &Instance) -> Result<()> {
        if self.period == 0 || self.days.len() != self.period as usize {
            return Err(Error::InvalidSchedule(format!(
                "period {} does not match {} day entries",
                self.period,
                self.days.len()
            )));
        }
        for day in &self.days {
            for id in day {
                if instance.index_of(*id).is_none() {
                    return Err(Error::InvalidSchedule(format!(
                        "unknown vertex id {}",
                        id.0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Feasibility of an explicit schedule against the (original) turnover times.
pub fn verify(instance: &Instance, schedule: &Schedule) -> Result<FeasibilityReport> {
    schedule.validate(instance)?;
    let l = schedule.period;
    let mut visit_days: Vec<Vec<u64>> = vec![Vec::new(); instance.n_vertices()];
    for (d, day) in schedule.days.iter().enumerate() {
        for id in day {
            let idx = instance.index_of(*id).unwrap();
            visit_days[idx].push(d as u64 + 1);
        }
    }
    let mut violations = Vec::new();
    for j in instance.clients() {
        let days = &mut visit_days[j];
        days.sort_unstable();
        days.dedup();
        check_gaps(instance, j, days, l, &mut violations);
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

/// Feasibility of a compact schedule without expanding the full cycle:
/// per client, visit days are merged from its classes' arithmetic
/// progressions. Produces the same verdict as `verify(expand(..))`.
pub fn verify_compact(instance: &Instance, compact: &CompactSchedule) -> Result<FeasibilityReport> {
    let l = compact.period()?;
    let mut violations = Vec::new();
    for j in instance.clients() {
        let id = instance.vertices[j].id;
        let mut days: Vec<u64> = Vec::new();
        for c in &compact.classes {
            if c.vertices.contains(&id) {
                let mut day = if c.residue == 0 { c.modulus } else { c.residue };
                while day <= l {
                    days.push(day);
                    day += c.modulus;
                }
            }
        }
        days.sort_unstable();
        days.dedup();
        check_gaps(instance, j, &days, l, &mut violations);
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

fn check_gaps(
    instance: &Instance,
    j: usize,
    days: &[u64],
    period: u64,
    violations: &mut Vec<Violation>,
) {
    let tau = instance.turnover(j);
    let id = instance.vertices[j].id;
    if days.is_empty() {
        violations.push(Violation::NeverVisited { vertex: id });
        return;
    }
    let mut worst = days[0] + period - days[days.len() - 1]; // wrap gap
    for w in days.windows(2) {
        worst = worst.max(w[1] - w[0]);
    }
    if worst > tau as u64 {
        violations.push(Violation::GapTooLarge {
            vertex: id,
            gap: worst,
            turnover: tau,
        });
    }
}

/// Exact objective values of an explicit schedule. Each day's cost follows
/// the stated visit order through the metric closure; shortcutting repeated
/// vertices is the solver's responsibility.
pub fn evaluate(
    instance: &Instance,
    dist: &DistanceMatrix,
    schedule: &Schedule,
) -> Result<(Rational, Rational, Vec<Rational>)> {
    schedule.validate(instance)?;
    let mut per_day = Vec::with_capacity(schedule.days.len());
    for day in &schedule.days {
        let mut cost = rat(0);
        let mut prev = instance.depot;
        for id in day {
            let idx = instance.index_of(*id).unwrap();
            cost += dist.d(prev, idx);
            prev = idx;
        }
        cost += dist.d(prev, instance.depot);
        per_day.push(cost);
    }
    let total: Rational = per_day.iter().sum();
    let avg = total / rat(schedule.period as i128);
    let max = per_day.iter().cloned().max().unwrap_or_else(|| rat(0));
    Ok((avg, max, per_day))
}

// ---------------------------------------------------------------------------
// Schedule file format (JSON): either explicit
//   {"period": int, "days": [[int,...],...]}
// or compact
//   {"classes": [{"residue": int, "modulus": int, "vertices": [int,...]}]}
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleFile {
    Explicit { period: u64, days: Vec<Vec<i64>> },
    Compact { classes: Vec<ClassFile> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassFile {
    pub residue: u64,
    pub modulus: u64,
    pub vertices: Vec<i64>,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        let file = ScheduleFile::Explicit {
            period: self.period,
            days: self
                .days
                .iter()
                .map(|d| d.iter().map(|id| id.0).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("schedule serialization");
        s.push('\n');
        s
    }
}

impl CompactSchedule {
    pub fn to_json(&self) -> String {
        let file = ScheduleFile::Compact {
            classes: self
                .classes
                .iter()
                .map(|c| ClassFile {
                    residue: c.residue,
                    modulus: c.modulus,
                    vertices: c.vertices.iter().map(|id| id.0).collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("schedule serialization");
        s.push('\n');
        s
    }
}

/// Parses either schedule form.
pub fn schedule_from_json(text: &str) -> Result<ParsedSchedule> {
    let file: ScheduleFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidSchedule(format!("parse error: {e}")))?;
    Ok(match file {
        ScheduleFile::Explicit { period, days } => ParsedSchedule::Explicit(Schedule {
            period,
            days: days
                .into_iter()
                .map(|d| d.into_iter().map(VertexId).collect())
                .collect(),
        }),
        ScheduleFile::Compact { classes } => ParsedSchedule::Compact(CompactSchedule {
            classes: classes
                .into_iter()
                .map(|c| CongruenceClass {
                    residue: c.residue,
                    modulus: c.modulus,
                    vertices: c.vertices.into_iter().map(VertexId).collect(),
                })
                .collect(),
        }),
    })
}

#[derive(Debug, Clone)]
pub enum ParsedSchedule {
    Explicit(Schedule),
    Compact(CompactSchedule),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::metric_closure;

    fn unit_star(turnovers: &[u32]) -> Instance {
        let mut vertices = vec![(VertexId(0), None)];
        let mut edges = Vec::new();
        for (i, &t) in turnovers.iter().enumerate() {
            vertices.push((VertexId(i as i64 + 1), Some(t)));
            edges.push((VertexId(0), VertexId(i as i64 + 1), rat(1)));
        }
        Instance::new("star", VertexId(0), vertices, edges).unwrap()
    }

    #[test]
    fn verify_examples() {
        let inst = unit_star(&[2, 2]);
        let ok = Schedule {
            period: 2,
            days: vec![vec![VertexId(1), VertexId(2)], vec![]],
        };
        assert!(verify(&inst, &ok).unwrap().feasible);

        let missing = Schedule {
            period: 2,
            days: vec![vec![VertexId(1)], vec![]],
        };
        let report = verify(&inst, &missing).unwrap();
        assert!(!report.feasible);
        assert_eq!(
            report.violations,
            vec![Violation::NeverVisited {
                vertex: VertexId(2)
            }]
        );

        let inst1 = unit_star(&[1, 1]);
        let gap = Schedule {
            period: 2,
            days: vec![vec![VertexId(1), VertexId(2)], vec![]],
        };
        let report = verify(&inst1, &gap).unwrap();
        assert!(!report.feasible);
        assert!(matches!(
            report.violations[0],
            Violation::GapTooLarge { gap: 2, .. }
        ));
    }

    #[test]
    fn unknown_vertex_and_zero_period_error() {
        let inst = unit_star(&[1]);
        let bad = Schedule {
            period: 1,
            days: vec![vec![VertexId(9)]],
        };
        assert!(verify(&inst, &bad).is_err());
        let zero = Schedule {
            period: 0,
            days: vec![],
        };
        assert!(verify(&inst, &zero).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let inst = unit_star(&[2, 2]);
        let dm = metric_closure(&inst).unwrap();
        let sched = Schedule {
            period: 2,
            days: vec![vec![VertexId(1), VertexId(2)], vec![]],
        };
        let (avg, max, per_day) = evaluate(&inst, &dm, &sched).unwrap();
        assert_eq!(per_day, vec![rat(4), rat(0)]);
        assert_eq!(avg, rat(2));
        assert_eq!(max, rat(4));

        let solo = Instance::new("solo", VertexId(0), vec![(VertexId(0), None)], vec![]).unwrap();
        let dm = metric_closure(&solo).unwrap();
        let (avg, max, _) = evaluate(&solo, &dm, &Schedule::idle()).unwrap();
        assert_eq!(avg, rat(0));
        assert_eq!(max, rat(0));
    }

    #[test]
    fn rotation_invariance() {
        let inst = unit_star(&[4, 4, 4]);
        let dm = metric_closure(&inst).unwrap();
        let days = vec![
            vec![VertexId(1)],
            vec![VertexId(2), VertexId(3)],
            vec![],
            vec![VertexId(1), VertexId(2), VertexId(3)],
        ];
        let sched = Schedule {
            period: 4,
            days: days.clone(),
        };
        let (avg, max, _) = evaluate(&inst, &dm, &sched).unwrap();
        for shift in 1..4 {
            let mut rotated = days.clone();
            rotated.rotate_left(shift);
            let r = Schedule {
                period: 4,
                days: rotated,
            };
            let (avg2, max2, _) = evaluate(&inst, &dm, &r).unwrap();
            assert_eq!(avg, avg2);
            assert_eq!(max, max2);
        }
    }

    #[test]
    fn compact_expand_then_verify_matches_direct() {
        let inst = unit_star(&[2, 3, 6]);
        let compact = CompactSchedule {
            classes: vec![
                CongruenceClass {
                    residue: 0,
                    modulus: 2,
                    vertices: vec![VertexId(1)],
                },
                CongruenceClass {
                    residue: 1,
                    modulus: 3,
                    vertices: vec![VertexId(2), VertexId(3)],
                },
            ],
        };
        let direct = verify_compact(&inst, &compact).unwrap();
        let expanded = verify(&inst, &compact.expand().unwrap()).unwrap();
        assert_eq!(direct, expanded);
    }

    #[test]
    fn schedule_json_round_trip() {
        let sched = Schedule {
            period: 2,
            days: vec![vec![VertexId(1)], vec![]],
        };
        match schedule_from_json(&sched.to_json()).unwrap() {
            ParsedSchedule::Explicit(s) => assert_eq!(s, sched),
            _ => panic!("expected explicit form"),
        }
        let compact = CompactSchedule {
            classes: vec![CongruenceClass {
                residue: 0,
                modulus: 4,
                vertices: vec![VertexId(2)],
            }],
        };
        match schedule_from_json(&compact.to_json()).unwrap() {
            ParsedSchedule::Compact(c) => assert_eq!(c, compact),
            _ => panic!("expected compact form"),
        }
    }

    /// The circular-gap criterion equals the brute-force sliding-window check
    /// over three unrolled cycles.
    #[test]
    fn circular_gap_equals_window_condition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(1..4usize);
            let taus: Vec<u32> = (0..n).map(|_| rng.gen_range(1..6)).collect();
            let inst = unit_star(&taus);
            let l = rng.gen_range(1..13u64);
            let days: Vec<Vec<VertexId>> = (0..l)
                .map(|_| {
                    (0..n)
                        .filter(|_| rng.gen_bool(0.4))
                        .map(|i| VertexId(i as i64 + 1))
                        .collect()
                })
                .collect();
            let sched = Schedule { period: l, days };
            let report = verify(&inst, &sched).unwrap();

            // Brute force: every window of τ consecutive days in an unrolled
            // horizon must contain a visit.
            let horizon = 3 * l;
            let mut brute_ok = true;
            for (i, &tau) in taus.iter().enumerate() {
                let id = VertexId(i as i64 + 1);
                let visits: Vec<u64> = (1..=horizon)
                    .filter(|d| sched.days[((d - 1) % l) as usize].contains(&id))
                    .collect();
                if visits.is_empty() {
                    brute_ok = false;
                    continue;
                }
                for t in 0..=horizon.saturating_sub(tau as u64) {
                    if !visits.iter().any(|&v| v > t && v <= t + tau as u64) {
                        brute_ok = false;
                    }
                }
            }
            assert_eq!(report.feasible, brute_ok, "schedule {sched:?}");
        }
    }
}
