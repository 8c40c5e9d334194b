//! Graph-transformation strategies over thin levels.
//!
//! Two planners produce an ordered list of rewrite actions:
//!
//! * [`compute_plan_avg`] drains thin levels into earlier thin targets until
//!   each target's running cost reaches the original average level cost. The
//!   threshold is computed once and never updated.
//! * [`compute_plan_manual`] reproduces the fixed-stride baseline: every run
//!   of consecutive thin levels is chunked into groups of `g`, and the rows of
//!   each group collapse into the group's first level.
//!
//! [`apply_plan`] executes the actions, compacts the schedule and reports the
//! before/after metrics.

use serde::Serialize;
use std::sync::Arc;

use crate::affine::{
    check_guards_with, project_cost_with, rewrite_row_with, to_affine, AffineSystem, Guards,
};
use crate::error::{Error, Result};
use crate::levels::{self, LevelSchedule};
use crate::matrix::{LowerCsr, Rhs};

/// Which planner produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "group_size")]
pub enum StrategyKind {
    AvgCost,
    Manual(usize),
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrategyKind::AvgCost => write!(f, "avg"),
            StrategyKind::Manual(g) => write!(f, "manual(g={g})"),
        }
    }
}

/// One rewrite: move `row` so its dependencies end up strictly below `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Action {
    pub row: usize,
    pub target: usize,
}

/// Ordered rewrite actions plus the parameters they were derived under.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformPlan {
    pub actions: Vec<Action>,
    pub threshold_used: f64,
    pub strategy: StrategyKind,
    pub guards: Guards,
}

impl TransformPlan {
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }
}

/// Per-level profile entry: `(rows, cost)`.
pub type LevelProfile = Vec<(usize, u64)>;

/// Before/after metrics of a transformation.
#[derive(Debug, Clone, Serialize)]
pub struct TransformReport {
    pub levels_before: usize,
    pub levels_after: usize,
    pub avg_cost_before: f64,
    pub avg_cost_after: f64,
    pub total_cost_before: u64,
    pub total_cost_after: u64,
    pub rows_rewritten: usize,
    pub max_rewriting_distance_used: usize,
    pub profile_before: LevelProfile,
    pub profile_after: LevelProfile,
}

impl TransformReport {
    /// Flat key/value JSON with the comparison-table metric names.
    pub fn to_json(&self, strategy: StrategyKind, threshold: f64) -> String {
        #[derive(Serialize)]
        struct Flat {
            strategy: String,
            threshold: f64,
            num_levels_before: usize,
            num_levels_after: usize,
            avg_level_cost_before: f64,
            avg_level_cost_after: f64,
            total_level_cost_before: u64,
            total_level_cost_after: u64,
            rows_rewritten: usize,
            max_distance_used: usize,
        }
        serde_json::to_string_pretty(&Flat {
            strategy: strategy.to_string(),
            threshold,
            num_levels_before: self.levels_before,
            num_levels_after: self.levels_after,
            avg_level_cost_before: self.avg_cost_before,
            avg_level_cost_after: self.avg_cost_after,
            total_level_cost_before: self.total_cost_before,
            total_level_cost_after: self.total_cost_after,
            rows_rewritten: self.rows_rewritten,
            max_distance_used: self.max_rewriting_distance_used,
        })
        .expect("report serializes")
    }
}

fn profile(schedule: &LevelSchedule) -> LevelProfile {
    schedule
        .levels()
        .iter()
        .zip(schedule.level_costs())
        .map(|(rows, &cost)| (rows.len(), cost))
        .collect()
}

fn critical_mask(system: &AffineSystem, schedule: &LevelSchedule, guards: &Guards) -> Option<Vec<bool>> {
    guards.critical_path_only.then(|| {
        let mut mask = vec![false; system.n()];
        for r in levels::critical_path(schedule, system.matrix()) {
            mask[r] = true;
        }
        mask
    })
}

/// Automated strategy: fill thin targets with rows from later thin levels
/// until each target reaches the original average level cost.
///
/// Targets are restricted to level index >= 1. When the running cost crosses
/// the threshold mid-level, the partially drained source keeps its remaining
/// rows and becomes the next target; a fully drained source is skipped and the
/// next thin level takes over as target.
pub fn compute_plan_avg(
    system: &AffineSystem,
    schedule: &LevelSchedule,
    guards: &Guards,
) -> TransformPlan {
    let threshold = schedule.avg_level_cost();
    let level_of = schedule.level_assignment();
    let mask = critical_mask(system, schedule, guards);

    let eligible: Vec<usize> = schedule
        .thin_levels(threshold)
        .into_iter()
        .filter(|&l| l >= 1)
        .collect();

    let mut actions = Vec::new();
    let mut idx = 0usize;
    let mut target = eligible.first().copied();
    let mut running = target.map_or(0.0, |t| schedule.level_cost(t) as f64);
    if target.is_some() {
        idx = 1;
    }

    while idx < eligible.len() {
        let Some(t) = target else { break };
        let source = eligible[idx];
        idx += 1;
        let rows = schedule.rows(source);
        let mut moved = vec![false; rows.len()];
        let mut crossed = false;
        for (pos, &row) in rows.iter().enumerate() {
            let verdict = check_guards_with(system, level_of, row, t, guards, mask.as_deref());
            if !verdict.is_accept() {
                continue; // the row stays in place
            }
            let (_, cost) = project_cost_with(system, level_of, row, t);
            actions.push(Action { row, target: t });
            moved[pos] = true;
            running += cost as f64;
            if running >= threshold {
                crossed = true;
                break;
            }
        }
        if !crossed {
            continue;
        }
        // the partially drained source keeps its guard-rejected rows and the
        // unscanned tail, and takes over as target; a fully drained source
        // hands the target role to the next thin level
        let moved_count = moved.iter().filter(|&&m| m).count();
        if moved_count < rows.len() {
            target = Some(source);
            running = rows
                .iter()
                .enumerate()
                .filter(|&(pos, _)| !moved[pos])
                .map(|(_, &r)| system.current_row_cost(r))
                .sum::<u64>() as f64;
        } else if idx < eligible.len() {
            target = Some(eligible[idx]);
            running = schedule.level_cost(eligible[idx]) as f64;
            idx += 1;
        } else {
            break;
        }
    }

    TransformPlan {
        actions,
        threshold_used: threshold,
        strategy: StrategyKind::AvgCost,
        guards: guards.clone(),
    }
}

/// Manual fixed-stride baseline: chunk each maximal run of consecutive thin
/// levels (index >= 1) into groups of `group_size`; the first level of each
/// group absorbs the rows of the rest.
pub fn compute_plan_manual(
    system: &AffineSystem,
    schedule: &LevelSchedule,
    group_size: usize,
    guards: &Guards,
) -> TransformPlan {
    assert!(group_size >= 2, "group size must be at least 2");
    let threshold = schedule.avg_level_cost();
    let level_of = schedule.level_assignment();
    let mask = critical_mask(system, schedule, guards);

    let eligible: Vec<usize> = schedule
        .thin_levels(threshold)
        .into_iter()
        .filter(|&l| l >= 1)
        .collect();

    // maximal runs of consecutive level indices; a fat level breaks a run
    let mut runs: Vec<Vec<usize>> = Vec::new();
    for l in eligible {
        match runs.last_mut() {
            Some(run) if *run.last().unwrap() + 1 == l => run.push(l),
            _ => runs.push(vec![l]),
        }
    }

    let mut actions = Vec::new();
    for run in runs {
        for group in run.chunks(group_size) {
            let target = group[0];
            for &source in &group[1..] {
                for &row in schedule.rows(source) {
                    let verdict =
                        check_guards_with(system, level_of, row, target, guards, mask.as_deref());
                    if verdict.is_accept() {
                        actions.push(Action { row, target });
                    }
                }
            }
        }
    }

    TransformPlan {
        actions,
        threshold_used: threshold,
        strategy: StrategyKind::Manual(group_size),
        guards: guards.clone(),
    }
}

/// Executes a plan: rewrites every planned row, moves it to its target level,
/// compacts emptied levels and reprices everything with the mixed cost model.
pub fn apply_plan(
    system: &mut AffineSystem,
    schedule: &LevelSchedule,
    plan: &TransformPlan,
) -> Result<(LevelSchedule, TransformReport)> {
    if schedule.num_rows() != system.n() {
        return Err(Error::Mismatch(format!(
            "schedule covers {} rows, system has {}",
            schedule.num_rows(),
            system.n()
        )));
    }
    let levels_before = schedule.num_levels();
    let avg_before = schedule.avg_level_cost();
    let total_before = schedule.total_cost();
    let profile_before = profile(schedule);

    let mut level_of = schedule.level_assignment().to_vec();
    let mut max_distance = 0usize;
    for action in &plan.actions {
        let Action { row, target } = *action;
        if row >= system.n() || target >= level_of[row] {
            return Err(Error::Mismatch(format!(
                "action row {row} -> level {target} does not fit the current schedule"
            )));
        }
        max_distance = max_distance.max(level_of[row] - target);
        rewrite_row_with(system, &level_of, row, target);
        for &k in system.row(row).coeffs().keys() {
            if level_of[k] >= target {
                return Err(Error::Internal(format!(
                    "row {row} still depends on row {k} at level {} >= target {target}",
                    level_of[k]
                )));
            }
        }
        level_of[row] = target;
    }

    let new_schedule = LevelSchedule::from_assignment(level_of, |r| system.current_row_cost(r));
    let report = TransformReport {
        levels_before,
        levels_after: new_schedule.num_levels(),
        avg_cost_before: avg_before,
        avg_cost_after: new_schedule.avg_level_cost(),
        total_cost_before: total_before,
        total_cost_after: new_schedule.total_cost(),
        rows_rewritten: plan.len(),
        max_rewriting_distance_used: max_distance,
        profile_before,
        profile_after: profile(&new_schedule),
    };
    Ok((new_schedule, report))
}

/// Re-applies a structural plan to the same matrix with a different right-hand
/// side: coefficients come out identical, constants are re-folded.
pub fn replay_plan(
    matrix: Arc<LowerCsr>,
    rhs: Rhs,
    plan: &TransformPlan,
) -> Result<(AffineSystem, LevelSchedule, TransformReport)> {
    if matrix.n() != rhs.len() {
        return Err(Error::Mismatch(format!(
            "matrix has {} rows, rhs has {} values",
            matrix.n(),
            rhs.len()
        )));
    }
    let schedule = levels::build_levels(&matrix);
    let mut system = to_affine(matrix, rhs);
    let (new_schedule, report) = apply_plan(&mut system, &schedule, plan)?;
    Ok((system, new_schedule, report))
}
