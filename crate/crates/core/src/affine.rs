//! Normalized affine row equations and the rewriting (substitution) engine.
//!
//! Every row of `Lx = b` is kept as `x[i] = beta + sum(c[k] * x[k])` with
//! `beta = b[i]/L[i][i]` and `c[k] = -L[i][k]/L[i][i]`. Rewriting a row to an
//! earlier level repeatedly folds the current equation of a dependency into
//! the row until every remaining dependency sits below the target level. The
//! fold preserves the row identity exactly (up to floating-point rounding), so
//! solving the transformed system reproduces the original solution.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::levels::{self, LevelSchedule};
use crate::matrix::{LowerCsr, Rhs};

/// Whether a row still carries its original CSR equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original,
    Rewritten,
}

/// One row equation in normalized affine form.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRow {
    beta: f64,
    coeffs: BTreeMap<usize, f64>,
    origin: Origin,
}

impl AffineRow {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Dependency coefficients, keyed by row index (never the row itself,
    /// never exactly 0.0).
    pub fn coeffs(&self) -> &BTreeMap<usize, f64> {
        &self.coeffs
    }

    pub fn dep_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }
}

/// All row equations plus handles to the source system.
#[derive(Debug, Clone)]
pub struct AffineSystem {
    matrix: Arc<LowerCsr>,
    rhs: Rhs,
    rows: Vec<AffineRow>,
}

/// Normalizes every row of `Lx = b` into affine form.
pub fn to_affine(matrix: Arc<LowerCsr>, rhs: Rhs) -> AffineSystem {
    assert_eq!(matrix.n(), rhs.len(), "rhs length must match the matrix");
    let rows = (0..matrix.n())
        .map(|i| {
            let d = matrix.diag(i);
            let (cols, vals) = matrix.off_diag(i);
            let mut coeffs = BTreeMap::new();
            for (&k, &v) in cols.iter().zip(vals) {
                let c = -v / d;
                if c != 0.0 {
                    coeffs.insert(k, c);
                }
            }
            AffineRow {
                beta: rhs[i] / d,
                coeffs,
                origin: Origin::Original,
            }
        })
        .collect();
    AffineSystem { matrix, rhs, rows }
}

impl AffineSystem {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn matrix(&self) -> &LowerCsr {
        &self.matrix
    }

    pub fn matrix_handle(&self) -> &Arc<LowerCsr> {
        &self.matrix
    }

    pub fn rhs(&self) -> &Rhs {
        &self.rhs
    }

    pub fn row(&self, i: usize) -> &AffineRow {
        &self.rows[i]
    }

    /// Arithmetic cost of row `i` under the mixed cost model: `2*nnz - 1` for
    /// original rows, `2*d` for rewritten rows with `d >= 1` dependencies and
    /// 0 for rewritten constants (the division is folded away).
    pub fn current_row_cost(&self, i: usize) -> u64 {
        match self.rows[i].origin {
            Origin::Original => levels::row_cost(&self.matrix, i),
            Origin::Rewritten => {
                let d = self.rows[i].coeffs.len() as u64;
                if d == 0 {
                    0
                } else {
                    2 * d
                }
            }
        }
    }

    /// Evaluates row `i` against already-computed entries of `x`, using the
    /// exact arithmetic the emitted kernels perform: original rows keep the
    /// raw division form, rewritten rows use the folded affine form. Terms
    /// accumulate in ascending dependency index either way.
    pub fn eval_row(&self, i: usize, x: &[f64]) -> f64 {
        self.eval_row_with(i, |k| x[k])
    }

    /// [`eval_row`](Self::eval_row) with an arbitrary source for computed
    /// entries (the parallel executor reads atomic cells).
    pub fn eval_row_with(&self, i: usize, read: impl Fn(usize) -> f64) -> f64 {
        let row = &self.rows[i];
        match row.origin {
            Origin::Original => {
                let (cols, vals) = self.matrix.off_diag(i);
                let mut acc = 0.0;
                for (&k, &v) in cols.iter().zip(vals) {
                    acc += v * read(k);
                }
                (self.rhs[i] - acc) / self.matrix.diag(i)
            }
            Origin::Rewritten => {
                let mut acc = row.beta;
                for (&k, &c) in &row.coeffs {
                    acc += c * read(k);
                }
                acc
            }
        }
    }
}

/// Optional per-row constraints a rewrite must satisfy.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct Guards {
    /// Reject when the row would travel more than this many levels.
    pub max_rewriting_distance: Option<usize>,
    /// Reject when the projected dependency count is >= alpha.
    pub max_indegree_alpha: Option<usize>,
    /// Reject when any projected coefficient or constant exceeds this
    /// magnitude.
    pub max_coeff_magnitude: Option<f64>,
    /// Reject when the projected dependency indices span more than beta rows.
    pub max_index_span_beta: Option<usize>,
    /// Only rewrite rows lying on a longest dependency chain.
    pub critical_path_only: bool,
}

impl Guards {
    pub fn unconstrained(&self) -> bool {
        self == &Guards::default()
    }
}

/// Why a rewrite was refused.
#[derive(Debug, Clone, PartialEq)]
pub enum GuardViolation {
    Distance { distance: usize, max: usize },
    Indegree { projected: usize, alpha: usize },
    Magnitude { value: f64, cap: f64 },
    IndexSpan { span: usize, max: usize },
    OffCriticalPath,
}

impl fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardViolation::Distance { distance, max } => {
                write!(f, "distance {distance} > {max}")
            }
            GuardViolation::Indegree { projected, alpha } => {
                write!(f, "projected indegree {projected} >= alpha {alpha}")
            }
            GuardViolation::Magnitude { value, cap } => {
                write!(f, "projected magnitude {value:e} > {cap:e}")
            }
            GuardViolation::IndexSpan { span, max } => {
                write!(f, "dependency index span {span} > {max}")
            }
            GuardViolation::OffCriticalPath => write!(f, "row is not on the critical path"),
        }
    }
}

/// Outcome of [`check_guards`]: rejection is a value, not a failure.
#[derive(Debug, Clone, PartialEq)]
pub enum GuardCheck {
    Accept,
    Reject(GuardViolation),
}

impl GuardCheck {
    pub fn is_accept(&self) -> bool {
        matches!(self, GuardCheck::Accept)
    }
}

/// Result of projecting a row to a target level without committing it.
struct Projection {
    beta: f64,
    coeffs: BTreeMap<usize, f64>,
    substitutions: usize,
}

/// Folds dependencies of row `i` that sit at or above `target`, highest level
/// first (ties broken toward the smaller row index). Substituting the highest
/// level first guarantees termination: every fold replaces a dependency by
/// strictly lower-level ones.
fn project(rows: &[AffineRow], level_of: &[usize], i: usize, target: usize) -> Projection {
    let row = &rows[i];
    let mut beta = row.beta;
    let mut coeffs = row.coeffs.clone();
    let mut substitutions = 0;
    loop {
        let pick = coeffs
            .keys()
            .copied()
            .filter(|&k| level_of[k] >= target)
            .max_by_key(|&k| (level_of[k], std::cmp::Reverse(k)));
        let Some(k) = pick else { break };
        let c = coeffs.remove(&k).expect("picked key is present");
        let dep = &rows[k];
        beta += c * dep.beta;
        for (&m, &ckm) in &dep.coeffs {
            let slot = coeffs.entry(m).or_insert(0.0);
            *slot += c * ckm;
            if *slot == 0.0 {
                coeffs.remove(&m);
            }
        }
        substitutions += 1;
    }
    Projection {
        beta,
        coeffs,
        substitutions,
    }
}

/// Rewrites row `i` so that every remaining dependency sits strictly below
/// `target`, substituting each eligible dependency's current affine form.
/// Returns the number of substitutions performed; a row already entirely
/// below the target is left untouched.
pub fn rewrite_row(
    system: &mut AffineSystem,
    schedule: &LevelSchedule,
    i: usize,
    target: usize,
) -> usize {
    rewrite_row_with(system, schedule.level_assignment(), i, target)
}

pub(crate) fn rewrite_row_with(
    system: &mut AffineSystem,
    level_of: &[usize],
    i: usize,
    target: usize,
) -> usize {
    let projection = project(&system.rows, level_of, i, target);
    if projection.substitutions == 0 {
        return 0;
    }
    system.rows[i] = AffineRow {
        beta: projection.beta,
        coeffs: projection.coeffs,
        origin: Origin::Rewritten,
    };
    projection.substitutions
}

/// Dependency count and cost row `i` would have after
/// `rewrite_row(i, target)`, without mutating the system.
pub fn project_cost(
    system: &AffineSystem,
    schedule: &LevelSchedule,
    i: usize,
    target: usize,
) -> (usize, u64) {
    project_cost_with(system, schedule.level_assignment(), i, target)
}

pub(crate) fn project_cost_with(
    system: &AffineSystem,
    level_of: &[usize],
    i: usize,
    target: usize,
) -> (usize, u64) {
    let row = &system.rows[i];
    if !row.coeffs.keys().any(|&k| level_of[k] >= target) {
        // no substitution would occur; the row keeps its current equation
        return (row.coeffs.len(), system.current_row_cost(i));
    }
    let projection = project(&system.rows, level_of, i, target);
    let d = projection.coeffs.len();
    let cost = if d == 0 { 0 } else { 2 * d as u64 };
    (d, cost)
}

/// Applies every configured guard to the hypothetical rewrite of row `i` to
/// `target`. Computes critical-path membership on demand; batch callers
/// should precompute the mask and use the `_with` variant.
pub fn check_guards(
    system: &AffineSystem,
    schedule: &LevelSchedule,
    i: usize,
    target: usize,
    guards: &Guards,
) -> GuardCheck {
    let mask = if guards.critical_path_only {
        let rows = levels::critical_path(schedule, system.matrix());
        let mut mask = vec![false; system.n()];
        for r in rows {
            mask[r] = true;
        }
        Some(mask)
    } else {
        None
    };
    check_guards_with(
        system,
        schedule.level_assignment(),
        i,
        target,
        guards,
        mask.as_deref(),
    )
}

pub(crate) fn check_guards_with(
    system: &AffineSystem,
    level_of: &[usize],
    i: usize,
    target: usize,
    guards: &Guards,
    critical_mask: Option<&[bool]>,
) -> GuardCheck {
    if let Some(max) = guards.max_rewriting_distance {
        let distance = level_of[i].saturating_sub(target);
        if distance > max {
            return GuardCheck::Reject(GuardViolation::Distance { distance, max });
        }
    }

    let needs_projection = guards.max_indegree_alpha.is_some()
        || guards.max_coeff_magnitude.is_some()
        || guards.max_index_span_beta.is_some();
    if needs_projection {
        let projection = project(&system.rows, level_of, i, target);
        if let Some(alpha) = guards.max_indegree_alpha {
            let projected = projection.coeffs.len();
            if projected >= alpha {
                return GuardCheck::Reject(GuardViolation::Indegree { projected, alpha });
            }
        }
        if let Some(cap) = guards.max_coeff_magnitude {
            let mut largest = projection.beta.abs();
            for c in projection.coeffs.values() {
                largest = largest.max(c.abs());
            }
            if largest > cap {
                return GuardCheck::Reject(GuardViolation::Magnitude {
                    value: largest,
                    cap,
                });
            }
        }
        if let Some(max) = guards.max_index_span_beta {
            if let (Some(&lo), Some(&hi)) = (
                projection.coeffs.keys().next(),
                projection.coeffs.keys().next_back(),
            ) {
                let span = hi - lo;
                if span > max {
                    return GuardCheck::Reject(GuardViolation::IndexSpan { span, max });
                }
            }
        }
    }

    if guards.critical_path_only {
        let on_path = critical_mask.map(|m| m[i]).unwrap_or(false);
        if !on_path {
            return GuardCheck::Reject(GuardViolation::OffCriticalPath);
        }
    }

    GuardCheck::Accept
}
