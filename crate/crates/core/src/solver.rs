//! Reference serial solve and the barrier-per-level parallel executor.
//!
//! The parallel executor is bitwise reproducible for any worker count: each
//! row is evaluated entirely by one worker with a fixed per-row term order,
//! and a full barrier separates consecutive levels.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Barrier;
use std::thread;

use serde::Serialize;

use crate::affine::AffineSystem;
use crate::error::{Error, Result};
use crate::levels::LevelSchedule;
use crate::matrix::{LowerCsr, Rhs};

/// Solution vector plus execution and accuracy diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    /// Inter-level synchronization points: nonempty levels minus one.
    pub barriers: usize,
    pub max_abs_error: Option<f64>,
    pub max_rel_error: Option<f64>,
    /// `‖L·x − b‖∞` against the source system.
    pub residual_inf: f64,
}

impl SolveResult {
    /// Fills the error fields from a reference solution.
    pub fn compare(&mut self, reference: &[f64]) {
        let (abs, rel) = normwise_errors(&self.x, reference);
        self.max_abs_error = Some(abs);
        self.max_rel_error = Some(rel);
    }
}

fn normwise_errors(x: &[f64], reference: &[f64]) -> (f64, f64) {
    let abs = x
        .iter()
        .zip(reference)
        .map(|(a, r)| (a - r).abs())
        .fold(0.0f64, f64::max);
    let scale = reference.iter().map(|r| r.abs()).fold(0.0f64, f64::max);
    let rel = if scale > 0.0 {
        abs / scale
    } else if abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    (abs, rel)
}

/// Serial forward substitution over the CSR rows.
pub fn solve_reference(matrix: &LowerCsr, rhs: &Rhs) -> Vec<f64> {
    let n = matrix.n();
    let mut x = vec![0.0f64; n];
    for i in 0..n {
        let (cols, vals) = matrix.off_diag(i);
        let mut acc = 0.0;
        for (&k, &v) in cols.iter().zip(vals) {
            acc += v * x[k];
        }
        x[i] = (rhs[i] - acc) / matrix.diag(i);
    }
    x
}

/// Executes the schedule level by level with `workers` threads and a full
/// barrier between consecutive levels.
pub fn solve_levels(
    system: &AffineSystem,
    schedule: &LevelSchedule,
    workers: usize,
) -> Result<SolveResult> {
    if schedule.num_rows() != system.n() {
        return Err(Error::Mismatch(format!(
            "schedule covers {} rows, system has {}",
            schedule.num_rows(),
            system.n()
        )));
    }
    let workers = workers.max(1);
    let n = system.n();
    let num_levels = schedule.num_levels();
    let barriers = num_levels.saturating_sub(1);

    let x = if workers == 1 {
        let mut x = vec![0.0f64; n];
        for level in schedule.levels() {
            for &i in level {
                x[i] = system.eval_row(i, &x);
            }
        }
        x
    } else {
        // x lives in atomic bit cells; the barrier publishes every write of a
        // level before the next level reads it, so Relaxed ordering suffices.
        let cells: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
        let barrier = Barrier::new(workers);
        thread::scope(|scope| {
            for w in 0..workers {
                let cells = &cells;
                let barrier = &barrier;
                scope.spawn(move || {
                    let read = |k: usize| f64::from_bits(cells[k].load(Ordering::Relaxed));
                    for (lvl, rows) in schedule.levels().iter().enumerate() {
                        let per = rows.len().div_ceil(workers);
                        let lo = (w * per).min(rows.len());
                        let hi = ((w + 1) * per).min(rows.len());
                        for &i in &rows[lo..hi] {
                            let value = system.eval_row_with(i, read);
                            cells[i].store(value.to_bits(), Ordering::Relaxed);
                        }
                        if lvl + 1 < num_levels {
                            barrier.wait();
                        }
                    }
                });
            }
        });
        cells
            .into_iter()
            .map(|c| f64::from_bits(c.into_inner()))
            .collect()
    };

    let residual_inf = system.matrix().residual_inf(&x, system.rhs().values());
    Ok(SolveResult {
        x,
        barriers,
        max_abs_error: None,
        max_rel_error: None,
        residual_inf,
    })
}

/// Componentwise-free verification report: normwise errors and residual.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub residual_inf: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares a solution against a reference: `pass` iff the normwise relative
/// error `‖x − ref‖∞ / ‖ref‖∞` stays within `tol`.
pub fn verify(x: &[f64], x_ref: &[f64], matrix: &LowerCsr, rhs: &Rhs, tol: f64) -> VerifyReport {
    assert_eq!(x.len(), x_ref.len(), "solution lengths differ");
    let (max_abs_error, max_rel_error) = normwise_errors(x, x_ref);
    VerifyReport {
        max_abs_error,
        max_rel_error,
        residual_inf: matrix.residual_inf(x, rhs.values()),
        tol,
        pass: max_rel_error <= tol,
    }
}
