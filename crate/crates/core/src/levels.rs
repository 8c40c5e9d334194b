//! Level-set construction and the FLOP cost model.
//!
//! Rows of a lower-triangular system form a dependency DAG: row `i` depends on
//! row `k` whenever `L[i][k]` is stored off the diagonal. The level of a row
//! is the length of the longest incoming dependency chain, so rows within one
//! level never depend on each other and can be computed in parallel.
//!
//! Costs count arithmetic operations per row: an untouched row with `nnz`
//! stored entries costs `2*nnz - 1` (one multiply-add per off-diagonal entry
//! plus the final subtraction-free division). Rewritten rows are costed by the
//! rewrite engine instead.

use crate::matrix::LowerCsr;

/// Partition of rows into ordered levels plus per-level cost bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchedule {
    level_of: Vec<usize>,
    levels: Vec<Vec<usize>>,
    level_costs: Vec<u64>,
}

impl LevelSchedule {
    /// Groups rows by the given level assignment, compacts away empty level
    /// indices and prices every row with `cost_of_row`.
    ///
    /// Rows within a level come out in ascending row index.
    pub(crate) fn from_assignment(
        mut level_of: Vec<usize>,
        cost_of_row: impl Fn(usize) -> u64,
    ) -> Self {
        let max_level = level_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut levels: Vec<Vec<usize>> = vec![Vec::new(); max_level];
        for (row, &lvl) in level_of.iter().enumerate() {
            levels[lvl].push(row);
        }
        // compact: drop empty levels, remap indices in order
        levels.retain(|rows| !rows.is_empty());
        for (new_idx, rows) in levels.iter().enumerate() {
            for &row in rows {
                level_of[row] = new_idx;
            }
        }
        let level_costs = levels
            .iter()
            .map(|rows| rows.iter().map(|&r| cost_of_row(r)).sum())
            .collect();
        LevelSchedule {
            level_of,
            levels,
            level_costs,
        }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn num_rows(&self) -> usize {
        self.level_of.len()
    }

    /// Level index of a row.
    pub fn level_of(&self, row: usize) -> usize {
        self.level_of[row]
    }

    pub fn level_assignment(&self) -> &[usize] {
        &self.level_of
    }

    /// Rows of level `l`, ascending.
    pub fn rows(&self, l: usize) -> &[usize] {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// Cost of level `l` under the cost model the schedule was built with.
    pub fn level_cost(&self, l: usize) -> u64 {
        self.level_costs[l]
    }

    pub fn level_costs(&self) -> &[u64] {
        &self.level_costs
    }

    /// Sum of all level costs.
    pub fn total_cost(&self) -> u64 {
        self.level_costs.iter().sum()
    }

    /// `total_cost / num_levels` in real arithmetic.
    pub fn avg_level_cost(&self) -> f64 {
        if self.levels.is_empty() {
            0.0
        } else {
            self.total_cost() as f64 / self.levels.len() as f64
        }
    }

    /// Ascending indices of levels with cost strictly below `threshold`.
    pub fn thin_levels(&self, threshold: f64) -> Vec<usize> {
        self.level_costs
            .iter()
            .enumerate()
            .filter(|&(_, &c)| (c as f64) < threshold)
            .map(|(l, _)| l)
            .collect()
    }

    /// CSV profile with header `level,rows,cost`, one line per level.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("level,rows,cost\n");
        for (l, rows) in self.levels.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", l, rows.len(), self.level_costs[l]));
        }
        out
    }
}

/// Arithmetic cost of an untouched row: `2*nnz - 1`.
pub fn row_cost(matrix: &LowerCsr, row: usize) -> u64 {
    2 * matrix.row_nnz(row) as u64 - 1
}

/// Builds the level partition of the dependency DAG.
///
/// `level_of[i]` is 0 when row `i` has no off-diagonal entries, otherwise one
/// more than the maximum level among its dependencies.
pub fn build_levels(matrix: &LowerCsr) -> LevelSchedule {
    let n = matrix.n();
    let mut level_of = vec![0usize; n];
    for i in 0..n {
        let (deps, _) = matrix.off_diag(i);
        let mut lvl = 0;
        for &k in deps {
            lvl = lvl.max(level_of[k] + 1);
        }
        level_of[i] = lvl;
    }
    LevelSchedule::from_assignment(level_of, |r| row_cost(matrix, r))
}

/// Rows lying on at least one longest root-to-leaf chain of the dependency
/// DAG, ascending. The longest chain's node count equals the level count.
pub fn critical_path(schedule: &LevelSchedule, matrix: &LowerCsr) -> Vec<usize> {
    let n = matrix.n();
    let num_levels = schedule.num_levels();
    if n == 0 {
        return Vec::new();
    }
    // height[i]: longest chain from i down to any leaf, in edge count.
    // Successors of k have index > k, so a descending sweep finalizes every
    // height before it is read.
    let mut height = vec![0usize; n];
    for i in (0..n).rev() {
        let (deps, _) = matrix.off_diag(i);
        for &k in deps {
            height[k] = height[k].max(height[i] + 1);
        }
    }
    (0..n)
        .filter(|&i| schedule.level_of(i) + height[i] + 1 == num_levels)
        .collect()
}
