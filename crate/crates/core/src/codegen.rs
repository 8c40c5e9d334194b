//! Specialized straight-line solver emission.
//!
//! One C function per level (or per cost-balanced chunk of a level), named
//! `calculate<k>` with a `_p<j>` suffix when level `k` is split. Original rows
//! keep the division form of forward substitution; rewritten rows are emitted
//! in folded affine form, constants only when no dependencies remain. All
//! numeric literals carry 17 significant digits so the emitted text
//! round-trips to the exact doubles the solver uses.

use crate::affine::{AffineSystem, Origin};
use crate::levels::LevelSchedule;

/// One emitted function block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelFunction {
    pub name: String,
    pub level: usize,
    pub rows: Vec<usize>,
}

/// Emitted kernel text plus its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedKernel {
    pub source_text: String,
    pub size_bytes: usize,
    pub functions: Vec<KernelFunction>,
}

/// Byte length of the emitted source.
pub fn code_size(kernel: &EmittedKernel) -> usize {
    kernel.source_text.len()
}

fn literal(v: f64) -> String {
    format!("{v:.16e}")
}

fn statement(system: &AffineSystem, i: usize) -> String {
    let row = system.row(i);
    match row.origin() {
        Origin::Original => {
            let matrix = system.matrix();
            let b = literal(system.rhs()[i]);
            let d = literal(matrix.diag(i));
            let (cols, vals) = matrix.off_diag(i);
            match cols.len() {
                0 => format!("  x[{i}] = {b} / {d};\n"),
                1 => {
                    let term = format!("({}) * x[{}]", literal(vals[0]), cols[0]);
                    format!("  x[{i}] = ({b} - {term}) / {d};\n")
                }
                _ => {
                    let terms: Vec<String> = cols
                        .iter()
                        .zip(vals)
                        .map(|(&k, &v)| format!("({}) * x[{k}]", literal(v)))
                        .collect();
                    format!("  x[{i}] = ({b} - ({})) / {d};\n", terms.join(" + "))
                }
            }
        }
        Origin::Rewritten => {
            let mut expr = literal(row.beta());
            for (&k, &c) in row.coeffs() {
                expr.push_str(&format!(" - {} * x[{k}]", literal(-c)));
            }
            format!("  x[{i}] = {expr};\n")
        }
    }
}

fn chunk_level(system: &AffineSystem, rows: &[usize], chunk_flops: Option<u64>) -> Vec<Vec<usize>> {
    let Some(limit) = chunk_flops else {
        return vec![rows.to_vec()];
    };
    let mut chunks = Vec::new();
    let mut current = Vec::new();
    let mut cost = 0u64;
    for &row in rows {
        let c = system.current_row_cost(row);
        if !current.is_empty() && cost + c > limit {
            chunks.push(std::mem::take(&mut current));
            cost = 0;
        }
        current.push(row);
        cost += c;
    }
    if !current.is_empty() {
        chunks.push(current);
    }
    chunks
}

/// Emits the specialized solver for the (possibly transformed) system.
///
/// `chunk_flops` caps the cumulative statement cost per function; levels above
/// the cap are split into `calculate<k>_p<j>` blocks in execution order.
pub fn emit(
    system: &AffineSystem,
    schedule: &LevelSchedule,
    chunk_flops: Option<u64>,
) -> EmittedKernel {
    let mut text = String::new();
    let mut functions = Vec::new();
    for (level, rows) in schedule.levels().iter().enumerate() {
        let chunks = chunk_level(system, rows, chunk_flops);
        let split = chunks.len() > 1;
        for (j, chunk) in chunks.into_iter().enumerate() {
            let name = if split {
                format!("calculate{level}_p{j}")
            } else {
                format!("calculate{level}")
            };
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&format!("void {name}(double* x) {{\n"));
            for &row in &chunk {
                text.push_str(&statement(system, row));
            }
            text.push_str("}\n");
            functions.push(KernelFunction {
                name,
                level,
                rows: chunk,
            });
        }
    }
    let size_bytes = text.len();
    EmittedKernel {
        source_text: text,
        size_bytes,
        functions,
    }
}
