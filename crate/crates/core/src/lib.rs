//! Dependency-graph transformation toolkit for sparse lower-triangular solves.
//!
//! The pipeline: ingest a Matrix Market file into a [`LowerCsr`], partition
//! the rows into levels ([`build_levels`]), rewrite rows out of thin levels to
//! fatten earlier ones ([`compute_plan_avg`] / [`compute_plan_manual`] +
//! [`apply_plan`]), then solve ([`solve_levels`]) and verify against the
//! serial reference ([`solve_reference`]), or emit a specialized straight-line
//! kernel for the transformed system ([`emit`]).

pub mod affine;
pub mod codegen;
pub mod error;
pub mod levels;
pub mod market;
pub mod matrix;
pub mod solver;
pub mod strategy;
pub mod synth;

pub use affine::{
    check_guards, project_cost, rewrite_row, to_affine, AffineRow, AffineSystem, GuardCheck,
    GuardViolation, Guards, Origin,
};
pub use codegen::{code_size, emit, EmittedKernel, KernelFunction};
pub use error::{Error, Result};
pub use levels::{build_levels, critical_path, row_cost, LevelSchedule};
pub use market::{parse_matrix_market, read_matrix_market, MarketMatrix};
pub use matrix::{default_rhs, extract_lower, CooEntry, DiagPolicy, LowerCsr, Rhs};
pub use solver::{solve_levels, solve_reference, verify, SolveResult, VerifyReport};
pub use strategy::{
    apply_plan, compute_plan_avg, compute_plan_manual, replay_plan, Action, StrategyKind,
    TransformPlan, TransformReport,
};
