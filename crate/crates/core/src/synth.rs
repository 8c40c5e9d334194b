//! Synthetic systems for tests and benchmarks.
//!
//! Everything here is deterministic given the seed, so expected values can be
//! frozen into tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{default_rhs, extract_lower, CooEntry, DiagPolicy, LowerCsr, Rhs};

/// Six-row fixture with a fat level, a thin chain and a branch.
///
/// Entries: `(0,0)=2; (1,0)=-1,(1,1)=2; (2,1)=-1,(2,2)=2; (3,2)=-1,(3,3)=2;
/// (4,0)=-1,(4,4)=2; (5,3)=-1,(5,5)=2`. The right-hand side is the row sums,
/// so the exact solution is all ones and every intermediate is dyadic.
pub fn chain6() -> (LowerCsr, Rhs) {
    let matrix = extract_lower(&chain6_entries(), 6, DiagPolicy::RequireNonzero)
        .expect("fixture is well formed");
    let rhs = default_rhs(&matrix);
    (matrix, rhs)
}

fn chain6_entries() -> Vec<CooEntry> {
    let coords: [(usize, usize, f64); 11] = [
        (0, 0, 2.0),
        (1, 0, -1.0),
        (1, 1, 2.0),
        (2, 1, -1.0),
        (2, 2, 2.0),
        (3, 2, -1.0),
        (3, 3, 2.0),
        (4, 0, -1.0),
        (4, 4, 2.0),
        (5, 3, -1.0),
        (5, 5, 2.0),
    ];
    coords
        .iter()
        .map(|&(row, col, value)| CooEntry { row, col, value })
        .collect()
}

/// The same fixture as [`chain6`], rendered as Matrix Market text.
pub fn chain6_mtx() -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n6 6 11\n");
    for e in chain6_entries() {
        out.push_str(&format!("{} {} {}\n", e.row + 1, e.col + 1, e.value));
    }
    out
}

/// Random diagonally dominant lower-triangular matrix.
///
/// Each strictly-lower entry is present with probability `density` and drawn
/// from `[-1, 1]`; the diagonal is `1 + sum(|off-diagonal|)`, which keeps
/// forward substitution well conditioned.
pub fn random_lower(n: usize, density: f64, seed: u64) -> LowerCsr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        let mut row_abs = 0.0;
        for j in 0..i {
            if rng.random::<f64>() < density {
                let mut v: f64 = rng.random_range(-1.0..1.0);
                if v == 0.0 {
                    v = 0.5;
                }
                row_abs += v.abs();
                entries.push(CooEntry { row: i, col: j, value: v });
            }
        }
        entries.push(CooEntry {
            row: i,
            col: i,
            value: 1.0 + row_abs,
        });
    }
    extract_lower(&entries, n, DiagPolicy::RequireNonzero).expect("generated diagonal is nonzero")
}

/// Random right-hand side with entries in `[-10, 10]`.
pub fn random_rhs(n: usize, seed: u64) -> Rhs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Rhs::new((0..n).map(|_| rng.random_range(-10.0..10.0)).collect())
}
