//! Exact Gaussian elimination over Q(ζ_N).

use crate::cycfield::CycNum;

pub type Matrix = Vec<Vec<CycNum>>;

/// Reduces `m` in place to reduced row echelon form and returns the pivot
/// columns. Pivots are taken left to right, the first nonzero entry at or
/// below the current row being swapped up.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("pivot is nonzero");
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Basis of the right nullspace, one vector per free column in increasing
/// column order; each has a 1 at its free column and 0 at the other free
/// columns.
pub fn nullspace(m: &Matrix, cols: usize, order: u32) -> Vec<Vec<CycNum>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![CycNum::zero(order); cols];
        v[free] = CycNum::one(order);
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -&a[row][free];
        }
        basis.push(v);
    }
    basis
}
