//! Exact integer determinant and rank by fraction-free elimination.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Bareiss elimination on a square matrix. Every intermediate division is
/// exact, so the result is the integer determinant.
pub fn bareiss_determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = !sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign {
        -det
    } else {
        det
    }
}

/// Rank over the rationals of an integer matrix given by rows.
pub fn matrix_rank(rows: &[Vec<BigInt>]) -> usize {
    let Some(cols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for j in c..cols {
                row[j] = &row[j] * &pivot_row[c] - &f * &pivot_row[j];
            }
            let g = row
                .iter()
                .fold(BigInt::zero(), |g, x| num_integer::Integer::gcd(&g, x));
            if g > BigInt::one() {
                row.iter_mut().for_each(|x| *x /= &g);
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}
