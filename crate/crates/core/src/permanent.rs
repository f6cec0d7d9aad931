//! Matrix permanent via Ryser's inclusion–exclusion formula.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};
use num_complex::Complex64;

/// Largest order accepted; `2^k` subsets are visited.
pub const MAX_PERMANENT_ORDER: usize = 30;

/// `Per(A)` for a square complex matrix, `O(2^k · k)`.
///
/// Subsets of columns are walked in Gray-code order so each step adds or
/// removes a single column from the running row sums. The empty matrix has
/// permanent 1.
pub fn permanent(a: &CMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "permanent needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let k = a.nrows();
    if k == 0 {
        return Ok(ONE);
    }
    if k > MAX_PERMANENT_ORDER {
        return Err(Error::InvalidInput(format!(
            "permanent order {k} exceeds {MAX_PERMANENT_ORDER}"
        )));
    }

    let mut row_sums = vec![ZERO; k];
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << k) {
        let col = step.trailing_zeros() as usize;
        gray ^= 1 << col;
        if gray & (1 << col) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, col)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        // (-1)^(k - |S|)
        if (k - gray.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}
