//! Smith normal form over the integers with unimodular certificates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// `S * B * T = D` with `S`, `T` unimodular and `D` diagonal with
/// `d_1 | d_2 | ... | d_r`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub s: IntMatrix,
    /// Inverse of `s`, tracked alongside the row operations.
    pub s_inv: IntMatrix,
    pub t: IntMatrix,
    pub d: IntMatrix,
    /// Nonzero diagonal entries of `d`, all positive.
    pub invariant_factors: Vec<BigInt>,
}

impl SmithDecomposition {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Checks every certificate property against the input matrix.
    pub fn verify(&self, b: &IntMatrix) -> Result<(), String> {
        if self.s.mul(b).mul(&self.t) != self.d {
            return Err("S*B*T != D".into());
        }
        if !self.s.determinant().abs().is_one() {
            return Err("S is not unimodular".into());
        }
        if !self.t.determinant().abs().is_one() {
            return Err("T is not unimodular".into());
        }
        if self.s.mul(&self.s_inv) != IntMatrix::identity(self.s.rows()) {
            return Err("S_inv is not the inverse of S".into());
        }
        for i in 0..self.d.rows() {
            for j in 0..self.d.cols() {
                let on_diag = i == j && i < self.rank();
                if !on_diag && !self.d[(i, j)].is_zero() {
                    return Err(format!("D has stray entry at ({i}, {j})"));
                }
            }
        }
        for (k, f) in self.invariant_factors.iter().enumerate() {
            if !f.is_positive() || self.d[(k, k)] != *f {
                return Err(format!("invariant factor {k} is not positive"));
            }
        }
        for w in self.invariant_factors.windows(2) {
            if !w[1].is_multiple_of(&w[0]) {
                return Err(format!("divisibility chain broken: {} does not divide {}", w[0], w[1]));
            }
        }
        Ok(())
    }
}

struct Work {
    a: IntMatrix,
    s: IntMatrix,
    s_inv: IntMatrix,
    t: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.s.swap_rows(i, j);
        self.s_inv.swap_cols(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.t.swap_cols(i, j);
    }

    /// row[dst] += c * row[src]
    fn row_op(&mut self, dst: usize, src: usize, c: &BigInt) {
        self.a.add_row_multiple(dst, src, c);
        self.s.add_row_multiple(dst, src, c);
        self.s_inv.add_col_multiple(src, dst, &-c);
    }

    /// col[dst] += c * col[src]
    fn col_op(&mut self, dst: usize, src: usize, c: &BigInt) {
        self.a.add_col_multiple(dst, src, c);
        self.t.add_col_multiple(dst, src, c);
    }

    fn negate_row(&mut self, r: usize) {
        self.a.negate_row(r);
        self.s.negate_row(r);
        self.s_inv.negate_col(r);
    }

    /// Moves the smallest nonzero entry of the trailing block to `(k, k)`.
    fn pivot_block(&mut self, k: usize) -> bool {
        let (rows, cols) = (self.a.rows(), self.a.cols());
        let mut best: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let v = &self.a[(i, j)];
                if v.is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| v.abs() < self.a[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        match best {
            Some((i, j)) => {
                self.swap_rows(k, i);
                self.swap_cols(k, j);
                true
            }
            None => false,
        }
    }

    /// Moves the smallest nonzero entry of row `k` / column `k` to the pivot.
    fn pivot_cross(&mut self, k: usize) {
        let mut best = (k, k);
        let mut best_abs = self.a[(k, k)].abs();
        let consider = |v: &BigInt, best_abs: &BigInt| !v.is_zero() && (best_abs.is_zero() || v.abs() < *best_abs);
        for i in k + 1..self.a.rows() {
            if consider(&self.a[(i, k)], &best_abs) {
                best = (i, k);
                best_abs = self.a[(i, k)].abs();
            }
        }
        for j in k + 1..self.a.cols() {
            if consider(&self.a[(k, j)], &best_abs) {
                best = (k, j);
                best_abs = self.a[(k, j)].abs();
            }
        }
        if best.0 != k {
            self.swap_rows(k, best.0);
        }
        if best.1 != k {
            self.swap_cols(k, best.1);
        }
    }

    /// Clears row and column `k` except the pivot; returns false if a
    /// nonzero remainder survived.
    fn eliminate(&mut self, k: usize) -> bool {
        let mut clean = true;
        for i in k + 1..self.a.rows() {
            if self.a[(i, k)].is_zero() {
                continue;
            }
            let q = self.a[(i, k)].div_floor(&self.a[(k, k)]);
            self.row_op(i, k, &-q);
            clean &= self.a[(i, k)].is_zero();
        }
        for j in k + 1..self.a.cols() {
            if self.a[(k, j)].is_zero() {
                continue;
            }
            let q = self.a[(k, j)].div_floor(&self.a[(k, k)]);
            self.col_op(j, k, &-q);
            clean &= self.a[(k, j)].is_zero();
        }
        clean
    }

    fn find_non_multiple(&self, k: usize) -> Option<usize> {
        let p = &self.a[(k, k)];
        (k + 1..self.a.rows()).find(|&i| (k + 1..self.a.cols()).any(|j| !self.a[(i, j)].is_multiple_of(p)))
    }
}

/// Smith normal form of an integer matrix (any shape, including zero
/// columns). Arithmetic is exact; the certificate is checked before return.
pub fn smith_normal_form(b: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (b.rows(), b.cols());
    let mut w = Work {
        a: b.clone(),
        s: IntMatrix::identity(rows),
        s_inv: IntMatrix::identity(rows),
        t: IntMatrix::identity(cols),
    };
    let mut factors = Vec::new();
    for k in 0..rows.min(cols) {
        if !w.pivot_block(k) {
            break;
        }
        loop {
            if !w.eliminate(k) {
                w.pivot_cross(k);
                continue;
            }
            match w.find_non_multiple(k) {
                Some(i) => w.row_op(k, i, &BigInt::one()),
                None => break,
            }
        }
        if w.a[(k, k)].is_negative() {
            w.negate_row(k);
        }
        factors.push(w.a[(k, k)].clone());
    }
    let out = SmithDecomposition { s: w.s, s_inv: w.s_inv, t: w.t, d: w.a, invariant_factors: factors };
    if let Err(e) = out.verify(b) {
        panic!("Smith normal form certificate failed: {e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(rows: &[Vec<i64>]) -> Vec<i64> {
        let m = IntMatrix::from_rows(rows);
        smith_normal_form(&m).invariant_factors.iter().map(|f| i64::try_from(f).unwrap()).collect()
    }

    #[test]
    fn diagonal_ones_column() {
        let b = IntMatrix::from_rows(&[vec![1], vec![1]]);
        let snf = smith_normal_form(&b);
        assert_eq!(snf.d, IntMatrix::from_rows(&[vec![1], vec![0]]));
        assert_eq!(snf.rank(), 1);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let b = IntMatrix::zeros(2, 1);
        let snf = smith_normal_form(&b);
        assert_eq!(snf.rank(), 0);
        assert_eq!(snf.d, IntMatrix::zeros(2, 1));
    }

    #[test]
    fn coprime_diagonal_merges() {
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
    }

    #[test]
    fn divisibility_fixup() {
        assert_eq!(factors(&[vec![2, 0], vec![0, 4]]), vec![2, 4]);
        assert_eq!(factors(&[vec![4, 0], vec![0, 6]]), vec![2, 12]);
        assert_eq!(factors(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
    }

    #[test]
    fn empty_column_set() {
        let b = IntMatrix::zeros(3, 0);
        let snf = smith_normal_form(&b);
        assert_eq!(snf.rank(), 0);
        assert_eq!(snf.s, IntMatrix::identity(3));
    }

    #[test]
    fn dependent_columns() {
        // (1,1,0) and (2,2,0) span the same rank-one lattice.
        assert_eq!(factors(&[vec![1, 2], vec![1, 2], vec![0, 0]]), vec![1]);
    }
}
