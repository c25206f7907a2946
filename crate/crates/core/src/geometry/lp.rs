//! Dense exact simplex for `max c·x  s.t.  A x <= b` with free `x` and
//! `b >= 0` (the origin is feasible, so no phase one is needed).

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: BigRational, point: Vec<BigRational> },
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Result<&BigRational> {
        match self {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Err(Error::Unbounded),
        }
    }
}

/// Solves the program with Bland's rule, so it terminates on degenerate data.
pub fn maximize(objective: &[BigRational], rows: &[(Vec<BigRational>, BigRational)]) -> Result<LpOutcome> {
    let n = objective.len();
    let m = rows.len();
    if rows.iter().any(|(a, b)| a.len() != n || b.is_negative()) {
        return Err(Error::domain("simplex needs a feasible origin (b >= 0) and consistent widths"));
    }
    let width = 2 * n + m + 1;
    let rhs = width - 1;
    let mut tab = vec![vec![BigRational::zero(); width]; m + 1];
    for (i, (a, b)) in rows.iter().enumerate() {
        for j in 0..n {
            tab[i][j] = a[j].clone();
            tab[i][n + j] = -a[j].clone();
        }
        tab[i][2 * n + i] = BigRational::from_integer(1.into());
        tab[i][rhs] = b.clone();
    }
    for j in 0..n {
        tab[m][j] = -objective[j].clone();
        tab[m][n + j] = objective[j].clone();
    }
    let mut basis: Vec<usize> = (0..m).map(|i| 2 * n + i).collect();

    while let Some(enter) = (0..rhs).find(|&j| tab[m][j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &tab[i][rhs] / &tab[i][enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((row, _)) = leave else {
            return Ok(LpOutcome::Unbounded);
        };
        pivot(&mut tab, row, enter);
        basis[row] = enter;
    }

    let mut point = vec![BigRational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            point[b] += &tab[i][rhs];
        } else if b < 2 * n {
            point[b - n] -= &tab[i][rhs];
        }
    }
    Ok(LpOutcome::Optimal { value: tab[m][rhs].clone(), point })
}

fn pivot(tab: &mut [Vec<BigRational>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for x in tab[row].iter_mut() {
        *x = &*x / &p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (x, y) in r.iter_mut().zip(&pivot_row) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn box_corner() {
        // max x + y on |x| <= 1, |y| <= 2
        let rows = vec![
            (vec![q(1, 1), q(0, 1)], q(1, 1)),
            (vec![q(-1, 1), q(0, 1)], q(1, 1)),
            (vec![q(0, 1), q(1, 1)], q(2, 1)),
            (vec![q(0, 1), q(-1, 1)], q(2, 1)),
        ];
        let out = maximize(&[q(1, 1), q(1, 1)], &rows).unwrap();
        assert_eq!(out.value().unwrap(), &q(3, 1));
    }

    #[test]
    fn detects_unbounded() {
        let rows = vec![(vec![q(1, 1), q(-1, 1)], q(1, 1))];
        assert_eq!(maximize(&[q(1, 1), q(0, 1)], &rows).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn projection_of_sec6_body() {
        // max y subject to |y + l| <= 1, |l| <= 1: y* = 2
        let rows = vec![
            (vec![q(1, 1), q(1, 1)], q(1, 1)),
            (vec![q(-1, 1), q(-1, 1)], q(1, 1)),
            (vec![q(0, 1), q(1, 1)], q(1, 1)),
            (vec![q(0, 1), q(-1, 1)], q(1, 1)),
        ];
        let out = maximize(&[q(1, 1), q(0, 1)], &rows).unwrap();
        assert_eq!(out.value().unwrap(), &q(2, 1));
        if let LpOutcome::Optimal { point, .. } = out {
            assert_eq!(point, vec![q(2, 1), q(-1, 1)]);
        }
    }

    #[test]
    fn rejects_infeasible_origin() {
        let rows = vec![(vec![q(1, 1)], q(-1, 1))];
        assert!(maximize(&[q(1, 1)], &rows).is_err());
    }
}
