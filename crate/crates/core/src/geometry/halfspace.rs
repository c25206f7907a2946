//! Polyhedra in H-representation `{x : a_i·x <= b_i}`: Fourier–Motzkin
//! projection, redundancy pruning and Lasserre's recursive volume formula.

use num_rational::BigRational;

use super::lp::{maximize, LpOutcome};
use super::scalar::Scalar;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub a: Vec<T>,
    pub b: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpaces<T> {
    dim: usize,
    rows: Vec<Constraint<T>>,
}

/// Outcome of cleaning a constraint list.
enum Cleaned<T> {
    Empty,
    Rows(Vec<Constraint<T>>),
}

impl<T: Scalar> HalfSpaces<T> {
    pub fn new(dim: usize, rows: Vec<Constraint<T>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.a.len() == dim));
        HalfSpaces { dim, rows }
    }

    /// `{x : ||M x - center||_inf <= 1}` for an integer matrix `M` given by rows.
    pub fn sup_ball_preimage(m_rows: &[Vec<T>], offset: &[T]) -> Self {
        let dim = m_rows.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(2 * m_rows.len());
        for (r, o) in m_rows.iter().zip(offset) {
            // r·x + o <= 1 and -(r·x + o) <= 1
            rows.push(Constraint { a: r.clone(), b: T::one() - o.clone() });
            rows.push(Constraint { a: r.iter().map(|x| -x.clone()).collect(), b: T::one() + o.clone() });
        }
        HalfSpaces { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Constraint<T>] {
        &self.rows
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.rows.iter().all(|r| {
            let lhs = dot(&r.a, x);
            lhs < r.b || lhs.same(&r.b)
        })
    }

    /// Eliminates the trailing `k` coordinates, returning the projection
    /// onto the leading `dim - k` coordinates.
    pub fn project_out_trailing(&self, k: usize) -> Self {
        let mut cur = match clean(self.rows.clone()) {
            Cleaned::Empty => return self.empty_like(self.dim - k),
            Cleaned::Rows(r) => r,
        };
        let mut dim = self.dim;
        for _ in 0..k {
            let var = dim - 1;
            let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
            for r in cur {
                let c = r.a[var].clone();
                if c.is_negligible() {
                    keep.push(r);
                } else if c > T::zero() {
                    pos.push(r);
                } else {
                    neg.push(r);
                }
            }
            for p in &pos {
                for n in &neg {
                    let wp = -n.a[var].clone();
                    let wn = p.a[var].clone();
                    let a =
                        p.a.iter().zip(&n.a).map(|(x, y)| x.clone() * wp.clone() + y.clone() * wn.clone()).collect();
                    let b = p.b.clone() * wp.clone() + n.b.clone() * wn.clone();
                    keep.push(Constraint { a, b });
                }
            }
            for r in &mut keep {
                r.a.truncate(var);
            }
            dim -= 1;
            cur = match clean(keep) {
                Cleaned::Empty => return self.empty_like(dim),
                Cleaned::Rows(r) => r,
            };
        }
        HalfSpaces { dim, rows: cur }
    }

    fn empty_like(&self, dim: usize) -> Self {
        HalfSpaces { dim, rows: vec![Constraint { a: vec![T::zero(); dim], b: -T::one() }] }
    }

    /// Exact (for rationals) volume by Lasserre's recursion:
    /// `vol_n(P) = (1/n) sum_i (b_i / |a_ij|) vol_{n-1}(facet_i projected off x_j)`.
    pub fn volume(&self) -> T {
        lasserre(self.dim, self.rows.clone())
    }

    pub fn to_f64(&self) -> HalfSpaces<f64> {
        HalfSpaces {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| Constraint { a: r.a.iter().map(Scalar::as_f64).collect(), b: r.b.as_f64() })
                .collect(),
        }
    }
}

impl HalfSpaces<BigRational> {
    /// Drops constraints implied by the others. Requires the origin to be
    /// feasible (all `b >= 0`).
    pub fn prune_redundant(&self) -> Result<Self> {
        let mut rows = self.rows.clone();
        let mut i = 0;
        while i < rows.len() {
            let others: Vec<(Vec<BigRational>, BigRational)> =
                rows.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| (r.a.clone(), r.b.clone())).collect();
            let redundant = match maximize(&rows[i].a, &others)? {
                LpOutcome::Optimal { value, .. } => value <= rows[i].b,
                LpOutcome::Unbounded => false,
            };
            if redundant {
                rows.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(HalfSpaces { dim: self.dim, rows })
    }

    /// Range of coordinate `j` over the polyhedron, by two exact LPs.
    pub fn coordinate_range(&self, j: usize) -> Result<(BigRational, BigRational)> {
        let as_pairs: Vec<_> = self.rows.iter().map(|r| (r.a.clone(), r.b.clone())).collect();
        let mut e = vec![<BigRational as Scalar>::zero(); self.dim];
        e[j] = <BigRational as Scalar>::one();
        let hi = maximize(&e, &as_pairs)?.value()?.clone();
        e[j] = -<BigRational as Scalar>::one();
        let lo = -maximize(&e, &as_pairs)?.value()?.clone();
        Ok((lo, hi))
    }

    /// Vertices of a bounded polygon (`dim == 2`) in counterclockwise order.
    pub fn polygon_vertices(&self) -> Vec<[BigRational; 2]> {
        assert_eq!(self.dim, 2, "polygon_vertices needs a planar system");
        let mut pts: Vec<[BigRational; 2]> = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            for s in &self.rows[i + 1..] {
                let det = r.a[0].clone() * s.a[1].clone() - r.a[1].clone() * s.a[0].clone();
                if det.is_negligible() {
                    continue;
                }
                let x = (r.b.clone() * s.a[1].clone() - r.a[1].clone() * s.b.clone()) / det.clone();
                let y = (r.a[0].clone() * s.b.clone() - r.b.clone() * s.a[0].clone()) / det;
                let p = [x, y];
                if self.contains(&p) && !pts.contains(&p) {
                    pts.push(p);
                }
            }
        }
        if pts.len() < 3 {
            return pts;
        }
        // Sort by angle around the vertex centroid.
        let n = BigRational::from_integer((pts.len() as i64).into());
        let cx = pts.iter().fold(<BigRational as Scalar>::zero(), |a, p| a + &p[0]) / &n;
        let cy = pts.iter().fold(<BigRational as Scalar>::zero(), |a, p| a + &p[1]) / &n;
        pts.sort_by(|p, q| {
            let ap = (p[1].as_f64() - cy.as_f64()).atan2(p[0].as_f64() - cx.as_f64());
            let aq = (q[1].as_f64() - cy.as_f64()).atan2(q[0].as_f64() - cx.as_f64());
            ap.partial_cmp(&aq).unwrap()
        });
        pts
    }
}

fn dot<T: Scalar>(a: &[T], x: &[T]) -> T {
    a.iter().zip(x).fold(T::zero(), |acc, (p, q)| acc + p.clone() * q.clone())
}

/// Removes trivial rows, normalizes, and keeps only the tightest copy of
/// each direction.
fn clean<T: Scalar>(rows: Vec<Constraint<T>>) -> Cleaned<T> {
    let mut out: Vec<Constraint<T>> = Vec::with_capacity(rows.len());
    for r in rows {
        let Some(lead) = r.a.iter().find(|x| !x.is_negligible()).map(Scalar::abs) else {
            if r.b < T::zero() && !r.b.is_negligible() {
                return Cleaned::Empty;
            }
            continue;
        };
        let a: Vec<T> = r.a.iter().map(|x| x.clone() / lead.clone()).collect();
        let b = r.b / lead;
        match out.iter_mut().find(|o| o.a.iter().zip(&a).all(|(x, y)| x.same(y))) {
            Some(existing) => {
                if b < existing.b {
                    existing.b = b;
                }
            }
            None => out.push(Constraint { a, b }),
        }
    }
    Cleaned::Rows(out)
}

fn lasserre<T: Scalar>(dim: usize, rows: Vec<Constraint<T>>) -> T {
    let rows = match clean(rows) {
        Cleaned::Empty => return T::zero(),
        Cleaned::Rows(r) => r,
    };
    if dim == 1 {
        let mut lo: Option<T> = None;
        let mut hi: Option<T> = None;
        for r in &rows {
            let bound = r.b.clone() / r.a[0].clone();
            if r.a[0] > T::zero() {
                if hi.as_ref().is_none_or(|h| bound < *h) {
                    hi = Some(bound);
                }
            } else if lo.as_ref().is_none_or(|l| bound > *l) {
                lo = Some(bound);
            }
        }
        return match (lo, hi) {
            (Some(l), Some(h)) if h > l => h - l,
            (Some(_), Some(_)) => T::zero(),
            _ => panic!("unbounded segment in volume recursion"),
        };
    }
    let mut total = T::zero();
    for (i, facet) in rows.iter().enumerate() {
        if facet.b.is_negligible() {
            continue;
        }
        // Eliminate the coordinate with the largest coefficient.
        let j = (0..dim).max_by(|&x, &y| facet.a[x].abs().partial_cmp(&facet.a[y].abs()).unwrap()).unwrap();
        let aij = facet.a[j].clone();
        let mut sub = Vec::with_capacity(rows.len() - 1);
        for (k, r) in rows.iter().enumerate() {
            if k == i {
                continue;
            }
            let f = r.a[j].clone() / aij.clone();
            let a: Vec<T> =
                (0..dim).filter(|&c| c != j).map(|c| r.a[c].clone() - f.clone() * facet.a[c].clone()).collect();
            let b = r.b.clone() - f * facet.b.clone();
            sub.push(Constraint { a, b });
        }
        let v = lasserre(dim - 1, sub);
        if !v.is_negligible() {
            total = total + facet.b.clone() / aij.abs() * v;
        }
    }
    total / T::from_i64(dim as i64)
}
