//! The quotient `Z^d / K`, its splitting into a free part and a torsion part,
//! and the group `(H, ⊕)` of coset representatives with the norm `N`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::matrix::{sup_norm, Basis, IntMatrix};
use super::smith::{smith_normal_form, SmithDecomposition};
use crate::error::{Error, Result};

/// The user's declaration of the action: the nominal dimension and a
/// generating set of the kernel lattice `K` (the translations acting as the
/// identity). An empty generator list means `K = {0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupSpec {
    pub d: usize,
    /// Generators of `K`, one vector of length `d` per generator. They need
    /// not be independent.
    #[serde(default)]
    pub kernel_gens: Vec<Vec<i64>>,
}

impl GroupSpec {
    pub fn new(d: usize, kernel_gens: Vec<Vec<i64>>) -> Self {
        GroupSpec { d, kernel_gens }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("dimension d must be at least 1"));
        }
        for (j, g) in self.kernel_gens.iter().enumerate() {
            if g.len() != self.d {
                return Err(Error::invalid(format!(
                    "kernel generator {j} has length {}, expected d = {}",
                    g.len(),
                    self.d
                )));
            }
        }
        Ok(())
    }
}

/// An element of `H`, stored as the canonical representative of its coset
/// `u + K`: the vector of smallest sup norm, ties broken lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HElement(Vec<i64>);

impl HElement {
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

/// Exact algebraic description of `Z^d / K`.
///
/// In Smith coordinates `y = S t` the lattice `K` becomes
/// `span{d_i e_i : i < q}`; the free part `F` is spanned by the remaining
/// coordinate directions pulled back through `S^{-1}`, and the torsion
/// cosets are indexed by residues `y_i mod d_i`.
#[derive(Clone, Debug)]
pub struct QuotientStructure {
    d: usize,
    p: usize,
    q: usize,
    l: u64,
    /// Basis of the complement `F`, one column per free direction.
    u: Basis,
    /// Independent basis of `K`.
    v: Basis,
    /// Coset representatives of `Z^d / (F ⊕ K)`; the first one is zero.
    coset_reps: Vec<Vec<i64>>,
    /// All `q` invariant factors of `K` (including ones).
    factors: Vec<i64>,
    smith: SmithDecomposition,
    s_rows: Vec<Vec<i64>>,
    free_signs: Vec<i64>,
    kernel: KernelEnumerator,
    /// Rows of `[U:V]^{-1}` restricted to the `F` coordinates, with row sums.
    f_coord_rows: Vec<Vec<f64>>,
    f_coord_radius: Vec<f64>,
}

/// Serializable summary used in reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct QuotientSummary {
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub l: u64,
    pub u: Vec<Vec<i64>>,
    pub v: Vec<Vec<i64>>,
    pub coset_reps: Vec<Vec<i64>>,
    pub invariant_factors: Vec<i64>,
}

/// Coordinates of a coset `t + K`: the torsion index `k` and the free
/// coefficients `alpha` with `t ≡ x_k + U alpha (mod K)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetCoords {
    pub k: usize,
    pub alpha: Vec<i64>,
}

impl QuotientStructure {
    /// Splits `Z^d / K` into its free and torsion parts.
    pub fn analyze(spec: &GroupSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.d;
        let b = IntMatrix::from_columns(d, &spec.kernel_gens)?;
        let smith = smith_normal_form(&b);
        let q = smith.rank();
        let p = d - q;
        let factors: Vec<i64> = smith
            .invariant_factors
            .iter()
            .map(|f| f.to_i64().ok_or(Error::Overflow("invariant factor")))
            .collect::<Result<_>>()?;
        let l = factors.iter().try_fold(1u64, |acc, &f| acc.checked_mul(f as u64));
        let l = l.ok_or(Error::Overflow("torsion order"))?;

        let s_inv = smith.s_inv.to_i64_rows()?;
        let s_rows = smith.s.to_i64_rows()?;
        let s_inv_col = |j: usize| -> Vec<i64> { (0..d).map(|i| s_inv[i][j]).collect() };

        let mut v_cols: Vec<Vec<i64>> =
            (0..q).map(|i| s_inv_col(i).into_iter().map(|x| x * factors[i]).collect()).collect();
        for c in &mut v_cols {
            normalize_sign(c);
        }
        let v = Basis::new(d, v_cols);
        let kernel = KernelEnumerator::new(&v)?;

        // Free directions and torsion representatives, shortened modulo K.
        let mut free_signs = Vec::with_capacity(p);
        let mut u_cols = Vec::with_capacity(p);
        for j in q..d {
            let mut c = kernel.canonical(&s_inv_col(j));
            free_signs.push(normalize_sign(&mut c));
            u_cols.push(c);
        }
        let u = Basis::new(d, u_cols);

        let mut coset_reps = Vec::with_capacity(l as usize);
        for residues in mixed_radix(&factors) {
            let mut y = vec![0i64; d];
            y[..q].copy_from_slice(&residues);
            let x = mat_vec(&s_inv, &y);
            coset_reps.push(kernel.canonical(&x));
        }

        let mut w_cols = u.columns.clone();
        w_cols.extend(v.columns.iter().cloned());
        let w = IntMatrix::from_columns(d, &w_cols)?.to_rational();
        let w_inv = w.inverse().ok_or_else(|| Error::domain("[U:V] is singular; quotient splitting failed"))?;
        let w_inv_f = w_inv.to_f64_rows();
        let f_coord_rows: Vec<Vec<f64>> = w_inv_f[..p].to_vec();
        let f_coord_radius = f_coord_rows.iter().map(|r| r.iter().map(|x| x.abs()).sum()).collect();

        Ok(QuotientStructure {
            d,
            p,
            q,
            l,
            u,
            v,
            coset_reps,
            factors,
            smith,
            s_rows,
            free_signs,
            kernel,
            f_coord_rows,
            f_coord_radius,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Effective dimension: rank of the free part of `Z^d / K`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Rank of `K`.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Order of the torsion part.
    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn u(&self) -> &Basis {
        &self.u
    }

    pub fn v(&self) -> &Basis {
        &self.v
    }

    pub fn coset_reps(&self) -> &[Vec<i64>] {
        &self.coset_reps
    }

    pub fn invariant_factors(&self) -> &[i64] {
        &self.factors
    }

    pub fn smith(&self) -> &SmithDecomposition {
        &self.smith
    }

    pub fn summary(&self) -> QuotientSummary {
        QuotientSummary {
            d: self.d,
            p: self.p,
            q: self.q,
            l: self.l,
            u: self.u.columns.clone(),
            v: self.v.columns.clone(),
            coset_reps: self.coset_reps.clone(),
            invariant_factors: self.factors.clone(),
        }
    }

    /// Canonical element of `H` for the coset `t + K`.
    pub fn element(&self, t: &[i64]) -> HElement {
        assert_eq!(t.len(), self.d, "vector has wrong dimension");
        HElement(self.kernel.canonical(t))
    }

    pub fn zero(&self) -> HElement {
        HElement(vec![0; self.d])
    }

    /// Addition modulo `K`.
    pub fn add(&self, a: &HElement, b: &HElement) -> HElement {
        let sum: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        self.element(&sum)
    }

    pub fn inverse(&self, a: &HElement) -> HElement {
        let neg: Vec<i64> = a.0.iter().map(|x| -x).collect();
        self.element(&neg)
    }

    /// `a ⊕ b^{-1}`
    pub fn sub(&self, a: &HElement, b: &HElement) -> HElement {
        let diff: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect();
        self.element(&diff)
    }

    /// `N(u) = min_{v in K} ||u + v||_inf`.
    pub fn norm(&self, u: &HElement) -> u64 {
        // Canonical representatives already realize the minimum.
        sup_norm(&u.0) as u64
    }

    /// `N` of an arbitrary integer vector's coset.
    pub fn norm_of(&self, t: &[i64]) -> u64 {
        self.kernel.norm(t) as u64
    }

    /// `m(t, n) = |[-n1, n1] ∩ (t + K)|` for any `t` in `Z^d`.
    pub fn count_m(&self, t: &[i64], n: u64) -> u64 {
        self.kernel.count(t, n as i64)
    }

    /// Coset coordinates `(k, alpha)` with `t ≡ x_k + U alpha (mod K)`.
    pub fn coords(&self, t: &[i64]) -> CosetCoords {
        let y = mat_vec(&self.s_rows, t);
        let residues: Vec<i64> = (0..self.q).map(|i| y[i].mod_floor(&self.factors[i])).collect();
        let mut k = 0usize;
        for (r, f) in residues.iter().zip(&self.factors) {
            k = k * (*f as usize) + *r as usize;
        }
        let alpha = (0..self.p).map(|j| self.free_signs[j] * y[self.q + j]).collect();
        CosetCoords { k, alpha }
    }

    /// The representative `x_k + U alpha` of the given coordinates.
    pub fn from_coords(&self, c: &CosetCoords) -> Vec<i64> {
        let mut t = self.u.combine(&c.alpha);
        for (ti, xi) in t.iter_mut().zip(&self.coset_reps[c.k]) {
            *ti += xi;
        }
        t
    }

    /// Range of the free coefficients `alpha` that can reach the box
    /// `[-n, n]^d` from coset `k`.
    fn alpha_box(&self, k: usize, n: i64) -> Vec<(i64, i64)> {
        let x = &self.coset_reps[k];
        (0..self.p)
            .map(|j| {
                let center: f64 = -self.f_coord_rows[j].iter().zip(x).map(|(a, &b)| a * b as f64).sum::<f64>();
                let r = self.f_coord_radius[j] * n as f64;
                ((center - r).floor() as i64 - 1, (center + r).ceil() as i64 + 1)
            })
            .collect()
    }

    /// `H_n = {u in H : N(u) <= n}`, sorted.
    pub fn enumerate_h_n(&self, n: u64) -> Vec<HElement> {
        self.h_n_with_counts(n).into_iter().map(|(u, _)| u).collect()
    }

    /// `H_n` together with `m(u, n)` for each element, sorted by element.
    pub fn h_n_with_counts(&self, n: u64) -> Vec<(HElement, u64)> {
        let n = n as i64;
        let mut out = Vec::new();
        for k in 0..self.coset_reps.len() {
            let bounds = self.alpha_box(k, n);
            for_each_in_box(&bounds, |alpha| {
                let t = self.from_coords(&CosetCoords { k, alpha: alpha.to_vec() });
                let m = self.kernel.count(&t, n);
                if m > 0 {
                    out.push((HElement(self.kernel.canonical(&t)), m));
                }
            });
        }
        out.sort();
        out
    }
}

/// Enumerates points of `K` near a given vector.
#[derive(Clone, Debug)]
struct KernelEnumerator {
    d: usize,
    cols: Vec<Vec<i64>>,
    /// Rows of a rational left inverse of V (floating point copy, used only
    /// for search bounds that are padded outward).
    pinv_rows: Vec<Vec<f64>>,
    pinv_radius: Vec<f64>,
}

impl KernelEnumerator {
    fn new(v: &Basis) -> Result<Self> {
        let q = v.len();
        let (pinv_rows, pinv_radius) = if q == 0 {
            (Vec::new(), Vec::new())
        } else {
            let pinv = v
                .to_int_matrix()
                .to_rational()
                .left_inverse()
                .ok_or_else(|| Error::domain("kernel basis is not independent"))?;
            let rows = pinv.to_f64_rows();
            let radius = rows.iter().map(|r| r.iter().map(|x| x.abs()).sum()).collect();
            (rows, radius)
        };
        Ok(KernelEnumerator { d: v.dim, cols: v.columns.clone(), pinv_rows, pinv_radius })
    }

    fn q(&self) -> usize {
        self.cols.len()
    }

    /// Box containing every `lambda` with `||t + V lambda|| <= n`:
    /// `lambda = V^+ (w - t)` with `||w|| <= n`.
    fn lambda_box(&self, t: &[i64], n: i64) -> Vec<(i64, i64)> {
        (0..self.q())
            .map(|j| {
                let center: f64 = -self.pinv_rows[j].iter().zip(t).map(|(a, &b)| a * b as f64).sum::<f64>();
                let r = self.pinv_radius[j] * n as f64;
                ((center - r).floor() as i64 - 1, (center + r).ceil() as i64 + 1)
            })
            .collect()
    }

    /// Calls `visit(lambda_0 range, partial)` for every choice of the outer
    /// coefficients `lambda_1..`, where `partial = t + sum_{j>=1} V_j lambda_j`
    /// and the range is the exact set of feasible `lambda_0`.
    fn scan<F>(&self, t: &[i64], n: i64, mut visit: F)
    where
        F: FnMut(&[i64], i64, i64, &[i64]) -> bool,
    {
        debug_assert!(self.q() > 0);
        let bounds = self.lambda_box(t, n);
        let mut lambda = vec![0i64; self.q()];
        let mut partial = t.to_vec();
        self.scan_level(self.q() - 1, &bounds, n, &mut lambda, &mut partial, &mut visit);
    }

    fn scan_level<F>(
        &self,
        level: usize,
        bounds: &[(i64, i64)],
        n: i64,
        lambda: &mut [i64],
        partial: &mut [i64],
        visit: &mut F,
    ) -> bool
    where
        F: FnMut(&[i64], i64, i64, &[i64]) -> bool,
    {
        if level == 0 {
            let (lo, hi) = self.first_coordinate_range(partial, n);
            if lo > hi {
                return true;
            }
            return visit(lambda, lo, hi, partial);
        }
        let (lo, hi) = bounds[level];
        let col = &self.cols[level];
        for (pi, c) in partial.iter_mut().zip(col) {
            *pi += lo * c;
        }
        let mut keep_going = true;
        for x in lo..=hi {
            lambda[level] = x;
            if !self.scan_level(level - 1, bounds, n, lambda, partial, visit) {
                keep_going = false;
                for (pi, c) in partial.iter_mut().zip(col) {
                    *pi -= x * c;
                }
                break;
            }
            for (pi, c) in partial.iter_mut().zip(col) {
                *pi += c;
            }
        }
        if keep_going {
            for (pi, c) in partial.iter_mut().zip(col) {
                *pi -= (hi + 1) * c;
            }
        }
        keep_going
    }

    /// Exact integer range of `lambda_0` with `||a + V_0 lambda_0|| <= n`.
    fn first_coordinate_range(&self, a: &[i64], n: i64) -> (i64, i64) {
        let mut lo = i64::MIN;
        let mut hi = i64::MAX;
        for (ai, &vi) in a.iter().zip(&self.cols[0]) {
            match vi.cmp(&0) {
                Ordering::Equal => {
                    if ai.abs() > n {
                        return (1, 0);
                    }
                }
                Ordering::Greater => {
                    lo = lo.max(Integer::div_ceil(&(-n - ai), &vi));
                    hi = hi.min(Integer::div_floor(&(n - ai), &vi));
                }
                Ordering::Less => {
                    lo = lo.max(Integer::div_ceil(&(n - ai), &vi));
                    hi = hi.min(Integer::div_floor(&(-n - ai), &vi));
                }
            }
        }
        (lo, hi)
    }

    fn count(&self, t: &[i64], n: i64) -> u64 {
        if self.q() == 0 {
            return u64::from(sup_norm(t) <= n);
        }
        let mut total = 0u64;
        self.scan(t, n, |_, lo, hi, _| {
            total += (hi - lo + 1) as u64;
            true
        });
        total
    }

    fn feasible(&self, t: &[i64], n: i64) -> bool {
        if self.q() == 0 {
            return sup_norm(t) <= n;
        }
        let mut found = false;
        self.scan(t, n, |_, _, _, _| {
            found = true;
            false
        });
        found
    }

    fn norm(&self, t: &[i64]) -> i64 {
        let (mut lo, mut hi) = (0i64, sup_norm(t));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.feasible(t, mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    fn canonical(&self, t: &[i64]) -> Vec<i64> {
        if self.q() == 0 {
            return t.to_vec();
        }
        let n = self.norm(t);
        let mut best: Option<Vec<i64>> = None;
        let col0 = self.cols[0].clone();
        self.scan(t, n, |_, lo, hi, partial| {
            for x in lo..=hi {
                let w: Vec<i64> = partial.iter().zip(&col0).map(|(a, c)| a + x * c).collect();
                if best.as_ref().is_none_or(|b| w < *b) {
                    best = Some(w);
                }
            }
            true
        });
        let best = best.expect("coset meets its own norm ball");
        debug_assert_eq!(best.len(), self.d);
        best
    }
}

/// Flips `v` so its first nonzero entry is positive; returns the sign used.
fn normalize_sign(v: &mut [i64]) -> i64 {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => {
            v.iter_mut().for_each(|e| *e = -*e);
            -1
        }
        _ => 1,
    }
}

fn mat_vec(rows: &[Vec<i64>], t: &[i64]) -> Vec<i64> {
    rows.iter()
        .map(|r| {
            let acc: i128 = r.iter().zip(t).map(|(&a, &b)| a as i128 * b as i128).sum();
            i64::try_from(acc).expect("coordinate overflow")
        })
        .collect()
}

/// All tuples `(a_1, ..., a_q)` with `0 <= a_i < radices[i]`, last index fastest.
fn mixed_radix(radices: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

pub(crate) fn for_each_in_box(bounds: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if bounds.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut cur: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    loop {
        f(&cur);
        let mut i = 0;
        loop {
            if i == bounds.len() {
                return;
            }
            if cur[i] < bounds[i].1 {
                cur[i] += 1;
                break;
            }
            cur[i] = bounds[i].0;
            i += 1;
        }
    }
}

/// Convenience for tests and reports: `(2n+1)^d` as an exact integer.
pub fn box_size(n: u64, d: usize) -> BigInt {
    let side = BigInt::from(2 * n + 1);
    (0..d).fold(BigInt::from(1), |acc, _| acc * &side)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sec6() -> QuotientStructure {
        QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![1, 1]])).unwrap()
    }

    #[test]
    fn sec6_structure() {
        let qs = sec6();
        assert_eq!((qs.p(), qs.q(), qs.l()), (1, 1, 1));
        assert_eq!(qs.u().columns, vec![vec![1, 0]]);
        assert_eq!(qs.v().columns, vec![vec![1, 1]]);
        assert_eq!(qs.coset_reps(), &[vec![0, 0]]);
    }

    #[test]
    fn trivial_kernel() {
        let qs = QuotientStructure::analyze(&GroupSpec::new(2, vec![])).unwrap();
        assert_eq!((qs.p(), qs.q(), qs.l()), (2, 0, 1));
        assert_eq!(qs.u().columns, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(qs.enumerate_h_n(3).len(), 49);
    }

    #[test]
    fn sec6_group_operations() {
        let qs = sec6();
        let a = qs.element(&[3, 0]);
        let b = qs.element(&[4, 0]);
        assert_eq!(qs.add(&a, &b), qs.element(&[7, 0]));
        assert_eq!(qs.add(&a, &qs.zero()), a);
        assert_eq!(qs.inverse(&a), qs.element(&[-3, 0]));
        assert_eq!(qs.inverse(&qs.zero()), qs.zero());
    }

    #[test]
    fn sec6_norms() {
        let qs = sec6();
        assert_eq!(qs.norm(&qs.element(&[3, 0])), 2);
        assert_eq!(qs.norm(&qs.element(&[4, 0])), 2);
        assert_eq!(qs.norm(&qs.zero()), 0);
        assert_eq!(qs.norm_of(&[3, 0]), 2);
    }

    #[test]
    fn sec6_counts() {
        let qs = sec6();
        for n in 1..8u64 {
            assert_eq!(qs.count_m(&[0, 0], n), 2 * n + 1);
            for t in 0..=(2 * n as i64) {
                assert_eq!(qs.count_m(&[t, 0], n), 2 * n + 1 - t as u64);
            }
            assert_eq!(qs.count_m(&[2 * n as i64 + 1, 0], n), 0);
        }
        assert_eq!(qs.enumerate_h_n(1).len(), 5);
        assert_eq!(qs.enumerate_h_n(100).len(), 401);
    }

    #[test]
    fn torsion_cosets_partition() {
        // K = 2Z x 3Z: Z^2/K = Z/6, no free part.
        let qs = QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![2, 0], vec![0, 3]])).unwrap();
        assert_eq!((qs.p(), qs.q(), qs.l()), (0, 2, 6));
        assert_eq!(qs.invariant_factors(), &[1, 6]);
        assert_eq!(qs.coset_reps().len(), 6);
        assert_eq!(qs.coset_reps()[0], vec![0, 0]);
    }

    #[test]
    fn coords_round_trip() {
        let qs = QuotientStructure::analyze(&GroupSpec::new(3, vec![vec![2, 0, 0], vec![1, 1, 2]])).unwrap();
        for t in [[0, 0, 0], [1, 2, 3], [-4, 5, 1], [7, -3, -2]] {
            let c = qs.coords(&t);
            let back = qs.from_coords(&c);
            assert_eq!(qs.element(&back), qs.element(&t));
            assert_eq!(qs.coords(&back), c);
        }
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![1, 2, 3]])).is_err());
        assert!(QuotientStructure::analyze(&GroupSpec::new(0, vec![])).is_err());
    }

    #[test]
    fn dependent_generators_reduce() {
        let qs =
            QuotientStructure::analyze(&GroupSpec::new(3, vec![vec![1, 1, 0], vec![2, 2, 0], vec![0, 0, 0]])).unwrap();
        assert_eq!((qs.p(), qs.q(), qs.l()), (2, 1, 1));
    }
}
