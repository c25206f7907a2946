use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::halfspace::{Constraint, HalfSpaces};
use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, QuotientStructure};
use crate::quad::{self, Point2};

/// The polytope `P = {(y, λ) : ||U y + V λ||_inf <= 1}` together with its
/// projection `C` onto the `y` coordinates and the fiber volumes `V(y)`.
#[derive(Clone, Debug)]
pub struct Geometry {
    d: usize,
    p: usize,
    q: usize,
    l: u64,
    u: Vec<Vec<BigRational>>,
    v: Vec<Vec<BigRational>>,
    u_f64: Vec<Vec<f64>>,
    v_f64: Vec<Vec<f64>>,
    body: HalfSpaces<BigRational>,
    body_f64: HalfSpaces<f64>,
    volume_c: BigRational,
    bbox: Vec<(BigRational, BigRational)>,
    /// Vertices of `C` in counterclockwise order when `p == 2`.
    vertices: Vec<Point2>,
}

/// A numerical integral together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralEstimate {
    pub value: f64,
    /// Quadrature error estimate, or the standard error for Monte Carlo.
    pub error: f64,
    pub monte_carlo: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeometryReport {
    pub p: usize,
    pub q: usize,
    pub l: u64,
    pub c: f64,
    pub volume_c: f64,
    pub integral_v: f64,
    pub integral_v_error: f64,
    pub kappa0_empirical: f64,
}

/// One row of a counting profile: `y`, `V(y)` and `m(x_k + floor(n y) U, n) / n^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub y: Vec<f64>,
    pub fiber: f64,
    pub m_ratio: f64,
}

/// Samples used for the Monte Carlo integral of `V` when `p >= 3`.
pub const MC_INTEGRAL_SAMPLES: usize = 200_000;

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

impl Geometry {
    pub fn build(qs: &QuotientStructure) -> Result<Self> {
        let g = Geometry::from_bases(qs.d(), &qs.u().columns, &qs.v().columns)?;
        debug_assert_eq!(g.l, qs.l());
        Ok(g)
    }

    /// Builds the geometry from explicit bases of `F` and `K`. The torsion
    /// order is recovered as `l = |det [U:V]|`.
    pub fn from_bases(d: usize, u_cols: &[Vec<i64>], v_cols: &[Vec<i64>]) -> Result<Self> {
        let p = u_cols.len();
        let q = v_cols.len();
        if p == 0 {
            return Err(Error::domain("the free part is trivial (p = 0); C and c are undefined"));
        }
        if p + q != d {
            return Err(Error::invalid(format!("[U:V] must be square, got {d} x {}", p + q)));
        }
        let mut cols = u_cols.to_vec();
        cols.extend_from_slice(v_cols);
        let w = IntMatrix::from_columns(d, &cols)?;
        let det = w.determinant().abs();
        if det.is_zero() {
            return Err(Error::domain("columns of [U:V] are linearly dependent"));
        }
        let l = det.to_u64().ok_or(Error::Overflow("torsion order"))?;

        let row = |i: usize, cs: &[Vec<i64>]| cs.iter().map(|c| rat(c[i])).collect::<Vec<_>>();
        let u: Vec<Vec<BigRational>> = (0..d).map(|i| row(i, u_cols)).collect();
        let v: Vec<Vec<BigRational>> = (0..d).map(|i| row(i, v_cols)).collect();
        let w_rows: Vec<Vec<BigRational>> = (0..d).map(|i| row(i, &cols)).collect();

        let mut body = HalfSpaces::sup_ball_preimage(&w_rows, &vec![rat(0); d]).prune_redundant()?;
        for _ in 0..q {
            body = body.project_out_trailing(1).prune_redundant()?;
        }
        let volume_c = body.volume();
        let bbox = (0..p).map(|j| body.coordinate_range(j)).collect::<Result<Vec<_>>>()?;
        let vertices = if p == 2 {
            body.polygon_vertices().iter().map(|v| [v[0].as_f64(), v[1].as_f64()]).collect()
        } else {
            Vec::new()
        };
        let to_f64 = |m: &[Vec<BigRational>]| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(Scalar::as_f64).collect()).collect()
        };
        Ok(Geometry {
            d,
            p,
            q,
            l,
            u_f64: to_f64(&u),
            v_f64: to_f64(&v),
            u,
            v,
            body_f64: body.to_f64(),
            body,
            volume_c,
            bbox,
            vertices,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    /// Irredundant half-space description of `C`.
    pub fn body(&self) -> &HalfSpaces<BigRational> {
        &self.body
    }

    pub fn volume_c_exact(&self) -> &BigRational {
        &self.volume_c
    }

    pub fn volume_c(&self) -> f64 {
        self.volume_c.as_f64()
    }

    /// `c = (l |C|)^{1/p}`.
    pub fn scaling_constant(&self) -> f64 {
        (self.l as f64 * self.volume_c()).powf(1.0 / self.p as f64)
    }

    pub fn bounding_box(&self) -> &[(BigRational, BigRational)] {
        &self.bbox
    }

    /// Vertices of `C` when `p == 2`, counterclockwise; empty otherwise.
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.body_f64.contains(y)
    }

    pub fn contains_exact(&self, y: &[BigRational]) -> bool {
        self.body.contains(y)
    }

    fn fiber_constraints<T: Scalar>(u: &[Vec<T>], v: &[Vec<T>], y: &[T]) -> Vec<Constraint<T>> {
        let mut rows = Vec::with_capacity(2 * u.len());
        for (ur, vr) in u.iter().zip(v) {
            let uy = ur.iter().zip(y).fold(T::zero(), |a, (x, z)| a + x.clone() * z.clone());
            rows.push(Constraint { a: vr.clone(), b: T::one() - uy.clone() });
            rows.push(Constraint { a: vr.iter().map(|x| -x.clone()).collect(), b: T::one() + uy });
        }
        rows
    }

    /// `V(y)`: the `q`-volume of `{λ : ||U y + V λ||_inf <= 1}`; zero off `C`
    /// and one on `C` when `q == 0`.
    pub fn fiber_volume(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.p, "point of the wrong dimension");
        if self.q == 0 {
            return if self.contains(y) { 1.0 } else { 0.0 };
        }
        let rows = Self::fiber_constraints(&self.u_f64, &self.v_f64, y);
        if self.q == 1 {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for r in &rows {
                let a = r.a[0];
                if a > 0.0 {
                    hi = hi.min(r.b / a);
                } else if a < 0.0 {
                    lo = lo.max(r.b / a);
                } else if r.b < -1e-12 {
                    return 0.0;
                }
            }
            return (hi - lo).max(0.0);
        }
        HalfSpaces::new(self.q, rows).volume().max(0.0)
    }

    pub fn fiber_volume_exact(&self, y: &[BigRational]) -> BigRational {
        assert_eq!(y.len(), self.p, "point of the wrong dimension");
        if self.q == 0 {
            return if self.contains_exact(y) { rat(1) } else { rat(0) };
        }
        let v = HalfSpaces::new(self.q, Self::fiber_constraints(&self.u, &self.v, y)).volume();
        if v.is_negative() {
            rat(0)
        } else {
            v
        }
    }

    /// `||V||_inf`. `V^{1/q}` is concave on `C` and `V` is even, so the
    /// maximum sits at the origin.
    pub fn sup_fiber_volume(&self) -> f64 {
        self.fiber_volume(&vec![0.0; self.p])
    }

    /// Exact `vol_d(P)`, which equals `∫_C V` by Fubini.
    pub fn polytope_volume(&self) -> BigRational {
        let mut w = self.u.clone();
        for (r, vr) in w.iter_mut().zip(&self.v) {
            r.extend(vr.iter().cloned());
        }
        HalfSpaces::sup_ball_preimage(&w, &vec![rat(0); self.d]).volume()
    }

    /// Numerical `∫_C V(y) dy`: adaptive Simpson for `p == 1`, adaptive
    /// triangle quadrature for `p == 2` and seeded Monte Carlo beyond.
    pub fn integral_fiber_volume(&self, tol: f64, seed: u64) -> Result<IntegralEstimate> {
        let mut f1 = |y: f64| self.fiber_volume(&[y]);
        let mut f2 = |y: Point2| self.fiber_volume(&y);
        let q = match self.p {
            1 => {
                let (lo, hi) = (self.bbox[0].0.as_f64(), self.bbox[0].1.as_f64());
                quad::simpson_pieces(&mut f1, &[lo, 0.0, hi], tol)
            }
            2 => quad::convex_polygon(&mut f2, &self.vertices, tol),
            _ => {
                let mut rng = crate::rng::substream(seed, 0, 0);
                let (value, error) = self.monte_carlo_mean(MC_INTEGRAL_SAMPLES, &mut rng, |y| self.fiber_volume(y));
                return Ok(IntegralEstimate { value, error, monte_carlo: true });
            }
        };
        if !q.converged {
            return Err(Error::Quadrature { achieved: q.error });
        }
        Ok(IntegralEstimate { value: q.value, error: q.error, monte_carlo: false })
    }

    fn box_volume(&self) -> f64 {
        self.bbox.iter().map(|(a, b)| b.as_f64() - a.as_f64()).product()
    }

    fn uniform_in_box(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bbox
            .iter()
            .map(|(a, b)| {
                let (a, b) = (a.as_f64(), b.as_f64());
                a + (b - a) * rng.gen::<f64>()
            })
            .collect()
    }

    /// Monte Carlo estimate of `∫_C f` with its standard error, sampling the
    /// bounding box uniformly.
    fn monte_carlo_mean(&self, samples: usize, rng: &mut impl Rng, f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        let scale = self.box_volume();
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let y = self.uniform_in_box(rng);
            let v = if self.contains(&y) { f(&y) * scale } else { 0.0 };
            s += v;
            s2 += v * v;
        }
        let n = samples as f64;
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }

    /// Hit-or-miss estimate of `|C|`, kept as an independent cross-check of
    /// the exact value.
    pub fn volume_c_monte_carlo(&self, samples: usize, rng: &mut impl Rng) -> (f64, f64) {
        self.monte_carlo_mean(samples, rng, |_| 1.0)
    }

    /// A uniform point of `C`, by rejection from the bounding box.
    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let y = self.uniform_in_box(rng);
            if self.contains(&y) {
                return y;
            }
        }
    }

    /// Uniform grid with `per_axis` points per coordinate over the bounding
    /// box of `C`, keeping the points that lie in `C`.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<BigRational>> {
        assert!(per_axis >= 2);
        let steps = BigRational::from_integer(BigInt::from(per_axis - 1));
        let axes: Vec<Vec<BigRational>> = self
            .bbox
            .iter()
            .map(|(a, b)| {
                (0..per_axis).map(|i| a + (b - a) * BigRational::from_integer(BigInt::from(i)) / &steps).collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.p];
        loop {
            let y: Vec<BigRational> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i].clone()).collect();
            if self.contains_exact(&y) {
                out.push(y);
            }
            let mut j = 0;
            loop {
                if j == self.p {
                    return out;
                }
                idx[j] += 1;
                if idx[j] < per_axis {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// `m_{k,n}(y) = m(x_k + sum floor(n y_i) u_i, n) / n^q`, exactly.
    pub fn m_profile(&self, qs: &QuotientStructure, k: usize, n: u64, y: &[BigRational]) -> BigRational {
        let mut t = qs.coset_reps()[k].clone();
        let nn = BigRational::from_integer(BigInt::from(n));
        for (yi, col) in y.iter().zip(&qs.u().columns) {
            let s = (yi * &nn).floor().to_integer().to_i64().expect("profile shift fits in i64");
            for (ti, ci) in t.iter_mut().zip(col) {
                *ti += s * ci;
            }
        }
        let m = qs.count_m(&t, n);
        BigRational::new(BigInt::from(m), BigInt::from(n).pow(self.q as u32))
    }

    pub fn profile_rows(&self, qs: &QuotientStructure, k: usize, n: u64, grid: &[Vec<BigRational>]) -> Vec<ProfileRow> {
        grid.iter()
            .map(|y| {
                let yf: Vec<f64> = y.iter().map(Scalar::as_f64).collect();
                ProfileRow { fiber: self.fiber_volume(&yf), m_ratio: self.m_profile(qs, k, n, y).as_f64(), y: yf }
            })
            .collect()
    }

    /// `max_{k, y in grid} |m_{k,n}(y) - V(y)|`.
    pub fn profile_error(&self, qs: &QuotientStructure, n: u64, grid: &[Vec<BigRational>]) -> f64 {
        (0..qs.l() as usize)
            .flat_map(|k| self.profile_rows(qs, k, n, grid))
            .map(|r| (r.m_ratio - r.fiber).abs())
            .fold(0.0, f64::max)
    }

    /// Empirical `sup m(u, n) / n^q` over `u ∈ H_n` and the given radii.
    pub fn kappa0_empirical(&self, qs: &QuotientStructure, radii: &[u64]) -> f64 {
        radii
            .iter()
            .map(|&n| {
                let max_m = qs.h_n_with_counts(n).iter().map(|(_, m)| *m).max().unwrap_or(0);
                max_m as f64 / (n as f64).powi(self.q as i32)
            })
            .fold(0.0, f64::max)
    }

    pub fn report(&self, qs: &QuotientStructure, radii: &[u64], seed: u64) -> Result<GeometryReport> {
        let integral = self.integral_fiber_volume(1e-9, seed)?;
        Ok(GeometryReport {
            p: self.p,
            q: self.q,
            l: self.l,
            c: self.scaling_constant(),
            volume_c: self.volume_c(),
            integral_v: integral.value,
            integral_v_error: integral.error,
            kappa0_empirical: self.kappa0_empirical(qs, radii),
        })
    }
}

/// Plot-ready CSV of a profile: `y1..yp, V, m`.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let p = rows.first().map_or(0, |r| r.y.len());
    let mut out = String::new();
    for i in 1..=p {
        out.push_str(&format!("y{i},"));
    }
    out.push_str("fiber_volume,m_ratio\n");
    for r in rows {
        for y in &r.y {
            out.push_str(&format!("{y},"));
        }
        out.push_str(&format!("{},{}\n", r.fiber, r.m_ratio));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GroupSpec;

    fn sec6() -> (QuotientStructure, Geometry) {
        let qs = QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![1, 1]])).unwrap();
        let g = Geometry::build(&qs).unwrap();
        (qs, g)
    }

    #[test]
    fn sec6_body() {
        let (_, g) = sec6();
        assert_eq!(g.bounding_box()[0], (rat(-2), rat(2)));
        assert_eq!(g.volume_c_exact(), &rat(4));
        assert_eq!(g.scaling_constant(), 4.0);
        assert_eq!(g.fiber_volume(&[0.5]), 1.5);
        assert_eq!(g.fiber_volume(&[2.0]), 0.0);
        assert_eq!(g.fiber_volume(&[-2.0]), 0.0);
        assert_eq!(g.fiber_volume(&[3.0]), 0.0);
        assert_eq!(g.fiber_volume_exact(&[BigRational::new(1.into(), 2.into())]), BigRational::new(3.into(), 2.into()));
        assert_eq!(g.sup_fiber_volume(), 2.0);
    }

    #[test]
    fn sec6_profile_closed_form() {
        let (qs, g) = sec6();
        let y = [BigRational::new(1.into(), 2.into())];
        assert_eq!(g.m_profile(&qs, 0, 100, &y), BigRational::new(151.into(), 100.into()));
    }

    #[test]
    fn trivial_kernel() {
        let qs = QuotientStructure::analyze(&GroupSpec::new(2, vec![])).unwrap();
        let g = Geometry::build(&qs).unwrap();
        assert_eq!(g.volume_c_exact(), &rat(4));
        assert_eq!(g.scaling_constant(), 2.0);
        assert_eq!(g.fiber_volume(&[0.3, -0.9]), 1.0);
        assert_eq!(g.vertices().len(), 4);
    }

    #[test]
    fn rejects_full_rank_kernel() {
        assert!(Geometry::from_bases(1, &[], &[vec![2]]).is_err());
        assert!(Geometry::from_bases(2, &[vec![1, 1]], &[vec![2, 2]]).is_err());
    }

    #[test]
    fn csv_has_header() {
        let (qs, g) = sec6();
        let rows = g.profile_rows(&qs, 0, 10, &g.grid(5));
        let csv = profile_csv(&rows);
        assert!(csv.starts_with("y1,fiber_volume,m_ratio\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
