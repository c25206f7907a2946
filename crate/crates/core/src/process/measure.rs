use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::scalar::Scalar;
use crate::geometry::Geometry;
use crate::quad;
use crate::stable::{CompiledKernel, FieldSample};

/// A finite measure `Σ weight · δ_location` on `[-∞, ∞] \ {0}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedPointMeasure {
    atoms: Vec<(f64, f64)>,
}

impl WeightedPointMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an atom; atoms at the origin and of zero weight are dropped.
    pub fn push(&mut self, location: f64, weight: f64) {
        debug_assert!(weight >= 0.0);
        if location != 0.0 && weight > 0.0 {
            self.atoms.push((location, weight));
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * g(x)).sum()
    }

    /// Mass of `{|x| >= δ}`.
    pub fn mass_beyond(&self, delta: f64) -> f64 {
        self.integrate(|x| if x.abs() >= delta { 1.0 } else { 0.0 })
    }
}

/// The trapezoid bump `g(x) = β · clamp((|x| - a) / wdt, 0, 1)`, which
/// vanishes on `|x| <= a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub a: f64,
    pub wdt: f64,
    pub beta: f64,
}

impl TestFunction {
    pub fn new(a: f64, wdt: f64, beta: f64) -> Result<Self> {
        let g = TestFunction { a, wdt, beta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.a) && ok(self.wdt) && ok(self.beta)) {
            return Err(Error::invalid(format!("test function needs a, wdt, beta > 0, got {self:?}")));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.beta * ((x.abs() - self.a) / self.wdt).clamp(0.0, 1.0)
    }
}

/// How a field is turned into a measure: atoms at `X_u / b_n` with weights
/// `m(u, n) / weight_divisor`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaling {
    pub b_n: f64,
    pub weight_divisor: f64,
}

impl Scaling {
    /// `b_n = (c n)^{p/α}`, weights `m(u,n) / n^q`.
    pub fn normalizing(geometry: &Geometry, alpha: f64, n: u64) -> Self {
        let nf = n as f64;
        Scaling {
            b_n: (geometry.scaling_constant() * nf).powf(geometry.p() as f64 / alpha),
            weight_divisor: nf.powi(geometry.q() as i32),
        }
    }

    /// Normalizing scaling of the atoms but raw multiplicities as weights.
    pub fn unweighted(geometry: &Geometry, alpha: f64, n: u64) -> Self {
        Scaling { weight_divisor: 1.0, ..Scaling::normalizing(geometry, alpha, n) }
    }

    /// `b_n = n^{exponent/α}` with the normalizing weights.
    pub fn power(geometry: &Geometry, alpha: f64, n: u64, exponent: f64) -> Self {
        Scaling { b_n: (n as f64).powf(exponent / alpha), ..Scaling::normalizing(geometry, alpha, n) }
    }
}

pub fn build_measure(field: &FieldSample<'_>, scaling: Scaling) -> WeightedPointMeasure {
    let mut out = WeightedPointMeasure::new();
    for (_, x, m) in field.iter() {
        out.push(x / scaling.b_n, m as f64 / scaling.weight_divisor);
    }
    out
}

/// `Ñ_n = n^{-q} Σ_{||t||_inf <= n} δ_{(cn)^{-p/α} X_t}`, one atom per coset.
pub fn build_normalized_measure(field: &FieldSample<'_>, geometry: &Geometry, alpha: f64) -> WeightedPointMeasure {
    build_measure(field, Scaling::normalizing(geometry, alpha, field.layout.n()))
}

/// Limit measure `Σ_i Σ_u V(ξ_i) δ_{C_α^{1/α} j_i h(v_i, u)}`.
///
/// Clusters are generated in order of decreasing `|j_i|` and the series
/// stops once every further atom has modulus below `min_atom`; the sample is
/// therefore exact for test functions vanishing on `|x| <= min_atom`.
pub fn sample_limit_measure(
    kernel: &CompiledKernel,
    geometry: &Geometry,
    min_atom: f64,
    rng: &mut impl Rng,
) -> WeightedPointMeasure {
    assert!(min_atom > 0.0, "the limit measure has infinitely many atoms near 0");
    let mut out = WeightedPointMeasure::new();
    if kernel.is_zero() {
        return out;
    }
    let mass_root = kernel.total_weight.powf(1.0 / kernel.alpha);
    let mut gamma = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        gamma += e;
        let j = gamma.powf(-1.0 / kernel.alpha) * mass_root * kernel.scale;
        if j * kernel.max_abs_h < min_atom {
            return out;
        }
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mark = kernel.mark_for(rng.gen::<f64>() * kernel.total_weight);
        let weight = if geometry.q() == 0 { 1.0 } else { geometry.fiber_volume(&geometry.sample_uniform(rng)) };
        for (_, h) in &kernel.entries[mark] {
            out.push(sign * j * h, weight);
        }
    }
}

/// Mean and standard error of `exp(-μ(g))` over the samples.
pub fn laplace_empirical(samples: &[WeightedPointMeasure], g: &TestFunction) -> (f64, f64) {
    assert!(samples.len() >= 2, "need at least two samples");
    let values: Vec<f64> = samples.iter().map(|m| (-m.integrate(|x| g.eval(x))).exp()).collect();
    crate::stats::mean_and_se(&values)
}

/// `Φ(v) = ∫∫ (1 - exp(-v Σ_u g(x h(w,u)))) μ(dx) ν(dw)` where `μ` is the
/// jump measure of the atoms `C_α^{1/α} j`, i.e. density
/// `C_α α/2 |x|^{-α-1}` on each half-line.
pub(crate) fn cluster_exponent(kernel: &CompiledKernel, g: &TestFunction, v: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    let alpha = kernel.alpha;
    let mut total = 0.0;
    for (entries, weight) in kernel.entries.iter().zip(&kernel.weights) {
        let hs: Vec<f64> = entries.iter().map(|(_, h)| h.abs()).collect();
        if hs.is_empty() {
            continue;
        }
        let mut breaks: Vec<f64> = hs.iter().flat_map(|h| [g.a / h, (g.a + g.wdt) / h]).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let big_g = |x: f64| hs.iter().map(|h| g.eval(x * h)).sum::<f64>();
        let mut f = |x: f64| (1.0 - (-v * big_g(x)).exp()) * x.powf(-alpha - 1.0);
        let body = quad::simpson_pieces(&mut f, &breaks, 1e-13);
        if !body.converged {
            return Err(Error::Quadrature { achieved: body.error });
        }
        let top = *breaks.last().unwrap();
        // Beyond the last breakpoint every bump is saturated.
        let tail = (1.0 - (-v * g.beta * hs.len() as f64).exp()) * top.powf(-alpha) / alpha;
        total += weight * (body.value + tail);
    }
    // Two half-lines, density C_α α/2 each.
    Ok(kernel.c_alpha * alpha * total)
}

/// `ψ(g) = exp{-(1/|C|) ∫_C Φ(V(y)) dy}`. The `y` integral is adaptive
/// quadrature for `p <= 2` and a seeded Monte Carlo average beyond.
pub fn laplace_theoretical(kernel: &CompiledKernel, geometry: &Geometry, g: &TestFunction, seed: u64) -> Result<f64> {
    if geometry.q() == 0 {
        return Ok((-cluster_exponent(kernel, g, 1.0)?).exp());
    }
    let mut failure = None;
    let mut phi = |v: f64| match cluster_exponent(kernel, g, v) {
        Ok(x) => x,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let tol = 1e-10;
    let integral = match geometry.p() {
        1 => {
            let (lo, hi) = &geometry.bounding_box()[0];
            let (lo, hi) = (lo.as_f64(), hi.as_f64());
            let q = quad::simpson_pieces(&mut |y| phi(geometry.fiber_volume(&[y])), &[lo, 0.0, hi], tol);
            if !q.converged {
                return Err(Error::Quadrature { achieved: q.error });
            }
            q.value
        }
        2 => {
            let q = quad::convex_polygon(&mut |y| phi(geometry.fiber_volume(&y)), geometry.vertices(), tol);
            if !q.converged {
                return Err(Error::Quadrature { achieved: q.error });
            }
            q.value
        }
        _ => {
            let mut rng = crate::rng::substream(seed, 1, 0);
            let n = 100_000;
            (0..n).map(|_| phi(geometry.fiber_volume(&geometry.sample_uniform(&mut rng)))).sum::<f64>() / n as f64
                * geometry.volume_c()
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((-integral / geometry.volume_c()).exp())
}
