//! Small statistics toolkit for the Monte Carlo experiments.

use std::cmp::Ordering;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> f64 {
    let v = sorted(xs);
    let n = v.len();
    assert!(n > 0, "median of an empty sample");
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `Q(λ) = 2 Σ_{k>=1} (-1)^{k-1} e^{-2 k^2 λ^2}`, the Kolmogorov survival
/// function.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    (d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d))
}

/// One-sample Kolmogorov–Smirnov distance to a continuous CDF.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Fréchet CDF `exp(-(x/σ)^{-α})` for `x > 0`.
pub fn frechet_cdf(x: f64, alpha: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-(x / sigma).powf(-alpha)).exp()
    }
}

/// Maximum likelihood scale of a Fréchet sample with known shape `α`:
/// `σ^{-α} = N / Σ x_i^{-α}`.
pub fn frechet_scale_mle(xs: &[f64], alpha: f64) -> f64 {
    let s: f64 = xs.iter().map(|x| x.powf(-alpha)).sum();
    (xs.len() as f64 / s).powf(1.0 / alpha)
}

/// Kendall's τ-b and the two-sided p-value of the normal approximation
/// under independence.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            match (x[i].total_cmp(&x[j]), y[i].total_cmp(&y[j])) {
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) => tx += 1,
                (_, Ordering::Equal) => ty += 1,
                (a, b) if a == b => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let s = (conc - disc) as f64;
    let denom = (((conc + disc + tx) as f64) * ((conc + disc + ty) as f64)).sqrt();
    let tau = if denom > 0.0 { s / denom } else { 0.0 };
    let nf = n as f64;
    let var = nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
    let z = if var > 0.0 { s / var.sqrt() } else { 0.0 };
    (tau, libm::erfc(z.abs() / std::f64::consts::SQRT_2))
}

/// Real part of the empirical characteristic function, `mean cos(θ X)`.
pub fn empirical_cf(xs: &[f64], theta: f64) -> f64 {
    xs.iter().map(|x| (theta * x).cos()).sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ≈ 0.0505, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 2e-3);
        assert!((kolmogorov_survival(1.63) - 0.0098).abs() < 1e-3);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let (d, p) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
        let b: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        assert!(ks_two_sample(&a, &b).1 < 1e-6);
    }

    #[test]
    fn frechet_mle_recovers_scale() {
        // Quantiles of a Fréchet(α = 1.5, σ = 2) law.
        let n = 4000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                2.0 * (-u.ln()).powf(-1.0 / 1.5)
            })
            .collect();
        assert!((frechet_scale_mle(&xs, 1.5) - 2.0).abs() < 0.02);
        assert!(ks_distance(&xs, |x| frechet_cdf(x, 1.5, 2.0)) < 1e-3);
    }

    #[test]
    fn kendall_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let up = kendall_tau(&x, &x);
        assert_eq!(up.0, 1.0);
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let (tau, p) = kendall_tau(&x, &down);
        assert_eq!(tau, -1.0);
        assert!(p < 0.02);
    }
}
