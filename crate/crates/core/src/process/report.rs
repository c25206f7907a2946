use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{
    build_measure, laplace_theoretical, sample_limit_measure, Scaling, TestFunction, WeightedPointMeasure,
};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::lattice::QuotientStructure;
use crate::rng::substream;
use crate::stable::{sample_field_replicate, CompiledKernel, FieldLayout, SimDiagnostics};
use crate::stats::{kendall_tau, mean_and_se};

/// Empirical and theoretical Laplace functionals agree when they are within
/// this many standard errors.
pub const SE_MULTIPLIER: f64 = 3.0;

/// Exponent offset for the wrong-scaling diagnostics.
pub const WRONG_SCALING_EPSILON: f64 = 0.3;

/// Kendall's τ of the discrepancies against `n` flags a decreasing trend
/// below this p-value.
const TREND_P_VALUE: f64 = 0.2;

// Stream ids for limit-measure samples live in the upper half of the id
// space, away from field replicates.
const LIMIT_STREAM: u64 = 1 << 63;

fn field_stream(n_index: usize, replicate: u64) -> u64 {
    ((n_index as u64) << 40) | replicate
}

fn within(empirical: f64, se: f64, theoretical: f64) -> bool {
    (empirical - theoretical).abs() <= SE_MULTIPLIER * se + 1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceRow {
    pub n: u64,
    pub g_id: usize,
    pub empirical: f64,
    pub se: f64,
    pub theoretical: f64,
    pub discrepancy: f64,
    pub pass: bool,
}

/// The limit sampler's own Laplace estimate against the formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitRow {
    pub g_id: usize,
    pub empirical: f64,
    pub se: f64,
    pub theoretical: f64,
    pub pass: bool,
}

/// Soft flag: is the discrepancy decreasing in `n`?
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrendFlag {
    pub g_id: usize,
    pub tau: f64,
    pub p_value: f64,
    pub decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub master_seed: u64,
    pub replicates: u64,
    pub g_suite: Vec<TestFunction>,
    /// Sorted by `(n, gId)`.
    pub rows: Vec<ConvergenceRow>,
    pub limit_rows: Vec<LimitRow>,
    pub trends: Vec<TrendFlag>,
    /// Every `g` passes at the largest `n` and for the limit sampler.
    pub pass: bool,
    pub diagnostics: SimDiagnostics,
}

impl ConvergenceReport {
    /// CSV with header `n,gId,empirical,SE,theoretical,pass`; the limit
    /// sampler rows carry `n = inf`.
    pub fn csv(&self) -> String {
        let mut out = String::from("n,gId,empirical,SE,theoretical,pass\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:e},{:e},{:e},{}\n", r.n, r.g_id, r.empirical, r.se, r.theoretical, r.pass));
        }
        for r in &self.limit_rows {
            out.push_str(&format!("inf,{},{:e},{:e},{:e},{}\n", r.g_id, r.empirical, r.se, r.theoretical, r.pass));
        }
        out
    }
}

fn check_inputs(n_list: &[u64], replicates: u64, g_suite: &[TestFunction]) -> Result<()> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::invalid(format!("nList must be positive and strictly increasing, got {n_list:?}")));
    }
    if replicates < 2 {
        return Err(Error::invalid("at least two replicates are needed for a standard error"));
    }
    if g_suite.is_empty() {
        return Err(Error::invalid("the test-function suite is empty"));
    }
    g_suite.iter().try_for_each(TestFunction::validate)
}

/// Draws `replicates` fields at radius `n` and maps each through `f`, in
/// replicate order.
fn per_replicate<T: Send>(
    kernel: &CompiledKernel,
    layout: &FieldLayout,
    n_index: usize,
    replicates: u64,
    master_seed: u64,
    terms: usize,
    f: impl Fn(&crate::stable::FieldSample<'_>) -> T + Sync,
) -> (Vec<T>, SimDiagnostics) {
    let out: Vec<(T, SimDiagnostics)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let (field, diag) = sample_field_replicate(kernel, layout, terms, master_seed, field_stream(n_index, r));
            (f(&field), diag)
        })
        .collect();
    let mut diagnostics = SimDiagnostics::default();
    let values = out
        .into_iter()
        .map(|(v, d)| {
            diagnostics = diagnostics.merge(d);
            v
        })
        .collect();
    (values, diagnostics)
}

/// Laplace functionals of `Ñ_n` for every `n` in `n_list` and every `g`,
/// compared with the limit formula, plus the same comparison for samples of
/// the limit measure itself.
#[allow(clippy::too_many_arguments)]
pub fn convergence_report(
    qs: &QuotientStructure,
    kernel: &CompiledKernel,
    geometry: &Geometry,
    n_list: &[u64],
    replicates: u64,
    g_suite: &[TestFunction],
    master_seed: u64,
    terms: usize,
) -> Result<ConvergenceReport> {
    check_inputs(n_list, replicates, g_suite)?;
    let theoretical: Vec<f64> =
        g_suite.iter().map(|g| laplace_theoretical(kernel, geometry, g, master_seed)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut diagnostics = SimDiagnostics::default();
    for (i, &n) in n_list.iter().enumerate() {
        let layout = FieldLayout::new(qs, kernel, n);
        let scaling = Scaling::normalizing(geometry, kernel.alpha, n);
        let (values, diag) = per_replicate(kernel, &layout, i, replicates, master_seed, terms, |field| {
            let m = build_measure(field, scaling);
            g_suite.iter().map(|g| (-m.integrate(|x| g.eval(x))).exp()).collect::<Vec<f64>>()
        });
        diagnostics = diagnostics.merge(diag);
        for (g_id, &theo) in theoretical.iter().enumerate() {
            let column: Vec<f64> = values.iter().map(|v| v[g_id]).collect();
            let (empirical, se) = mean_and_se(&column);
            rows.push(ConvergenceRow {
                n,
                g_id,
                empirical,
                se,
                theoretical: theo,
                discrepancy: (empirical - theo).abs(),
                pass: within(empirical, se, theo),
            });
        }
    }

    let min_atom = g_suite.iter().map(|g| g.a).fold(f64::INFINITY, f64::min);
    let limit: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let m = sample_limit_measure(kernel, geometry, min_atom, &mut substream(master_seed, LIMIT_STREAM | r, 0));
            g_suite.iter().map(|g| (-m.integrate(|x| g.eval(x))).exp()).collect()
        })
        .collect();
    let limit_rows: Vec<LimitRow> = theoretical
        .iter()
        .enumerate()
        .map(|(g_id, &theo)| {
            let column: Vec<f64> = limit.iter().map(|v| v[g_id]).collect();
            let (empirical, se) = mean_and_se(&column);
            LimitRow { g_id, empirical, se, theoretical: theo, pass: within(empirical, se, theo) }
        })
        .collect();

    let trends = (0..g_suite.len())
        .map(|g_id| {
            let (ns, ds): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.g_id == g_id).map(|r| (r.n as f64, r.discrepancy)).unzip();
            let (tau, p_value) = if ns.len() >= 2 { kendall_tau(&ns, &ds) } else { (0.0, 1.0) };
            TrendFlag { g_id, tau, p_value, decreasing: tau < 0.0 && p_value < TREND_P_VALUE }
        })
        .collect();

    let largest = *n_list.last().unwrap();
    let pass = rows.iter().filter(|r| r.n == largest).all(|r| r.pass) && limit_rows.iter().all(|r| r.pass);
    Ok(ConvergenceReport {
        master_seed,
        replicates,
        g_suite: g_suite.to_vec(),
        rows,
        limit_rows,
        trends,
        pass,
        diagnostics,
    })
}

/// Mean mass on `{|x| >= δ}` at one radius under the three scalings of the
/// diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MassPoint {
    pub n: u64,
    /// Normalizing scaling of atoms, weights `m(u, n)` without `n^{-q}`.
    pub unweighted: f64,
    pub unweighted_se: f64,
    /// `b_n = n^{(p+ε)/α}`.
    pub over_scaled: f64,
    pub over_scaled_se: f64,
    /// `b_n = n^{(p-ε)/α}`.
    pub under_scaled: f64,
    pub under_scaled_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalingDiagnostics {
    pub delta: f64,
    pub epsilon: f64,
    pub points: Vec<MassPoint>,
    /// `unweighted(n_{k+1}) / unweighted(n_k)`.
    pub growth_ratios: Vec<f64>,
    /// Every growth ratio over a doubling lies in `[1.5, 3]`; only
    /// meaningful for `q = 1` and `nList` of successive doublings.
    pub non_tight: bool,
    /// Over-scaled masses strictly decrease.
    pub over_scaled_vanishes: bool,
    /// Under-scaled masses strictly increase.
    pub under_scaled_diverges: bool,
}

#[allow(clippy::too_many_arguments)]
/// Masses of the wrongly normalized measures on `{|x| >= δ}`. All three
/// scalings are read off the same fields.
pub fn scaling_diagnostics(
    qs: &QuotientStructure,
    kernel: &CompiledKernel,
    geometry: &Geometry,
    n_list: &[u64],
    replicates: u64,
    delta: f64,
    master_seed: u64,
    terms: usize,
) -> Result<(ScalingDiagnostics, SimDiagnostics)> {
    check_inputs(n_list, replicates, &[TestFunction { a: 1.0, wdt: 1.0, beta: 1.0 }])?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::invalid("delta must be positive"));
    }
    let eps = WRONG_SCALING_EPSILON;
    let p = geometry.p() as f64;
    let mut points = Vec::new();
    let mut diagnostics = SimDiagnostics::default();
    for (i, &n) in n_list.iter().enumerate() {
        let layout = FieldLayout::new(qs, kernel, n);
        let scalings = [
            Scaling::unweighted(geometry, kernel.alpha, n),
            Scaling::power(geometry, kernel.alpha, n, p + eps),
            Scaling::power(geometry, kernel.alpha, n, p - eps),
        ];
        let (values, diag) = per_replicate(kernel, &layout, i, replicates, master_seed, terms, |field| {
            scalings.map(|s| build_measure(field, s).mass_beyond(delta))
        });
        diagnostics = diagnostics.merge(diag);
        let stat = |k: usize| mean_and_se(&values.iter().map(|v| v[k]).collect::<Vec<_>>());
        let (unweighted, unweighted_se) = stat(0);
        let (over_scaled, over_scaled_se) = stat(1);
        let (under_scaled, under_scaled_se) = stat(2);
        points.push(MassPoint {
            n,
            unweighted,
            unweighted_se,
            over_scaled,
            over_scaled_se,
            under_scaled,
            under_scaled_se,
        });
    }
    let growth_ratios: Vec<f64> = points.windows(2).map(|w| w[1].unweighted / w[0].unweighted).collect();
    let report = ScalingDiagnostics {
        delta,
        epsilon: eps,
        non_tight: !growth_ratios.is_empty() && growth_ratios.iter().all(|r| (1.5..=3.0).contains(r)),
        over_scaled_vanishes: points.windows(2).all(|w| w[1].over_scaled < w[0].over_scaled),
        under_scaled_diverges: points.windows(2).all(|w| w[1].under_scaled > w[0].under_scaled),
        growth_ratios,
        points,
    };
    Ok((report, diagnostics))
}

/// Monte Carlo mean of `Ñ_*(1{|x| >= δ})` from `samples` limit draws.
pub fn limit_mass_beyond(
    kernel: &CompiledKernel,
    geometry: &Geometry,
    delta: f64,
    samples: u64,
    master_seed: u64,
) -> (f64, f64) {
    let masses: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let m: WeightedPointMeasure =
                sample_limit_measure(kernel, geometry, delta, &mut substream(master_seed, LIMIT_STREAM | r, 0));
            m.mass_beyond(delta)
        })
        .collect();
    mean_and_se(&masses)
}

/// `E Ñ_*(1{|x| >= δ}) = C_α δ^{-α} Σ_w ν(w) Σ_u |h(w,u)|^α · (1/|C|) ∫ V`,
/// with `(1/|C|) ∫ V = 2^d / (l |C|)`.
pub fn limit_mass_beyond_exact(kernel: &CompiledKernel, geometry: &Geometry, delta: f64) -> f64 {
    let mean_fiber = if geometry.q() == 0 {
        1.0
    } else {
        2f64.powi(geometry.d() as i32) / (geometry.l() as f64 * geometry.volume_c())
    };
    kernel.c_alpha * delta.powf(-kernel.alpha) * kernel.alpha_norm() * mean_fiber
}
