use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::CompiledKernel;
use crate::lattice::{HElement, QuotientStructure};
use crate::rng::{substream, StreamRng};

/// Relative size of the last retained series term that the truncation
/// check accepts.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;
/// Number of times the series length may double before giving up.
pub const MAX_DOUBLINGS: u32 = 12;
/// Resampling attempts for a replicate that produced non-finite values.
pub const MAX_ATTEMPTS: u32 = 16;

/// Precomputed geometry of one simulation radius `n`: the sites `H_n` with
/// their multiplicities, the PRM window `H_{n+M}` and, for every window
/// point and mark, the sites it reaches together with the kernel value.
#[derive(Clone, Debug)]
pub struct FieldLayout {
    n: u64,
    sites: Vec<HElement>,
    multiplicity: Vec<u64>,
    norms: Vec<u64>,
    site_index: HashMap<HElement, usize>,
    window: Vec<HElement>,
    /// `hits[w][i]`: pairs `(site, h(w, u_i ⊕ site))` for window point `i`.
    hits: Vec<Vec<Vec<(u32, f64)>>>,
}

impl FieldLayout {
    pub fn new(qs: &QuotientStructure, kernel: &CompiledKernel, n: u64) -> Self {
        let counted = qs.h_n_with_counts(n);
        let norms = counted.iter().map(|(u, _)| qs.norm(u)).collect();
        let (sites, multiplicity): (Vec<HElement>, Vec<u64>) = counted.into_iter().unzip();
        let site_index: HashMap<HElement, usize> = sites.iter().cloned().enumerate().map(|(i, u)| (u, i)).collect();
        let window = qs.enumerate_h_n(n + kernel.radius);
        let hits = kernel
            .entries
            .iter()
            .map(|entries| {
                window
                    .iter()
                    .map(|ui| {
                        entries
                            .iter()
                            .filter_map(|(s, v)| {
                                // u_i ⊕ u = s  <=>  u = s ⊖ u_i
                                let u = qs.sub(s, ui);
                                site_index.get(&u).map(|&k| (k as u32, *v))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FieldLayout { n, sites, multiplicity, norms, site_index, window, hits }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sites(&self) -> &[HElement] {
        &self.sites
    }

    /// `m(u, n)` for each site.
    pub fn multiplicity(&self) -> &[u64] {
        &self.multiplicity
    }

    /// `N(u)` for each site.
    pub fn norms(&self) -> &[u64] {
        &self.norms
    }

    pub fn window(&self) -> &[HElement] {
        &self.window
    }

    pub fn site_of(&self, u: &HElement) -> Option<usize> {
        self.site_index.get(u).copied()
    }
}

/// One point `(j, w, u)` of the Poisson random measure.
#[derive(Clone, Debug, PartialEq)]
pub struct PrmPoint {
    pub j: f64,
    pub mark: usize,
    pub u: HElement,
}

#[derive(Clone, Debug)]
pub struct PrmSample {
    /// Points in order of decreasing `|j|`.
    pub points: Vec<PrmPoint>,
    /// `ν(W) · |H_{n+M}|`.
    pub total_mass: f64,
}

/// LePage arrivals `j_i = ε_i Γ_i^{-1/α} mass^{1/α}` with iid marks and
/// locations; the points form a PRM whose mean measure gives
/// `mass · x^{-α}` to `{|j| > x}`.
pub(crate) struct Arrivals<'a> {
    kernel: &'a CompiledKernel,
    window_len: usize,
    gamma: f64,
    mass_root: f64,
    inv_alpha: f64,
}

impl<'a> Arrivals<'a> {
    pub(crate) fn new(kernel: &'a CompiledKernel, window_len: usize) -> Self {
        let mass = kernel.total_weight * window_len as f64;
        Arrivals {
            kernel,
            window_len,
            gamma: 0.0,
            mass_root: mass.powf(1.0 / kernel.alpha),
            inv_alpha: 1.0 / kernel.alpha,
        }
    }

    /// Returns `(j, mark, window index)`.
    pub(crate) fn next(&mut self, rng: &mut impl Rng) -> (f64, usize, usize) {
        let e: f64 = Exp1.sample(rng);
        self.gamma += e;
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let j = sign * self.gamma.powf(-self.inv_alpha) * self.mass_root;
        let mark = self.kernel.mark_for(rng.gen::<f64>() * self.kernel.total_weight);
        let u = if self.window_len == 0 { 0 } else { rng.gen_range(0..self.window_len) };
        (j, mark, u)
    }
}

/// Exactly `count` points of the PRM restricted to `W × H_{n+M}`.
pub fn sample_prm(kernel: &CompiledKernel, layout: &FieldLayout, count: usize, rng: &mut impl Rng) -> PrmSample {
    let mut arrivals = Arrivals::new(kernel, layout.window.len());
    let points = (0..count)
        .map(|_| {
            let (j, mark, u) = arrivals.next(rng);
            PrmPoint { j, mark, u: layout.window[u].clone() }
        })
        .collect();
    PrmSample { points, total_mass: kernel.total_weight * layout.window.len() as f64 }
}

/// The field on `H_n`, one value per coset of `K`.
#[derive(Clone, Debug)]
pub struct FieldSample<'a> {
    pub layout: &'a FieldLayout,
    pub values: Vec<f64>,
    /// Series terms used after the truncation check.
    pub terms: usize,
    /// False when the truncation check still failed at the length cap.
    pub truncation_ok: bool,
}

impl FieldSample<'_> {
    /// `X_t` for any `t` in the box `[-n, n]^d`.
    pub fn value_at(&self, qs: &QuotientStructure, t: &[i64]) -> Option<f64> {
        self.layout.site_of(&qs.element(t)).map(|k| self.values[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HElement, f64, u64)> + '_ {
        self.layout.sites.iter().zip(&self.values).zip(&self.layout.multiplicity).map(|((u, v), m)| (u, *v, *m))
    }
}

/// `X_u = C_α^{1/α} Σ_i j_i h(w_i, u_i ⊕ u)` on `H_n`.
///
/// Starts with `terms` series terms and keeps doubling while the last term
/// can still move the field by more than [`TRUNCATION_TOLERANCE`] of its
/// current maximum.
pub fn sample_field<'a>(
    kernel: &CompiledKernel,
    layout: &'a FieldLayout,
    terms: usize,
    rng: &mut impl Rng,
) -> FieldSample<'a> {
    let mut values = vec![0.0; layout.sites.len()];
    let mut arrivals = Arrivals::new(kernel, layout.window.len());
    let mut used = 0usize;
    let mut target = terms.max(1);
    let mut last_j = f64::INFINITY;
    let mut doublings = 0;
    loop {
        while used < target {
            let (j, mark, u) = arrivals.next(rng);
            for &(site, h) in &layout.hits[mark][u] {
                values[site as usize] += j * h;
            }
            last_j = j.abs();
            used += 1;
        }
        let max_x = values.iter().fold(0.0f64, |a, v| a.max(v.abs())) * kernel.scale;
        let tail = last_j * kernel.scale * kernel.max_abs_h;
        if tail <= TRUNCATION_TOLERANCE * max_x || kernel.is_zero() {
            break;
        }
        if doublings == MAX_DOUBLINGS {
            for v in values.iter_mut() {
                *v *= kernel.scale;
            }
            return FieldSample { layout, values, terms: used, truncation_ok: false };
        }
        doublings += 1;
        target *= 2;
    }
    for v in values.iter_mut() {
        *v *= kernel.scale;
    }
    FieldSample { layout, values, terms: used, truncation_ok: true }
}

/// Counters reported alongside simulation output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimDiagnostics {
    /// Replicates redrawn because a value was not finite.
    pub resampled: u64,
    /// Replicates whose truncation check failed at the length cap.
    pub truncation_warnings: u64,
    pub max_terms: usize,
}

impl SimDiagnostics {
    pub fn merge(self, o: SimDiagnostics) -> SimDiagnostics {
        SimDiagnostics {
            resampled: self.resampled + o.resampled,
            truncation_warnings: self.truncation_warnings + o.truncation_warnings,
            max_terms: self.max_terms.max(o.max_terms),
        }
    }
}

/// Draws replicate `replicate` of the experiment seeded by `master_seed`,
/// redrawing from a fresh block of the same substream if the realization
/// is not finite.
pub fn sample_field_replicate<'a>(
    kernel: &CompiledKernel,
    layout: &'a FieldLayout,
    terms: usize,
    master_seed: u64,
    replicate: u64,
) -> (FieldSample<'a>, SimDiagnostics) {
    let mut diag = SimDiagnostics::default();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng: StreamRng = substream(master_seed, replicate, attempt);
        let field = sample_field(kernel, layout, terms, &mut rng);
        if field.values.iter().all(|v| v.is_finite()) {
            diag.truncation_warnings += u64::from(!field.truncation_ok);
            diag.max_terms = field.terms;
            return (field, diag);
        }
        diag.resampled += 1;
    }
    panic!("replicate {replicate}: {MAX_ATTEMPTS} consecutive non-finite realizations");
}

/// `M_n = max_{||t||_inf <= n} |X_t|`, taken over the stored cosets.
pub fn partial_maxima(field: &FieldSample<'_>) -> f64 {
    field.values.iter().zip(&field.layout.multiplicity).filter(|(_, &m)| m >= 1).fold(0.0, |a, (v, _)| a.max(v.abs()))
}

/// `M_r` for a smaller radius `r <= n`, from the same realization: the box
/// `[-r, r]^d` meets exactly the cosets with `N(u) <= r`.
pub fn partial_maxima_within(field: &FieldSample<'_>, r: u64) -> f64 {
    assert!(r <= field.layout.n, "radius {r} exceeds the simulated radius");
    if r == field.layout.n {
        return partial_maxima(field);
    }
    field.values.iter().zip(&field.layout.norms).filter(|(_, &norm)| norm <= r).fold(0.0, |a, (v, _)| a.max(v.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximaRow {
    pub replicate: u64,
    pub n: u64,
    pub mn: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct MaximaRun {
    /// Sorted by `(replicate, n)`.
    pub rows: Vec<MaximaRow>,
    pub diagnostics: SimDiagnostics,
}

/// Partial maxima of `replicates` independent fields on the largest radius
/// of `radii`, read off at every radius. Replicates run in parallel on the
/// current rayon pool; the output does not depend on the pool size.
pub fn maxima_experiment(
    qs: &QuotientStructure,
    kernel: &CompiledKernel,
    radii: &[u64],
    replicates: u64,
    master_seed: u64,
    terms: usize,
) -> MaximaRun {
    let n_max = *radii.iter().max().expect("at least one radius");
    let layout = FieldLayout::new(qs, kernel, n_max);
    let per_rep: Vec<(Vec<MaximaRow>, SimDiagnostics)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let (field, diag) = sample_field_replicate(kernel, &layout, terms, master_seed, r);
            let rows = radii
                .iter()
                .map(|&n| MaximaRow { replicate: r, n, mn: partial_maxima_within(&field, n), seed: master_seed })
                .collect();
            (rows, diag)
        })
        .collect();
    let mut rows = Vec::new();
    let mut diagnostics = SimDiagnostics::default();
    for (r, d) in per_rep {
        rows.extend(r);
        diagnostics = diagnostics.merge(d);
    }
    MaximaRun { rows, diagnostics }
}

/// CSV with header `replicate,n,Mn,seed`.
pub fn maxima_csv(rows: &[MaximaRow]) -> String {
    let mut out = String::from("replicate,n,Mn,seed\n");
    for r in rows {
        out.push_str(&format!("{},{},{:e},{}\n", r.replicate, r.n, r.mn, r.seed));
    }
    out
}
