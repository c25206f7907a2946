use std::path::{Path, PathBuf};

use serde::Serialize;
use stablefield::geometry::scalar::Scalar;
use stablefield::geometry::{profile_csv, GeometryReport};
use stablefield::lattice::QuotientSummary;
use stablefield::process::{convergence_report, scaling_diagnostics, ConvergenceReport, ScalingDiagnostics};
use stablefield::stable::{maxima_csv, maxima_experiment, SimDiagnostics};
use stablefield::stats::median;
use stablefield::{Geometry, QuotientStructure};

use crate::config::{ExperimentConfig, Provenance};
use crate::exit::{Failure, PASS};

/// Where reports go and how they are echoed.
pub struct Output {
    pub dir: PathBuf,
    pub json: bool,
}

impl Output {
    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Failure::io(&self.dir, e))?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::io(&path, e))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<String, Failure> {
        let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
        self.write(name, &text)?;
        Ok(text)
    }

    fn echo(&self, json_text: &str, human: impl FnOnce() -> String) {
        if self.json {
            print!("{json_text}");
        } else {
            print!("{}", human());
        }
    }
}

fn provenance(config: &ExperimentConfig, hash: &str) -> Provenance {
    Provenance { config_hash: hash.to_string(), master_seed: config.master_seed, config: config.clone() }
}

// Radii used for the empirical κ0 and the counting profile when the config
// has no nList.
const DEFAULT_RADII: [u64; 3] = [8, 16, 32];

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AnalyzeReport {
    provenance: Provenance,
    quotient: QuotientSummary,
    geometry: GeometryReport,
    /// Vertices of `C` for `p <= 2`, as `[lo, hi]` or a counterclockwise
    /// polygon.
    body: Vec<Vec<f64>>,
}

pub fn analyze(config: &ExperimentConfig, hash: &str, out: &Output) -> Result<u8, Failure> {
    let qs = QuotientStructure::analyze(&config.group_spec)?;
    let geometry = Geometry::build(&qs)?;
    let radii: Vec<u64> = if config.n_list.is_empty() { DEFAULT_RADII.to_vec() } else { config.radii()?.to_vec() };
    let report = geometry.report(&qs, &radii, config.master_seed)?;
    let body = match geometry.p() {
        1 => {
            let (lo, hi) = &geometry.bounding_box()[0];
            vec![vec![lo.as_f64(), hi.as_f64()]]
        }
        2 => geometry.vertices().iter().map(|v| v.to_vec()).collect(),
        _ => Vec::new(),
    };
    if geometry.p() <= 2 {
        let grid = geometry.grid(if geometry.p() == 1 { 81 } else { 21 });
        let n = *radii.last().unwrap();
        out.write("profile.csv", &profile_csv(&geometry.profile_rows(&qs, 0, n, &grid)))?;
    }
    let full = AnalyzeReport { provenance: provenance(config, hash), quotient: qs.summary(), geometry: report, body };
    let text = out.write_json("analysis.json", &full)?;
    out.echo(&text, || {
        let g = &full.geometry;
        format!(
            "p = {}, q = {}, l = {}\n|C| = {}\nc = {}\nl * integral of V = {} (error {:e})\n",
            g.p,
            g.q,
            g.l,
            g.volume_c,
            g.c,
            g.l as f64 * g.integral_v,
            g.integral_v_error
        )
    });
    Ok(PASS)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MedianRow {
    n: u64,
    median: f64,
    /// `n^{-p/α}` times the median.
    normalized: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SimulateReport {
    provenance: Provenance,
    medians: Vec<MedianRow>,
    /// Least-squares slope of log median against log n.
    log_slope: f64,
    /// `p / α`, the growth exponent of the maxima.
    expected_slope: f64,
    diagnostics: SimDiagnostics,
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn simulate(config: &ExperimentConfig, hash: &str, out: &Output) -> Result<u8, Failure> {
    let radii = config.radii()?;
    let replicates = config.need_replicates(1)?;
    let qs = QuotientStructure::analyze(&config.group_spec)?;
    let kernel = config.kernel()?.compile(&qs)?;
    let run = maxima_experiment(&qs, &kernel, radii, replicates, config.master_seed, config.truncation_index);
    out.write("maxima.csv", &maxima_csv(&run.rows))?;
    let exponent = qs.p() as f64 / kernel.alpha;
    let medians: Vec<MedianRow> = radii
        .iter()
        .map(|&n| {
            let mns: Vec<f64> = run.rows.iter().filter(|r| r.n == n).map(|r| r.mn).collect();
            let m = median(&mns);
            MedianRow { n, median: m, normalized: m / (n as f64).powf(exponent) }
        })
        .collect();
    let ns: Vec<f64> = medians.iter().map(|r| r.n as f64).collect();
    let ms: Vec<f64> = medians.iter().map(|r| r.median).collect();
    let report = SimulateReport {
        provenance: provenance(config, hash),
        log_slope: log_slope(&ns, &ms),
        expected_slope: exponent,
        medians,
        diagnostics: run.diagnostics,
    };
    let text = out.write_json("simulate.json", &report)?;
    out.echo(&text, || {
        let mut s = String::from("n\tmedian Mn\tn^(-p/alpha) median\n");
        for r in &report.medians {
            s.push_str(&format!("{}\t{:.6}\t{:.6}\n", r.n, r.median, r.normalized));
        }
        s.push_str(&format!("log-log slope {:.4} (p/alpha = {:.4})\n", report.log_slope, report.expected_slope));
        if report.diagnostics.truncation_warnings > 0 {
            s.push_str(&format!("truncation warnings: {}\n", report.diagnostics.truncation_warnings));
        }
        s
    });
    Ok(PASS)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConvergeJson<'a> {
    provenance: Provenance,
    report: &'a ConvergenceReport,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ScalingJson<'a> {
    provenance: Provenance,
    diagnostics: &'a ScalingDiagnostics,
    simulation: SimDiagnostics,
}

/// Minimum replicate count for a Laplace comparison.
const MIN_REPLICATES: u64 = 100;

pub fn converge(config: &ExperimentConfig, hash: &str, out: &Output, wrong_scaling: bool) -> Result<u8, Failure> {
    let radii = config.radii()?;
    let replicates = config.need_replicates(MIN_REPLICATES)?;
    let qs = QuotientStructure::analyze(&config.group_spec)?;
    let kernel = config.kernel()?.compile(&qs)?;
    let geometry = Geometry::build(&qs)?;
    if wrong_scaling {
        let (diag, sim) = scaling_diagnostics(
            &qs,
            &kernel,
            &geometry,
            radii,
            replicates,
            config.delta,
            config.master_seed,
            config.truncation_index,
        )?;
        let mut csv = String::from("n,unweighted,unweightedSE,overScaled,overScaledSE,underScaled,underScaledSE\n");
        for p in &diag.points {
            csv.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                p.n, p.unweighted, p.unweighted_se, p.over_scaled, p.over_scaled_se, p.under_scaled, p.under_scaled_se
            ));
        }
        out.write("scaling.csv", &csv)?;
        let text = out.write_json(
            "scaling.json",
            &ScalingJson { provenance: provenance(config, hash), diagnostics: &diag, simulation: sim },
        )?;
        out.echo(&text, || {
            format!(
                "growth ratios of unweighted mass: {:?}\nnon-tight: {}\nover-scaled mass vanishes: {}\nunder-scaled mass diverges: {}\n",
                diag.growth_ratios, diag.non_tight, diag.over_scaled_vanishes, diag.under_scaled_diverges
            )
        });
        return Ok(PASS);
    }
    if config.g_suite.is_empty() {
        return Err(Failure::usage("gSuite is empty"));
    }
    let report = convergence_report(
        &qs,
        &kernel,
        &geometry,
        radii,
        replicates,
        &config.g_suite,
        config.master_seed,
        config.truncation_index,
    )?;
    out.write("convergence.csv", &report.csv())?;
    let text =
        out.write_json("convergence.json", &ConvergeJson { provenance: provenance(config, hash), report: &report })?;
    out.echo(&text, || {
        let mut s = report.csv();
        for t in &report.trends {
            s.push_str(&format!("g{}: Kendall tau {:.3} (p = {:.3})\n", t.g_id, t.tau, t.p_value));
        }
        s.push_str(if report.pass { "pass\n" } else { "FAIL\n" });
        s
    });
    if report.pass {
        Ok(PASS)
    } else {
        Err(Failure::assertion("Laplace functionals differ by more than 3 SE"))
    }
}

pub fn output_dir(config: Option<&ExperimentConfig>, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}
