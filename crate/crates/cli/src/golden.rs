use serde::Serialize;
use stablefield::geometry::scalar::Scalar;
use stablefield::{Geometry, GroupSpec, QuotientStructure};

use crate::exit::{Failure, PASS};

/// Tolerance of the golden assertions, overridable through this variable.
pub const TOLERANCE_VAR: &str = "GOLDEN_TOLERANCE";
const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Serialize)]
struct Assertion {
    name: &'static str,
    value: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GoldenReport {
    tolerance: f64,
    assertions: Vec<Assertion>,
    pass: bool,
}

fn tolerance() -> Result<f64, Failure> {
    match std::env::var(TOLERANCE_VAR) {
        Err(_) => Ok(DEFAULT_TOLERANCE),
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .ok_or_else(|| Failure::usage(format!("{TOLERANCE_VAR} is not a finite number: {s:?}"))),
    }
}

/// The planar example `K = span{(1,1)}`: `(p, q, l) = (1, 1, 1)`,
/// `C = [-2, 2]`, `V(y) = 2 - |y|`, `c = 4` and `l ∫ V = 2^d = 4`.
pub fn golden(json: bool) -> Result<u8, Failure> {
    let tol = tolerance()?;
    let qs = QuotientStructure::analyze(&GroupSpec::new(2, vec![vec![1, 1]]))?;
    let geometry = Geometry::build(&qs)?;
    let (lo, hi) = &geometry.bounding_box()[0];
    let integral = geometry.integral_fiber_volume(1e-12, 0)?;
    let mut assertions = Vec::new();
    let mut check = |name, value: f64, expected: f64| {
        assertions.push(Assertion { name, value, expected, tolerance: tol, pass: (value - expected).abs() <= tol });
    };
    check("p", qs.p() as f64, 1.0);
    check("q", qs.q() as f64, 1.0);
    check("l", qs.l() as f64, 1.0);
    check("C lower end", lo.as_f64(), -2.0);
    check("C upper end", hi.as_f64(), 2.0);
    check("V(0.5)", geometry.fiber_volume(&[0.5]), 1.5);
    check("V(-1.25)", geometry.fiber_volume(&[-1.25]), 0.75);
    check("c", geometry.scaling_constant(), 4.0);
    check("l * integral of V", geometry.l() as f64 * integral.value, 4.0);
    let pass = assertions.iter().all(|a| a.pass);
    let report = GoldenReport { tolerance: tol, assertions, pass };
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        for a in &report.assertions {
            println!("{} {}: {} (expected {})", if a.pass { "PASS" } else { "FAIL" }, a.name, a.value, a.expected);
        }
    }
    if pass {
        return Ok(PASS);
    }
    let failed: Vec<&str> = report.assertions.iter().filter(|a| !a.pass).map(|a| a.name).collect();
    Err(Failure::assertion(format!("golden assertions failed: {}", failed.join(", "))))
}
