//! Deterministic adaptive quadrature on intervals and triangles.

/// Integral estimate with an a-posteriori error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Quadrature {
    fn merge(self, other: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
        }
    }

    fn zero() -> Quadrature {
        Quadrature { value: 0.0, error: 0.0, converged: true }
    }
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson rule on `[a, b]` with absolute tolerance `tol`.
pub fn simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Quadrature {
    // Also catches NaN ends.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(b > a) {
        return Quadrature::zero();
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Quadrature {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Depth 0 only stops runaway recursion; a few levels are always taken
    // so that kinks between sample points are not missed.
    if depth + 4 <= MAX_DEPTH && delta.abs() <= 15.0 * tol {
        return Quadrature { value: left + right + delta / 15.0, error: delta.abs() / 15.0, converged: true };
    }
    if depth == 0 {
        return Quadrature { value: left + right, error: delta.abs(), converged: false };
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1).merge(simpson_step(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        tol / 2.0,
        depth - 1,
    ))
}

/// Simpson on a list of breakpoints, so that known kinks sit on panel ends.
pub fn simpson_pieces(f: &mut impl FnMut(f64) -> f64, breaks: &[f64], tol: f64) -> Quadrature {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks.windows(2).map(|w| simpson(f, w[0], w[1], tol / panels)).fold(Quadrature::zero(), Quadrature::merge)
}

pub type Point2 = [f64; 2];

// Symmetric 7-point rule, exact for polynomials of degree 5.
const DUNAVANT5: [(f64, f64, f64); 3] = [
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506),
    (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827),
];

fn triangle_rule(f: &mut impl FnMut(Point2) -> f64, t: &[Point2; 3]) -> f64 {
    let area = 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs();
    let at = |l: [f64; 3]| -> Point2 {
        [l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0], l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1]]
    };
    let mut sum = DUNAVANT5[0].2 * f(at([1.0 / 3.0; 3]));
    for &(a, b, w) in &DUNAVANT5[1..] {
        sum += w * (f(at([a, b, b])) + f(at([b, a, b])) + f(at([b, b, a])));
    }
    area * sum
}

fn split4(t: &[Point2; 3]) -> [[Point2; 3]; 4] {
    let mid = |p: Point2, q: Point2| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    let (a, b, c) = (t[0], t[1], t[2]);
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

/// Cap on the number of triangles kept by the global adaptive scheme.
const MAX_TRIANGLES: usize = 400_000;

struct Cell {
    tri: [Point2; 3],
    fine: f64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn cell(f: &mut impl FnMut(Point2) -> f64, tri: [Point2; 3]) -> Cell {
    let coarse = triangle_rule(f, &tri);
    let fine: f64 = split4(&tri).iter().map(|k| triangle_rule(f, k)).sum();
    Cell { tri, fine, err: (fine - coarse).abs() }
}

/// Globally adaptive degree-5 rule on a set of triangles: the cell with the
/// largest error estimate is split until the total estimate drops below
/// `tol`.
pub fn triangles(f: &mut impl FnMut(Point2) -> f64, tris: &[[Point2; 3]], tol: f64) -> Quadrature {
    let mut heap = std::collections::BinaryHeap::new();
    let mut total_err = 0.0;
    for &t in tris {
        let c = cell(f, t);
        total_err += c.err;
        heap.push(c);
    }
    while total_err > tol && heap.len() < MAX_TRIANGLES {
        let Some(worst) = heap.pop() else { break };
        total_err -= worst.err;
        for kid in split4(&worst.tri) {
            let c = cell(f, kid);
            total_err += c.err;
            heap.push(c);
        }
    }
    // Re-sum to shed the drift of the running total.
    let (value, err) = heap.iter().fold((0.0, 0.0), |(v, e), c| (v + c.fine, e + c.err));
    Quadrature { value, error: err, converged: err <= tol }
}

/// Adaptive degree-5 rule on one triangle.
pub fn triangle(f: &mut impl FnMut(Point2) -> f64, t: [Point2; 3], tol: f64) -> Quadrature {
    triangles(f, &[t], tol)
}

/// Integral over a convex polygon given by its vertices in cyclic order.
pub fn convex_polygon(f: &mut impl FnMut(Point2) -> f64, vertices: &[Point2], tol: f64) -> Quadrature {
    if vertices.len() < 3 {
        return Quadrature::zero();
    }
    let fan: Vec<[Point2; 3]> = (1..vertices.len() - 1).map(|i| [vertices[0], vertices[i], vertices[i + 1]]).collect();
    triangles(f, &fan, tol)
}
