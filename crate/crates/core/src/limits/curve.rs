//! The piecewise-linear limit curve of grown n-cores and the diagonal
//! supremum distance between a grown shape and that curve.
//!
//! Geometry here is plain `f64`; exactness lives in the rational modules.

use thiserror::Error;

use super::ncore::CorePartition;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("the limit curve needs n >= 2")]
    BadN,
    #[error("shape distance needs a nonempty partition")]
    EmptyCore,
}

/// The limit curve `C_n`: vertices `gamma * (C(i,2), C(n-i+1,2))` for
/// `i = 1..n`, scaled so the area between curve and axes is one.
#[derive(Debug, Clone)]
pub struct LimitCurve {
    pub n: u32,
    pub vertices: Vec<(f64, f64)>,
}

fn choose2(k: f64) -> f64 {
    k * (k - 1.0) / 2.0
}

impl LimitCurve {
    pub fn new(n: u32) -> Result<Self, CurveError> {
        if n < 2 {
            return Err(CurveError::BadN);
        }
        let nf = f64::from(n);
        let gamma = 2.0 * 6.0f64.sqrt() / (nf * (nf * nf - 1.0).sqrt());
        let vertices = (1..=n)
            .map(|i| {
                let fi = f64::from(i);
                (gamma * choose2(fi), gamma * choose2(nf - fi + 1.0))
            })
            .collect();
        Ok(LimitCurve { n, vertices })
    }

    /// Area enclosed between the curve and the coordinate axes.
    pub fn area(&self) -> f64 {
        trapezoid_area(&self.vertices)
    }
}

fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[0].1 + w[1].1) / 2.0 * (w[1].0 - w[0].0))
        .sum()
}

/// Boundary staircase of a partition drawn with the first row along the
/// x-axis and row index upward: a polyline from `(0, rows)` on the y-axis
/// down-right to `(lambda_1, 0)`. Collinear steps are merged.
pub fn staircase(p: &CorePartition) -> Vec<(f64, f64)> {
    let rows = p.rows();
    let r = rows.len();
    let mut pts: Vec<(f64, f64)> = vec![(0.0, r as f64)];
    let mut x = 0u64;
    let mut i = r;
    while i > 0 {
        let v = rows[i - 1];
        if v > x {
            pts.push((v as f64, i as f64));
            x = v;
        }
        let mut j = i - 1;
        while j > 0 && rows[j - 1] == v {
            j -= 1;
        }
        pts.push((x as f64, j as f64));
        i = j;
    }
    pts
}

/// Unit boundary runs read from the bottom-right corner upward: pairs
/// `(up_steps, left_steps)` between consecutive direction changes.
pub fn boundary_runs(p: &CorePartition) -> Vec<(u64, u64)> {
    let rows = p.rows();
    let r = rows.len();
    let mut runs = Vec::new();
    let mut ups = 0u64;
    for i in 1..=r {
        ups += 1;
        let next = if i < r { rows[i] } else { 0 };
        let lefts = rows[i - 1] - next;
        if lefts > 0 {
            runs.push((ups, lefts));
            ups = 0;
        }
    }
    debug_assert_eq!(ups, 0, "a positive top row always ends with a left run");
    runs
}

/// `x,y` CSV rows for a polyline.
pub fn polyline_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in points {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

fn euclid(p: (f64, f64), q: (f64, f64)) -> f64 {
    ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    euclid(p, (a.0 + t * dx, a.1 + t * dy))
}

fn nearest_to_polyline(p: (f64, f64), pts: &[(f64, f64)]) -> f64 {
    pts.windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// A monotone polyline (x nondecreasing, y nonincreasing) cut by the lines
/// of slope one. `y - x` strictly decreases along the path, so every such
/// line meets the polyline in exactly one point, found by binary search.
struct DiagonalCuts<'a> {
    pts: &'a [(f64, f64)],
    /// `y - x` at the vertices, strictly decreasing.
    levels: Vec<f64>,
}

impl<'a> DiagonalCuts<'a> {
    fn new(pts: &'a [(f64, f64)]) -> Self {
        let levels = pts.iter().map(|&(x, y)| y - x).collect();
        DiagonalCuts { pts, levels }
    }

    /// Intersection with the line `y = x + t`, if the line meets the curve.
    fn cross(&self, t: f64) -> Option<(f64, f64)> {
        let levels = &self.levels;
        let last = levels.len() - 1;
        if t > levels[0] || t < levels[last] {
            return None;
        }
        // Largest i with levels[i] >= t; the crossing lies on segment i.
        let (mut lo, mut hi) = (0usize, last);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if levels[mid] >= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        if lo == last {
            return Some(self.pts[last]);
        }
        let (p, q) = (self.pts[lo], self.pts[lo + 1]);
        let denom = (q.1 - q.0) - (p.1 - p.0);
        let s = if denom == 0.0 {
            0.0
        } else {
            ((t - (p.1 - p.0)) / denom).clamp(0.0, 1.0)
        };
        Some((p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)))
    }
}

/// Supremum over the diagonal family of the distance between the two
/// polylines measured along each diagonal.
///
/// In this frame the cutting diagonals are the slope-one lines `y = x + t`
/// (the slope-minus-one family of the flipped drawing frame); each meets a
/// monotone polyline exactly once and the two crossing points are compared
/// by euclidean distance. Where a line meets only one curve (the short
/// mismatch bands at the axes), the crossing is charged its distance to the
/// other polyline. The grid passes through every vertex of both polylines
/// plus `extra` uniform levels.
pub fn diagonal_distance(a: &[(f64, f64)], b: &[(f64, f64)], extra: usize) -> f64 {
    let mut ts: Vec<f64> = a.iter().chain(b.iter()).map(|&(x, y)| y - x).collect();
    let gmin = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let gmax = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for k in 0..=extra {
        ts.push(gmin + (gmax - gmin) * k as f64 / extra.max(1) as f64);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();

    let cuts_a = DiagonalCuts::new(a);
    let cuts_b = DiagonalCuts::new(b);
    let mut worst = 0.0f64;
    for &t in &ts {
        let d = match (cuts_a.cross(t), cuts_b.cross(t)) {
            (Some(pa), Some(pb)) => euclid(pa, pb),
            (Some(pa), None) => nearest_to_polyline(pa, b),
            (None, Some(pb)) => nearest_to_polyline(pb, a),
            (None, None) => 0.0,
        };
        worst = worst.max(d);
    }
    worst
}

/// Distance of a grown core's unit-area staircase from the limit curve,
/// measured along diagonals.
pub fn shape_distance(core: &CorePartition, n: u32) -> Result<f64, CurveError> {
    if core.is_empty() {
        return Err(CurveError::EmptyCore);
    }
    let curve = LimitCurve::new(n)?;
    let scale = 1.0 / (core.boxes() as f64).sqrt();
    let stair: Vec<(f64, f64)> = staircase(core)
        .into_iter()
        .map(|(x, y)| (x * scale, y * scale))
        .collect();
    Ok(diagonal_distance(&stair, &curve.vertices, 1000))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_vertices_and_area() {
        let c = LimitCurve::new(4).unwrap();
        assert_eq!(c.vertices.len(), 4);
        // Vertices are 0.1^(1/2)-scaled (0,6),(1,3),(3,1),(6,0).
        let gamma = (0.1f64).sqrt();
        let expect = [(0.0, 6.0), (1.0, 3.0), (3.0, 1.0), (6.0, 0.0)];
        for (v, e) in c.vertices.iter().zip(expect) {
            assert!((v.0 - gamma * e.0).abs() < 1e-12);
            assert!((v.1 - gamma * e.1).abs() < 1e-12);
        }
        for n in 2..=12 {
            let c = LimitCurve::new(n).unwrap();
            assert!((c.area() - 1.0).abs() < 1e-12, "n={n}");
        }
        assert!(LimitCurve::new(1).is_err());
    }

    #[test]
    fn staircase_of_small_partition() {
        let p = CorePartition::new(vec![3, 1]).unwrap();
        assert_eq!(
            staircase(&p),
            vec![(0.0, 2.0), (1.0, 2.0), (1.0, 1.0), (3.0, 1.0), (3.0, 0.0)]
        );
    }

    #[test]
    fn boundary_runs_of_small_partition() {
        let p = CorePartition::new(vec![3, 1]).unwrap();
        assert_eq!(boundary_runs(&p), vec![(1, 2), (1, 1)]);
        let square = CorePartition::new(vec![2, 2]).unwrap();
        assert_eq!(boundary_runs(&square), vec![(2, 2)]);
    }

    #[test]
    fn coincident_curves_have_zero_distance() {
        let c = LimitCurve::new(4).unwrap();
        let d = diagonal_distance(&c.vertices, &c.vertices, 1000);
        assert!(d.abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn distance_sees_offset_curves() {
        let c = LimitCurve::new(4).unwrap();
        let shifted: Vec<(f64, f64)> = c
            .vertices
            .iter()
            .map(|&(x, y)| (x * 1.1, y * 1.1))
            .collect();
        let d = diagonal_distance(&c.vertices, &shifted, 1000);
        assert!(d > 0.05, "distance {d}");
    }

    #[test]
    fn worked_core_distance_regression() {
        // Geometry oracle value for the eleven-box 4-core, pinned on first
        // computation.
        let core = CorePartition::new(vec![6, 3, 1, 1]).unwrap();
        let d = shape_distance(&core, 4).unwrap();
        assert!(d > 0.0);
        assert!((d - 0.691_321_217_789_973).abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn shape_distance_requires_boxes() {
        assert_eq!(
            shape_distance(&CorePartition::empty(), 4),
            Err(CurveError::EmptyCore)
        );
    }

    #[test]
    fn grown_core_approaches_curve() {
        use super::super::ncore::random_growth;
        let small = random_growth(4, 100, 5).unwrap();
        let large = random_growth(4, 20_000, 5).unwrap();
        let d_small = shape_distance(&small, 4).unwrap();
        let d_large = shape_distance(&large, 4).unwrap();
        assert!(d_large < d_small, "{d_large} !< {d_small}");
    }
}
