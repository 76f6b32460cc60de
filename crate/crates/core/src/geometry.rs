//! Scatterer shapes, the truncation circle and the problem description.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::region::Rect;

pub type Point = [f64; 2];

/// Penetrable obstacle, centered at the origin unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScattererShape {
    Disk { radius: f64 },
    /// Major axis along x.
    Ellipse { semi_major: f64, semi_minor: f64 },
    Square {
        side: f64,
        #[serde(default)]
        center: Point,
    },
    /// `(-a, a)^2` minus the upper-right quarter `[0, a]^2`, `a = outer_side / 2`.
    #[serde(rename = "l_shape")]
    LShape { outer_side: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    OnBoundary,
}

impl ScattererShape {
    pub fn validate(&self) -> Result<()> {
        let lengths: &[f64] = match self {
            ScattererShape::Disk { radius } => &[*radius],
            ScattererShape::Ellipse { semi_major, semi_minor } => &[*semi_major, *semi_minor],
            ScattererShape::Square { side, .. } => &[*side],
            ScattererShape::LShape { outer_side } => &[*outer_side],
        };
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Geometry(format!("non-positive length in {self:?}")));
        }
        if let ScattererShape::Ellipse { semi_major, semi_minor } = self {
            if semi_minor > semi_major {
                return Err(Error::Geometry("ellipse semi_minor exceeds semi_major".into()));
            }
        }
        if let ScattererShape::Square { center, .. } = self {
            if !center.iter().all(|c| c.is_finite()) {
                return Err(Error::Geometry("non-finite square center".into()));
            }
        }
        Ok(())
    }

    /// Typical length used to scale tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            ScattererShape::Disk { radius } => *radius,
            ScattererShape::Ellipse { semi_major, .. } => *semi_major,
            ScattererShape::Square { side, .. } => *side,
            ScattererShape::LShape { outer_side } => *outer_side,
        }
    }

    /// Largest distance from the origin to a point of the shape.
    pub fn circumradius(&self) -> f64 {
        match self {
            ScattererShape::Disk { radius } => *radius,
            ScattererShape::Ellipse { semi_major, .. } => *semi_major,
            ScattererShape::Square { side, center } => center[0].hypot(center[1]) + side / 2f64.sqrt(),
            ScattererShape::LShape { outer_side } => outer_side / 2f64.sqrt(),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            ScattererShape::Disk { radius } => PI * radius * radius,
            ScattererShape::Ellipse { semi_major, semi_minor } => PI * semi_major * semi_minor,
            ScattererShape::Square { side, .. } => side * side,
            ScattererShape::LShape { outer_side } => 0.75 * outer_side * outer_side,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            ScattererShape::Disk { radius } => TAU * radius,
            ScattererShape::Ellipse { semi_major, semi_minor } => {
                ellipse_arc_length(*semi_major, *semi_minor, TAU)
            }
            ScattererShape::Square { side, .. } => 4.0 * side,
            ScattererShape::LShape { outer_side } => 4.0 * outer_side,
        }
    }

    /// Counter-clockwise corners of polygonal shapes.
    pub fn corners(&self) -> Option<Vec<Point>> {
        match *self {
            ScattererShape::Square { side, center } => {
                let h = side / 2.0;
                let [cx, cy] = center;
                Some(vec![[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]])
            }
            ScattererShape::LShape { outer_side } => {
                let a = outer_side / 2.0;
                Some(vec![[-a, -a], [a, -a], [a, 0.0], [0.0, 0.0], [0.0, a], [-a, a]])
            }
            _ => None,
        }
    }

    pub fn classify(&self, p: Point) -> Location {
        let tol = 1e-12 * self.scale();
        match *self {
            ScattererShape::Disk { radius } => {
                let r = p[0].hypot(p[1]);
                if (r - radius).abs() <= tol {
                    Location::OnBoundary
                } else if r < radius {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
            ScattererShape::Ellipse { semi_major, semi_minor } => {
                let (a, b) = (semi_major, semi_minor);
                let f = (p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0;
                let grad = 2.0 * (p[0] / (a * a)).hypot(p[1] / (b * b));
                if f.abs() <= tol * grad {
                    Location::OnBoundary
                } else if f < 0.0 {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
            _ => {
                let corners = self.corners().expect("polygon");
                if polygon_distance(&corners, p) <= tol {
                    Location::OnBoundary
                } else if point_in_polygon(&corners, p) {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
        }
    }

    /// Signed residual of the boundary equation, zero on the curve.
    pub fn boundary_residual(&self, p: Point) -> f64 {
        match *self {
            ScattererShape::Disk { radius } => p[0].hypot(p[1]) - radius,
            ScattererShape::Ellipse { semi_major, semi_minor } => {
                (p[0] / semi_major).powi(2) + (p[1] / semi_minor).powi(2) - 1.0
            }
            _ => polygon_distance(&self.corners().expect("polygon"), p),
        }
    }

    /// `m` boundary points, counter-clockwise, uniformly spaced in arclength
    /// on every smooth piece. Corners of polygons are always included.
    pub fn boundary_points(&self, m: usize) -> Result<Vec<Point>> {
        match *self {
            ScattererShape::Disk { radius } => circle_points(radius, m),
            ScattererShape::Ellipse { semi_major, semi_minor } => {
                if m < 3 {
                    return Err(Error::Geometry(format!("need at least 3 points, got {m}")));
                }
                ellipse_points(semi_major, semi_minor, m)
            }
            _ => polygon_points(&self.corners().expect("polygon"), m),
        }
    }

    /// Number of boundary samples giving spacing close to `h`.
    pub fn sample_count(&self, h: f64) -> usize {
        match self.corners() {
            Some(c) => polygon_edges(&c)
                .map(|(a, b)| ((b[0] - a[0]).hypot(b[1] - a[1]) / h).ceil().max(1.0) as usize)
                .sum(),
            None => ((self.perimeter() / h).ceil() as usize).max(8),
        }
    }

    /// Closest point on the boundary.
    pub fn project(&self, p: Point) -> Result<Point> {
        match *self {
            ScattererShape::Disk { radius } => Ok(project_circle(radius, p)),
            ScattererShape::Ellipse { semi_major, semi_minor } => project_ellipse(semi_major, semi_minor, p),
            _ => Ok(project_polygon(&self.corners().expect("polygon"), p)),
        }
    }
}

/// A curve vertices can be snapped to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Scatterer(ScattererShape),
    TruncationCircle { radius: f64 },
}

/// Closest point of `curve` to `p`.
pub fn project_to_curve(curve: &Curve, p: Point) -> Result<Point> {
    match curve {
        Curve::Scatterer(s) => s.project(p),
        Curve::TruncationCircle { radius } => Ok(project_circle(*radius, p)),
    }
}

fn project_circle(radius: f64, p: Point) -> Point {
    let r = p[0].hypot(p[1]);
    if r == 0.0 {
        return [radius, 0.0];
    }
    [p[0] * radius / r, p[1] * radius / r]
}

/// Newton iteration on `(c(t) - p) . c'(t) = 0` for `c(t) = (a cos t, b sin t)`.
fn project_ellipse(a: f64, b: f64, p: Point) -> Result<Point> {
    let mut t = (p[1] * a).atan2(p[0] * b);
    for _ in 0..50 {
        let (s, c) = t.sin_cos();
        let g = (a * c - p[0]) * (-a * s) + (b * s - p[1]) * (b * c);
        let dg = (b * b - a * a) * (c * c - s * s) + p[0] * a * c + p[1] * b * s;
        let step = g / dg;
        t -= step;
        if step.abs() < 1e-15 {
            let (s, c) = t.sin_cos();
            return Ok([a * c, b * s]);
        }
    }
    Err(Error::Geometry(format!("ellipse projection of {p:?} did not converge")))
}

fn polygon_edges(corners: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    (0..corners.len()).map(move |i| (corners[i], corners[(i + 1) % corners.len()]))
}

fn segment_projection(a: Point, b: Point, p: Point) -> Point {
    if a[0] == b[0] {
        return [a[0], p[1].clamp(a[1].min(b[1]), a[1].max(b[1]))];
    }
    if a[1] == b[1] {
        return [p[0].clamp(a[0].min(b[0]), a[0].max(b[0])), a[1]];
    }
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * d[0], a[1] + t * d[1]]
}

fn project_polygon(corners: &[Point], p: Point) -> Point {
    let mut best = corners[0];
    let mut best_d = f64::INFINITY;
    for (a, b) in polygon_edges(corners) {
        let q = segment_projection(a, b, p);
        let d = (q[0] - p[0]).hypot(q[1] - p[1]);
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    best
}

fn polygon_distance(corners: &[Point], p: Point) -> f64 {
    let q = project_polygon(corners, p);
    (q[0] - p[0]).hypot(q[1] - p[1])
}

/// Crossing-number test.
fn point_in_polygon(corners: &[Point], p: Point) -> bool {
    let mut inside = false;
    for (a, b) in polygon_edges(corners) {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// `m` equally spaced points on the circle of the given radius, starting at
/// angle zero.
pub fn circle_points(radius: f64, m: usize) -> Result<Vec<Point>> {
    if m < 3 {
        return Err(Error::Geometry(format!("need at least 3 points, got {m}")));
    }
    Ok((0..m)
        .map(|j| {
            let (s, c) = exact_sin_cos(j, m);
            [radius * c, radius * s]
        })
        .collect())
}

/// `sin`, `cos` of `2 pi j / m`, exact at multiples of a quarter turn.
fn exact_sin_cos(j: usize, m: usize) -> (f64, f64) {
    if (4 * j) % m == 0 {
        return match (4 * j / m) % 4 {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
    }
    (TAU * j as f64 / m as f64).sin_cos()
}

fn polygon_points(corners: &[Point], m: usize) -> Result<Vec<Point>> {
    let n = corners.len();
    if m < n {
        return Err(Error::Geometry(format!("need at least {n} points for {n} corners, got {m}")));
    }
    let lengths: Vec<f64> = polygon_edges(corners).map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1])).collect();
    let total: f64 = lengths.iter().sum();
    // Largest-remainder apportionment with at least one segment per edge.
    let mut counts: Vec<usize> = vec![1; n];
    let extra = m - n;
    let ideal: Vec<f64> = lengths.iter().map(|l| m as f64 * l / total - 1.0).collect();
    let mut given = 0;
    for (c, i) in counts.iter_mut().zip(&ideal) {
        let f = i.max(0.0).floor() as usize;
        *c += f;
        given += f;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].max(0.0).floor();
        let rb = ideal[b] - ideal[b].max(0.0).floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut idx = 0;
    while given < extra {
        counts[order[idx % n]] += 1;
        given += 1;
        idx += 1;
    }
    let mut out = Vec::with_capacity(m);
    for (e, (a, b)) in polygon_edges(corners).enumerate() {
        let c = counts[e];
        for j in 0..c {
            let t = j as f64 / c as f64;
            let mut q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            if a[0] == b[0] {
                q[0] = a[0];
            }
            if a[1] == b[1] {
                q[1] = a[1];
            }
            out.push(q);
        }
    }
    Ok(out)
}

fn ellipse_speed(a: f64, b: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (a * s).hypot(b * c)
}

/// Arclength of `(a cos t, b sin t)` over `[0, t]`.
pub fn ellipse_arc_length(a: f64, b: f64, t: f64) -> f64 {
    let panels = ((t.abs() / (PI / 16.0)).ceil() as usize).max(1);
    let h = t / panels as f64;
    let rule = quadrature::gauss_legendre(12);
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            total += w * 0.5 * h * ellipse_speed(a, b, mid + 0.5 * h * x);
        }
    }
    total
}

fn ellipse_points(a: f64, b: f64, m: usize) -> Result<Vec<Point>> {
    let perimeter = ellipse_arc_length(a, b, TAU);
    let mut out = Vec::with_capacity(m);
    let mut t = 0.0;
    for j in 0..m {
        let target = perimeter * j as f64 / m as f64;
        let mut converged = j == 0;
        for _ in 0..50 {
            if converged {
                break;
            }
            let step = (ellipse_arc_length(a, b, t) - target) / ellipse_speed(a, b, t);
            t -= step;
            converged = step.abs() < 1e-14;
        }
        if !converged {
            return Err(Error::Geometry("ellipse arclength inversion did not converge".into()));
        }
        let (s, c) = t.sin_cos();
        out.push([a * c, b * s]);
        // next guess
        t += TAU / m as f64;
    }
    Ok(out)
}

/// Full problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub shape: ScattererShape,
    /// Refractive index inside the scatterer.
    pub n_inside: f64,
    /// Radius of the truncation circle.
    pub radius: f64,
    /// Highest Fourier mode kept in the truncated DtN map.
    pub dtn_order: u32,
    pub search_region: Rect,
}

impl Problem {
    pub fn new(shape: ScattererShape, n_inside: f64, radius: f64, dtn_order: u32, search_region: Rect) -> Result<Self> {
        let p = Self { shape, n_inside, radius, dtn_order, search_region };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        if !(self.n_inside > 0.0) || !self.n_inside.is_finite() || self.n_inside == 1.0 {
            return Err(Error::Geometry(format!(
                "refractive index must be positive and different from 1, got {}",
                self.n_inside
            )));
        }
        if !(self.radius.is_finite() && self.radius > self.shape.circumradius()) {
            return Err(Error::Geometry(format!(
                "truncation radius {} does not exceed the scatterer circumradius {}",
                self.radius,
                self.shape.circumradius()
            )));
        }
        let r = &self.search_region;
        if r.im_min <= 0.0 && r.im_max >= 0.0 && r.re_min < 0.0 {
            return Err(Error::Geometry(
                "search region touches the branch cut (-inf, 0]".into(),
            ));
        }
        Ok(())
    }

    /// Refractive index at a point.
    pub fn index_at(&self, p: Point) -> f64 {
        match self.shape.classify(p) {
            Location::Inside => self.n_inside,
            _ => 1.0,
        }
    }
}
