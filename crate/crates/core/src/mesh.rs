//! Interface-conforming triangulations of the truncated domain.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{circle_points, project_to_curve, Curve, Location, Point, Problem};

/// Hard cap on the number of vertices a generated mesh may reach.
pub const MAX_VERTICES: usize = 10_000_000;

const MIN_ANGLE_DEG: f64 = 20.0;
const CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexTag {
    Interior,
    OnGamma,
    OnGammaR,
}

impl VertexTag {
    fn code(self) -> u8 {
        match self {
            VertexTag::Interior => 0,
            VertexTag::OnGamma => 1,
            VertexTag::OnGammaR => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(VertexTag::Interior),
            1 => Some(VertexTag::OnGamma),
            2 => Some(VertexTag::OnGammaR),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Outside,
    Inside,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub vertex_tag: Vec<VertexTag>,
    pub element_region: Vec<Region>,
    /// Upper bound on the edge length.
    pub nominal_h: f64,
}

/// Summary statistics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quality {
    pub min_angle_deg: f64,
    pub max_edge: f64,
    pub min_edge: f64,
    pub total_area: f64,
    pub inside_area: f64,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Even-odd point-in-polygon test.
fn inside_polyline(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Constrained Delaunay mesh of the truncation disk with the scatterer
/// boundary and the truncation circle as constrained polylines.
pub fn generate(problem: &Problem, target_h: f64) -> Result<Mesh> {
    problem.validate()?;
    let radius = problem.radius;
    if !(target_h > 0.0 && target_h < radius / 4.0) {
        return Err(Error::Mesh(format!("target h {target_h} must lie in (0, R/4) with R = {radius}")));
    }
    let shape = &problem.shape;
    let gamma = shape.boundary_points(shape.sample_count(target_h))?;
    let outer_count = ((std::f64::consts::TAU * radius / target_h).ceil() as usize).max(8);
    let gamma_r = circle_points(radius, outer_count)?;

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    for poly in [&gamma, &gamma_r] {
        let handles = poly
            .iter()
            .map(|p| cdt.insert(Point2::new(p[0], p[1])))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Mesh(format!("insertion failed: {e:?}")))?;
        for i in 0..handles.len() {
            cdt.add_constraint(handles[i], handles[(i + 1) % handles.len()]);
        }
    }

    // The truncation polygon is convex, so every inner face lies in the domain.
    let max_area = 0.3 * target_h * target_h;
    loop {
        let budget = MAX_VERTICES.saturating_sub(cdt.num_vertices());
        let params = RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG + 1.0))
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(budget)
            .keep_constraint_edges();
        let result = cdt.refine(params);
        if !result.refinement_complete {
            return Err(Error::Mesh(format!("refinement did not converge below {MAX_VERTICES} vertices")));
        }
        let long: Vec<Point2<f64>> = cdt
            .undirected_edges()
            .filter(|e| !e.is_constraint_edge())
            .filter_map(|e| {
                let [a, b] = e.positions();
                let len = (a.x - b.x).hypot(a.y - b.y);
                (len > target_h).then(|| Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)))
            })
            .collect();
        if long.is_empty() {
            break;
        }
        if cdt.num_vertices() + long.len() > MAX_VERTICES {
            return Err(Error::Mesh(format!("mesh exceeds {MAX_VERTICES} vertices")));
        }
        for p in long {
            cdt.insert(p).map_err(|e| Error::Mesh(format!("insertion failed: {e:?}")))?;
        }
    }

    let vertices: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for f in cdt.inner_faces() {
        let [a, b, c] = f.vertices().map(|v| v.fix().index());
        let t = if signed_area(vertices[a], vertices[b], vertices[c]) > 0.0 { [a, b, c] } else { [a, c, b] };
        triangles.push(t);
    }
    let vertex_tag = vertices
        .iter()
        .map(|&p| {
            if (p[0].hypot(p[1]) - radius).abs() <= CURVE_TOL * radius {
                VertexTag::OnGammaR
            } else if shape.classify(p) == Location::OnBoundary {
                VertexTag::OnGamma
            } else {
                VertexTag::Interior
            }
        })
        .collect();
    let element_region = triangles
        .iter()
        .map(|t| {
            let c = centroid(&vertices, t);
            if inside_polyline(&gamma, c) {
                Region::Inside
            } else {
                Region::Outside
            }
        })
        .collect();
    let nominal_h = max_edge(&vertices, &triangles);
    let mesh = Mesh { vertices, triangles, vertex_tag, element_region, nominal_h };
    mesh.check_topology()?;
    Ok(mesh)
}

fn centroid(v: &[Point], t: &[usize; 3]) -> Point {
    [
        (v[t[0]][0] + v[t[1]][0] + v[t[2]][0]) / 3.0,
        (v[t[0]][1] + v[t[1]][1] + v[t[2]][1]) / 3.0,
    ]
}

fn max_edge(v: &[Point], tris: &[[usize; 3]]) -> f64 {
    tris.iter()
        .flat_map(|t| (0..3).map(move |i| dist(v[t[i]], v[t[(i + 1) % 3]])))
        .fold(0.0, f64::max)
}

/// Red refinement: every triangle splits into four. Midpoints of interface
/// edges are snapped to the scatterer boundary and midpoints of boundary
/// edges to the truncation circle.
pub fn refine_uniform(mesh: &Mesh, problem: &Problem) -> Result<Mesh> {
    let interface = mesh.interface_edges();
    let boundary = mesh.boundary_edges();
    let gamma = Curve::Scatterer(problem.shape);
    let gamma_r = Curve::TruncationCircle { radius: problem.radius };

    let mut vertices = mesh.vertices.clone();
    let mut vertex_tag = mesh.vertex_tag.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    let mut element_region = Vec::with_capacity(4 * mesh.triangles.len());

    for (t, &region) in mesh.triangles.iter().zip(&mesh.element_region) {
        let mut mids = [0usize; 3];
        for i in 0..3 {
            let key = edge_key(t[i], t[(i + 1) % 3]);
            mids[i] = match midpoint.get(&key) {
                Some(&m) => m,
                None => {
                    let (a, b) = (vertices[key.0], vertices[key.1]);
                    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                    let (p, tag) = if boundary.contains_key(&key) {
                        (project_to_curve(&gamma_r, mid)?, VertexTag::OnGammaR)
                    } else if interface.contains_key(&key) {
                        (project_to_curve(&gamma, mid)?, VertexTag::OnGamma)
                    } else {
                        (mid, VertexTag::Interior)
                    };
                    vertices.push(p);
                    vertex_tag.push(tag);
                    midpoint.insert(key, vertices.len() - 1);
                    vertices.len() - 1
                }
            };
        }
        let [a, b, c] = *t;
        let [ab, bc, ca] = mids;
        for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            triangles.push(child);
            element_region.push(region);
        }
    }
    for (i, t) in triangles.iter().enumerate() {
        if signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0 {
            return Err(Error::Mesh(format!("child triangle {i} inverted after boundary projection")));
        }
    }
    Ok(Mesh { vertices, triangles, vertex_tag, element_region, nominal_h: 0.5 * mesh.nominal_h })
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Each undirected edge with the number of triangles sharing it.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::with_capacity(3 * self.triangles.len() / 2 + 8);
        for t in &self.triangles {
            for i in 0..3 {
                *edges.entry(edge_key(t[i], t[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn num_edges(&self) -> usize {
        self.edge_counts().len()
    }

    /// Edges on the outer boundary, keyed by sorted endpoints and mapped to the owning triangle.
    pub fn boundary_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut owner: HashMap<(usize, usize), Option<usize>> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let key = edge_key(t[i], t[(i + 1) % 3]);
                owner.entry(key).and_modify(|o| *o = None).or_insert(Some(ti));
            }
        }
        owner.into_iter().filter_map(|(k, o)| o.map(|t| (k, t))).collect()
    }

    /// Edges separating an inside element from an outside one, mapped to the inside element.
    pub fn interface_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut out = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let key = edge_key(t[i], t[(i + 1) % 3]);
                if let Some(other) = seen.insert(key, ti) {
                    if self.element_region[other] != self.element_region[ti] {
                        let inner = if self.element_region[ti] == Region::Inside { ti } else { other };
                        out.insert(key, inner);
                    }
                }
            }
        }
        out
    }

    /// Vertex indices on the truncation circle in counter-clockwise angular order.
    pub fn outer_boundary_vertices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vertices.len()).filter(|&i| self.vertex_tag[i] == VertexTag::OnGammaR).collect();
        idx.sort_by(|&a, &b| {
            let ta = self.vertices[a][1].atan2(self.vertices[a][0]);
            let tb = self.vertices[b][1].atan2(self.vertices[b][0]);
            ta.total_cmp(&tb)
        });
        idx
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Total length of the interface edges.
    pub fn interface_length(&self) -> f64 {
        self.interface_edges().keys().map(|&(a, b)| dist(self.vertices[a], self.vertices[b])).sum()
    }

    pub fn quality(&self) -> Quality {
        let mut min_angle = f64::INFINITY;
        let mut max_e: f64 = 0.0;
        let mut min_e = f64::INFINITY;
        let mut total = 0.0;
        let mut inside = 0.0;
        for (ti, t) in self.triangles.iter().enumerate() {
            let p = t.map(|i| self.vertices[i]);
            let l = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
            for i in 0..3 {
                let (a, b, c) = (l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
                let cos = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(cos.acos().to_degrees());
                max_e = max_e.max(a);
                min_e = min_e.min(a);
            }
            let area = self.triangle_area(ti);
            total += area;
            if self.element_region[ti] == Region::Inside {
                inside += area;
            }
        }
        Quality { min_angle_deg: min_angle, max_edge: max_e, min_edge: min_e, total_area: total, inside_area: inside }
    }

    /// Orientation, conformity and index checks that need no geometry.
    pub fn check_topology(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.vertex_tag.len() != nv || self.element_region.len() != self.triangles.len() {
            return Err(Error::Mesh("tag or region array has the wrong length".into()));
        }
        if self.triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        if !(self.nominal_h > 0.0 && self.nominal_h.is_finite()) {
            return Err(Error::Mesh(format!("invalid nominal h {}", self.nominal_h)));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("triangle {i} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || !(self.triangle_area(i) > 0.0) {
                return Err(Error::DegenerateTriangle(i));
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                *directed.entry((t[i], t[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        if let Some((e, _)) = directed.iter().find(|(_, &c)| c > 1) {
            return Err(Error::Mesh(format!("edge {e:?} is used twice with the same orientation")));
        }
        if let Some((e, c)) = self.edge_counts().into_iter().find(|(_, c)| *c > 2) {
            return Err(Error::Mesh(format!("edge {e:?} is shared by {c} triangles")));
        }
        let mut used = vec![false; nv];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("vertex {v} belongs to no triangle")));
        }
        Ok(())
    }

    /// Full invariant check against the problem geometry.
    pub fn validate(&self, problem: &Problem) -> Result<()> {
        self.check_topology()?;
        let shape = &problem.shape;
        let radius = problem.radius;
        for (i, (&p, &tag)) in self.vertices.iter().zip(&self.vertex_tag).enumerate() {
            match tag {
                VertexTag::OnGamma if shape.boundary_residual(p).abs() > CURVE_TOL => {
                    return Err(Error::Mesh(format!("vertex {i} tagged on the scatterer boundary lies off it")));
                }
                VertexTag::OnGammaR if (p[0].hypot(p[1]) - radius).abs() > CURVE_TOL => {
                    return Err(Error::Mesh(format!("vertex {i} tagged on the truncation circle lies off it")));
                }
                _ => {}
            }
        }
        for (i, t) in self.triangles.iter().enumerate() {
            let expected = match shape.classify(centroid(&self.vertices, t)) {
                Location::Inside => Region::Inside,
                Location::Outside => Region::Outside,
                Location::OnBoundary => return Err(Error::Mesh(format!("centroid of triangle {i} lies on the boundary"))),
            };
            if expected != self.element_region[i] {
                return Err(Error::Mesh(format!("triangle {i} straddles the scatterer boundary")));
            }
        }
        for &(a, b) in self.boundary_edges().keys() {
            if self.vertex_tag[a] != VertexTag::OnGammaR || self.vertex_tag[b] != VertexTag::OnGammaR {
                return Err(Error::Mesh(format!("boundary edge ({a}, {b}) is not on the truncation circle")));
            }
        }
        for &(a, b) in self.interface_edges().keys() {
            if self.vertex_tag[a] != VertexTag::OnGamma || self.vertex_tag[b] != VertexTag::OnGamma {
                return Err(Error::Mesh(format!("interface edge ({a}, {b}) has an endpoint off the scatterer boundary")));
            }
        }
        Ok(())
    }

    /// Text in the RDTN-MESH 1 format.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(64 * (self.vertices.len() + self.triangles.len()));
        s.push_str("RDTN-MESH 1\n");
        let _ = writeln!(s, "{} {} {:.16e}", self.vertices.len(), self.triangles.len(), self.nominal_h);
        for (p, tag) in self.vertices.iter().zip(&self.vertex_tag) {
            let _ = writeln!(s, "{:.16e} {:.16e} {}", p[0], p[1], tag.code());
        }
        for (t, r) in self.triangles.iter().zip(&self.element_region) {
            let code = if *r == Region::Inside { 1 } else { 0 };
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], code);
        }
        s
    }

    /// Parse the RDTN-MESH 1 format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .by_ref()
                .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
                .ok_or_else(|| Error::Parse { line: text.lines().count() + 1, msg: format!("missing {what}") })
        };
        let (ln, header) = next("header")?;
        if header != "RDTN-MESH 1" {
            return Err(Error::Parse { line: ln, msg: format!("expected header 'RDTN-MESH 1', found '{header}'") });
        }
        let (ln, counts) = next("counts line")?;
        let f: Vec<&str> = counts.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse { line: ln, msg: "counts line must be '<vertices> <triangles> <h>'".into() });
        }
        let nv: usize = parse_field(ln, f[0], "vertex count")?;
        let nt: usize = parse_field(ln, f[1], "triangle count")?;
        let nominal_h: f64 = parse_field(ln, f[2], "nominal h")?;

        let mut vertices = Vec::with_capacity(nv);
        let mut vertex_tag = Vec::with_capacity(nv);
        for i in 0..nv {
            let (ln, l) = next(&format!("vertex line {}", i + 1))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse { line: ln, msg: format!("vertex line needs 'x y tag', found '{l}'") });
            }
            let x: f64 = parse_field(ln, f[0], "x")?;
            let y: f64 = parse_field(ln, f[1], "y")?;
            let code: u8 = parse_field(ln, f[2], "tag")?;
            let tag = VertexTag::from_code(code).ok_or_else(|| Error::Parse { line: ln, msg: format!("unknown vertex tag {code}") })?;
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::Parse { line: ln, msg: "non-finite coordinate".into() });
            }
            vertices.push([x, y]);
            vertex_tag.push(tag);
        }
        let mut triangles = Vec::with_capacity(nt);
        let mut element_region = Vec::with_capacity(nt);
        for i in 0..nt {
            let (ln, l) = next(&format!("triangle line {}", i + 1))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::Parse { line: ln, msg: format!("triangle line needs 'i j k region', found '{l}'") });
            }
            let mut t = [0usize; 3];
            for j in 0..3 {
                t[j] = parse_field(ln, f[j], "vertex index")?;
                if t[j] >= nv {
                    return Err(Error::Parse { line: ln, msg: format!("vertex index {} out of range", t[j]) });
                }
            }
            let region = match parse_field::<u8>(ln, f[3], "region")? {
                0 => Region::Outside,
                1 => Region::Inside,
                r => return Err(Error::Parse { line: ln, msg: format!("unknown region {r}") }),
            };
            triangles.push(t);
            element_region.push(region);
        }
        if let Some((ln, l)) = lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
            return Err(Error::Parse { line: ln, msg: format!("unexpected trailing content '{l}'") });
        }
        let mesh = Mesh { vertices, triangles, vertex_tag, element_region, nominal_h };
        mesh.check_topology()?;
        Ok(mesh)
    }

    pub fn export(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn import(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("invalid {what} '{s}'") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScattererShape;
    use crate::Rect;

    fn disk() -> Problem {
        Problem::new(ScattererShape::Disk { radius: 1.0 }, 4.0, 1.25, 10, Rect::default_window()).unwrap()
    }

    #[test]
    fn rejects_large_h() {
        assert!(matches!(generate(&disk(), 0.4), Err(Error::Mesh(_))));
    }

    #[test]
    fn coarse_disk_is_valid() {
        let p = disk();
        let m = generate(&p, 0.04 * std::f64::consts::PI).unwrap();
        m.validate(&p).unwrap();
        let q = m.quality();
        assert!(q.min_angle_deg >= 20.0, "{q:?}");
        assert!(m.nominal_h <= 0.04 * std::f64::consts::PI);
    }

    #[test]
    fn header_mismatch_reports_line_one() {
        let e = Mesh::from_text("RDTN-MESH 2\n0 0 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn out_of_range_index() {
        let text = "RDTN-MESH 1\n3 1 1.0\n0 0 0\n1 0 0\n0 1 0\n0 1 3 0\n";
        assert!(matches!(Mesh::from_text(text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn clockwise_triangle_is_degenerate() {
        let text = "RDTN-MESH 1\n3 1 1.0\n0 0 0\n1 0 0\n0 1 0\n0 2 1 0\n";
        assert!(matches!(Mesh::from_text(text), Err(Error::DegenerateTriangle(0))));
    }

    #[test]
    fn polyline_containment() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(inside_polyline(&sq, [0.5, 0.5]));
        assert!(!inside_polyline(&sq, [1.5, 0.5]));
    }
}
