use std::f64::consts::PI;

use proptest::prelude::*;
use rdtn::geometry::{Problem, ScattererShape};
use rdtn::mesh::{generate, refine_uniform, Mesh, Region, VertexTag};
use rdtn::{Error, Rect};

const H1: f64 = 0.04 * PI;

fn problem(shape: ScattererShape, radius: f64) -> Problem {
    Problem::new(shape, 4.0, radius, 20, Rect::default_window()).unwrap()
}

fn geometries() -> Vec<(&'static str, Problem)> {
    vec![
        ("disk", problem(ScattererShape::Disk { radius: 1.0 }, 1.25)),
        ("square", problem(ScattererShape::Square { side: 1.0, center: [0.0, 0.0] }, 0.8)),
        ("l_shape", problem(ScattererShape::LShape { outer_side: 1.0 }, 0.8)),
        ("ellipse", problem(ScattererShape::Ellipse { semi_major: 1.2, semi_minor: 0.8 }, 1.3)),
    ]
}

#[test]
fn hierarchy_keeps_invariants_on_every_geometry() {
    for (name, p) in geometries() {
        let m1 = generate(&p, H1).unwrap();
        m1.validate(&p).unwrap_or_else(|e| panic!("{name} h1: {e}"));
        let q1 = m1.quality();
        assert!(q1.min_angle_deg >= 20.0, "{name}: {q1:?}");
        assert!(q1.max_edge <= H1 && (m1.nominal_h - q1.max_edge).abs() < 1e-15, "{name}: {q1:?}");
        let m2 = refine_uniform(&m1, &p).unwrap();
        m2.validate(&p).unwrap_or_else(|e| panic!("{name} h2: {e}"));
        let m3 = refine_uniform(&m2, &p).unwrap();
        m3.validate(&p).unwrap_or_else(|e| panic!("{name} h3: {e}"));
        let q3 = m3.quality();
        assert!(q3.min_angle_deg >= 15.0, "{name}: {q3:?}");
        assert!((m3.nominal_h - m1.nominal_h / 4.0).abs() < 1e-15);
        let domain = PI * p.radius * p.radius;
        for m in [&m1, &m2, &m3] {
            let q = m.quality();
            assert!((q.total_area - domain).abs() < 5e-3 * domain, "{name}: {q:?}");
            assert!((q.inside_area - p.shape.area()).abs() < 5e-3 * p.shape.area(), "{name}: {q:?}");
        }
    }
}

#[test]
fn disk_coarse_mesh_size_matches_target() {
    let (_, p) = &geometries()[0];
    let m = generate(p, H1).unwrap();
    assert!(m.nominal_h <= H1 && m.nominal_h > 0.8 * H1, "{}", m.nominal_h);
}

#[test]
fn square_inside_area() {
    let (_, p) = &geometries()[1];
    let m = generate(p, H1).unwrap();
    let q = m.quality();
    assert!((q.inside_area - 1.0).abs() < 5e-3, "{q:?}");
    // Square boundary is resolved exactly.
    assert!((q.inside_area - 1.0).abs() < 1e-12, "{q:?}");
}

#[test]
fn red_refinement_counts() {
    let (_, p) = &geometries()[0];
    let m = generate(p, H1).unwrap();
    let r = refine_uniform(&m, p).unwrap();
    assert_eq!(r.num_vertices(), m.num_vertices() + m.num_edges());
    assert_eq!(r.num_triangles(), 4 * m.num_triangles());
    assert_eq!(r.boundary_edges().len(), 2 * m.boundary_edges().len());
    let on_r = |mesh: &Mesh| mesh.vertex_tag.iter().filter(|t| **t == VertexTag::OnGammaR).count();
    assert_eq!(on_r(&r), 2 * on_r(&m));
    let rr = refine_uniform(&r, p).unwrap();
    assert!((rr.nominal_h - m.nominal_h / 4.0).abs() < 1e-15);
}

#[test]
fn interface_length_converges_quadratically() {
    let (_, p) = &geometries()[0];
    let mut m = generate(p, H1).unwrap();
    let mut errs = Vec::new();
    for _ in 0..3 {
        errs.push((2.0 * PI - m.interface_length()).abs());
        m = refine_uniform(&m, p).unwrap();
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{errs:?}");
    }
}

#[test]
fn generation_is_deterministic() {
    let (_, p) = &geometries()[2];
    assert_eq!(generate(p, H1).unwrap(), generate(p, H1).unwrap());
}

#[test]
fn round_trip_through_file() {
    let (_, p) = &geometries()[3];
    let m = generate(p, H1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ellipse.mesh");
    m.export(&path).unwrap();
    assert_eq!(Mesh::import(&path).unwrap(), m);
}

const HAND_SQUARE: &str = "RDTN-MESH 1
5 4 1.0
-0.5 -0.5 2
0.5 -0.5 2
0.5 0.5 2
-0.5 0.5 2
0 0 0
0 1 4 0
1 2 4 0
2 3 4 0
3 0 4 0
";

#[test]
fn hand_written_square_mesh() {
    let m = Mesh::from_text(HAND_SQUARE).unwrap();
    assert_eq!(m.num_triangles(), 4);
    assert_eq!(m.boundary_edges().len(), 4);
    assert!(m.interface_edges().is_empty());
    assert!((m.quality().total_area - 1.0).abs() < 1e-15);
    assert!(m.element_region.iter().all(|r| *r == Region::Outside));
}

#[test]
fn missing_vertex_line_is_reported_where_it_is_missing() {
    let text: Vec<&str> = HAND_SQUARE.lines().collect();
    let mut broken = text[..6].to_vec();
    broken.extend_from_slice(&text[7..]);
    let err = Mesh::from_text(&broken.join("\n")).unwrap_err();
    // The first triangle line is read as the fifth vertex and rejected there.
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 7),
        e => panic!("{e}"),
    }
}

#[test]
fn truncated_file() {
    let text: String = HAND_SQUARE.lines().take(4).map(|l| format!("{l}\n")).collect();
    assert!(matches!(Mesh::from_text(&text), Err(Error::Parse { line: 5, .. })));
}

#[test]
fn shared_edge_used_three_times_is_rejected() {
    let text = "RDTN-MESH 1
4 3 1.0
0 0 0
1 0 0
0 1 0
0 -1 0
0 1 2 0
1 0 3 0
0 1 2 0
";
    assert!(matches!(Mesh::from_text(text), Err(Error::Mesh(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn text_round_trip_is_bitwise(h in 0.12f64..0.3, side in 0.5f64..1.2) {
        let p = Problem::new(ScattererShape::Square { side, center: [0.0, 0.0] }, 0.25, side, 10, Rect::default_window()).unwrap();
        let m = generate(&p, h.min(side / 4.1)).unwrap();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        for (a, b) in m.vertices.iter().zip(&back.vertices) {
            prop_assert_eq!(a[0].to_bits(), b[0].to_bits());
            prop_assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
        prop_assert_eq!(back, m);
    }
}
