use num_complex::Complex64;
use rdtn::oracle::*;
use rdtn::{specfun, Rect};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn series_fixtures() {
    let j2 = highprec_j(2, c(1.0, 1.0)).unwrap();
    assert!(rel(j2, c(0.04157988694396212208283, 0.2473976415133063105106)) < 1e-16);
    let y2 = highprec_y(2, c(1.0, 1.0)).unwrap();
    assert!(rel(y2, c(-0.4733680205344933686641, 0.5773369575804950979158)) < 1e-16);
    let t = highprec_bessel(5, c(3.0, -2.0)).unwrap();
    assert!(rel(t.h1, c(0.21772804916419962207, 0.10207623177372933114)) < 1e-16);
    let j15 = highprec_j(15, c(0.7, 0.2)).unwrap();
    assert!(rel(j15, c(-1.0227854429485537002e-19, -1.6975108369176373867e-19)) < 1e-16);
    let t = highprec_bessel(10, c(8.0, -6.0)).unwrap();
    assert!(rel(t.h1, c(-1.7836362936395803478, 3.0379359307403427683)) < 1e-15);
    let j7 = highprec_j(7, c(12.0, -3.0)).unwrap();
    assert!(rel(j7, c(-1.0291866584022910917, 1.054076853063647404)) < 1e-15);
}

#[test]
fn determinant_fixture() {
    let w = w_det(1, c(2.0, -0.2), 4.0).unwrap();
    assert!(rel(w, c(-0.95779362056714290701, 0.19709669691498280726)) < 1e-14);
}

#[test]
fn first_listed_pole_is_a_near_zero() {
    let k = c(0.4367, -0.3039);
    let here = w_det(0, k, 4.0).unwrap().norm();
    let away = w_det(0, k + 0.1, 4.0).unwrap().norm();
    assert!(here < 1e-2 * away);
}

#[test]
fn determinant_is_holomorphic() {
    let center = c(1.5, -1.0);
    let m = 128;
    let mut acc = c(0.0, 0.0);
    let mut mag = 0.0;
    for j in 0..m {
        let e = Complex64::from_polar(1.0, std::f64::consts::TAU * (j as f64 + 0.5) / m as f64);
        let w = w_det(2, center + e * 0.3, 4.0).unwrap();
        acc += w * e;
        mag += w.norm();
    }
    assert!(acc.norm() / mag < 1e-8);
}

/// Exact roots frozen from an independent 30-digit root finder.
const EXACT_INDEX_4: [(u32, f64, f64); 16] = [
    (0, 0.4366775985, -0.3039464867),
    (1, 1.1155401254, -0.2396276786),
    (2, 1.7562629143, -0.1743519735),
    (2, 0.4508906015, -1.7933865991),
    (0, 1.9777011545, -0.2790973089),
    (3, 2.3840470537, -0.1216959150),
    (3, 1.3477179135, -2.2113817538),
    (1, 2.7167793688, -0.2665038912),
    (4, 3.0025726023, -0.0817806760),
    (4, 0.4439820313, -3.1357681712),
    (4, 2.2485360684, -2.5225605004),
    (2, 3.4043681223, -0.2450555622),
    (0, 3.5427422812, -0.2762732464),
    (5, 3.6124788760, -0.0528871786),
    (5, 1.3303030077, -3.6490516982),
    (5, 3.1565903222, -2.7735132399),
];

const EXACT_INDEX_QUARTER: [(u32, f64, f64); 8] = [
    (1, 0.4597003014, -1.3756295403),
    (2, 1.3696489287, -1.7654020136),
    (3, 0.4474709060, -2.7228497666),
    (3, 2.2829989176, -2.0531992507),
    (4, 1.3396123340, -3.2255985058),
    (4, 3.2026607950, -2.2869728492),
    (5, 2.2336782434, -3.6373718799),
    (6, 3.1317894870, -3.9903862456),
];

fn check_against(index: f64, expected: &[(u32, f64, f64)]) {
    let found = disk_exact_poles(index, 12, &Rect::default_window()).unwrap();
    assert!(found.unresolved.is_empty(), "{:?}", found.unresolved);
    assert_eq!(found.poles.len(), expected.len());
    for &(l, re, im) in expected {
        let k = c(re, im);
        let hit = found
            .poles
            .iter()
            .find(|p| (p.k - k).norm() < 1e-9)
            .unwrap_or_else(|| panic!("missing root {k}"));
        assert_eq!(hit.angular_order, l);
        assert_eq!(hit.multiplicity, if l == 0 { 1 } else { 2 });
    }
    for p in &found.poles {
        let here = w_det(p.angular_order, p.k, index).unwrap().norm();
        let away = w_det(p.angular_order, p.k + 0.1, index).unwrap().norm();
        assert!(here < 1e-10 * away);
        assert!(p.k.im < 0.0);
    }
}

#[test]
fn exact_roots_index_4() {
    check_against(4.0, &EXACT_INDEX_4);
}

#[test]
fn exact_roots_index_quarter() {
    check_against(0.25, &EXACT_INDEX_QUARTER);
}

#[test]
fn next_order_has_no_scan_minima_in_window() {
    for index in [4.0, 0.25] {
        let roots = disk_exact_poles(index, 13, &Rect::default_window()).unwrap();
        assert!(roots.poles.iter().all(|p| p.angular_order <= 12));
        let window = Rect::default_window();
        let interior: Vec<_> = scan_minima(13, index, &window)
            .into_iter()
            .filter(|k| window.contains_inset(*k, 0.01))
            .collect();
        assert!(interior.is_empty(), "{interior:?}");
    }
}

#[test]
fn nothing_above_the_real_axis() {
    let upper = Rect::new(0.5, 4.0, 0.5, 3.0).unwrap();
    assert!(disk_exact_poles(4.0, 12, &upper).unwrap().poles.is_empty());
}

#[test]
fn every_root_is_simple_for_its_mode() {
    let found = disk_exact_poles(4.0, 12, &Rect::default_window()).unwrap();
    for p in &found.poles {
        let n = winding_number(p.angular_order, 4.0, p.k, 0.01, 64).unwrap();
        assert!((n - 1.0).norm() < 1e-6, "{p:?} {n}");
    }
}

/// Reference values at the finest mesh sit within 5e-4 of the exact roots.
#[test]
fn reference_fine_mesh_values_index_4() {
    let listed = [
        c(0.4367, -0.3039),
        c(1.1155, -0.2396),
        c(1.7563, -0.1744),
        c(0.4509, -1.7933),
        c(1.9778, -0.2791),
        c(2.3841, -0.1217),
        c(1.3476, -2.2112),
    ];
    let found = disk_exact_poles(4.0, 12, &Rect::default_window()).unwrap();
    for k in listed {
        let d = found.poles.iter().map(|p| (p.k - k).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 5e-4, "{k}: {d:e}");
    }
}

#[test]
fn reference_fine_mesh_values_index_quarter() {
    let listed = [
        c(0.4597, -1.3756),
        c(1.3697, -1.7654),
        c(0.4475, -2.7233),
        c(2.2830, -2.0533),
        c(1.3400, -3.2270),
        c(3.2028, -2.2873),
    ];
    let found = disk_exact_poles(0.25, 12, &Rect::default_window()).unwrap();
    let mut misses = Vec::new();
    for k in listed {
        let d = found.poles.iter().map(|p| (p.k - k).norm()).fold(f64::INFINITY, f64::min);
        if d >= 5e-4 {
            misses.push((k, d));
        }
    }
    assert!(misses.is_empty(), "listed values farther than 5e-4 from every exact root: {misses:?}");
}

/// The production Bessel layer against the series oracle.
#[test]
fn specfun_agrees_with_series_oracle() {
    for n in [0u32, 1, 2, 4, 7, 12, 20] {
        for &r in &[0.2, 0.9, 2.5, 6.0, 10.0, 14.5] {
            for a in 0..8 {
                let z = Complex64::from_polar(r, -3.0 + 0.8 * a as f64);
                let reference = highprec_bessel(n, z).unwrap();
                let j = specfun::bessel_j(n, z).unwrap();
                let y = specfun::bessel_y(n, z).unwrap();
                let h = specfun::hankel1(n, z).unwrap();
                let env = reference.j.norm().max(reference.y.norm());
                assert!((j - reference.j).norm() < 1e-10 * reference.j.norm().max(1e-300), "J n={n} z={z}");
                assert!((y - reference.y).norm() < 1e-10 * env, "Y n={n} z={z}");
                assert!((h - reference.h1).norm() < 1e-10 * reference.h1.norm(), "H n={n} z={z}");
            }
        }
    }
}
