//! Contour-integral eigensolver for `B(k) u = 0`.
//!
//! Eigenvalues are localized with a quadtree of spectral indicators, then
//! extracted from Beyn moments on circles around clusters of surviving boxes.

use std::f64::consts::PI;

use faer::{c64, Mat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{sparse_apply, sparse_inf_norm, Factorization, OperatorFunction};
use crate::error::{Error, Result};
use crate::Rect;

/// Tunables of the eigensolver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub quad_nodes_localize: usize,
    pub quad_nodes_extract: usize,
    /// Number of random probe columns.
    pub probes: usize,
    /// Relative singular value cutoff for the moment matrix.
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub max_depth: u32,
    pub indicator_threshold: f64,
    pub rng_seed: u64,
    /// Nodes on the small circles used to follow poles onto a finer mesh.
    pub track_nodes: usize,
    /// Upper bound on the radius of a tracking circle.
    pub track_radius: f64,
    /// Estimates closer than this are reported as one pole of higher multiplicity.
    pub pair_tol: f64,
    /// Number of mesh levels, from the coarsest, searched globally in a
    /// multilevel run; finer levels only follow known poles.
    pub search_levels: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            quad_nodes_localize: 16,
            quad_nodes_extract: 64,
            probes: 24,
            rank_tol: 1e-8,
            residual_tol: 1e-6,
            max_depth: 6,
            indicator_threshold: 1e-2,
            rng_seed: 20_240_917,
            track_nodes: 16,
            track_radius: 0.05,
            pair_tol: 2e-2,
            search_levels: 2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("solver: {what}")));
        if self.quad_nodes_localize == 0 || self.quad_nodes_extract == 0 || self.probes == 0 || self.track_nodes == 0 {
            return bad("node and probe counts must be positive");
        }
        if self.quad_nodes_extract < 2 * self.quad_nodes_localize {
            return bad("quad_nodes_extract must be at least twice quad_nodes_localize");
        }
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
            ("indicator_threshold", self.indicator_threshold),
            ("track_radius", self.track_radius),
            ("pair_tol", self.pair_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive, got {v}"));
            }
        }
        if self.search_levels == 0 {
            return bad("search_levels must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        Ok(())
    }
}

/// Circle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
}

impl Contour {
    pub fn contains(&self, k: Complex64) -> bool {
        (k - self.center).norm() < self.radius
    }

    pub fn around(rect: &Rect) -> Self {
        Self { center: rect.center(), radius: rect.circumradius() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub rect: Rect,
    pub depth: u32,
}

/// An extracted pole, or a group of nearby extracted eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleEstimate {
    /// Mean of the grouped eigenvalues.
    pub k: Complex64,
    pub multiplicity: usize,
    /// Largest relative residual `‖B(k)v‖ / (‖B‖∞ ‖v‖)` over the group.
    pub residual: f64,
    /// Largest distance of a grouped eigenvalue from the mean.
    pub spread: f64,
    /// Individual eigenvalues in the group, sorted.
    pub members: Vec<Complex64>,
    pub contour_id: usize,
    pub mesh_level: usize,
}

fn cnorm(z: Complex64) -> f64 {
    z.norm()
}

fn sort_key(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    cnorm(*a).total_cmp(&cnorm(*b)).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im))
}

/// Deterministic complex probe block with unit-norm columns.
fn probe_block(n: usize, cols: usize, seed: u64) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Mat::<c64>::from_fn(n, cols, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    for j in 0..cols {
        let s: f64 = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            v[(i, j)] /= s;
        }
    }
    v
}

/// Factorization at the `j`-th of `n` trapezoid nodes. A node that trips the
/// Hankel guard moves by half a spacing along the circle, a node that hits an
/// exact pivot breakdown moves outward by `1e-8` radii.
fn factor_node(op: &OperatorFunction, contour: &Contour, j: usize, n: usize) -> Result<(Complex64, Factorization)> {
    let angle = 2.0 * PI * (j as f64 + 0.5) / n as f64;
    let at = |theta: f64, scale: f64| contour.center + Complex64::from_polar(contour.radius * scale, theta);
    let z = at(angle, 1.0);
    match op.factor(z) {
        Ok(f) => Ok((z, f)),
        Err(Error::Dtn { .. }) => {
            let z = at(angle + PI / n as f64, 1.0);
            Ok((z, op.factor(z)?))
        }
        Err(Error::Singular(_)) => {
            let z = at(angle, 1.0 + 1e-8);
            Ok((z, op.factor(z)?))
        }
        Err(e) => Err(e),
    }
}

/// Per-node results for a block of right-hand sides, in node order, without
/// holding more than one chunk of solutions in memory.
fn for_each_node<T, F>(op: &OperatorFunction, contour: &Contour, nodes: usize, rhs: &Mat<c64>, mut sink: F) -> Result<Vec<T>>
where
    T: Send,
    F: FnMut(usize, Complex64, Complex64, &Mat<c64>) -> T,
{
    let chunk = rayon::current_num_threads().max(1);
    let mut out = Vec::with_capacity(nodes);
    let mut start = 0;
    while start < nodes {
        let end = (start + chunk).min(nodes);
        let solved: Vec<Result<(Complex64, Mat<c64>)>> = (start..end)
            .into_par_iter()
            .map(|j| {
                let (z, f) = factor_node(op, contour, j, nodes)?;
                Ok((z, f.solve_many(rhs.as_ref())?))
            })
            .collect();
        for (offset, r) in solved.into_iter().enumerate() {
            let (z, x) = r?;
            let weight = (z - contour.center) / nodes as f64;
            out.push(sink(start + offset, z, weight, &x));
        }
        start = end;
    }
    Ok(out)
}

fn frobenius(m: &Mat<c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Spectral indicator on `contour`: the norm of the trapezoid approximation of
/// the resolvent projection of a seeded random vector, divided by `radius`
/// times the mean norm of the resolvent samples. The value lies in `[0, 1]`.
pub fn indicator_on(contour: &Contour, op: &OperatorFunction, cfg: &SolverConfig) -> Result<f64> {
    let f = probe_block(op.dim(), 1, cfg.rng_seed);
    let mut acc = Mat::<c64>::zeros(op.dim(), 1);
    let mut mean = 0.0;
    for_each_node(op, contour, cfg.quad_nodes_localize, &f, |_, _, w, x| {
        for i in 0..x.nrows() {
            acc[(i, 0)] += x[(i, 0)] * w;
        }
        mean += frobenius(x) / cfg.quad_nodes_localize as f64;
    })?;
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::Solver("resolvent samples vanished or overflowed".into()));
    }
    Ok(frobenius(&acc) / (contour.radius * mean))
}

pub fn indicator(b: &SearchBox, op: &OperatorFunction, cfg: &SolverConfig) -> Result<f64> {
    indicator_on(&Contour::around(&b.rect), op, cfg)
}

fn inflate(r: &Rect, frac: f64) -> Rect {
    let dx = frac * r.width();
    let dy = frac * r.height();
    Rect { re_min: r.re_min - dx, re_max: r.re_max + dx, im_min: r.im_min - dy, im_max: r.im_max + dy }
}

fn clip(r: &Rect, to: &Rect) -> Rect {
    Rect {
        re_min: r.re_min.max(to.re_min),
        re_max: r.re_max.min(to.re_max),
        im_min: r.im_min.max(to.im_min),
        im_max: r.im_max.min(to.im_max),
    }
}

/// Quadtree subdivision of `region`. Returns the boxes at `max_depth` whose
/// indicator reaches the threshold, each grown by 10% per side and clipped to
/// the region.
pub fn localize(region: &Rect, op: &OperatorFunction, cfg: &SolverConfig) -> Result<Vec<SearchBox>> {
    cfg.validate()?;
    let mut frontier = vec![SearchBox { rect: *region, depth: 0 }];
    let mut leaves = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for b in frontier {
            if indicator(&b, op, cfg)? < cfg.indicator_threshold {
                continue;
            }
            if b.depth >= cfg.max_depth {
                leaves.push(SearchBox { rect: clip(&inflate(&b.rect, 0.1), region), depth: b.depth });
            } else {
                next.extend(b.rect.quadrants().into_iter().map(|rect| SearchBox { rect, depth: b.depth + 1 }));
            }
        }
        frontier = next;
    }
    Ok(leaves)
}

fn overlaps(a: &Rect, b: &Rect) -> bool {
    a.re_min <= b.re_max && b.re_min <= a.re_max && a.im_min <= b.im_max && b.im_min <= a.im_max
}

/// Groups overlapping boxes and returns the bounding rectangle of each group,
/// ordered by the position of their centers.
pub fn merge_boxes(boxes: &[SearchBox]) -> Vec<Rect> {
    let n = boxes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if overlaps(&boxes[i].rect, &boxes[j].rect) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Rect)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let r = boxes[i].rect;
        match groups.iter_mut().find(|(g, _)| *g == root) {
            Some((_, acc)) => {
                acc.re_min = acc.re_min.min(r.re_min);
                acc.re_max = acc.re_max.max(r.re_max);
                acc.im_min = acc.im_min.min(r.im_min);
                acc.im_max = acc.im_max.max(r.im_max);
            }
            None => groups.push((root, r)),
        }
    }
    let mut rects: Vec<Rect> = groups.into_iter().map(|(_, r)| r).collect();
    rects.sort_by(|a, b| sort_key(&a.center(), &b.center()));
    rects
}

/// One eigenvalue of the reduced pencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub k: Complex64,
    pub residual: f64,
}

/// Beyn extraction on `contour` with `nodes` trapezoid points. Returns the
/// accepted eigenvalues strictly inside the circle.
pub fn beyn_eigenvalues(contour: &Contour, op: &OperatorFunction, cfg: &SolverConfig, nodes: usize) -> Result<Vec<Eigenvalue>> {
    match beyn_with_probes(contour, op, cfg, nodes, cfg.probes)? {
        Some(v) => Ok(v),
        None => beyn_with_probes(contour, op, cfg, nodes, 2 * cfg.probes)?.ok_or_else(|| {
            Error::Solver(format!(
                "contour at {} radius {} holds at least {} eigenvalues; increase probes",
                contour.center,
                contour.radius,
                2 * cfg.probes
            ))
        }),
    }
}

fn beyn_with_probes(
    contour: &Contour,
    op: &OperatorFunction,
    cfg: &SolverConfig,
    nodes: usize,
    probes: usize,
) -> Result<Option<Vec<Eigenvalue>>> {
    let n = op.dim();
    let probes = probes.min(n);
    let v = probe_block(n, probes, cfg.rng_seed);
    let mut a0 = Mat::<c64>::zeros(n, probes);
    let mut a1 = Mat::<c64>::zeros(n, probes);
    let mut scale: f64 = 0.0;
    for_each_node(op, contour, nodes, &v, |_, z, w, x| {
        // First moment in the scaled variable (z - c) / r.
        let zeta = (z - contour.center) / contour.radius;
        let w1 = w * zeta;
        for j in 0..probes {
            for i in 0..n {
                let xi = x[(i, j)];
                a0[(i, j)] += xi * w;
                a1[(i, j)] += xi * w1;
            }
        }
        scale = scale.max(frobenius(x));
    })?;
    let scale = contour.radius * scale / (probes as f64).sqrt();
    let svd = a0.thin_svd().map_err(|e| Error::Solver(format!("moment SVD: {e:?}")))?;
    let s = svd.S().column_vector();
    let rank = (0..s.nrows()).filter(|&i| s[i].re > cfg.rank_tol * scale).count();
    if rank == 0 {
        return Ok(Some(Vec::new()));
    }
    if rank >= probes {
        return Ok(None);
    }
    let u = svd.U().subcols(0, rank).to_owned();
    let wv = svd.V().subcols(0, rank).to_owned();
    // Reduced matrix Uᴴ A1 W Σ⁻¹.
    let mut reduced = u.adjoint() * &a1 * &wv;
    for j in 0..rank {
        let inv = 1.0 / s[j].re;
        for i in 0..rank {
            reduced[(i, j)] *= inv;
        }
    }
    let eig = reduced.eigen().map_err(|e| Error::Solver(format!("reduced eigenproblem: {e:?}")))?;
    let mut out = Vec::new();
    for j in 0..rank {
        let mu = eig.S()[j];
        if !(mu.norm() < 1.0) {
            continue;
        }
        let k = contour.center + mu * contour.radius;
        let vec: Vec<Complex64> = (0..n)
            .map(|i| (0..rank).map(|l| u[(i, l)] * eig.U()[(l, j)]).sum())
            .collect();
        let residual = match relative_residual(op, k, &vec) {
            Ok(r) => r,
            Err(Error::Dtn { .. }) | Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        if residual <= cfg.residual_tol {
            out.push(Eigenvalue { k, residual });
        }
    }
    out.sort_by(|a, b| sort_key(&a.k, &b.k));
    Ok(Some(out))
}

/// `‖B(k)v‖ / (‖B(k)‖∞ ‖v‖)`.
pub fn relative_residual(op: &OperatorFunction, k: Complex64, v: &[Complex64]) -> Result<f64> {
    let b = op.evaluate(k)?;
    let r = sparse_apply(&b, v);
    let nr = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(nr / (sparse_inf_norm(&b) * nv))
}

/// Groups eigenvalues closer than `tol` (single linkage).
fn group(eigs: &[Eigenvalue], tol: f64) -> Vec<Vec<Eigenvalue>> {
    let mut groups: Vec<Vec<Eigenvalue>> = Vec::new();
    for e in eigs {
        let hits: Vec<usize> = (0..groups.len())
            .filter(|&g| groups[g].iter().any(|m| (m.k - e.k).norm() < tol))
            .collect();
        match hits.split_first() {
            None => groups.push(vec![*e]),
            Some((&first, rest)) => {
                for &g in rest.iter().rev() {
                    let moved = groups.remove(g);
                    groups[first].extend(moved);
                }
                groups[first].push(*e);
            }
        }
    }
    groups
}

fn summarize(members: Vec<Eigenvalue>, contour_id: usize, mesh_level: usize) -> PoleEstimate {
    let mut ks: Vec<Complex64> = members.iter().map(|e| e.k).collect();
    ks.sort_by(sort_key);
    let mean = ks.iter().sum::<Complex64>() / ks.len() as f64;
    PoleEstimate {
        k: mean,
        multiplicity: ks.len(),
        residual: members.iter().map(|e| e.residual).fold(0.0, f64::max),
        spread: ks.iter().map(|k| (k - mean).norm()).fold(0.0, f64::max),
        members: ks,
        contour_id,
        mesh_level,
    }
}

/// Beyn extraction with multiplicities counted among eigenvalues that agree
/// to `1e-6` radii.
pub fn beyn_extract(contour: &Contour, op: &OperatorFunction, cfg: &SolverConfig, mesh_level: usize) -> Result<Vec<PoleEstimate>> {
    let eigs = beyn_eigenvalues(contour, op, cfg, cfg.quad_nodes_extract)?;
    let mut out: Vec<PoleEstimate> = group(&eigs, 1e-6 * contour.radius).into_iter().map(|g| summarize(g, 0, mesh_level)).collect();
    out.sort_by(|a, b| sort_key(&a.k, &b.k));
    Ok(out)
}

/// Drops eigenvalues found twice on overlapping contours, keeping the one
/// with the smaller residual. Matches are one-to-one and only across
/// different contours, so close pairs seen by a single contour survive.
fn dedup(mut eigs: Vec<(usize, Eigenvalue)>) -> Vec<(usize, Eigenvalue)> {
    eigs.sort_by(|a, b| a.1.residual.total_cmp(&b.1.residual).then(sort_key(&a.1.k, &b.1.k)));
    let mut kept: Vec<(usize, Eigenvalue, bool)> = Vec::new();
    for (id, e) in eigs {
        let twin = kept
            .iter()
            .position(|(kid, k, used)| *kid != id && !*used && (k.k - e.k).norm() < 1e-5 * (1.0 + k.k.norm()));
        match twin {
            Some(t) => kept[t].2 = true,
            None => kept.push((id, e, false)),
        }
    }
    kept.into_iter().map(|(id, e, _)| (id, e)).collect()
}

fn assemble_estimates(eigs: Vec<(usize, Eigenvalue)>, cfg: &SolverConfig, mesh_level: usize) -> Vec<PoleEstimate> {
    let eigs = dedup(eigs);
    let plain: Vec<Eigenvalue> = eigs.iter().map(|(_, e)| *e).collect();
    let mut out: Vec<PoleEstimate> = group(&plain, cfg.pair_tol)
        .into_iter()
        .map(|g| {
            let id = eigs.iter().find(|(_, e)| e.k == g[0].k).map(|(i, _)| *i).unwrap_or(0);
            summarize(g, id, mesh_level)
        })
        .collect();
    out.sort_by(|a, b| sort_key(&a.k, &b.k));
    out
}

/// Extraction circles for a search region: localization, then one circle per
/// merged box group, inflated by 15%.
pub fn extraction_contours(region: &Rect, op: &OperatorFunction, cfg: &SolverConfig) -> Result<Vec<Contour>> {
    let boxes = localize(region, op, cfg)?;
    Ok(merge_boxes(&boxes)
        .iter()
        .map(|r| Contour { center: r.center(), radius: 1.15 * r.circumradius() })
        .collect())
}

/// All poles in `region` on one discretization.
pub fn solve_region(region: &Rect, op: &OperatorFunction, cfg: &SolverConfig, mesh_level: usize) -> Result<Vec<PoleEstimate>> {
    let contours = extraction_contours(region, op, cfg)?;
    let mut eigs = Vec::new();
    for (id, c) in contours.iter().enumerate() {
        for e in beyn_eigenvalues(c, op, cfg, cfg.quad_nodes_extract)? {
            if region.contains(e.k) {
                eigs.push((id, e));
            }
        }
    }
    Ok(assemble_estimates(eigs, cfg, mesh_level))
}

/// Follows poles from a coarser discretization onto `op` with one small
/// circle per pole. The circle radius is capped by `track_radius` and by
/// 45% of the distance to the nearest other pole, and doubled up to that cap
/// while the multiplicity is not recovered.
pub fn track(previous: &[PoleEstimate], region: &Rect, op: &OperatorFunction, cfg: &SolverConfig, mesh_level: usize) -> Result<Vec<PoleEstimate>> {
    cfg.validate()?;
    let mut eigs = Vec::new();
    for (id, p) in previous.iter().enumerate() {
        let nearest = previous
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != id)
            .map(|(_, q)| (q.k - p.k).norm())
            .fold(f64::INFINITY, f64::min);
        let cap = (0.45 * nearest).min(region.circumradius());
        let mut radius = cfg.track_radius.max(4.0 * p.spread).min(cap);
        let mut found;
        loop {
            let contour = Contour { center: p.k, radius };
            found = beyn_eigenvalues(&contour, op, cfg, cfg.track_nodes)?;
            if found.len() >= p.multiplicity || radius >= cap {
                break;
            }
            radius = (2.0 * radius).min(cap);
        }
        eigs.extend(found.into_iter().filter(|e| region.contains(e.k)).map(|e| (id, e)));
    }
    Ok(assemble_estimates(eigs, cfg, mesh_level))
}

/// Sum of multiplicities.
pub fn total_multiplicity(poles: &[PoleEstimate]) -> usize {
    poles.iter().map(|p| p.multiplicity).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(re: f64, im: f64) -> Eigenvalue {
        Eigenvalue { k: Complex64::new(re, im), residual: 1e-9 }
    }

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn extraction_nodes_must_double_localization_nodes() {
        let cfg = SolverConfig { quad_nodes_extract: 20, ..SolverConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn grouping_is_transitive() {
        let g = group(&[ev(0.0, 0.0), ev(0.015, 0.0), ev(0.03, 0.0), ev(1.0, 0.0)], 0.02);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].len(), 3);
    }

    #[test]
    fn dedup_keeps_smaller_residual() {
        let a = Eigenvalue { k: Complex64::new(1.0, -1.0), residual: 1e-8 };
        let b = Eigenvalue { k: Complex64::new(1.0 + 1e-7, -1.0), residual: 1e-10 };
        let kept = dedup(vec![(0, a), (1, b)]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].0, 1);
    }

    #[test]
    fn dedup_keeps_close_pairs_from_one_contour() {
        let a = Eigenvalue { k: Complex64::new(1.0, -1.0), residual: 1e-12 };
        let b = Eigenvalue { k: Complex64::new(1.0 + 1e-7, -1.0), residual: 1e-12 };
        assert_eq!(dedup(vec![(0, a), (0, b)]).len(), 2);
        let c = Eigenvalue { k: Complex64::new(1.0 - 1e-7, -1.0), residual: 1e-11 };
        let d = Eigenvalue { k: Complex64::new(1.0 + 2e-7, -1.0), residual: 1e-11 };
        assert_eq!(dedup(vec![(0, a), (0, b), (1, c), (1, d)]).len(), 2);
    }

    #[test]
    fn overlapping_boxes_merge() {
        let b = |a: f64, c: f64| SearchBox { rect: Rect::new(a, a + 1.0, c, c + 1.0).unwrap(), depth: 1 };
        let m = merge_boxes(&[b(0.0, 0.0), b(1.0, 0.0), b(3.0, 3.0)]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].re_max, 2.0);
    }

    #[test]
    fn probes_are_seeded() {
        assert_eq!(probe_block(5, 2, 3), probe_block(5, 2, 3));
        assert_ne!(probe_block(5, 2, 3), probe_block(5, 2, 4));
    }
}
