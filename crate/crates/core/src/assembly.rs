//! Linear finite elements for the truncated transmission operator.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use std::sync::Arc;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, LuSymbolicParams, NumericLu, SymbolicLu};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::{c64, Conj, Mat, MatMut, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Problem;
use crate::mesh::{Mesh, Region};
use crate::quadrature;
use crate::specfun;

/// Symmetric sparse matrix stored as its upper triangle (`i <= j`).
#[derive(Debug, Clone, Default)]
pub struct SymmetricEntries {
    pub n: usize,
    pub entries: HashMap<(usize, usize), f64>,
}

impl SymmetricEntries {
    fn new(n: usize) -> Self {
        Self { n, entries: HashMap::new() }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (&(i, j), &v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Assembled matrices of the discrete problem.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub stiffness: SymmetricEntries,
    /// Mass matrix weighted by the piecewise constant index `n(x)`.
    pub mass: SymmetricEntries,
    /// Vertex indices on the truncation circle, counter-clockwise.
    pub boundary_dofs: Vec<usize>,
    /// `cos_traces[n][b]`: integral of the hat function of `boundary_dofs[b]` against `cos(n θ)`.
    pub cos_traces: Vec<Vec<f64>>,
    pub sin_traces: Vec<Vec<f64>>,
    pub radius: f64,
    pub dtn_order: u32,
    pub n_inside: f64,
    pub nominal_h: f64,
}

impl FemSystem {
    pub fn num_dofs(&self) -> usize {
        self.stiffness.n
    }

    /// Full-length cosine trace vector of mode `n`.
    pub fn cos_trace(&self, n: usize) -> Vec<f64> {
        self.scatter(&self.cos_traces[n])
    }

    pub fn sin_trace(&self, n: usize) -> Vec<f64> {
        self.scatter(&self.sin_traces[n])
    }

    fn scatter(&self, compact: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.num_dofs()];
        for (&d, &x) in self.boundary_dofs.iter().zip(compact) {
            v[d] = x;
        }
        v
    }

    /// Dense boundary block `Σ' z_n / (π R) (c_n c_nᵀ + s_n s_nᵀ)` in boundary numbering.
    pub fn dtn_block(&self, k: Complex64) -> Result<Vec<Vec<Complex64>>> {
        let weights = self.dtn_weights(k)?;
        let nb = self.boundary_dofs.len();
        let mut block = vec![vec![Complex64::new(0.0, 0.0); nb]; nb];
        for a in 0..nb {
            for b in a..nb {
                let v = self.dtn_entry(&weights, a, b);
                block[a][b] = v;
                block[b][a] = v;
            }
        }
        Ok(block)
    }

    fn dtn_weights(&self, k: Complex64) -> Result<Vec<Complex64>> {
        let z = specfun::dtn_coefficients(self.dtn_order, k, self.radius).map_err(|e| match e {
            Error::NearHankelZero { order, .. } | Error::Overflow { order, .. } => {
                Error::Dtn { n: order.min(self.dtn_order), k, source: Box::new(e) }
            }
            other => Error::Dtn { n: self.dtn_order, k, source: Box::new(other) },
        })?;
        Ok(z.iter()
            .enumerate()
            .map(|(n, zn)| zn / (PI * self.radius) * if n == 0 { 0.5 } else { 1.0 })
            .collect())
    }

    fn dtn_entry(&self, w: &[Complex64], a: usize, b: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, wn) in w.iter().enumerate() {
            let c = &self.cos_traces[n];
            let s = &self.sin_traces[n];
            acc += wn * (c[a] * c[b] + s[a] * s[b]);
        }
        acc
    }
}

fn edge_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Stiffness, weighted mass and boundary Fourier traces on `mesh`.
pub fn assemble(mesh: &Mesh, problem: &Problem) -> Result<FemSystem> {
    mesh.check_topology()?;
    let nv = mesh.num_vertices();
    let mut stiffness = SymmetricEntries::new(nv);
    let mut mass = SymmetricEntries::new(nv);
    let h2 = mesh.nominal_h * mesh.nominal_h;
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let p = t.map(|i| mesh.vertices[i]);
        let area = mesh.triangle_area(ti);
        if area < 1e-14 * h2 {
            return Err(Error::DegenerateTriangle(ti));
        }
        let index = if mesh.element_region[ti] == Region::Inside { problem.n_inside } else { 1.0 };
        // Gradients of the barycentric coordinates times 2 * area.
        let gb = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let gc = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        for i in 0..3 {
            for j in i..3 {
                let kij = (gb[i] * gb[j] + gc[i] * gc[j]) / (4.0 * area);
                let mij = index * area / if i == j { 6.0 } else { 12.0 };
                stiffness.add(t[i], t[j], kij);
                mass.add(t[i], t[j], mij);
            }
        }
    }

    let boundary_dofs = mesh.outer_boundary_vertices();
    let position: HashMap<usize, usize> = boundary_dofs.iter().enumerate().map(|(b, &v)| (v, b)).collect();
    let order = problem.dtn_order as usize;
    let nb = boundary_dofs.len();
    let mut cos_traces = vec![vec![0.0; nb]; order + 1];
    let mut sin_traces = vec![vec![0.0; nb]; order + 1];
    let mut edges: Vec<(usize, usize)> = mesh.boundary_edges().into_keys().collect();
    edges.sort_unstable();
    for (a, b) in edges {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let len = edge_len(pa, pb);
        let q = (3.0 + problem.dtn_order as f64 * len).ceil().max(6.0) as usize;
        let (ia, ib) = (position[&a], position[&b]);
        for (t, w) in quadrature::mapped(q, 0.0, 1.0) {
            let x = [(1.0 - t) * pa[0] + t * pb[0], (1.0 - t) * pa[1] + t * pb[1]];
            let theta = x[1].atan2(x[0]);
            let ds = w * len;
            for n in 0..=order {
                let (s, c) = (n as f64 * theta).sin_cos();
                cos_traces[n][ia] += ds * (1.0 - t) * c;
                cos_traces[n][ib] += ds * t * c;
                if n > 0 {
                    sin_traces[n][ia] += ds * (1.0 - t) * s;
                    sin_traces[n][ib] += ds * t * s;
                }
            }
        }
    }

    Ok(FemSystem {
        stiffness,
        mass,
        boundary_dofs,
        cos_traces,
        sin_traces,
        radius: problem.radius,
        dtn_order: problem.dtn_order,
        n_inside: problem.n_inside,
        nominal_h: mesh.nominal_h,
    })
}

/// Where the value of one stored entry comes from.
#[derive(Debug, Clone, Copy)]
struct Slot {
    stiffness: f64,
    mass: f64,
    /// Boundary-numbered pair for the DtN contribution.
    boundary: Option<(usize, usize)>,
}

/// The map `k -> B(k)` on a fixed sparsity pattern.
pub struct OperatorFunction {
    system: FemSystem,
    slots: Vec<Slot>,
    /// Slot feeding each entry of `pairs`, in the order given to faer.
    pair_slot: Vec<usize>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: faer::sparse::Argsort<usize>,
    symbolic_lu: OnceLock<std::result::Result<Arc<SymbolicLu<usize>>, String>>,
}

impl std::fmt::Debug for OperatorFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFunction")
            .field("dofs", &self.system.num_dofs())
            .field("stored_entries", &self.pair_slot.len())
            .finish()
    }
}

impl OperatorFunction {
    pub fn new(system: FemSystem) -> Result<Self> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut slots: Vec<Slot> = Vec::new();
        let mut upper: Vec<(usize, usize)> = Vec::new();
        let mut keys: Vec<_> = system.stiffness.entries.keys().chain(system.mass.entries.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        for (i, j) in keys {
            index.insert((i, j), slots.len());
            upper.push((i, j));
            slots.push(Slot { stiffness: system.stiffness.get(i, j), mass: system.mass.get(i, j), boundary: None });
        }
        let dofs = &system.boundary_dofs;
        for a in 0..dofs.len() {
            for b in a..dofs.len() {
                let (i, j) = if dofs[a] <= dofs[b] { (dofs[a], dofs[b]) } else { (dofs[b], dofs[a]) };
                match index.get(&(i, j)) {
                    Some(&s) => slots[s].boundary = Some((a, b)),
                    None => {
                        index.insert((i, j), slots.len());
                        upper.push((i, j));
                        slots.push(Slot { stiffness: 0.0, mass: 0.0, boundary: Some((a, b)) });
                    }
                }
            }
        }
        let mut pairs = Vec::with_capacity(2 * upper.len());
        let mut pair_slot = Vec::with_capacity(2 * upper.len());
        for (s, &(i, j)) in upper.iter().enumerate() {
            pairs.push(Pair { row: i, col: j });
            pair_slot.push(s);
            if i != j {
                pairs.push(Pair { row: j, col: i });
                pair_slot.push(s);
            }
        }
        let n = system.num_dofs();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
            .map_err(|e| Error::Solver(format!("sparsity pattern: {e:?}")))?;
        Ok(Self { system, slots, pair_slot, symbolic, argsort, symbolic_lu: OnceLock::new() })
    }

    pub fn system(&self) -> &FemSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.system.num_dofs()
    }

    /// Stored entries, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.pair_slot.len()
    }

    /// Sparse `B(k)`.
    pub fn evaluate(&self, k: Complex64) -> Result<SparseColMat<usize, c64>> {
        if k == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("k = 0 is excluded".into()));
        }
        let w = self.system.dtn_weights(k)?;
        let k2 = k * k;
        let slot_values: Vec<Complex64> = self
            .slots
            .iter()
            .map(|s| {
                let mut v = Complex64::new(s.stiffness, 0.0) - k2 * s.mass;
                if let Some((a, b)) = s.boundary {
                    v -= self.system.dtn_entry(&w, a, b);
                }
                v
            })
            .collect();
        let values: Vec<c64> = self.pair_slot.iter().map(|&s| slot_values[s]).collect();
        SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, &values)
            .map_err(|e| Error::Solver(format!("matrix values: {e:?}")))
    }

    fn symbolic_lu(&self) -> Result<Arc<SymbolicLu<usize>>> {
        self.symbolic_lu
            .get_or_init(|| {
                // The supernodal kernel is several times faster than the
                // simplicial one on these matrices, even for small meshes.
                let params = LuSymbolicParams {
                    supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
                    ..Default::default()
                };
                factorize_symbolic_lu(self.symbolic.as_ref(), params).map(Arc::new).map_err(|e| format!("{e:?}"))
            })
            .clone()
            .map_err(|e| Error::Solver(format!("symbolic factorization: {e}")))
    }

    /// LU factorization of `B(k)`, reusing the symbolic analysis.
    pub fn factor(&self, k: Complex64) -> Result<Factorization> {
        let matrix = self.evaluate(k)?;
        let symbolic = self.symbolic_lu()?;
        let mut numeric = NumericLu::new();
        let mut buf = MemBuffer::try_new(symbolic.factorize_numeric_lu_scratch::<c64>(Par::Seq, Default::default()))
            .map_err(|e| Error::Solver(format!("workspace: {e:?}")))?;
        symbolic
            .factorize_numeric_lu(&mut numeric, matrix.as_ref(), Par::Seq, MemStack::new(&mut buf), Default::default())
            .map_err(|e| Error::Singular(format!("factorization of B({k}) failed: {e:?}")))?;
        Ok(Factorization { matrix, symbolic, numeric, k })
    }
}

/// Matrix together with its LU factors.
pub struct Factorization {
    pub matrix: SparseColMat<usize, c64>,
    symbolic: Arc<SymbolicLu<usize>>,
    numeric: NumericLu<usize, c64>,
    pub k: Complex64,
}

impl Factorization {
    fn check(&self, x: MatRef<'_, c64>) -> Result<()> {
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                let v = x[(i, j)];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Singular(format!("B({}) has a vanishing pivot", self.k)));
                }
            }
        }
        Ok(())
    }

    fn lu(&self) -> LuRef<'_, usize, c64> {
        LuRef::new_unchecked(&self.symbolic, &self.numeric)
    }

    /// Solve `B x = rhs` for every column of `rhs`.
    pub fn solve_many(&self, rhs: MatRef<'_, c64>) -> Result<Mat<c64>> {
        let mut x = rhs.to_owned();
        let mut buf = MemBuffer::new(self.symbolic.solve_in_place_scratch::<c64>(x.ncols(), Par::Seq));
        self.lu().solve_in_place_with_conj(Conj::No, x.as_mut(), Par::Seq, MemStack::new(&mut buf));
        self.check(x.as_ref())?;
        Ok(x)
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let x = self.solve_many(MatRef::from_column_major_slice(rhs, rhs.len(), 1))?;
        Ok((0..rhs.len()).map(|i| x[(i, 0)]).collect())
    }

    /// Solve `B^H x = rhs` in place.
    pub fn solve_adjoint_in_place(&self, mut rhs: MatMut<'_, c64>) -> Result<()> {
        let mut buf = MemBuffer::new(self.symbolic.solve_transpose_in_place_scratch::<c64>(rhs.ncols(), Par::Seq));
        self.lu().solve_transpose_in_place_with_conj(Conj::Yes, rhs.as_mut(), Par::Seq, MemStack::new(&mut buf));
        self.check(rhs.as_ref())
    }
}

/// `y = A x` for a sparse column-major matrix.
pub fn sparse_apply(a: &SparseColMat<usize, c64>, x: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); a.nrows()];
    let col_ptr = a.symbolic().col_ptr();
    let row_idx = a.symbolic().row_idx();
    let val = a.val();
    for j in 0..a.ncols() {
        let xj = x[j];
        for p in col_ptr[j]..col_ptr[j + 1] {
            y[row_idx[p]] += val[p] * xj;
        }
    }
    y
}

/// Maximum absolute row sum.
pub fn sparse_inf_norm(a: &SparseColMat<usize, c64>) -> f64 {
    let mut rows = vec![0.0; a.nrows()];
    let col_ptr = a.symbolic().col_ptr();
    let row_idx = a.symbolic().row_idx();
    for j in 0..a.ncols() {
        for p in col_ptr[j]..col_ptr[j + 1] {
            rows[row_idx[p]] += a.val()[p].norm();
        }
    }
    rows.into_iter().fold(0.0, f64::max)
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(σ_min, σ_max)` estimates of `B(k)` by power iteration on `BᴴB` and its
/// inverse from a fixed start vector. The `σ_max` value is a lower bound that
/// converges slowly and serves as a scale only.
pub fn singular_value_bounds(f: &Factorization, iterations: usize) -> Result<(f64, f64)> {
    let n = f.matrix.nrows();
    let start: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.1)).collect();
    // B is complex symmetric, so Bᴴ y = conj(B conj(y)).
    let adjoint_apply = |y: &[Complex64]| -> Vec<Complex64> {
        let c: Vec<Complex64> = y.iter().map(|z| z.conj()).collect();
        sparse_apply(&f.matrix, &c).into_iter().map(|z| z.conj()).collect()
    };
    let mut v = start.clone();
    let mut sigma_max = 0.0;
    for _ in 0..iterations {
        let s = norm2(&v);
        v.iter_mut().for_each(|z| *z /= s);
        let w = adjoint_apply(&sparse_apply(&f.matrix, &v));
        sigma_max = norm2(&w).sqrt();
        v = w;
    }
    let mut v = start;
    let mut sigma_min = f64::INFINITY;
    for _ in 0..iterations {
        let s = norm2(&v);
        v.iter_mut().for_each(|z| *z /= s);
        let mut w = Mat::<c64>::from_fn(n, 1, |i, _| v[i]);
        f.solve_adjoint_in_place(w.as_mut())?;
        let w = f.solve_many(w.as_ref())?;
        let col: Vec<Complex64> = (0..n).map(|i| w[(i, 0)]).collect();
        sigma_min = 1.0 / norm2(&col).sqrt();
        v = col;
    }
    Ok((sigma_min, sigma_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScattererShape;
    use crate::mesh::Mesh;
    use crate::Rect;

    fn problem(order: u32) -> Problem {
        Problem::new(ScattererShape::Disk { radius: 1.0 }, 4.0, 1.25, order, Rect::default_window()).unwrap()
    }

    #[test]
    fn sliver_is_rejected() {
        let text = "RDTN-MESH 1\n3 1 1.0\n0 0 2\n1 0 2\n0.5 1e-15 2\n0 1 2 0\n";
        let m = Mesh::from_text(text).unwrap();
        assert!(matches!(assemble(&m, &problem(2)), Err(Error::DegenerateTriangle(0))));
    }

    #[test]
    fn zero_wavenumber_is_rejected() {
        let p = problem(3);
        let m = crate::mesh::generate(&p, 0.25).unwrap();
        let op = OperatorFunction::new(assemble(&m, &p).unwrap()).unwrap();
        assert!(matches!(op.evaluate(Complex64::new(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn sine_trace_of_mode_zero_vanishes() {
        let p = problem(4);
        let m = crate::mesh::generate(&p, 0.25).unwrap();
        let s = assemble(&m, &p).unwrap();
        assert!(s.sin_traces[0].iter().all(|v| *v == 0.0));
    }
}
