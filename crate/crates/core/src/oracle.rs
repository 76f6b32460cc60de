//! Reference computations that do not share code with [`crate::specfun`].
//!
//! Bessel values come from plain ascending and logarithmic power series,
//! summed in double-double arithmetic for reference values and in `f64` for
//! the coarse scans that seed root finding. Exact resonances of a
//! penetrable disk are the zeros of the per-mode matching determinant
//! `W_l(k) = -k J_l(k s) H1_l'(k) + k s J_l'(k s) H1_l(k)`, `s = sqrt(index)`.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};
use qd::Quad;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Rect;

/// Largest `|z|` accepted by the series oracle.
pub const ORACLE_MAX_ABS_ARG: f64 = 15.0;
/// Largest order accepted by the series oracle.
pub const ORACLE_MAX_ORDER: u32 = 25;

/// Grid step of the root scan.
const SCAN_STEP: f64 = 0.02;
const NEWTON_MAX_ITERS: usize = 100;

pub(crate) trait Real: Copy + Num + Neg<Output = Self> + PartialOrd + From<f64> + Debug + Send + Sync {
    /// Relative truncation target for series.
    const EPS: f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn to_f64(self) -> f64;
    fn pi() -> Self;
    fn euler_gamma() -> Self;
    fn atan2(y: Self, x: Self) -> Self;
}

impl Real for f64 {
    const EPS: f64 = 1e-17;
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn euler_gamma() -> Self {
        0.577_215_664_901_532_9
    }
    fn atan2(y: Self, x: Self) -> Self {
        f64::atan2(y, x)
    }
}

impl Real for Quad {
    const EPS: f64 = 1e-33;
    fn sqrt(self) -> Self {
        Quad::sqrt(self)
    }
    fn ln(self) -> Self {
        Quad::ln(self)
    }
    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
    fn pi() -> Self {
        Quad::PI
    }
    fn euler_gamma() -> Self {
        Quad(0.577_215_664_901_532_9, -4.942_915_152_430_645e-18)
    }
    /// One Newton correction of the `f64` angle using double-double sine and
    /// cosine.
    fn atan2(y: Self, x: Self) -> Self {
        let t0 = Quad::from(f64::atan2(y.to_f64(), x.to_f64()));
        let (s, c) = sin_cos_dd(t0);
        let num = y * c - x * s;
        let den = x * c + y * s;
        t0 + num / den
    }
}

/// Taylor series for `(sin t, cos t)`, `|t| <= pi`.
fn sin_cos_dd(t: Quad) -> (Quad, Quad) {
    let t2 = t * t;
    let mut term = t;
    let mut sin = t;
    let mut k = 1.0;
    while term.to_f64().abs() > 1e-36 {
        term = -term * t2 / Quad::from((k + 1.0) * (k + 2.0));
        sin += term;
        k += 2.0;
    }
    let mut term = Quad::ONE;
    let mut cos = Quad::ONE;
    let mut k = 0.0;
    while term.to_f64().abs() > 1e-36 {
        term = -term * t2 / Quad::from((k + 1.0) * (k + 2.0));
        cos += term;
        k += 2.0;
    }
    (sin, cos)
}

type C<T> = Complex<T>;

fn c_abs<T: Real>(z: C<T>) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

fn c_ln<T: Real>(z: C<T>) -> C<T> {
    let modulus = (z.re * z.re + z.im * z.im).sqrt();
    C::new(modulus.ln(), T::atan2(z.im, z.re))
}

fn c_from<T: Real>(z: Complex64) -> C<T> {
    C::new(T::from(z.re), T::from(z.im))
}

fn c_to(z: C<impl Real>) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

fn scale<T: Real>(z: C<T>, s: f64) -> C<T> {
    C::new(z.re * T::from(s), z.im * T::from(s))
}

/// `z / d` with `d` an exactly representable real.
fn div_real<T: Real>(z: C<T>, d: f64) -> C<T> {
    C::new(z.re / T::from(d), z.im / T::from(d))
}

/// Ascending series for `J_n(z)`; stops once the geometric tail bound drops
/// below `EPS` times the running sum.
fn j_series<T: Real>(n: u32, z: C<T>) -> C<T> {
    let half = scale(z, 0.5);
    let mut t = C::<T>::one();
    for j in 1..=n {
        t = div_real(t * half, j as f64);
    }
    let q = -(half * half);
    let qn = c_abs(q);
    let mut sum = t;
    for k in 1u32.. {
        let d = k as f64 * (n + k) as f64;
        t = div_real(t * q, d);
        sum = sum + t;
        let ratio = qn / ((k + 1) as f64 * (n + k + 1) as f64);
        if ratio < 0.5 && c_abs(t) * ratio / (1.0 - ratio) <= T::EPS * c_abs(sum) {
            break;
        }
    }
    sum
}

/// Logarithmic series for `Y_n(z)`, `z` off the cut.
fn y_series<T: Real>(n: u32, z: C<T>) -> C<T> {
    let half = scale(z, 0.5);
    let q = -(half * half);
    let qn = c_abs(q);
    let pi = T::pi();
    let gamma = T::euler_gamma();

    // sum_{k<n} (n-k-1)!/k! (z/2)^(2k-n)
    let mut finite = C::<T>::zero();
    if n > 0 {
        let mut term = C::<T>::one();
        for j in 1..n {
            term = scale(term, j as f64);
        }
        let inv_half = C::<T>::one() / half;
        for _ in 0..n {
            term = term * inv_half;
        }
        let half2 = half * half;
        for k in 0..n {
            finite = finite + term;
            if k + 1 < n {
                term = div_real(term * half2, (n - k - 1) as f64 * (k + 1) as f64);
            }
        }
    }

    let jn = j_series(n, z);
    let log_part = c_ln(half) * jn;

    // sum_k [psi(k+1) + psi(n+k+1)] q^k (z/2)^n / (k! (n+k)!)
    let mut u = C::<T>::one();
    for j in 1..=n {
        u = div_real(u * half, j as f64);
    }
    let mut hk = T::zero();
    let mut hnk = T::zero();
    for j in 1..=n {
        hnk = hnk + T::one() / T::from(j as f64);
    }
    let two_gamma = gamma + gamma;
    let mut sum = C::new(u.re * (hk + hnk - two_gamma), u.im * (hk + hnk - two_gamma));
    for k in 1u32.. {
        u = div_real(u * q, k as f64 * (n + k) as f64);
        hk = hk + T::one() / T::from(k as f64);
        hnk = hnk + T::one() / T::from((n + k) as f64);
        let w = hk + hnk - two_gamma;
        let term = C::new(u.re * w, u.im * w);
        sum = sum + term;
        let ratio = qn / ((k + 1) as f64 * (n + k + 1) as f64);
        if ratio < 0.5 && 2.0 * c_abs(term) * ratio / (1.0 - ratio) <= T::EPS * c_abs(sum) {
            break;
        }
    }

    let two_over_pi = T::from(2.0) / pi;
    let inv_pi = T::one() / pi;
    C::new(
        -finite.re * inv_pi + log_part.re * two_over_pi - sum.re * inv_pi,
        -finite.im * inv_pi + log_part.im * two_over_pi - sum.im * inv_pi,
    )
}

fn check_oracle_envelope(n: u32, z: Complex64) -> Result<()> {
    if !(z.norm() <= ORACLE_MAX_ABS_ARG) || n > ORACLE_MAX_ORDER {
        return Err(Error::Domain(format!(
            "series oracle accepts n <= {ORACLE_MAX_ORDER}, |z| <= {ORACLE_MAX_ABS_ARG}; got n = {n}, z = {z}"
        )));
    }
    Ok(())
}

fn check_off_cut(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain(format!("{z} lies on the branch cut (-inf, 0]")));
    }
    Ok(())
}

/// `J_n(z)` from the double-double ascending series.
pub fn highprec_j(n: u32, z: Complex64) -> Result<Complex64> {
    check_oracle_envelope(n, z)?;
    Ok(c_to(j_series::<Quad>(n, c_from(z))))
}

/// `Y_n(z)` from the double-double logarithmic series.
pub fn highprec_y(n: u32, z: Complex64) -> Result<Complex64> {
    check_oracle_envelope(n, z)?;
    check_off_cut(z)?;
    Ok(c_to(y_series::<Quad>(n, c_from(z))))
}

/// `J_n`, `Y_n` and `H1_n` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselTriple {
    pub j: Complex64,
    pub y: Complex64,
    pub h1: Complex64,
}

/// Reference `J_n(z)`, `Y_n(z)` and `H1_n(z)`; the Hankel value is formed in
/// double-double before rounding.
pub fn highprec_bessel(n: u32, z: Complex64) -> Result<BesselTriple> {
    check_oracle_envelope(n, z)?;
    check_off_cut(z)?;
    let zq = c_from::<Quad>(z);
    let j = j_series(n, zq);
    let y = y_series(n, zq);
    let h1 = C::new(j.re - y.im, j.im + y.re);
    Ok(BesselTriple { j: c_to(j), y: c_to(y), h1: c_to(h1) })
}

/// `J_{l-1}, J_l, J_{l+1}` at `z`; the first entry is `J_{-1} = -J_1` when `l = 0`.
fn j_triplet<T: Real>(l: u32, z: C<T>) -> [C<T>; 3] {
    let jl = j_series(l, z);
    let jp = j_series(l + 1, z);
    let jm = if l == 0 { -jp } else { j_series(l - 1, z) };
    [jm, jl, jp]
}

fn h_triplet<T: Real>(l: u32, z: C<T>) -> [C<T>; 3] {
    let h = |n: u32| {
        let j = j_series(n, z);
        let y = y_series(n, z);
        C::new(j.re - y.im, j.im + y.re)
    };
    let hl = h(l);
    let hp = h(l + 1);
    let hm = if l == 0 { -hp } else { h(l - 1) };
    [hm, hl, hp]
}

/// Value, first and second derivative of `F_l` from `F_{l-1}, F_l, F_{l+1}`.
fn with_derivatives<T: Real>(l: u32, x: C<T>, f: [C<T>; 3]) -> (C<T>, C<T>, C<T>) {
    let lf = T::from(l as f64);
    let d1 = f[0] - f[1] * C::new(lf, T::zero()) / x;
    let l2 = T::from((l * l) as f64);
    let d2 = -(d1 / x) - f[1] * (C::<T>::one() - C::new(l2, T::zero()) / (x * x));
    (f[1], d1, d2)
}

/// `W_l(k)` and `dW_l/dk`.
fn w_and_slope<T: Real>(l: u32, k: C<T>, s: T) -> (C<T>, C<T>) {
    let ks = C::new(k.re * s, k.im * s);
    let (j, dj, d2j) = with_derivatives(l, ks, j_triplet(l, ks));
    let (h, dh, d2h) = with_derivatives(l, k, h_triplet(l, k));
    let sc = C::new(s, T::zero());
    let w = -(k * j * dh) + k * sc * dj * h;
    let slope = w / k + k * (sc * sc * d2j * h - j * d2h);
    (w, slope)
}

fn check_w_args(l: u32, k: Complex64, index: f64) -> Result<()> {
    if !(index > 0.0) {
        return Err(Error::Domain(format!("refractive index must be positive, got {index}")));
    }
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("k = 0".into()));
    }
    check_off_cut(k)?;
    let s = index.sqrt();
    check_oracle_envelope(l + 1, k)?;
    check_oracle_envelope(l + 1, k * s)
}

/// Matching determinant `W_l(k)` for a disk of refractive index `index`.
pub fn w_det(l: u32, k: Complex64, index: f64) -> Result<Complex64> {
    check_w_args(l, k, index)?;
    let s = Quad::from(index).sqrt();
    Ok(c_to(w_and_slope::<Quad>(l, c_from(k), s).0))
}

/// `dW_l/dk` from the analytic chain rule.
pub fn w_det_derivative(l: u32, k: Complex64, index: f64) -> Result<Complex64> {
    check_w_args(l, k, index)?;
    let s = Quad::from(index).sqrt();
    Ok(c_to(w_and_slope::<Quad>(l, c_from(k), s).1))
}

/// One exact resonance of the penetrable disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPole {
    pub k: Complex64,
    pub angular_order: u32,
    /// 1 for the axisymmetric mode, 2 for the cosine/sine pair otherwise.
    pub multiplicity: u32,
}

/// Result of [`disk_exact_poles`].
#[derive(Debug, Clone, Default)]
pub struct DiskPoleSearch {
    pub poles: Vec<DiskPole>,
    /// Scan minima, tagged with their angular order, from which Newton's
    /// method did not converge.
    pub unresolved: Vec<(u32, Complex64)>,
}

impl DiskPoleSearch {
    pub fn total_multiplicity(&self) -> u32 {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }
}

/// All zeros of `W_l`, `l = 0..=max_order`, inside `region`.
///
/// Each order is scanned on a grid of step 0.02 for local minima of `|W_l|`
/// using `f64` series; every minimum seeds a double-double Newton iteration.
pub fn disk_exact_poles(index: f64, max_order: u32, region: &Rect) -> Result<DiskPoleSearch> {
    if !(index > 0.0) {
        return Err(Error::Domain(format!("refractive index must be positive, got {index}")));
    }
    let s = index.sqrt();
    let far = [
        Complex64::new(region.re_min, region.im_min),
        Complex64::new(region.re_max, region.im_min),
        Complex64::new(region.re_min, region.im_max),
        Complex64::new(region.re_max, region.im_max),
    ]
    .iter()
    .map(|c| c.norm() * s.max(1.0))
    .fold(0.0, f64::max);
    check_oracle_envelope(max_order + 1, Complex64::new(far, 0.0))?;

    let per_order: Vec<(Vec<DiskPole>, Vec<(u32, Complex64)>)> = (0..=max_order)
        .into_par_iter()
        .map(|l| roots_of_order(l, index, region))
        .collect();

    let mut out = DiskPoleSearch::default();
    for (poles, unresolved) in per_order {
        out.poles.extend(poles);
        out.unresolved.extend(unresolved);
    }
    out.poles.sort_by(|a, b| {
        a.k.norm()
            .total_cmp(&b.k.norm())
            .then(a.k.re.total_cmp(&b.k.re))
    });
    Ok(out)
}

/// Scan minima of `|W_l|` on the grid, as complex points.
pub fn scan_minima(l: u32, index: f64, region: &Rect) -> Vec<Complex64> {
    let s = index.sqrt();
    let nx = (region.width() / SCAN_STEP).round().max(1.0) as usize;
    let ny = (region.height() / SCAN_STEP).round().max(1.0) as usize;
    let hx = region.width() / nx as f64;
    let hy = region.height() / ny as f64;
    let at = |i: usize, j: usize| Complex64::new(region.re_min + i as f64 * hx, region.im_min + j as f64 * hy);
    let mut mag = vec![f64::INFINITY; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let k = at(i, j);
            if k.norm() < 1e-8 || (k.im == 0.0 && k.re <= 0.0) {
                continue;
            }
            let (w, _) = w_and_slope::<f64>(l, k, s);
            mag[j * (nx + 1) + i] = w.norm();
        }
    }
    let mut minima = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let m = mag[j * (nx + 1) + i];
            if !m.is_finite() {
                continue;
            }
            let mut is_min = true;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii > nx as i64 || jj > ny as i64 {
                        continue;
                    }
                    if mag[jj as usize * (nx + 1) + ii as usize] < m {
                        is_min = false;
                    }
                }
            }
            if is_min {
                minima.push(at(i, j));
            }
        }
    }
    minima
}

fn roots_of_order(l: u32, index: f64, region: &Rect) -> (Vec<DiskPole>, Vec<(u32, Complex64)>) {
    let s = Quad::from(index).sqrt();
    let mut roots: Vec<Complex64> = Vec::new();
    let mut unresolved = Vec::new();
    for seed in scan_minima(l, index, region) {
        match newton(l, seed, s) {
            Some(k) => {
                if !region.contains(k) {
                    continue;
                }
                if roots.iter().any(|r| (r - k).norm() <= 1e-8 * (1.0 + k.norm())) {
                    continue;
                }
                roots.push(k);
            }
            None => {
                // Minima on the boundary of the scan window are typically
                // just the lowest point of a sloped surface.
                if region.contains_inset(seed, SCAN_STEP * 0.5) {
                    unresolved.push((l, seed));
                }
            }
        }
    }
    let multiplicity = if l == 0 { 1 } else { 2 };
    let poles = roots
        .into_iter()
        .map(|k| DiskPole { k, angular_order: l, multiplicity })
        .collect();
    (poles, unresolved)
}

/// Double-double Newton iteration; `None` if it stagnates, leaves the oracle
/// envelope or wanders far from the seed.
fn newton(l: u32, seed: Complex64, s: Quad) -> Option<Complex64> {
    let mut k = c_from::<Quad>(seed);
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITERS {
        let kf = c_to(k);
        if kf.norm() * s.to_f64().max(1.0) > ORACLE_MAX_ABS_ARG || kf.norm() < 1e-6 || (kf - seed).norm() > 0.5 {
            return None;
        }
        if kf.im.abs() < 1e-300 && kf.re <= 0.0 {
            return None;
        }
        let (w, slope) = w_and_slope::<Quad>(l, k, s);
        let step = w / slope;
        k = k - step;
        let size = c_abs(step);
        if !size.is_finite() {
            return None;
        }
        if converged {
            break;
        }
        if size <= 1e-15 * c_abs(k) {
            converged = true;
        }
    }
    if !converged {
        return None;
    }
    let root = c_to(k);
    // |W(k)| relative to |W(k + 0.1)|
    let w0 = c_abs(w_and_slope::<Quad>(l, k, s).0);
    let w1 = c_abs(w_and_slope::<Quad>(l, c_from(root + 0.1), s).0);
    if w0 > 1e-12 * w1 {
        return None;
    }
    Some(root)
}

/// `(1 / 2 pi i)` times the contour integral of `W_l'/W_l` over the circle of
/// the given center and radius, trapezoidal rule with `nodes` points.
pub fn winding_number(l: u32, index: f64, center: Complex64, radius: f64, nodes: usize) -> Result<Complex64> {
    let s = Quad::from(index).sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let t = std::f64::consts::TAU * (j as f64 + 0.5) / nodes as f64;
        let e = Complex64::from_polar(1.0, t);
        let k = center + e * radius;
        check_w_args(l, k, index)?;
        let (w, slope) = w_and_slope::<Quad>(l, c_from(k), s);
        acc += c_to(slope / w) * e * radius;
    }
    let dz_factor = Complex64::new(0.0, std::f64::consts::TAU / nodes as f64);
    Ok(acc * dz_factor / Complex64::new(0.0, std::f64::consts::TAU))
}
