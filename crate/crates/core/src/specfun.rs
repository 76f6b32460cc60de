//! Integer-order Bessel and Hankel functions of complex argument and the
//! Dirichlet-to-Neumann coefficients `z_n(k) = k H1_n'(kR) / H1_n(kR)`.
//!
//! Validated envelope: `n <= 200`, `|z| <= 200`, principal branch with the cut
//! along the negative real axis.
//!
//! `J_n` is summed from its ascending series for `|z| <= 12` and obtained by
//! Miller's backward recurrence beyond. `H1_n` is built in the closed upper
//! half plane, where it is the dominant solution of the three-term recurrence
//! in `n`: `H1_0`, `H1_1` come from the logarithmic series of `Y_0`, `Y_1` close
//! to the real axis and from Steed's continued fraction for `H1_0'/H1_0`
//! together with the Wronskian otherwise, and higher orders follow by forward
//! recurrence. In the lower half plane the reflection
//! `H1_n(z) = 2 J_n(z) - conj(H1_n(conj z))` is used, since there the forward
//! recurrence loses about `2 |Im z| / ln 10` digits. `Y_n` is `(H1_n - J_n) / i`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 200;
pub const MAX_ABS_ARG: f64 = 200.0;

/// Radius below which ascending series are used.
const SERIES_RADIUS: f64 = 12.0;

/// Above this imaginary part the series value of `J + iY` cancels too much.
const SERIES_MAX_IM: f64 = 3.0;

/// Relative threshold of the "near Hankel zero" guard.
pub const HANKEL_ZERO_GUARD: f64 = 1e-12;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_envelope(n: u32, z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if z.norm() > MAX_ABS_ARG {
        return Err(Error::Domain(format!("|z| = {} exceeds {MAX_ABS_ARG}", z.norm())));
    }
    Ok(())
}

fn check_cut(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain(format!("{z} lies on the branch cut (-inf, 0]")));
    }
    Ok(())
}

/// Complex number times a power of two, for values beyond the `f64` range.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mant: Complex64,
    exp: i32,
}

impl Scaled {
    fn value(self) -> Complex64 {
        self.mant * 2f64.powi(self.exp)
    }

    fn log2_abs(self) -> f64 {
        self.mant.norm().log2() + self.exp as f64
    }

    /// `self / other` as a plain complex number.
    fn ratio(self, other: Scaled) -> Complex64 {
        self.mant / other.mant * 2f64.powi(self.exp - other.exp)
    }
}

/// `J_n(z)`.
pub fn bessel_j(n: u32, z: Complex64) -> Result<Complex64> {
    check_envelope(n, z)?;
    if z.norm() <= SERIES_RADIUS {
        Ok(j_series(n, z))
    } else {
        Ok(j_miller(n, z)[n as usize])
    }
}

/// `J_0(z), ..., J_nmax(z)`.
pub fn bessel_j_seq(nmax: u32, z: Complex64) -> Result<Vec<Complex64>> {
    check_envelope(nmax, z)?;
    Ok(j_values(nmax, z))
}

/// `Y_n(z)`.
pub fn bessel_y(n: u32, z: Complex64) -> Result<Complex64> {
    check_envelope(n, z)?;
    check_cut(z)?;
    let j = j_values(n, z);
    let h = hankel_seq(n, z, &j);
    let hn = h[n as usize].value();
    if !hn.re.is_finite() || !hn.im.is_finite() {
        return Err(Error::Overflow { order: n, z });
    }
    Ok((hn - j[n as usize]) * -I)
}

/// `H1_n(z) = J_n(z) + i Y_n(z)`.
pub fn hankel1(n: u32, z: Complex64) -> Result<Complex64> {
    check_envelope(n, z)?;
    check_cut(z)?;
    let j = j_values(n + 1, z);
    let h = hankel_seq(n + 1, z, &j);
    let hn = h[n as usize];
    let value = hn.value();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Overflow { order: n, z });
    }
    let mut neighbor = h[n as usize + 1].log2_abs();
    if n >= 1 {
        neighbor = neighbor.max(h[n as usize - 1].log2_abs());
    }
    if hn.log2_abs() < HANKEL_ZERO_GUARD.log2() + neighbor {
        return Err(Error::NearHankelZero { order: n, z });
    }
    Ok(value)
}

/// Ratios `r_m = H1_{m-1}(z) / H1_m(z)` for `m = 1..=nmax`; index 0 of the
/// returned vector is unused and set to NaN.
///
/// For `Im z >= 0` the ratios follow from `r_1 = H1_0 / H1_1` and the forward
/// recurrence `r_{m+1} = 1 / (2m/z - r_m)`; below the real axis they are
/// quotients of the reflected sequence.
pub fn hankel_ratios(nmax: u32, z: Complex64) -> Result<Vec<Complex64>> {
    check_envelope(nmax.saturating_sub(1), z)?;
    check_cut(z)?;
    let mut r = Vec::with_capacity(nmax as usize + 1);
    r.push(Complex64::new(f64::NAN, f64::NAN));
    if nmax == 0 {
        return Ok(r);
    }
    if z.im >= 0.0 {
        let (h0, h1) = h01_upper(z);
        r.push(h0 / h1);
        for m in 1..nmax {
            let denom = Complex64::new(2.0 * m as f64, 0.0) / z - r[m as usize];
            r.push(denom.inv());
        }
    } else {
        let j = j_values(nmax, z);
        let h = hankel_seq(nmax, z, &j);
        for m in 1..=nmax as usize {
            r.push(h[m - 1].ratio(h[m]));
        }
    }
    Ok(r)
}

fn guard_ratios(n: u32, z: Complex64, r: &[Complex64]) -> Result<()> {
    // |H_n| < guard * max(|H_{n-1}|, |H_{n+1}|)
    let up = r[n as usize + 1].norm(); // |H_n / H_{n+1}|
    let down = if n >= 1 { r[n as usize].norm() } else { 0.0 }; // |H_{n-1} / H_n|
    if up < HANKEL_ZERO_GUARD || down * HANKEL_ZERO_GUARD > 1.0 || !up.is_finite() || !down.is_finite() {
        return Err(Error::NearHankelZero { order: n, z });
    }
    Ok(())
}

/// `J_n'(z)`.
pub fn bessel_j_deriv(n: u32, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Ok(-bessel_j(1, z)?);
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(if n == 1 { Complex64::new(0.5, 0.0) } else { Complex64::new(0.0, 0.0) });
    }
    Ok(bessel_j(n - 1, z)? - bessel_j(n, z)? * (n as f64) / z)
}

/// `H1_n'(z)`.
pub fn hankel1_deriv(n: u32, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Ok(-hankel1(1, z)?);
    }
    Ok(hankel1(n - 1, z)? - hankel1(n, z)? * (n as f64) / z)
}

/// Inputs of a single DtN coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelRatioRequest {
    pub order: u32,
    pub k: Complex64,
    pub radius: f64,
}

impl HankelRatioRequest {
    pub fn new(order: u32, k: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        check_cut(k)?;
        Ok(Self { order, k, radius })
    }
}

/// `z_n(k) = k H1_n'(kR) / H1_n(kR)`, evaluated as
/// `k H1_{n-1}(kR) / H1_n(kR) - n / R`.
pub fn dtn_coefficient(req: &HankelRatioRequest) -> Result<Complex64> {
    let all = dtn_coefficients(req.order, req.k, req.radius)?;
    Ok(all[req.order as usize])
}

/// `z_0(k), ..., z_nmax(k)` from one sequence of Hankel ratios.
pub fn dtn_coefficients(nmax: u32, k: Complex64, radius: f64) -> Result<Vec<Complex64>> {
    let req = HankelRatioRequest::new(nmax, k, radius)?;
    let z = req.k * req.radius;
    check_envelope(nmax, z)?;
    check_cut(z)?;
    let r = hankel_ratios(nmax + 1, z)?;
    let mut out = Vec::with_capacity(nmax as usize + 1);
    for n in 0..=nmax {
        guard_ratios(n, z, &r)?;
        let zn = if n == 0 {
            -k / r[1]
        } else {
            k * r[n as usize] - n as f64 / radius
        };
        out.push(zn);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// internals

/// At least `nmax + 1` leading values of the `J` sequence.
fn j_values(nmax: u32, z: Complex64) -> Vec<Complex64> {
    if z.norm() <= SERIES_RADIUS {
        (0..=nmax).map(|n| j_series(n, z)).collect()
    } else {
        j_miller(nmax, z)
    }
}

/// `H1_0, ..., H1_nmax` given `J_0, ..., J_nmax` at the same argument.
fn hankel_seq(nmax: u32, z: Complex64, j: &[Complex64]) -> Vec<Scaled> {
    if z.im >= 0.0 {
        return hankel_seq_upper(nmax, z);
    }
    let upper = hankel_seq_upper(nmax, z.conj());
    upper
        .iter()
        .zip(j)
        .map(|(u, jn)| {
            let mant = *jn * 2.0 * 2f64.powi(-u.exp) - u.mant.conj();
            Scaled { mant, exp: u.exp }
        })
        .collect()
}

/// Forward recurrence for `H1_n`, `Im z >= 0`, with binary rescaling.
fn hankel_seq_upper(nmax: u32, z: Complex64) -> Vec<Scaled> {
    let (h0, h1) = h01_upper(z);
    let mut out = Vec::with_capacity(nmax as usize + 1);
    out.push(Scaled { mant: h0, exp: 0 });
    if nmax == 0 {
        return out;
    }
    out.push(Scaled { mant: h1, exp: 0 });
    let mut exp = 0;
    let mut prev = h0;
    let mut cur = h1;
    for m in 1..nmax {
        let next = cur * (2.0 * m as f64) / z - prev;
        prev = cur;
        cur = next;
        if cur.norm() > 1e150 {
            let down = 2f64.powi(-500);
            prev *= down;
            cur *= down;
            exp += 500;
        }
        out.push(Scaled { mant: cur, exp });
    }
    out
}

/// `(H1_0(z), H1_1(z))` for `Im z >= 0`.
fn h01_upper(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() <= SERIES_RADIUS && z.im < SERIES_MAX_IM {
        let (y0, y1) = y01_series(z);
        return (j_series(0, z) + I * y0, j_series(1, z) + I * y1);
    }
    let j = j_values(1, z);
    let rho = steed_log_derivative(z);
    // Wronskian J H1' - J' H1 = 2i / (pi z), with J_0' = -J_1
    let h0 = I * FRAC_2_PI / (z * (j[0] * rho + j[1]));
    (h0, -rho * h0)
}

/// `H1_0'(z) / H1_0(z)` from Steed's continued fraction
/// `-1/(2z) + i + (i/z) a_1/(b_1 + a_2/(b_2 + ...))`, `a_k = (k - 1/2)^2`,
/// `b_k = 2 (z + k i)`, evaluated with the modified Lentz algorithm.
fn steed_log_derivative(z: Complex64) -> Complex64 {
    let tiny = 1e-150;
    let mut f = Complex64::new(tiny, 0.0);
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..100_000u32 {
        let a = (k as f64 - 0.5).powi(2);
        let b = (z + I * k as f64) * 2.0;
        d = b + d * a;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + c.inv() * a;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    -(z * 2.0).inv() + I + I / z * f
}

/// Ascending series of `J_n(z)`.
fn j_series(n: u32, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    let mut t = Complex64::new(1.0, 0.0);
    for j in 1..=n {
        t *= half / j as f64;
    }
    let q = -half * half;
    let qn = q.norm();
    let mut sum = t;
    let mut tmax = t.norm();
    let mut k = 0u32;
    loop {
        k += 1;
        let d = (k as f64) * ((n + k) as f64);
        t *= q / d;
        sum += t;
        let tn = t.norm();
        tmax = tmax.max(tn);
        if d > qn && tn <= 1e-17 * tmax {
            break;
        }
        if k > 1000 {
            break;
        }
    }
    sum
}

/// Logarithmic series for `Y_0` and `Y_1`, valid for moderate `|z|`.
fn y01_series(z: Complex64) -> (Complex64, Complex64) {
    let half = z * 0.5;
    let q = -half * half;
    let qn = q.norm();
    let lg = half.ln();
    let j0 = j_series(0, z);
    let j1 = j_series(1, z);

    // Y_0: (2/pi) [ (ln(z/2) + gamma) J_0 - sum_{k>=1} H_k q^k/(k!)^2 ]
    let mut u = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut umax: f64 = 0.0;
    let mut k = 0u32;
    loop {
        k += 1;
        let d = (k as f64) * (k as f64);
        u *= q / d;
        harmonic += 1.0 / k as f64;
        let term = u * harmonic;
        s0 += term;
        umax = umax.max(term.norm());
        if d > qn && term.norm() <= 1e-17 * umax {
            break;
        }
        if k > 1000 {
            break;
        }
    }
    let y0 = ((lg + EULER_GAMMA) * j0 - s0) * FRAC_2_PI;

    // Y_1: (2/pi) ln(z/2) J_1 - 2/(pi z) - (1/pi)(z/2) sum_k [psi(k+1)+psi(k+2)] q^k/(k!(k+1)!)
    let mut u = Complex64::new(1.0, 0.0);
    let mut hk = 0.0; // H_k
    let mut s1 = u * (-2.0 * EULER_GAMMA + 1.0);
    let mut umax = s1.norm();
    let mut k = 0u32;
    loop {
        k += 1;
        let d = (k as f64) * ((k + 1) as f64);
        u *= q / d;
        hk += 1.0 / k as f64;
        let psi_sum = -2.0 * EULER_GAMMA + hk + hk + 1.0 / (k + 1) as f64;
        let term = u * psi_sum;
        s1 += term;
        umax = umax.max(term.norm());
        if d > qn && term.norm() <= 1e-17 * umax {
            break;
        }
        if k > 1000 {
            break;
        }
    }
    let y1 = lg * j1 * FRAC_2_PI - z.inv() * FRAC_2_PI - half * s1 / PI;
    (y0, y1)
}

/// Miller backward recurrence for `J_0..J_M`, normalized with the generating
/// function identity `exp(i s z) = J_0 + 2 sum_k (i s)^k J_k`, `s = 1` when
/// `Im z <= 0` and `s = -1` otherwise. The branch is chosen so that the
/// target has modulus `exp(|Im z|)`, the size of the terms, which avoids the
/// cancellation of the classical `1 = J_0 + 2 sum J_2k` normalization for
/// complex arguments. The returned vector holds every order down from the
/// starting index, so it is longer than `nmax + 1`.
fn j_miller(nmax: u32, z: Complex64) -> Vec<Complex64> {
    let a = z.norm();
    let top = (nmax as f64).max(a.ceil()) as usize + a.ceil() as usize + 40;
    let mut f = vec![Complex64::new(0.0, 0.0); top + 2];
    f[top] = Complex64::new(1e-30, 0.0);
    let zi = z.inv();
    for m in (1..=top).rev() {
        f[m - 1] = f[m] * (2.0 * m as f64) * zi - f[m + 1];
        if f[m - 1].norm() > 1e200 {
            for v in f.iter_mut().skip(m - 1) {
                *v *= 1e-200;
            }
        }
    }
    let s = if z.im <= 0.0 { 1.0 } else { -1.0 };
    let unit = I * s;
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = f[0];
    for v in f.iter().take(top + 1).skip(1) {
        power *= unit;
        sum += power * *v * 2.0;
    }
    let target = (I * s * z).exp();
    let scale = target / sum;
    f.truncate(top + 1);
    for v in f.iter_mut() {
        *v *= scale;
    }
    f
}

