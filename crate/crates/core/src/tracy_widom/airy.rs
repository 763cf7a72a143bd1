//! Airy function `Ai` and its derivative on the real line.
//!
//! Values are produced by a short Taylor step of `y'' = x y` from the nearest
//! point of a fixed anchor table (spacing 0.5 on `[-60, 60]`). Anchors at
//! `x < 2` come from the Maclaurin data at zero, stepped outwards in small
//! increments; anchors at `x >= 2` come from the modified Bessel form
//! `Ai(x) = sqrt(x/3) K_{1/3}(ζ) / π`, `ζ = 2/3 x^{3/2}`, with `K_ν` evaluated
//! by the trapezoidal rule on its `cosh` integral (exponentially convergent).
//! Outside the table the Bessel form (right) or the oscillatory asymptotic
//! expansion (left) is used directly; `Ai` underflows to zero near `x ≈ 105`.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
#[allow(clippy::excessive_precision)]
const AI0: f64 = 0.355_028_053_887_817_24;
/// `Ai'(0) = -3^{-1/3} / Γ(1/3)`.
const AIP0: f64 = -0.258_819_403_792_806_8;

const SPACING: f64 = 0.5;
const X_LO: f64 = -60.0;
const X_HI: f64 = 60.0;
const BESSEL_FROM: f64 = 2.0;

struct Anchors {
    values: Vec<(f64, f64)>,
}

fn anchors() -> &'static Anchors {
    static TABLE: OnceLock<Anchors> = OnceLock::new();
    TABLE.get_or_init(|| {
        let count = ((X_HI - X_LO) / SPACING).round() as usize + 1;
        let zero = (-X_LO / SPACING).round() as usize;
        let mut values = vec![(0.0, 0.0); count];
        values[zero] = (AI0, AIP0);
        // leftwards and rightwards from 0 in quarter steps
        let mut state = (AI0, AIP0);
        for k in (0..zero).rev() {
            let x1 = X_LO + (k + 1) as f64 * SPACING;
            let mid = taylor_step(x1, state, -0.25);
            state = taylor_step(x1 - 0.25, mid, -0.25);
            values[k] = state;
        }
        let mut state = (AI0, AIP0);
        for (k, slot) in values.iter_mut().enumerate().skip(zero + 1) {
            let x = X_LO + k as f64 * SPACING;
            if x >= BESSEL_FROM {
                *slot = bessel_form(x);
            } else {
                let mid = taylor_step(x - SPACING, state, 0.25);
                state = taylor_step(x - 0.25, mid, 0.25);
                *slot = state;
            }
        }
        Anchors { values }
    })
}

/// Taylor expansion of the solution of `y'' = x y` with `(y, y')` given at
/// `x0`, evaluated at `x0 + h`.
fn taylor_step(x0: f64, (y0, yp0): (f64, f64), h: f64) -> (f64, f64) {
    // c_{n+2} = (x0 c_n + c_{n-1}) / ((n+2)(n+1))
    let (mut c_prev, mut c_cur, mut c_next) = (y0, yp0, 0.5 * x0 * y0);
    let mut hp = h; // h^n for the index of c_cur
    let mut y = y0 + yp0 * h;
    let mut yp = yp0;
    let scale = y0.abs().max(yp0.abs()).max(f64::MIN_POSITIVE);
    let mut small = 0;
    for n in 2..200usize {
        // c_next is c_n
        let term = c_next * hp * h;
        let dterm = n as f64 * c_next * hp;
        y += term;
        yp += dterm;
        if term.abs().max(dterm.abs()) <= 1e-17 * scale.max(y.abs()) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        let nf = n as f64;
        // c_{n+1} = (x0 c_{n-1} + c_{n-2}) / ((n+1) n)
        let c_new = (x0 * c_cur + c_prev) / ((nf + 1.0) * nf);
        c_prev = c_cur;
        c_cur = c_next;
        c_next = c_new;
        hp *= h;
    }
    (y, yp)
}

/// `∫_0^∞ exp(-ζ (cosh t - 1)) cosh(ν t) dt = e^ζ K_ν(ζ)`.
fn scaled_bessel_k(nu: f64, zeta: f64) -> f64 {
    // the integrand is close to a Gaussian of width ζ^{-1/2} near t = 0
    let h = (0.5 / zeta.sqrt()).min(0.1);
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let term = (-zeta * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    sum * h
}

fn bessel_form(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let decay = (-zeta).exp();
    let ai = (x / 3.0).sqrt() / PI * scaled_bessel_k(1.0 / 3.0, zeta) * decay;
    let aip = -x / (PI * 3f64.sqrt()) * scaled_bessel_k(2.0 / 3.0, zeta) * decay;
    (ai, aip)
}

/// Oscillatory expansion for large negative `x`.
fn negative_asymptotic(x: f64) -> (f64, f64) {
    let t = -x;
    let zeta = 2.0 / 3.0 * t * t.sqrt();
    let (mut u, mut v) = (vec![1.0], vec![1.0]);
    for k in 1..12 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    let series = |c: &[f64]| {
        let (mut even, mut odd) = (0.0, 0.0);
        let mut zp = 1.0;
        for (k, ck) in c.iter().enumerate() {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                even += sign * ck / zp;
            } else {
                odd += sign * ck / zp;
            }
            zp *= zeta;
        }
        (even, odd)
    };
    let (pu, qu) = series(&u);
    let (pv, qv) = series(&v);
    let phase = zeta + PI / 4.0;
    let (s, c) = phase.sin_cos();
    let ai = (s * pu - c * qu) / (PI.sqrt() * t.sqrt().sqrt());
    let aip = -(t.sqrt().sqrt()) / PI.sqrt() * (c * pv + s * qv);
    (ai, aip)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x > X_HI {
        return bessel_form(x);
    }
    if x < X_LO {
        return negative_asymptotic(x);
    }
    let k = ((x - X_LO) / SPACING).round() as usize;
    let x0 = X_LO + k as f64 * SPACING;
    let anchor = anchors().values[k];
    if x == x0 {
        return anchor;
    }
    taylor_step(x0, anchor, x - x0)
}

/// `Ai(x)`.
pub fn airy_ai(x: f64) -> f64 {
    airy_pair(x).0
}

/// `Ai'(x)`.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_pair(x).1
}
