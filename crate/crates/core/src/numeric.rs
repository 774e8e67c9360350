//! Small numerical kernels: scalar root finding, adaptive quadrature and
//! explicit Runge-Kutta integrators for fixed-size systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}] (f = {fa}, {fb})")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root solve did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("function returned a non-finite value at {0}")]
    NonFinite(f64),
}

/// Brent's method on a bracketing interval.
pub fn brent(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() {
        return Err(RootError::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { a, b, fa, fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite(b));
        }
    }
    Err(RootError::NoConvergence(max_iter))
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // Below a few ulps of the panel value the error estimate is noise.
        let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Composite Gauss-Legendre (5 point) quadrature over `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for i in 0..5 {
            sum += W[i] * f(mid + 0.5 * h * X[i]);
        }
    }
    0.5 * h * sum
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[[f64; N]], c: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (kj, &cj) in k.iter().zip(c) {
        if cj != 0.0 {
            for i in 0..N {
                out[i] += h * cj * kj[i];
            }
        }
    }
    out
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    s: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let k1 = f(s, y);
    let k2 = f(s + 0.5 * h, &axpy(y, h, &[k1], &[0.5]));
    let k3 = f(s + 0.5 * h, &axpy(y, h, &[k2], &[0.5]));
    let k4 = f(s + h, &axpy(y, h, &[k3], &[1.0]));
    axpy(y, h, &[k1, k2, k3, k4], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0])
}

/// One Dormand-Prince 5(4) step: returns the fifth-order solution and the
/// embedded error estimate.
pub fn dopri_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    s: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [&[f64]; 7] = [
        &[],
        &[0.2],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; N]; 7];
    for stage in 0..7 {
        let ys = axpy(y, h, &k[..stage], A[stage]);
        k[stage] = f(s + C[stage] * h, &ys);
    }
    // The last stage is evaluated at the fifth-order solution (FSAL).
    let y5 = axpy(y, h, &k[..6], A[6]);
    let y4 = axpy(y, h, &k, &B4);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = y5[i] - y4[i];
    }
    (y5, err)
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: 0.1,
            max_steps: 1_000_000,
        }
    }
}

/// Outcome of an adaptive integration that watches a scalar event function.
#[derive(Clone, Debug)]
pub struct EventHit<const N: usize> {
    pub s: f64,
    pub y: [f64; N],
}

/// Integrates `y' = f(s, y)` adaptively until `event(y)` changes sign from
/// positive to non-positive after `s >= s_min`, or `s_max` is reached.
///
/// The crossing is located by root solving on the length of a single
/// Dormand-Prince step from the last accepted state.
pub fn integrate_to_event<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    s_max: f64,
    opts: OdeOptions,
    s_min: f64,
    event: impl Fn(&[f64; N]) -> f64,
    mut abort: impl FnMut(&[f64; N]) -> bool,
) -> Option<EventHit<N>> {
    let mut s = 0.0;
    let mut y = y0;
    let mut h = opts.h_init;
    for _ in 0..opts.max_steps {
        if s >= s_max {
            return None;
        }
        h = h.min(s_max - s).min(opts.h_max);
        let (y_new, err) = dopri_step(&f, s, &y, h);
        let mut e2 = 0.0;
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            e2 += (err[i] / sc).powi(2);
        }
        let enorm = (e2 / N as f64).sqrt();
        if !enorm.is_finite() {
            h *= 0.25;
            continue;
        }
        if enorm <= 1.0 {
            let before = event(&y);
            let after = event(&y_new);
            if s + h >= s_min && before > 0.0 && after <= 0.0 {
                let g = |len: f64| event(&dopri_step(&f, s, &y, len).0);
                let hit = brent(g, 0.0, h, 1e-15 * h.max(1.0), 200).unwrap_or(h);
                return Some(EventHit {
                    s: s + hit,
                    y: dopri_step(&f, s, &y, hit).0,
                });
            }
            s += h;
            y = y_new;
            if abort(&y) {
                return None;
            }
            let grow = if enorm == 0.0 {
                5.0
            } else {
                (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * enorm.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cube_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50),
            Err(RootError::NoSignChange { .. })
        ));
    }

    #[test]
    fn simpson_integrates_sine() {
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let v = gauss_legendre(|x| x.powi(9) - 3.0 * x.powi(4), -1.0, 2.0, 1);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn dopri_event_on_circle() {
        // Unit-speed circle through (0, 1) heading right; x returns to 0 at s = pi.
        let f = |_s: f64, y: &[f64; 3]| [y[2].cos(), y[2].sin(), -1.0];
        let hit = integrate_to_event(
            f,
            [0.0, 1.0, 0.0],
            10.0,
            OdeOptions::default(),
            0.1,
            |y| y[0],
            |_| false,
        )
        .unwrap();
        assert!((hit.s - std::f64::consts::PI).abs() < 1e-9);
        assert!((hit.y[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn rk4_order() {
        let f = |_s: f64, y: &[f64; 1]| [y[0]];
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            for i in 0..n {
                y = rk4_step(&f, i as f64 * h, &y, h);
            }
            (y[0] - 1f64.exp()).abs()
        };
        assert!(run(20) / run(40) > 14.0);
    }
}
