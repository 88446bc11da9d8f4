//! Scalar root finding and minimization helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal `f` on `[a, b]` down to bracket width `tol`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // endpoints and interior probes may beat the midpoint on flat or kinked objectives
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Bisection for the boundary between `pred = false` (at `lo`) and `pred = true` (at `hi`).
/// Returns the final bracket.
pub fn bisect_boundary<E, F: FnMut(f64) -> Result<bool, E>>(
    mut pred: F,
    mut lo: f64,
    mut hi: f64,
    width: f64,
) -> Result<(f64, f64), E> {
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Root of the cubic Hermite interpolant through `(t0, y0, d0)` and `(t1, y1, d1)`, assuming
/// `y0` and `y1` have opposite signs. Secant iterations safeguarded by bisection.
pub fn hermite_root(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, tol: f64) -> f64 {
    let h = t1 - t0;
    let eval = |t: f64| {
        let u = (t - t0) / h;
        let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
        let h10 = u * u * u - 2.0 * u * u + u;
        let h01 = -2.0 * u * u * u + 3.0 * u * u;
        let h11 = u * u * u - u * u;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    };
    let (mut a, mut fa, mut b, mut fb) = (t0, y0, t1, y1);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = eval(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // guard against one-sided secant stagnation
        let mid = 0.5 * (a + b);
        let fm = eval(mid);
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_kink() {
        let (x, _) = golden_min(|x: f64| (x - 0.71).abs(), 0.5, 1.0, 1e-10);
        assert!((x - 0.71).abs() < 1e-9);
    }

    #[test]
    fn bisection_brackets_threshold() {
        let (lo, hi) = bisect_boundary::<(), _>(|t| Ok(t > 0.123), 0.0, 1.0, 1e-9).unwrap();
        assert!(lo <= 0.123 && hi >= 0.123 && hi - lo <= 1e-9);
    }

    #[test]
    fn hermite_root_of_cosine() {
        let (t0, t1) = (1.5, 1.6);
        let r = hermite_root(t0, t0.cos(), -t0.sin(), t1, t1.cos(), -t1.sin(), 1e-12);
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
