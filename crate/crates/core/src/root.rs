//! Bracketed scalar root finding (Brent's method).


use crate::error::{Error, Result};

/// A located root with its certificate.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    /// Abscissa of the root.
    pub root: f64,
    /// Function value at `root`.
    pub f_root: f64,
    /// Iterations used.
    pub iterations: u32,
}

/// Brent's method on `[a, b]`. `fa` and `fb` are the (already computed)
/// endpoint values and must bracket a sign change. Stops when `|f| <= f_tol`
/// or the bracket width falls below `x_tol`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    x_tol: f64,
    f_tol: f64,
    max_iter: u32,
) -> Result<RootResult> {
    if fa == 0.0 {
        return Ok(RootResult {
            root: a,
            f_root: fa,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(RootResult {
            root: b,
            f_root: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Internal("brent: endpoints do not bracket a root"));
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa.abs() < fb.abs() {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;

    for iter in 1..=max_iter {
        if fb.abs() <= f_tol || (b - a).abs() <= x_tol {
            return Ok(RootResult {
                root: b,
                f_root: fb,
                iterations: iter - 1,
            });
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };

        let lo = (3.0 * a + b) / 4.0;
        let cond1 = !((lo < s && s < b) || (b < s && s < lo));
        let cond2 = mflag && (s - b).abs() >= (b - c).abs() / 2.0;
        let cond3 = !mflag && (s - b).abs() >= (c - d).abs() / 2.0;
        let cond4 = mflag && (b - c).abs() < x_tol;
        let cond5 = !mflag && (c - d).abs() < x_tol;
        if cond1 || cond2 || cond3 || cond4 || cond5 {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }

        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut fa, &mut fb);
        }
    }

    Err(Error::Convergence {
        iterations: max_iter,
        residual: fb.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let f = |x: f64| x * x - 2.0;
        let r = brent(f, 0.0, 2.0, f(0.0), f(2.0), 1e-15, 0.0, 100).unwrap();
        assert!((r.root - core::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn endpoint_root() {
        let f = |x: f64| x;
        let r = brent(f, 0.0, 1.0, 0.0, 1.0, 1e-15, 0.0, 100).unwrap();
        assert_eq!(r.root, 0.0);
    }

    #[test]
    fn rejects_unbracketed() {
        let f = |x: f64| x * x + 1.0;
        assert!(brent(f, -1.0, 1.0, 2.0, 2.0, 1e-15, 0.0, 100).is_err());
    }

    #[test]
    fn steep_rational() {
        // same shape as the discrete Kelly criterion near its pole
        let f = |x: f64| 0.6 / (1.0 + x) - 0.4 / (1.0 - x);
        let r = brent(f, 0.0, 0.999999, f(0.0), f(0.999999), 1e-15, 1e-14, 200).unwrap();
        assert!((r.root - 0.2).abs() < 1e-12);
    }
}
