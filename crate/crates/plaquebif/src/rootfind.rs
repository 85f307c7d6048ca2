//! Brent's method over fallible objective evaluations, tracking the best
//! point seen. Both scalar root-finds in this crate (`Phi` over `rho4`, the
//! Frechet coefficient over `mu`) go through here.

/// Outcome of a bracketed root refinement.
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// True when `|fx| <= ftol`; false means the bracket collapsed to
    /// machine width first and `fx` is the best value seen.
    pub converged: bool,
}

/// Classic Brent iteration on `f` over `[a, b]` with `f(a) f(b) <= 0`.
///
/// Stops when `|f| <= ftol` or the bracket shrinks below machine width
/// around the iterate. Evaluation errors abort the search.
pub fn brent<E>(
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    ftol: f64,
    max_iter: usize,
    mut f: impl FnMut(f64) -> Result<f64, E>,
) -> Result<RootResult, E> {
    assert!(
        fa * fb <= 0.0,
        "brent requires a sign change: f({a}) = {fa}, f({b}) = {fb}"
    );
    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    if best.1.abs() <= ftol {
        return Ok(RootResult { x: best.0, fx: best.1, iterations: 0, converged: true });
    }

    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for iter in 1..=max_iter {
        let s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let use_bisect = !(s > lo.min(b) && s < lo.max(b))
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < f64::EPSILON * (b.abs() + 1.0))
            || (!mflag && (c - d).abs() < f64::EPSILON * (c.abs() + 1.0));
        let s = if use_bisect { (a + b) / 2.0 } else { s };
        mflag = use_bisect;

        let fs = f(s)?;
        if fs.abs() < best.1.abs() {
            best = (s, fs);
        }
        if fs.abs() <= ftol {
            return Ok(RootResult { x: s, fx: fs, iterations: iter, converged: true });
        }
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * (b.abs() + 1.0) {
            return Ok(RootResult {
                x: best.0,
                fx: best.1,
                iterations: iter,
                converged: best.1.abs() <= ftol,
            });
        }
    }
    Ok(RootResult { x: best.0, fx: best.1, iterations: max_iter, converged: best.1.abs() <= ftol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| -> Result<f64, ()> { Ok(x * x * x - 2.0) };
        let r = brent(1.0, -1.0, 2.0, 6.0, 1e-14, 100, f).unwrap();
        assert!(r.converged);
        assert!((r.x - 2.0_f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn tracks_best_point_on_noisy_function() {
        // Sign change with a flat noisy floor near the root.
        let f = |x: f64| -> Result<f64, ()> {
            let v = x - 1.0;
            Ok(if v.abs() < 1e-13 { 1e-15 * v.signum() } else { v })
        };
        let r = brent(0.0, -1.0, 3.0, 2.0, 1e-14, 200, f).unwrap();
        assert!((r.x - 1.0).abs() < 1e-12);
        assert!(r.fx.abs() <= 1e-14);
    }

    #[test]
    fn propagates_evaluation_errors() {
        let f = |x: f64| -> Result<f64, &'static str> {
            if x > 0.9 && x < 1.1 {
                Err("boom")
            } else {
                Ok(x - 1.0)
            }
        };
        assert!(brent(0.0, -1.0, 2.0, 1.0, 1e-12, 100, f).is_err());
    }
}
