//! Adaptive Simpson quadrature, used as the integration oracle for kernel
//! normalization, intermediate-mass and marginalization checks.

const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    // Seed with a uniform split so narrow peaks are not missed by the first
    // five-point estimate.
    let pieces = 64;
    let width = (hi - lo) / pieces as f64;
    let piece_tol = tol / pieces as f64;
    let total: f64 = (0..pieces)
        .map(|k| {
            let x0 = lo + k as f64 * width;
            let x1 = if k + 1 == pieces { hi } else { x0 + width };
            let fa = f(x0);
            let fb = f(x1);
            let m = 0.5 * (x0 + x1);
            let fm = f(m);
            let whole = simpson(x0, x1, fa, fm, fb);
            recurse(&f, x0, x1, fa, fm, fb, whole, piece_tol, MAX_DEPTH)
        })
        .sum();
    sign * total
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
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
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
