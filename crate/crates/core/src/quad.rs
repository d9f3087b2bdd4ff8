//! Adaptive Simpson quadrature.

/// Integrate `f` over `[a, b]` with adaptive Simpson, stopping when the
/// Richardson error estimate falls below `tol` on every panel.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate over `[a, b]` split into `panels` equal pieces, each handled
/// adaptively. Useful when the integrand has most of its mass in a small
/// part of a wide interval.
pub fn integrate<F>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let w = (b - a) / panels as f64;
    let ptol = tol / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * w;
            adaptive_simpson(&f, lo, lo + w, ptol)
        })
        .sum()
}
