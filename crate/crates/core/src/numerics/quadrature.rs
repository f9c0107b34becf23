//! Adaptive composite Simpson quadrature.

const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 50;

/// Integrates `f` over `[a, b]` to the given relative tolerance.
///
/// The interval is first split into a fixed number of panels so that
/// step-like integrands cannot fool the first error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    let mut f_left = f(a);
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        let f_right = f(hi);
        let s = (hi - lo) / 6.0 * (f_left + 4.0 * f_mid + f_right);
        coarse += s;
        panels.push((lo, hi, f_left, f_mid, f_right, s));
        f_left = f_right;
    }
    let tol = rel_tol * coarse.abs();
    if tol == 0.0 {
        return coarse;
    }
    let per_panel = tol / INITIAL_PANELS as f64;
    panels
        .into_iter()
        .map(|(lo, hi, fl, fm, fr, s)| refine(&f, lo, hi, fl, fm, fr, s, per_panel, MAX_DEPTH))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
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
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let floor = f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol || tol <= floor || lm <= a || rm >= b {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
