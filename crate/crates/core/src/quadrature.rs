//! Adaptive Simpson quadrature.
//!
//! Used only to build reference values (the exact-solution check and the
//! closed-form cross checks). The solver itself never integrates
//! numerically.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("adaptive Simpson did not reach tolerance {requested:e} (achieved ~{achieved:e}, estimate {estimate})")]
pub struct QuadratureError {
    pub requested: f64,
    pub achieved: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Levels of bisection applied before the error test is trusted. Guards
    /// against integrands that happen to vanish at all of the first few
    /// sample points (e.g. `sin(2πx)` on `[−1, 1]`).
    pub min_depth: u32,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_depth: 40,
            min_depth: 4,
        }
    }
}

struct Outcome {
    value: f64,
    // Sum of local error estimates from panels that hit the depth limit
    // without meeting their share of the tolerance.
    unresolved: f64,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `opts.abs_tol`.
pub fn adaptive_simpson<F>(
    f: F,
    a: f64,
    b: f64,
    opts: SimpsonOptions,
) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mid = 0.5 * (lo + hi);
    let (fa, fm, fb) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) * (fa + 4.0 * fm + fb) / 6.0;
    let out = recurse(
        &f,
        lo,
        hi,
        fa,
        fm,
        fb,
        whole,
        opts.abs_tol,
        opts.max_depth,
        opts.min_depth,
    );
    if out.unresolved > opts.abs_tol || !out.value.is_finite() {
        return Err(QuadratureError {
            requested: opts.abs_tol,
            achieved: out.unresolved,
            estimate: sign * out.value,
        });
    }
    Ok(sign * out.value)
}

/// Integrates over `[a, b]` after splitting at the given interior
/// breakpoints (kinks of the integrand). Breakpoints outside `(a, b)` are
/// ignored.
pub fn adaptive_simpson_split<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: SimpsonOptions,
) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let per_piece = SimpsonOptions {
        abs_tol: opts.abs_tol / pieces,
        ..opts
    };
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], per_piece)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    forced: u32,
) -> Outcome
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    // The second test stops refinement once the difference is rounding noise.
    let noise = 32.0 * f64::EPSILON * (left.abs() + right.abs());
    let splittable = depth > 0 && m > a && m < b;
    if forced > 0 && splittable {
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, forced - 1);
        let r = recurse(
            f,
            m,
            b,
            fm,
            frm,
            fb,
            right,
            0.5 * tol,
            depth - 1,
            forced - 1,
        );
        return Outcome {
            value: l.value + r.value,
            unresolved: l.unresolved + r.unresolved,
        };
    }
    if delta.abs() <= 15.0 * tol || delta.abs() <= noise {
        return Outcome {
            value: left + right + delta / 15.0,
            unresolved: 0.0,
        };
    }
    if !splittable {
        return Outcome {
            value: left + right + delta / 15.0,
            unresolved: delta.abs() / 15.0,
        };
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, 0);
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, 0);
    Outcome {
        value: l.value + r.value,
        unresolved: l.unresolved + r.unresolved,
    }
}
