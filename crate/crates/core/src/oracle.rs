//! Brute-force one-dimensional minimizers used to verify closed-form and
//! Newton-based subproblem solvers. Compiled only for tests and when the
//! `oracles` feature is enabled.

/// Golden-section search for the minimizer of a unimodal function on
/// `[lo, hi]`, 200 iterations.
///
/// Comparisons use `diff(a, b)`, which must return the sign-accurate value of
/// `f(a) − f(b)`. Evaluating the difference in factored form keeps the search
/// resolving the minimizer well below `1e-8`, where plain function values
/// would lose the comparison to cancellation.
pub fn golden_section_by_diff(diff: impl Fn(f64, f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    for _ in 0..200 {
        if diff(a, b) < 0.0 {
            hi = b;
            b = a;
            a = hi - inv_phi * (hi - lo);
        } else {
            lo = a;
            a = b;
            b = lo + inv_phi * (hi - lo);
        }
        if !(hi - lo > 0.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search on plain function values.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    golden_section_by_diff(|a, b| f(a) - f(b), lo, hi)
}

/// `|a| − |b|` without cancellation when `a` and `b` share a sign.
pub fn abs_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        a - b
    } else if a <= 0.0 && b <= 0.0 {
        b - a
    } else {
        a.abs() - b.abs()
    }
}

/// `ℓ_q(s) − ℓ_q(t)` for the pinball loss, given `s − t` computed without
/// cancellation by the caller. Exact in the linear pieces.
pub fn pinball_diff(q: f64, s: f64, t: f64, s_minus_t: f64) -> f64 {
    if s >= 0.0 && t >= 0.0 {
        q * s_minus_t
    } else if s <= 0.0 && t <= 0.0 {
        (q - 1.0) * s_minus_t
    } else {
        let l = |x: f64| if x >= 0.0 { q * x } else { (q - 1.0) * x };
        l(s) - l(t)
    }
}
