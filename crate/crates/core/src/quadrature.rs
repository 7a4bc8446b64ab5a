//! Adaptive Simpson quadrature over piecewise-smooth integrands.
//!
//! Callers pass the kink points of their integrand as breakpoints; each
//! smooth segment is then integrated independently.

/// Result of an integration: the estimate and the accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 48;
const MIN_DEPTH: u32 = 4;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, fa: f64, fm: f64, b: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> Quadrature {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, p.fa, flm, m, p.fm);
    let right = simpson(m, p.fm, frm, p.b, p.fb);
    let delta = left + right - p.whole;
    if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol) {
        return Quadrature {
            value: left + right + delta / 15.0,
            error: delta.abs() / 15.0,
        };
    }
    let l = recurse(
        f,
        Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left },
        tol * 0.5,
        depth + 1,
    );
    let r = recurse(
        f,
        Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right },
        tol * 0.5,
        depth + 1,
    );
    Quadrature {
        value: l.value + r.value,
        error: l.error + r.error,
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Quadrature {
    if !(b > a) {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, fm, b, fb);
    recurse(f, Panel { a, b, fa, fm, fb, whole }, tol, 0)
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint strictly
/// inside the interval. The tolerance is shared between segments in
/// proportion to their length.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Quadrature {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let width = b - a;
    edges
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol * (w[1] - w[0]) / width))
        .fold(Quadrature { value: 0.0, error: 0.0 }, |acc, q| Quadrature {
            value: acc.value + q.value,
            error: acc.error + q.error,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((q.value - 0.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_to_tolerance() {
        let q = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 10.0, 1e-12);
        assert!((q.value - (1.0 - (-10.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn kink_handled_by_breakpoint() {
        let f = |x: f64| (-(x - 0.3).abs()).exp();
        let exact = 2.0 - (-5.3f64).exp() - (-4.7f64).exp();
        let q = integrate_piecewise(&f, -5.0, 5.0, &[0.3], 1e-13);
        assert!((q.value - exact).abs() < 1e-12, "{}", q.value - exact);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|_| 1.0, 1.0, 1.0, 1e-9).value, 0.0);
    }
}
