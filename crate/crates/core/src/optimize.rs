//! Small derivative-free optimizers used by the bound and oracle code.

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `xtol`. Returns `(argmax, max)`; the endpoints
/// are compared with the interior optimum so boundary maxima are found too.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if hi - lo <= xtol {
        let mid = 0.5 * (lo + hi);
        return (mid, f(mid));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > xtol {
        if fc >= fd {
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
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

/// Finds `x` in `[lo, hi]` with `g(x) = target` for a nonincreasing `g`,
/// by bisection down to a bracket of width `xtol`.
pub fn bisect_decreasing<G>(g: G, target: f64, lo: f64, hi: f64, xtol: f64) -> f64
where
    G: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    while b - a > xtol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadResult<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead maximization in `N` dimensions with standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub fn nelder_mead_max<F, const N: usize>(
    f: F,
    start: [f64; N],
    step: f64,
    ftol: f64,
    max_iter: usize,
) -> NelderMeadResult<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, f(&start)));
    for i in 0..N {
        let mut p = start;
        p[i] += step;
        simplex.push((p, f(&p)));
    }

    let combine = |a: &[f64; N], b: &[f64; N], t: f64| {
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        out
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        let worst = simplex[N].1;
        if (best - worst).abs() <= ftol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (p, _) in &simplex[..N] {
            for k in 0..N {
                centroid[k] += p[k] / N as f64;
            }
        }
        let worst_p = simplex[N].0;
        let reflected = combine(&centroid, &worst_p, -1.0);
        let fr = f(&reflected);
        if fr > simplex[0].1 {
            let expanded = combine(&centroid, &worst_p, -2.0);
            let fe = f(&expanded);
            simplex[N] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
        } else {
            let contracted = if fr > worst {
                combine(&centroid, &reflected, 0.5)
            } else {
                combine(&centroid, &worst_p, 0.5)
            };
            let fc = f(&contracted);
            if fc > worst.max(fr) {
                simplex[N] = (contracted, fc);
            } else {
                let best_p = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    let p = combine(&best_p, &entry.0, 0.5);
                    *entry = (p, f(&p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    NelderMeadResult {
        point: simplex[0].0,
        value: simplex[0].1,
        iterations,
        converged,
    }
}
