use crate::measure::{Empirical, PiecewiseQuantile, TargetMeasure, TruncatedGaussian};

/// Solves `x + w [R^-(x), R^+(x)] ∋ c` for `x`.
///
/// This is the resolvent `(I + w R)^{-1}` of the maximal monotone graph of the
/// target's CDF; the solution is unique for every `c` and `w >= 0`, and the
/// map `c -> x` is nondecreasing and 1-Lipschitz.
pub fn scalar_resolvent(c: f64, w: f64, target: &TargetMeasure) -> f64 {
    debug_assert!(w >= 0.0);
    if w == 0.0 {
        return c;
    }
    match target {
        TargetMeasure::Dirac(a) => {
            if c < *a {
                c
            } else if c > a + w {
                c - w
            } else {
                *a
            }
        }
        TargetMeasure::Uniform { lo, hi } => {
            if c <= *lo {
                c
            } else if c >= hi + w {
                c - w
            } else {
                let width = hi - lo;
                (lo + (c - lo) * width / (width + w)).clamp(*lo, *hi)
            }
        }
        TargetMeasure::Empirical(e) => empirical(c, w, e),
        TargetMeasure::GridSampled(p) => polyline(c, w, p),
        TargetMeasure::TruncatedGaussian(g) => gaussian(c, w, g),
    }
}

fn empirical(c: f64, w: f64, e: &Empirical) -> f64 {
    let atoms = e.atoms();
    let cum = e.cumulative();
    // Atom k absorbs c in [x_k + w C_{k-1}, x_k + w C_k]; the gap before it
    // maps c -> c - w C_{k-1}.
    match binary_first(atoms.len(), |k| c <= atoms[k] + w * cum[k]) {
        Some(k) => {
            let before = if k == 0 { 0.0 } else { cum[k - 1] };
            if c >= atoms[k] + w * before {
                atoms[k]
            } else {
                c - w * before
            }
        }
        None => c - w,
    }
}

/// First index in `0..n` where the monotone predicate holds.
fn binary_first(n: usize, pred: impl Fn(usize) -> bool) -> Option<usize> {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    (lo < n).then_some(lo)
}

fn polyline(c: f64, w: f64, p: &PiecewiseQuantile) -> f64 {
    // Walk the graph of R through the knots (y_j, t_j); x + w r increases
    // along it, so the crossing point is found by bisection over knots.
    let (t, y) = p.knots();
    let psi = |j: usize| y[j] + w * t[j];
    let last = t.len() - 1;
    if c <= psi(0) {
        return c;
    }
    if c >= psi(last) {
        return c - w;
    }
    let j = binary_first(t.len(), |j| psi(j) >= c).expect("c < psi(last)");
    let (p0, p1) = (psi(j - 1), psi(j));
    if p1 <= p0 {
        return y[j];
    }
    let theta = (c - p0) / (p1 - p0);
    y[j - 1] + theta * (y[j] - y[j - 1])
}

fn gaussian(c: f64, w: f64, g: &TruncatedGaussian) -> f64 {
    let (lo, hi) = g.support();
    if c <= lo {
        return c;
    }
    if c >= hi + w {
        return c - w;
    }
    let f = |x: f64| x + w * g.cdf(x) - c;
    let mut a = lo.max(c - w);
    let mut b = hi.min(c);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            b = x;
        } else {
            a = x;
        }
        if b - a <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
        let newton = x - fx / (1.0 + w * g.density(x));
        x = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Grid, QuantileVector};

    fn targets() -> Vec<TargetMeasure> {
        vec![
            TargetMeasure::dirac(0.0).unwrap(),
            TargetMeasure::uniform(-1.0, 2.0).unwrap(),
            TargetMeasure::truncated_gaussian(0.0, 1.5, 0.01, 0.99).unwrap(),
            TargetMeasure::empirical(&[-1.0, 0.0, 0.5, 3.0], &[0.1, 0.4, 0.3, 0.2]).unwrap(),
            TargetMeasure::grid_sampled(
                &QuantileVector::new(Grid::new(5).unwrap(), vec![-2.0, -1.0, -1.0, 0.0, 4.0]).unwrap(),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn dirac_examples() {
        let d = TargetMeasure::dirac(0.0).unwrap();
        assert_eq!(scalar_resolvent(0.5, 1.0, &d), 0.0);
        assert_eq!(scalar_resolvent(-0.3, 1.0, &d), -0.3);
        assert!((scalar_resolvent(1.7, 1.0, &d) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn solves_the_inclusion() {
        for t in targets() {
            for &w in &[0.0, 0.01, 0.5, 3.0] {
                for k in 0..400 {
                    let c = -6.0 + 12.0 * k as f64 / 399.0;
                    let x = scalar_resolvent(c, w, &t);
                    let lo = x + w * t.cdf_minus(x);
                    let hi = x + w * t.cdf_plus(x);
                    assert!(
                        lo - 1e-12 <= c && c <= hi + 1e-12,
                        "{t:?} w={w} c={c} x={x}: [{lo}, {hi}]"
                    );
                }
            }
        }
    }

    #[test]
    fn empirical_cases() {
        let t = TargetMeasure::empirical(&[-1.0, 0.0, 2.0], &[0.2, 0.5, 0.3]).unwrap();
        // inside the gap between -1 and 0: R = 0.2
        assert!((scalar_resolvent(-0.5, 1.0, &t) - (-0.7)).abs() < 1e-15);
        // absorbed by the atom at 0: [0 + 0.2, 0 + 0.7]
        assert_eq!(scalar_resolvent(0.45, 1.0, &t), 0.0);
        // above all atoms
        assert!((scalar_resolvent(5.0, 1.0, &t) - 4.0).abs() < 1e-15);
    }
}
