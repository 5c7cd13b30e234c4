//! Local one-dimensional refinement used after grid seeding.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[a, b]`.
///
/// Returns the best point seen, so a non-unimodal bracket never yields a
/// value worse than the better endpoint evaluated.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, max_iter: usize) -> (f64, f64) {
    let mut best = (a, f(a));
    let fb = f(b);
    if fb < best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if fc < best.1 {
            best = (c, fc);
        }
        if fd < best.1 {
            best = (d, fd);
        }
        if !(b - a > 1e-15 * (1.0 + a.abs() + b.abs())) {
            break;
        }
        if fc <= fd {
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
    }
    if fc < best.1 {
        best = (c, fc);
    }
    if fd < best.1 {
        best = (d, fd);
    }
    best
}

/// Coordinate-wise golden refinement of `f` around `x0` within `±step` per
/// coordinate, clamped to `[lower, upper]`.
pub fn refine_min(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f0;
    if n == 1 {
        let a = (x[0] - step[0]).max(lower[0]);
        let b = (x[0] + step[0]).min(upper[0]);
        if b > a {
            let (t, v) = golden_min(|t| f(&[t]), a, b, 200);
            if v < fx {
                return (vec![t], v);
            }
        }
        return (x, fx);
    }
    for _sweep in 0..20 {
        let before = fx;
        for j in 0..n {
            let a = (x[j] - step[j]).max(lower[j]);
            let b = (x[j] + step[j]).min(upper[j]);
            if !(b > a) {
                continue;
            }
            let mut z = x.clone();
            let (t, v) = golden_min(
                |t| {
                    z[j] = t;
                    f(&z)
                },
                a,
                b,
                100,
            );
            if v < fx {
                x[j] = t;
                fx = v;
            }
        }
        if !(before - fx > 1e-15 * (1.0 + fx.abs())) {
            break;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_minimum() {
        let (t, v) = golden_min(|t| (t - 0.3) * (t - 0.3) + 1.0, -1.0, 1.0, 200);
        assert!((t - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refine_in_two_dimensions() {
        let f = |x: &[f64]| (x[0] - 0.1).powi(2) + 2.0 * (x[1] + 0.2).powi(2);
        let (x, v) = refine_min(&f, &[0.0, 0.0], f(&[0.0, 0.0]), &[0.5, 0.5], &[-1.0, -1.0], &[1.0, 1.0]);
        assert!(v < 1e-12);
        assert!((x[0] - 0.1).abs() < 1e-6 && (x[1] + 0.2).abs() < 1e-6);
    }
}
