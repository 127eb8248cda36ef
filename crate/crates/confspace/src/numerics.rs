//! Small numeric utilities shared across modules: adaptive quadrature,
//! chi-square p-values, running statistics and a log-log least-squares fit.

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
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
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
    }
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Upper-tail p-value of a chi-square statistic with `df` degrees of
/// freedom.
pub fn chi_square_pvalue(statistic: f64, df: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    if df <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Sample mean and its standard error.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Least-squares fit of `y = c - slope * x`, returning (slope, c, r2).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let c = my - b * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some((-b, c, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_on_polynomials_and_gaussians() {
        let cube = |x: f64| x * x * x;
        assert!((adaptive_simpson(&cube, 0.0, 2.0, 1e-12) - 4.0).abs() < 1e-10);
        let gauss = |x: f64| (-x * x).exp();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((adaptive_simpson(&gauss, -12.0, 12.0, 1e-11) - sqrt_pi).abs() < 1e-9);
    }

    #[test]
    fn simpson_handles_steps() {
        let step = |x: f64| {
            if x < std::f64::consts::FRAC_1_SQRT_2 {
                1.0
            } else {
                0.0
            }
        };
        let v = adaptive_simpson(&step, 0.0, 1.0, 1e-10);
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn chi_square_tail() {
        // chi2 with 1 df at 3.841 has p close to 0.05
        let p = chi_square_pvalue(3.841, 1.0);
        assert!((p - 0.05).abs() < 1e-3, "{p}");
        assert!(chi_square_pvalue(0.0, 5.0) > 0.999);
    }

    #[test]
    fn fit_recovers_power_law() {
        let xs: Vec<f64> = (10..200).map(|i| (i as f64).ln()).collect();
        let ys: Vec<f64> = (10..200)
            .map(|i| (0.25 * (i as f64).powf(-1.7)).ln())
            .collect();
        let (alpha, _, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((alpha - 1.7).abs() < 1e-9);
        assert!(r2 > 0.999999);
    }
}
