//! Small numerical helpers shared across modules.

/// Pairwise sum with a fixed split, so the result depends only on the
/// order of `values` and never on how they were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Finite-difference weights for the first derivative at `x0` on the
/// (possibly non-uniform) stencil `xs` (Fornberg's recursion).
pub fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[m][j]: weight for derivative order m at node j, m in {0,1}
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Derivative of samples `ys` taken on `xs`, using a five-point stencil
/// (fourth order) centred where possible and one-sided at the ends.
/// Falls back to three points when fewer than five samples exist.
pub fn differentiate(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let width = if n >= 5 { 5 } else { 3.min(n) };
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let stencil = &xs[start..start + width];
            let w = first_derivative_weights(xs[i], stencil);
            w.iter()
                .zip(&ys[start..start + width])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Sign tolerance `1e-9·(1 + |v|)` used by every curvature/convexity check.
pub fn sign_tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn five_point_derivative_is_exact_on_quartics() {
        let xs: Vec<f64> = (0..12).map(|i| 0.3 + 0.1 * (i as f64).powf(1.3)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x * x + x).collect();
        let d = differentiate(&xs, &ys);
        for (x, dy) in xs.iter().zip(d) {
            let exact = 4.0 * x.powi(3) - 4.0 * x + 1.0;
            assert!((dy - exact).abs() < 1e-9, "{dy} vs {exact}");
        }
    }

    #[test]
    fn three_point_fallback() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 1.0, 4.0];
        let d = differentiate(&xs, &ys);
        assert!((d[0] - 0.0).abs() < 1e-12);
        assert!((d[1] - 2.0).abs() < 1e-12);
        assert!((d[2] - 4.0).abs() < 1e-12);
    }
}
