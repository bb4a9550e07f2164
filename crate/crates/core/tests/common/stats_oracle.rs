//! Reference statistics: two-sided t tail by quadrature, cyclic Jacobi
//! eigendecomposition, and textbook covariance/correlation.

use std::f64::consts::FRAC_PI_2;

/// Composite Simpson's rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Two-sided p-value `P(|T| ≥ |t|)` for `df` degrees of freedom.
///
/// Integrates the unnormalized density `(1 + x²/ν)^(−(ν+1)/2)` after
/// substituting `x = tan θ`, and normalizes by the same integral over the
/// whole line, so no gamma or beta functions are involved.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    let g = |theta: f64| {
        let c = theta.cos();
        if c <= 0.0 {
            return 0.0;
        }
        let x = theta.tan();
        (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (c * c)
    };
    let panels = 200_000;
    let total = simpson(g, -FRAC_PI_2, FRAC_PI_2, panels);
    let tail = simpson(g, t.abs().atan(), FRAC_PI_2, panels);
    2.0 * tail / total
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Welch's t and degrees of freedom from first principles.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let var = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let qa = var(a) / a.len() as f64;
    let qb = var(b) / b.len() as f64;
    let t = (mean(a) - mean(b)) / (qa + qb).sqrt();
    let df = (qa + qb).powi(2) / (qa * qa / (a.len() as f64 - 1.0) + qb * qb / (b.len() as f64 - 1.0));
    (t, df)
}

pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    covariance(x, y) / (covariance(x, x) * covariance(y, y)).sqrt()
}

/// Sample covariance matrix of row-major data.
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let cols: Vec<Vec<f64>> = (0..d).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    (0..d)
        .map(|i| (0..d).map(|j| covariance(&cols[i], &cols[j])).collect())
        .collect()
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes. Returns
/// eigenpairs sorted by descending eigenvalue; vectors are unit length.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|i| (a[i][i], (0..n).map(|k| v[k][i]).collect())).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    pairs
}
