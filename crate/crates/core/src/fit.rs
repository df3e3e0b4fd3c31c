//! Small least-squares helpers for the regression checks.

/// Ordinary least-squares line through `(x, y)` points: `(slope, intercept)`.
pub fn linear(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Line fit with the standard error of the slope.
pub fn linear_with_error(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let (slope, intercept) = linear(points);
    let n = points.len();
    if n <= 2 {
        return (slope, intercept, 0.0);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    let se = (rss / (n - 2) as f64 / sxx).sqrt();
    (slope, intercept, se)
}

/// Least squares for `y ~ sum_k c_k f_k(x)` through the normal equations.
/// Intended for a handful of well-scaled basis functions.
pub fn basis<const K: usize>(x: &[f64], y: &[f64], f: impl Fn(f64) -> [f64; K]) -> [f64; K] {
    let mut a = [[0.0; K]; K];
    let mut b = [0.0; K];
    for (&xi, &yi) in x.iter().zip(y) {
        let row = f(xi);
        for i in 0..K {
            b[i] += row[i] * yi;
            for j in 0..K {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    solve(a, b)
}

/// `basis` plus standard errors of the coefficients from the residual
/// variance.
pub fn basis_with_error<const K: usize>(
    x: &[f64],
    y: &[f64],
    f: impl Fn(f64) -> [f64; K],
) -> ([f64; K], [f64; K]) {
    let c = basis(x, y, &f);
    let mut a = [[0.0; K]; K];
    let mut rss = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let row = f(xi);
        let r = yi - row.iter().zip(&c).map(|(p, q)| p * q).sum::<f64>();
        rss += r * r;
        for i in 0..K {
            for j in 0..K {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    let dof = x.len().saturating_sub(K);
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let mut se = [0.0; K];
    for (k, out) in se.iter_mut().enumerate() {
        let mut e = [0.0; K];
        e[k] = 1.0;
        *out = (s2 * solve(a, e)[k]).abs().sqrt();
    }
    (c, se)
}

fn solve<const K: usize>(mut a: [[f64; K]; K], mut b: [f64; K]) -> [f64; K] {
    for col in 0..K {
        let piv = (col..K)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..K {
            let m = a[row][col] / a[col][col];
            for k in col..K {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; K];
    for row in (0..K).rev() {
        let mut s = b[row];
        for k in row + 1..K {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}
