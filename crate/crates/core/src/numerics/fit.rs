use serde::{Deserialize, Serialize};

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Some(LinearFit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

/// Leading coefficient of the least-squares parabola through `(x, y)`;
/// positive means convex.
pub fn quadratic_curvature(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let u: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let s = |p: i32| u.iter().map(|v| v.powi(p)).sum::<f64>();
    let (s0, s1, s2, s3, s4) = (nf, s(1), s(2), s(3), s(4));
    let t0: f64 = y.iter().sum();
    let t1: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
    let t2: f64 = u.iter().zip(y).map(|(a, b)| a * a * b).sum();
    // normal equations for [c, b, a] with y = c + b u + a u²
    let m = [[s0, s1, s2], [s1, s2, s3], [s2, s3, s4]];
    let rhs = [t0, t1, t2];
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut ma = m;
    for r in 0..3 {
        ma[r][2] = rhs[r];
    }
    Some(det(&ma) / d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
    }

    #[test]
    fn curvature_sign() {
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v * v - v + 2.0).collect();
        assert!((quadratic_curvature(&x, &y).unwrap() - 0.5).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
        assert!(quadratic_curvature(&x, &y).unwrap() < 0.0);
    }
}
