//! Small statistical helpers: least-squares line fits with R², used for
//! geometric-decay rate estimation throughout the test suites.

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(n >= 2.0, "need at least two points");
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fits `log|y| = log(a) + d·log(rate)` against integer gaps `d`, returning
/// `(rate, r_squared)`. Pairs with `|y|` at or below `floor` are dropped to
/// keep the fit away from noise.
pub fn fit_geometric_rate(gaps: &[f64], values: &[f64], floor: f64) -> Option<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&d, &v) in gaps.iter().zip(values) {
        let a = v.abs();
        if a > floor {
            xs.push(d);
            ys.push(a.ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let fit = fit_line(&xs, &ys);
    Some((fit.slope.exp(), fit.r_squared))
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept - 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn geometric_rate_recovered() {
        let gaps: Vec<f64> = (1..=6).map(|d| d as f64).collect();
        let values: Vec<f64> = gaps.iter().map(|d| 3.0 * 0.7f64.powf(*d)).collect();
        let (rate, r2) = fit_geometric_rate(&gaps, &values, 0.0).unwrap();
        assert!((rate - 0.7).abs() < 1e-12);
        assert!(r2 > 0.999999);
    }
}
