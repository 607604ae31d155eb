//! Kolmogorov-Smirnov distance and the normal CDF. The error function is
//! evaluated through the regularized incomplete gamma function (series for
//! small arguments, continued fraction for large), giving close to full
//! double precision without external tables.

pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -erf(-x)
    } else if x == 0.0 {
        0.0
    } else {
        gammp_half(x * x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x == 0.0 {
        1.0
    } else if x * x < 1.5 {
        1.0 - gamma_series_half(x * x)
    } else {
        // direct continued fraction: no cancellation in the tail
        gamma_cf_half(x * x)
    }
}

/// P(1/2, x) via series (x < 1.5) or 1 − continued fraction.
fn gammp_half(x: f64) -> f64 {
    if x < 1.5 {
        gamma_series_half(x)
    } else {
        1.0 - gamma_cf_half(x)
    }
}

/// Series for P(1/2, x): e^{-x} x^{1/2} Σ xⁿ / Γ(3/2 + n) · Γ(1/2)⁻¹-scaled.
fn gamma_series_half(x: f64) -> f64 {
    let a = 0.5;
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..200 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma_half()).exp()
}

/// Continued fraction for Q(1/2, x) (Lentz's method).
fn gamma_cf_half(x: f64) -> f64 {
    let a = 0.5;
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..300 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 3e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma_half()).exp() * h
}

fn ln_gamma_half() -> f64 {
    // ln Γ(1/2) = ln √π
    0.5 * std::f64::consts::PI.ln()
}

/// CDF of Normal(mu, sigma2).
pub fn normal_cdf(x: f64, mu: f64, sigma2: f64) -> f64 {
    if sigma2 <= 0.0 {
        return if x >= mu { 1.0 } else { 0.0 };
    }
    let z = (x - mu) / (2.0 * sigma2).sqrt();
    0.5 * erfc(-z)
}

/// Kolmogorov-Smirnov distance between the sample and a model CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}
