//! Background charge density profiles on `[-L, L]`.

use crate::error::JelliumError;

/// Density profile; evaluated through [`Background::eval`] inside the box
/// and extended by its boundary value outside (the extension keeps the
/// potential bounds valid while the boundary indicators cut the physical
/// domain anyway).
#[derive(Debug, Clone)]
pub enum Background {
    Constant {
        rho: f64,
    },
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
        phase: f64,
    },
    /// Piecewise-linear interpolation of tabulated (t, rho) samples.
    Tabulated {
        ts: Vec<f64>,
        rhos: Vec<f64>,
    },
}

impl Background {
    pub fn tabulated(ts: Vec<f64>, rhos: Vec<f64>) -> Result<Self, JelliumError> {
        if ts.len() != rhos.len() || ts.len() < 2 {
            return Err(JelliumError::BackgroundTable(
                "need at least two (t, rho) samples".into(),
            ));
        }
        if ts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(JelliumError::BackgroundTable(
                "abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Background::Tabulated { ts, rhos })
    }

    /// Parses two-column CSV text `t,rho` (optional header line).
    pub fn tabulated_from_csv(text: &str) -> Result<Self, JelliumError> {
        let mut ts = Vec::new();
        let mut rhos = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts.next().map(str::trim);
            let b = parts.next().map(str::trim);
            match (a.and_then(|s| s.parse::<f64>().ok()), b.and_then(|s| s.parse::<f64>().ok())) {
                (Some(t), Some(r)) => {
                    ts.push(t);
                    rhos.push(r);
                }
                _ if lineno == 0 => continue, // header
                _ => {
                    return Err(JelliumError::BackgroundTable(format!(
                        "cannot parse line {}: `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Background::tabulated(ts, rhos)
    }

    /// Density at `t`, with `t` clamped into `[-l, l]`.
    pub fn eval(&self, t: f64, l: f64) -> f64 {
        let t = t.clamp(-l, l);
        match self {
            Background::Constant { rho } => *rho,
            Background::Sinusoidal {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => mean + amplitude * (wavenumber * t + phase).sin(),
            Background::Tabulated { ts, rhos } => {
                if t <= ts[0] {
                    return rhos[0];
                }
                if t >= ts[ts.len() - 1] {
                    return rhos[rhos.len() - 1];
                }
                let idx = ts.partition_point(|&x| x <= t).min(ts.len() - 1);
                let (t0, t1) = (ts[idx - 1], ts[idx]);
                let (r0, r1) = (rhos[idx - 1], rhos[idx]);
                r0 + (r1 - r0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Multiplies the profile by a constant (used to enforce neutrality).
    pub fn scaled(&self, factor: f64) -> Background {
        match self {
            Background::Constant { rho } => Background::Constant { rho: rho * factor },
            Background::Sinusoidal {
                mean,
                amplitude,
                wavenumber,
                phase,
            } => Background::Sinusoidal {
                mean: mean * factor,
                amplitude: amplitude * factor,
                wavenumber: *wavenumber,
                phase: *phase,
            },
            Background::Tabulated { ts, rhos } => Background::Tabulated {
                ts: ts.clone(),
                rhos: rhos.iter().map(|r| r * factor).collect(),
            },
        }
    }
}
