use std::fmt;

use serde::Serialize;

use crate::config::ConfigError;
use crate::run::ResultRow;

/// Number of standard errors used for every significance decision.
pub const SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Security {
    /// `λ` vanishes as `m` grows.
    Strong,
    /// `λ` stays bounded away from zero.
    Weak,
}

impl fmt::Display for Security {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Security::Strong => "strong",
            Security::Weak => "weak",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub protocol: String,
    pub alice: String,
    pub label: Security,
    /// `(m, λ, stderr)` per row, in row order.
    pub points: Vec<(usize, f64, f64)>,
    /// Fitted decay exponent `α` in `λ ≈ c·2^{-αm}` and its stderr; absent
    /// when fewer than two points have `λ > 0`.
    pub alpha: Option<(f64, f64)>,
    /// `λ` at the largest `m`.
    pub tail: (f64, f64),
}

/// Labels an `m`-sweep "strong" if `λ` decays exponentially at `SIGMAS`
/// significance or its value at the largest `m` is within `SIGMAS` of zero;
/// "weak" otherwise.
///
/// The fit is weighted least squares of `ln λ` against `m` with weights
/// `(λ/σ)²` (delta method). Rows with `λ = 0` are left out of the fit.
pub fn classify_security(rows: &[ResultRow]) -> Result<SecurityReport, ConfigError> {
    let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    if ms.len() < 3 {
        return Err(ConfigError::TooFewPoints(ms.len()));
    }
    let points: Vec<(usize, f64, f64)> = rows
        .iter()
        .map(|r| {
            let (l, s) = r.lambda_or_accept();
            // A zero stderr on a nonzero estimate means every trial agreed;
            // half a count is the resolution.
            (r.m, l, s.max(0.5 / r.trials as f64))
        })
        .collect();
    let tail = points
        .iter()
        .max_by_key(|p| p.0)
        .map(|p| (p.1, p.2))
        .expect("at least three rows");

    let fit: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(m, l, s)| (m as f64, l.ln(), (l / s).powi(2)))
        .collect();
    let alpha = weighted_slope(&fit).map(|(slope, se)| {
        let ln2 = std::f64::consts::LN_2;
        (-slope / ln2, se / ln2)
    });
    let decays = alpha.is_some_and(|(a, se)| a > SIGMAS * se);
    let vanishes = tail.0 <= SIGMAS * tail.1;
    let label = if decays || vanishes {
        Security::Strong
    } else {
        Security::Weak
    };
    Ok(SecurityReport {
        protocol: rows[0].protocol.clone(),
        alice: rows[0].alice.clone(),
        label,
        points,
        alpha,
        tail,
    })
}

/// Slope and its stderr for `y ≈ a + b·x` with weights `w`.
fn weighted_slope(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let sw: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx, (1.0 / sxx).sqrt()))
}

impl fmt::Display for SecurityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vs {}: {}", self.alice, self.protocol, self.label)?;
        match self.alpha {
            Some((a, se)) => write!(f, " (alpha = {a:.4} ± {se:.4}")?,
            None => write!(f, " (alpha undefined")?,
        }
        write!(
            f,
            ", lambda at largest m = {:.6} ± {:.6})",
            self.tail.0, self.tail.1
        )?;
        for (m, l, s) in &self.points {
            write!(f, "\n  m={m}: lambda = {l:.6} ± {s:.6}")?;
        }
        Ok(())
    }
}

/// Side-by-side summary of the same attack on both protocols.
pub fn contrast(p: &SecurityReport, pprime: &SecurityReport) -> String {
    format!(
        "{p}\n{pprime}\ncontrast: {} is {}, {} is {}",
        p.protocol, p.label, pprime.protocol, pprime.label
    )
}
