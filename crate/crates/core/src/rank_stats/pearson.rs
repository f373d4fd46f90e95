use crate::error::{Error, Result};
use crate::numeric;

/// Sample Pearson correlation; `Ok(None)` when either variable is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations(x.len()));
    }
    let mx = numeric::mean(x.iter().copied()).expect("non-empty");
    let my = numeric::mean(y.iter().copied()).expect("non-empty");
    let sxy = numeric::sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = numeric::sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = numeric::sum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}
