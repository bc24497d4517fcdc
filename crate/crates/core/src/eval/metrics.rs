use super::{EvalError, Result};

fn check(y: &[f64], yhat: &[f64], min: usize) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(EvalError::Metric(format!(
            "length mismatch: {} vs {}",
            y.len(),
            yhat.len()
        )));
    }
    if y.len() < min {
        return Err(EvalError::Metric(format!(
            "need at least {min} values, got {}",
            y.len()
        )));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Coefficient of determination, `1 − SS_res / SS_tot`.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat, 2)?;
    let m = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::Metric("constant response".into()));
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat, 1)?;
    let mse = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
    Ok(mse.sqrt())
}

/// Sample correlation coefficient.
pub fn pearson(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat, 2)?;
    let (my, mh) = (mean(y), mean(yhat));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        sxy += (a - my) * (b - mh);
        sxx += (a - my) * (a - my);
        syy += (b - mh) * (b - mh);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::Metric("undefined correlation".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
