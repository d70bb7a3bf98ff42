use crate::error::{Error, Result};

/// Central-difference gradient of a scalar function: the independent
/// oracle every analytic gradient in this crate is checked against.
///
/// Returns (f(θ + h·eᵢ) − f(θ − h·eᵢ)) / (2h) for every coordinate.
pub fn finite_diff_grad<F>(f: F, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let indices: Vec<usize> = (0..theta.len()).collect();
    finite_diff_grad_at(f, theta, h, &indices)
}

/// Central differences restricted to the given coordinates, in order.
pub fn finite_diff_grad_at<F>(f: F, theta: &[f64], h: f64, coords: &[usize]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if h <= 0.0 {
        return Err(Error::Domain(format!(
            "finite-diff step must be > 0, got {h}"
        )));
    }
    let mut work = theta.to_vec();
    let mut grad = Vec::with_capacity(coords.len());
    for &i in coords {
        let orig = work[i];
        work[i] = orig + h;
        let fp = f(&work);
        work[i] = orig - h;
        let fm = f(&work);
        work[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Oracle(format!(
                "non-finite evaluation at coordinate {i}: f+={fp}, f-={fm}"
            )));
        }
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}
