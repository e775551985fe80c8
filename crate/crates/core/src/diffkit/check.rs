//! Central finite-difference gradient checking.

/// Central-difference estimate of `∇f` at `params`.
pub fn finite_difference_grad<F>(f: F, params: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = params.to_vec();
    (0..params.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + step;
            let up = f(&probe);
            probe[k] = orig - step;
            let down = f(&probe);
            probe[k] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Max over coordinates of `|analytic − fd| / max(1, |analytic|)`.
pub fn check_grad<F>(f: F, analytic: &[f64], params: &[f64], step: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(analytic.len(), params.len(), "gradient/parameter length mismatch");
    let fd = finite_difference_grad(f, params, step);
    analytic
        .iter()
        .zip(&fd)
        .map(|(a, n)| (a - n).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}
