use super::DatagenError;

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step(
    f: impl Fn(&[f64]) -> Vec<f64>,
    state: &[f64],
    dt: f64,
) -> Result<Vec<f64>, DatagenError> {
    let shifted = |k: &[f64], h: f64| -> Vec<f64> {
        state.iter().zip(k).map(|(s, d)| s + h * d).collect()
    };
    let k1 = f(state);
    let k2 = f(&shifted(&k1, dt / 2.0));
    let k3 = f(&shifted(&k2, dt / 2.0));
    let k4 = f(&shifted(&k3, dt));
    let next: Vec<f64> = (0..state.len())
        .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(DatagenError::NonFiniteState { step: 0 })
    }
}

/// `steps + 1` states starting at `x0`. A divergence reports the index of
/// the step that produced it (1-based).
pub fn integrate(
    f: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>, DatagenError> {
    if !(dt > 0.0) {
        return Err(DatagenError::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.to_vec());
    for step in 1..=steps {
        let next = rk4_step(&f, out.last().unwrap(), dt)
            .map_err(|_| DatagenError::NonFiniteState { step })?;
        out.push(next);
    }
    Ok(out)
}
