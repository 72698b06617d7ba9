use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ode::integrate;
use super::DatagenError;
use crate::dataset::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub dt: f64,
    pub horizon: f64,
    pub n_inits: usize,
    pub init_min: f64,
    pub init_max: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            dt: 0.02,
            horizon: 20.0,
            n_inits: 30,
            init_min: -10.0,
            init_max: 10.0,
        }
    }
}

impl LorenzParams {
    /// States stored per trajectory, the initial one included.
    pub fn states_per_trajectory(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn rhs(&self, s: &[f64]) -> Vec<f64> {
        vec![
            self.sigma * (s[1] - s[0]),
            s[0] * (self.rho - s[2]) - s[1],
            s[0] * s[1] - self.beta * s[2],
        ]
    }

    fn validate(&self) -> Result<(), DatagenError> {
        if !(self.dt > 0.0 && self.horizon > 0.0) {
            return Err(DatagenError::InvalidParams(
                "dt and horizon must be positive".into(),
            ));
        }
        if self.states_per_trajectory() == 0 || self.n_inits == 0 {
            return Err(DatagenError::InvalidParams("empty trajectory set".into()));
        }
        if !(self.init_min < self.init_max) {
            return Err(DatagenError::InvalidParams("init_min must be below init_max".into()));
        }
        Ok(())
    }
}

/// Row-major 3x3 Hessians of the three right-hand-side components. They do
/// not depend on the state.
pub fn lorenz_hessians() -> [[f64; 9]; 3] {
    [
        [0.0; 9],
        // -xz in ydot
        [0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0],
        // xy in zdot
        [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ]
}

/// `n_inits` RK4 trajectories, stored one after another; labels are the
/// exact right-hand side at each stored state.
pub fn gen_lorenz(params: &LorenzParams, seed: u64) -> Result<Dataset, DatagenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = params.states_per_trajectory();
    let mut d = Dataset::with_capacity(3, 3, params.n_inits * states);
    for _ in 0..params.n_inits {
        let x0: Vec<f64> = (0..3)
            .map(|_| rng.random_range(params.init_min..=params.init_max))
            .collect();
        let traj = integrate(|s| params.rhs(s), &x0, params.dt, states - 1)?;
        for s in &traj {
            d.push(s, &params.rhs(s)).expect("fixed dimensions");
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_known_values() {
        let p = LorenzParams::default();
        let r = p.rhs(&[1.0, 1.0, 1.0]);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[1], 26.0);
        assert!((r[2] - (1.0 - 8.0 / 3.0)).abs() < 1e-15);
        assert!((r[2] + 1.6667).abs() < 1e-4);
        assert_eq!(p.rhs(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn default_size_and_labels() {
        let p = LorenzParams::default();
        assert_eq!(p.states_per_trajectory(), 1000);
        let d = gen_lorenz(&p, 11).unwrap();
        assert_eq!(d.len(), 30_000);
        for (x, y) in d.rows().step_by(997) {
            assert_eq!(y, p.rhs(x).as_slice());
        }
        assert_eq!(d, gen_lorenz(&p, 11).unwrap());
    }

    #[test]
    fn hessians_match_finite_differences() {
        let p = LorenzParams::default();
        let h = 1e-3;
        let x = [1.3, -0.4, 2.2];
        for (o, hess) in lorenz_hessians().iter().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    let f = |di: f64, dj: f64| {
                        let mut s = x;
                        s[i] += di;
                        s[j] += dj;
                        p.rhs(&s)[o]
                    };
                    let fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                    assert!((fd - hess[i * 3 + j]).abs() < 1e-6);
                }
            }
        }
        let frob: f64 = lorenz_hessians().iter().flatten().map(|v| v * v).sum();
        assert!((frob.sqrt() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_params() {
        let p = LorenzParams {
            dt: 0.0,
            ..Default::default()
        };
        assert!(matches!(gen_lorenz(&p, 0), Err(DatagenError::InvalidParams(_))));
    }
}
