use serde::{Deserialize, Serialize};

use crate::sim::PiGains;

/// The GFL current controller written as a one-layer linear network.
///
/// Only two connections are trainable: the error weight `kp_raw` and the
/// integral weight `ki_raw`, both used through their absolute value. The
/// voltage feedforward (+1) and the cross-coupling (-wL, +wL) connections
/// are constants. Inputs follow the fixed-gain observation layout
/// `(e_d, int e_d, e_q, int e_q, Vd, Vq, iLd, iLq)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiActor {
    pub kp_raw: f64,
    pub ki_raw: f64,
    pub omega_l: f64,
}

/// Sign with a zero subgradient at the origin.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl PiActor {
    pub fn new(gains: PiGains, omega_l: f64) -> Self {
        PiActor {
            kp_raw: gains.kp,
            ki_raw: gains.ki,
            omega_l,
        }
    }

    pub fn gains(&self) -> PiGains {
        PiGains {
            kp: self.kp_raw.abs(),
            ki: self.ki_raw.abs(),
        }
    }

    pub fn forward(&self, obs: &[f64]) -> [f64; 2] {
        let (kp, ki) = (self.kp_raw.abs(), self.ki_raw.abs());
        [
            kp * obs[0] + ki * obs[1] + obs[4] - self.omega_l * obs[7],
            kp * obs[2] + ki * obs[3] + obs[5] + self.omega_l * obs[6],
        ]
    }

    /// Gradient of `grad_out . forward(obs)` with respect to
    /// `(kp_raw, ki_raw)`.
    pub fn backward(&self, obs: &[f64], grad_out: [f64; 2]) -> [f64; 2] {
        [
            sign(self.kp_raw) * (grad_out[0] * obs[0] + grad_out[1] * obs[2]),
            sign(self.ki_raw) * (grad_out[0] * obs[1] + grad_out[1] * obs[3]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(e_d: f64, int_d: f64) -> [f64; 8] {
        [e_d, int_d, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    }

    #[test]
    fn forward_examples() {
        let a = PiActor::new(PiGains::INITIAL, 0.15);
        assert_eq!(a.forward(&obs(0.2, 0.1)), [0.2 + 0.5, 0.0]);
        let ff = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        assert_eq!(a.forward(&ff), [1.0, 0.0]);
    }

    #[test]
    fn negative_weights_act_like_positive() {
        let pos = PiActor { kp_raw: 1.4406, ki_raw: 12.7927, omega_l: 0.15 };
        let neg = PiActor { kp_raw: -1.4406, ..pos };
        let o = [0.3, -0.2, 0.1, 0.05, 1.0, 0.02, 0.4, -0.1];
        assert_eq!(pos.forward(&o), neg.forward(&o));
    }

    #[test]
    fn backward_examples() {
        let o = obs(0.2, 0.0);
        let a = PiActor::new(PiGains::INITIAL, 0.15);
        assert!((a.backward(&o, [1.0, 0.0])[0] - 0.2).abs() < 1e-15);
        let n = PiActor { kp_raw: -1.0, ..a };
        assert!((n.backward(&o, [1.0, 0.0])[0] + 0.2).abs() < 1e-15);
        let z = PiActor { kp_raw: 0.0, ..a };
        assert_eq!(z.backward(&o, [1.0, 0.0])[0], 0.0);
    }
}
