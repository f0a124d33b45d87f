//! Diagonal Gaussian action head and the tanh squashing into box bounds.

use rand::Rng;
use rand_distr::StandardNormal;

/// `0.5 * ln(2 pi)`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Diagonal Gaussian with a state-independent log standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianHead {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl GaussianHead {
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>) -> Self {
        debug_assert_eq!(mean.len(), log_std.len());
        GaussianHead { mean, log_std }
    }

    pub fn log_prob(&self, a: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.log_std)
            .zip(a)
            .map(|((m, ls), x)| {
                let z = (x - m) / ls.exp();
                -HALF_LN_2PI - ls - 0.5 * z * z
            })
            .sum()
    }

    /// Gradients of [`GaussianHead::log_prob`] with respect to the mean and
    /// the log standard deviation.
    pub fn log_prob_grad(&self, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut d_mean = Vec::with_capacity(a.len());
        let mut d_log_std = Vec::with_capacity(a.len());
        for ((m, ls), x) in self.mean.iter().zip(&self.log_std).zip(a) {
            let std = ls.exp();
            let z = (x - m) / std;
            d_mean.push(z / std);
            d_log_std.push(z * z - 1.0);
        }
        (d_mean, d_log_std)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.log_std)
            .map(|(m, ls)| {
                let eps: f64 = rng.sample(StandardNormal);
                m + ls.exp() * eps
            })
            .collect()
    }

    pub fn sample_logp<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let a = self.sample(rng);
        let lp = self.log_prob(&a);
        (a, lp)
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.log_std)
    }
}

/// Entropy of a diagonal Gaussian; its gradient in each `log_std` is 1.
pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| 0.5 + HALF_LN_2PI + ls).sum()
}

/// Maps an unbounded vector into `bounds` through `tanh`. Every output lies
/// strictly inside its interval for finite input.
pub fn scale_to_bounds(raw: &[f64], bounds: &[[f64; 2]]) -> Vec<f64> {
    raw.iter()
        .zip(bounds)
        .map(|(x, b)| b[0] + (b[1] - b[0]) * 0.5 * (x.tanh() + 1.0))
        .collect()
}

/// Inverse of [`scale_to_bounds`] for points inside the bounds.
pub fn unscale_from_bounds(a: &[f64], bounds: &[[f64; 2]]) -> Vec<f64> {
    a.iter()
        .zip(bounds)
        .map(|(x, b)| (2.0 * (x - b[0]) / (b[1] - b[0]) - 1.0).atanh())
        .collect()
}

/// `ln |d scale_to_bounds / d raw|`, summed over elements. Subtract it from
/// the Gaussian log-density of `raw` to get the density of the bounded
/// action.
pub fn tanh_log_det(raw: &[f64], bounds: &[[f64; 2]]) -> f64 {
    raw.iter()
        .zip(bounds)
        .map(|(x, b)| {
            // ln(1 - tanh^2 x) = 2 (ln 2 - x - softplus(-2x))
            let softplus = (-2.0 * x).max(0.0) + (-(2.0 * x).abs()).exp().ln_1p();
            (0.5 * (b[1] - b[0])).ln() + 2.0 * (std::f64::consts::LN_2 - x - softplus)
        })
        .sum()
}

/// Gradient of [`tanh_log_det`] with respect to `raw`.
pub fn tanh_log_det_grad(raw: &[f64]) -> Vec<f64> {
    raw.iter().map(|x| -2.0 * x.tanh()).collect()
}
