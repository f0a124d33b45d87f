//! Per-step rewards for the two agent variants.

use crate::sim::Dq;

/// Fixed-gain reward. `weights` are `[tracking_d, tracking_q, effort_d,
/// effort_q, smoothness, consumption]`; all are expected to be non-positive.
///
/// The smoothness term compares the action with its low-pass filtered value.
/// The filter state is evaluated before it is advanced, and the advanced
/// state is returned alongside the reward.
pub fn reward_fixed(err: Dq, action: Dq, lpf: Dq, p: f64, weights: &[f64], lpf_alpha: f64) -> (f64, Dq) {
    let w = weights;
    let mut r = w[0] * err.d * err.d
        + w[1] * err.q * err.q
        + w[2] * action.d * action.d
        + w[3] * action.q * action.q
        + w[4] * ((action.d - lpf.d).abs() + (action.q - lpf.q).abs());
    if p < 0.0 {
        r += w[5] * p.abs();
    }
    let next = lpf + (action - lpf) * lpf_alpha;
    (r, next)
}

/// Adaptive-gain reward: the weighted squared power errors and normalised
/// gains form a cost, returned negated.
pub fn reward_adaptive(p_err: f64, q_err: f64, action_norm: [f64; 2], weights: &[f64]) -> f64 {
    -(weights[0] * p_err * p_err
        + weights[1] * q_err * q_err
        + weights[2] * action_norm[0] * action_norm[0]
        + weights[3] * action_norm[1] * action_norm[1])
}
