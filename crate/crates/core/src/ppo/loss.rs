/// Per-sample clipped surrogate `min(r A, clip(r, 1-eps, 1+eps) A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    unclipped.min(clipped)
}

/// Derivative of [`clipped_surrogate`] with respect to the ratio. Where the
/// clipped branch is strictly smaller the objective is flat.
pub fn clipped_surrogate_grad(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    if unclipped <= clipped {
        advantage
    } else {
        0.0
    }
}

/// Standardises `adv` in place to zero mean and unit (population) standard
/// deviation, guarding the division with `1e-8`. Single samples are left
/// untouched.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len();
    if n < 2 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    adv.iter_mut().for_each(|a| *a = (*a - mean) / (std + 1e-8));
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`; returns
/// the norm before clipping.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= scale);
    }
    norm
}

/// Low-variance estimator of KL(old || new) from the log ratio.
pub fn approx_kl(log_ratio: f64) -> f64 {
    log_ratio.exp_m1() - log_ratio
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrogate_examples() {
        assert!((clipped_surrogate(1.3, 2.0, 0.2) - 2.4).abs() < 1e-15);
        assert!((clipped_surrogate(0.5, -1.0, 0.2) + 0.8).abs() < 1e-15);
        assert_eq!(clipped_surrogate(1.0, 3.5, 0.1), 3.5);
    }

    #[test]
    fn surrogate_gradient_vanishes_when_clipped() {
        assert_eq!(clipped_surrogate_grad(1.3, 2.0, 0.2), 0.0);
        assert_eq!(clipped_surrogate_grad(1.1, 2.0, 0.2), 2.0);
        assert_eq!(clipped_surrogate_grad(1.3, -2.0, 0.2), -2.0);
    }

    #[test]
    fn normalization() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        normalize_advantages(&mut a);
        let mean: f64 = a.iter().sum::<f64>() / 4.0;
        let std = (a.iter().map(|x| x * x).sum::<f64>() / 4.0).sqrt();
        assert!(mean.abs() < 1e-12 && (std - 1.0).abs() < 1e-6);
        let mut one = vec![5.0];
        normalize_advantages(&mut one);
        assert_eq!(one, vec![5.0]);
    }

    #[test]
    fn grad_clip() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_grad_norm(&mut g, 0.5), 5.0);
        assert!((g[0] - 0.3).abs() < 1e-15 && (g[1] - 0.4).abs() < 1e-15);
        let mut small = vec![0.1, 0.1];
        clip_grad_norm(&mut small, 0.5);
        assert_eq!(small, vec![0.1, 0.1]);
    }

    #[test]
    fn kl_estimator_is_zero_at_identity() {
        assert_eq!(approx_kl(0.0), 0.0);
        assert!(approx_kl(0.1) > 0.0 && approx_kl(-0.1) > 0.0);
    }
}
