//! Independent reference computations used by the acceptance suite and the
//! per-component tests.

use ibr_tune::env::{EnvConfig, Variant};
use ibr_tune::nn::{
    entropy, tanh_log_det, tanh_log_det_grad, ActorCritic, Activation, DenseNet, GaussianHead, PiActor,
};
use ibr_tune::ppo::{clipped_surrogate, compute_gae, RolloutBuffer};
use ibr_tune::sim::{classical_current_controller, BusMeasurement, Dq, PiGains, PlantParams};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const FD_STEP: f64 = 1e-5;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Worst disagreement between the PI actor and the classical controller
/// over `n_obs` observations for each of `n_gains` gain pairs.
pub fn pi_equivalence(n_obs: usize, n_gains: usize, seed: u64) -> f64 {
    let plant = PlantParams::default();
    let w = plant.gfl_omega_l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains: Vec<PiGains> = (0..n_gains)
        .map(|_| PiGains { kp: rng.random_range(0.0..=20.0), ki: rng.random_range(0.0..=100.0) })
        .collect();
    let actors: Vec<PiActor> = gains.iter().map(|g| PiActor::new(*g, w)).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..n_obs {
        let mut u = || rng.random_range(-2.0..=2.0);
        let (e, v, i) = (Dq::new(u(), u()), Dq::new(u(), u()), Dq::new(u(), u()));
        let int = Dq::new(rng.random_range(-10.0..=10.0), rng.random_range(-10.0..=10.0));
        let obs = [e.d, int.d, e.q, int.q, v.d, v.q, i.d, i.q];
        let meas = BusMeasurement { v_dq: v, i_dq: i, ..Default::default() };
        let iref = e + i;
        for (g, a) in gains.iter().zip(&actors) {
            let (c, _) = classical_current_controller(*g, &meas, iref, int, w, plant.dt_sim);
            let y = a.forward(&obs);
            worst = worst.max((y[0] - c.d).abs()).max((y[1] - c.q).abs());
        }
    }
    worst
}

/// Result of one finite-difference family.
#[derive(Clone, Debug)]
pub struct GradCheck {
    pub name: &'static str,
    pub cases: usize,
    /// Largest per-case relative error.
    pub max_rel_err: f64,
    /// Components left out because the function has a kink inside the
    /// difference stencil (ReLU networks only).
    pub kinks_skipped: usize,
    pub components: usize,
}

/// Per-case relative error: worst component difference over the largest
/// gradient magnitude.
pub fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic
        .iter()
        .chain(numeric)
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1e-8);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Central differences of `f` at `x` in the coordinates `idx`. With
/// `detect_kinks`, a coordinate whose one-sided slopes disagree by more
/// than `1e-3` (relative) is reported as `None`.
pub fn central_diff(
    mut f: impl FnMut(&[f64]) -> f64,
    x: &[f64],
    idx: &[usize],
    detect_kinks: bool,
) -> Vec<Option<f64>> {
    let f0 = f(x);
    let mut xp = x.to_vec();
    idx.iter()
        .map(|&i| {
            let orig = xp[i];
            xp[i] = orig + FD_STEP;
            let fp = f(&xp);
            xp[i] = orig - FD_STEP;
            let fm = f(&xp);
            xp[i] = orig;
            let central = (fp - fm) / (2.0 * FD_STEP);
            if detect_kinks {
                let (fwd, bwd) = ((fp - f0) / FD_STEP, (f0 - fm) / FD_STEP);
                if (fwd - bwd).abs() > 1e-3 * fwd.abs().max(bwd.abs()).max(1e-3) {
                    return None;
                }
            }
            Some(central)
        })
        .collect()
}

struct Acc {
    check: GradCheck,
}

impl Acc {
    fn new(name: &'static str) -> Self {
        Acc { check: GradCheck { name, cases: 0, max_rel_err: 0.0, kinks_skipped: 0, components: 0 } }
    }

    fn add(&mut self, analytic: &[f64], idx: &[usize], numeric: &[Option<f64>]) {
        self.check.cases += 1;
        self.extend(analytic, idx, numeric);
    }

    /// Further components of the case last passed to `add`.
    fn extend(&mut self, analytic: &[f64], idx: &[usize], numeric: &[Option<f64>]) {
        let (mut a, mut n) = (Vec::new(), Vec::new());
        for (&i, v) in idx.iter().zip(numeric) {
            match v {
                Some(v) => {
                    a.push(analytic[i]);
                    n.push(*v);
                }
                None => self.check.kinks_skipped += 1,
            }
        }
        self.check.components += a.len();
        self.check.max_rel_err = self.check.max_rel_err.max(rel_err(&a, &n));
    }
}

fn random_dir(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

fn param_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    sample(rng, n, k.min(n)).into_vec()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn check_pi_actor(cases: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new("PI actor");
    for _ in 0..cases {
        let sgn = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = [sgn(&mut rng) * rng.random_range(0.01..20.0), sgn(&mut rng) * rng.random_range(0.01..100.0)];
        let obs: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = random_dir(&mut rng, 2);
        let actor = |p: &[f64]| PiActor { kp_raw: p[0], ki_raw: p[1], omega_l: 0.15 };
        let analytic = actor(&p).backward(&obs, [g[0], g[1]]);
        let numeric = central_diff(|p| dot(&actor(p).forward(&obs), &g), &p, &[0, 1], false);
        acc.add(&analytic, &[0, 1], &numeric);
    }
    acc.check
}

/// Parameters and inputs of a dense network against `g . net(x)`.
fn check_net(
    name: &'static str,
    sizes: &[usize],
    hidden: Activation,
    cases: usize,
    seed: u64,
) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let relu = hidden == Activation::Relu;
    let mut acc = Acc::new(name);
    for _ in 0..cases {
        let mut net = DenseNet::mlp(sizes, hidden, 1.0, &mut rng);
        let mut theta = net.params();
        theta.iter_mut().for_each(|t| *t += 0.1 * normal(&mut rng));
        net.set_params(&theta).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = random_dir(&mut rng, *sizes.last().unwrap());

        net.forward(&x).unwrap();
        let (gp, gx) = net.backward(&g).unwrap();

        let idx = param_subset(&mut rng, theta.len(), 200);
        let mut probe = net.clone();
        let numeric = central_diff(
            |t| {
                probe.set_params(t).unwrap();
                dot(&probe.predict(&x).unwrap(), &g)
            },
            &theta,
            &idx,
            relu,
        );
        acc.add(&gp, &idx, &numeric);

        let all_x: Vec<usize> = (0..x.len()).collect();
        let numeric = central_diff(|xx| dot(&net.predict(xx).unwrap(), &g), &x, &all_x, relu);
        acc.extend(&gx, &all_x, &numeric);
    }
    acc.check
}

pub fn check_adaptive_actor(cases: usize, seed: u64) -> GradCheck {
    check_net("adaptive actor 4-64-64-2 tanh", &[4, 64, 64, 2], Activation::Tanh, cases, seed)
}

pub fn check_fixed_critic(cases: usize, seed: u64) -> GradCheck {
    check_net("fixed critic 8-64-64-1 relu", &[8, 64, 64, 1], Activation::Relu, cases, seed)
}

pub fn check_adaptive_critic(cases: usize, seed: u64) -> GradCheck {
    check_net("adaptive critic 4-64-64-1 tanh", &[4, 64, 64, 1], Activation::Tanh, cases, seed)
}

pub fn check_gaussian_logp(cases: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new("gaussian log-prob");
    for _ in 0..cases {
        let n = rng.random_range(1..=4);
        let mean = random_dir(&mut rng, n);
        let log_std: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..2.0)).collect();
        let a: Vec<f64> = mean
            .iter()
            .zip(&log_std)
            .map(|(m, ls)| m + ls.exp() * 2.0 * normal(&mut rng))
            .collect();
        let (dm, dls) = GaussianHead::new(mean.clone(), log_std.clone()).log_prob_grad(&a);
        let analytic: Vec<f64> = dm.into_iter().chain(dls).collect();
        let x: Vec<f64> = mean.iter().chain(&log_std).copied().collect();
        let idx: Vec<usize> = (0..2 * n).collect();
        let numeric = central_diff(
            |x| GaussianHead::new(x[..n].to_vec(), x[n..].to_vec()).log_prob(&a),
            &x,
            &idx,
            false,
        );
        acc.add(&analytic, &idx, &numeric);
    }
    acc.check
}

pub fn check_entropy(cases: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new("gaussian entropy");
    for _ in 0..cases {
        let n = rng.random_range(1..=4);
        let ls: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..2.0)).collect();
        let idx: Vec<usize> = (0..n).collect();
        acc.add(&vec![1.0; n], &idx, &central_diff(entropy, &ls, &idx, false));
    }
    acc.check
}

pub fn check_tanh_correction(cases: usize, seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new("tanh bound correction");
    let bounds = [[0.0, 20.0], [0.0, 100.0]];
    for _ in 0..cases {
        let raw = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        let numeric = central_diff(|r| tanh_log_det(r, &bounds), &raw, &[0, 1], false);
        acc.add(&tanh_log_det_grad(&raw), &[0, 1], &numeric);
    }
    acc.check
}

/// Full parameter gradient of `c1 log_prob + c2 entropy + c3 value` through
/// [`ActorCritic::backward`].
pub fn check_actor_critic(variant: Variant, cases: usize, seed: u64) -> GradCheck {
    let name = match variant {
        Variant::FixedGain => "fixed actor-critic loss",
        Variant::AdaptiveGain => "adaptive actor-critic loss",
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plant = PlantParams::default();
    let env = EnvConfig::for_variant(variant);
    let mut acc = Acc::new(name);
    for _ in 0..cases {
        let mut pol = ActorCritic::for_env(&plant, &env, &mut rng);
        let mut theta = pol.params();
        theta.iter_mut().for_each(|t| *t += 0.1 * normal(&mut rng));
        pol.set_params(&theta).unwrap();
        let obs: Vec<f64> = (0..variant.obs_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let raw: Vec<f64> = (0..2).map(|_| normal(&mut rng)).collect();
        let c: Vec<f64> = random_dir(&mut rng, 3);

        pol.evaluate(&obs, &raw).unwrap();
        let mut grads = vec![0.0; theta.len()];
        pol.backward(&obs, &raw, c[0], c[1], c[2], &mut grads).unwrap();

        let idx = param_subset(&mut rng, theta.len(), 200);
        let mut probe = pol.clone();
        let numeric = central_diff(
            |t| {
                probe.set_params(t).unwrap();
                c[0] * probe.log_prob(&obs, &raw).unwrap() + c[1] * probe.entropy() + c[2] * probe.value(&obs).unwrap()
            },
            &theta,
            &idx,
            true,
        );
        acc.add(&grads, &idx, &numeric);
    }
    acc.check
}

pub fn gradient_suite(cases: usize, seed: u64) -> Vec<GradCheck> {
    vec![
        check_pi_actor(cases, seed),
        check_adaptive_actor(cases, seed + 1),
        check_fixed_critic(cases, seed + 2),
        check_adaptive_critic(cases, seed + 3),
        check_gaussian_logp(cases, seed + 4),
        check_entropy(cases, seed + 5),
        check_tanh_correction(cases, seed + 6),
        check_actor_critic(Variant::FixedGain, cases, seed + 7),
        check_actor_critic(Variant::AdaptiveGain, cases, seed + 8),
    ]
}

/// A random buffer of 1 to 3 segments, `len` transitions in total.
pub fn random_buffer(rng: &mut ChaCha8Rng, len: usize) -> RolloutBuffer {
    let mut b = RolloutBuffer::new(1, 1);
    let cuts = rng.random_range(0..=2usize.min(len - 1));
    let mut ends: Vec<usize> = sample(rng, len - 1, cuts).into_iter().map(|c| c + 1).collect();
    ends.sort_unstable();
    ends.push(len);
    let mut start = 0;
    for end in ends {
        for _ in start..end {
            let r = normal(rng);
            b.push(&[0.0], &[0.0], r, r, normal(rng), 0.0, rng.random_bool(0.2));
        }
        b.close_segment(normal(rng));
        start = end;
    }
    b
}

/// Discounted return from `t` to the first done or the segment end, where
/// the segment's last value is bootstrapped.
pub fn brute_force_return(b: &RolloutBuffer, t: usize, gamma: f64) -> f64 {
    let seg = b.segments.iter().find(|s| s.start <= t && t < s.end).unwrap();
    let mut g = 0.0;
    let mut disc = 1.0;
    for k in t..seg.end {
        g += disc * b.rewards[k];
        if b.dones[k] {
            return g;
        }
        disc *= gamma;
    }
    g + disc * seg.last_value
}

/// Worst GAE(lambda=1) error against the brute-force return minus the
/// baseline, and the number of lambda=0 advantages that differ from the
/// one-step TD residual.
pub fn gae_oracle(trajectories: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = 0.99;
    let mut worst: f64 = 0.0;
    let mut td_mismatch = 0;
    for _ in 0..trajectories {
        let len = rng.random_range(1..=32);
        let mut b = random_buffer(&mut rng, len);
        compute_gae(&mut b, gamma, 1.0).unwrap();
        for t in 0..len {
            let mc = brute_force_return(&b, t, gamma) - b.values[t];
            worst = worst.max((b.advantages[t] - mc).abs());
        }
        compute_gae(&mut b, gamma, 0.0).unwrap();
        for seg in b.segments.clone() {
            for t in seg.start..seg.end {
                let next = if b.dones[t] {
                    0.0
                } else if t + 1 < seg.end {
                    b.values[t + 1]
                } else {
                    seg.last_value
                };
                let td = b.rewards[t] + gamma * next - b.values[t];
                if b.advantages[t] != td {
                    td_mismatch += 1;
                }
            }
        }
    }
    (worst, td_mismatch)
}

pub const CLIP_EPSILONS: [f64; 6] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];

/// Counts samples where the clipped objective exceeds the unclipped one,
/// and samples at ratio 1 that do not return the advantage.
pub fn clip_bound(samples: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut above, mut identity) = (0, 0);
    for _ in 0..samples {
        let ratio = (2.0 * normal(&mut rng)).exp();
        let adv = 3.0 * normal(&mut rng);
        let eps = CLIP_EPSILONS[rng.random_range(0..CLIP_EPSILONS.len())];
        if clipped_surrogate(ratio, adv, eps) > ratio * adv {
            above += 1;
        }
        if clipped_surrogate(1.0, adv, eps) != adv {
            identity += 1;
        }
    }
    (above, identity)
}
