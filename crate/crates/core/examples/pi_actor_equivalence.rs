//! The PI actor is the classical current controller written as a network:
//! compare both on random operating points.

use ibr_tune::nn::PiActor;
use ibr_tune::sim::{classical_current_controller, BusMeasurement, Dq, PiGains, PlantParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let plant = PlantParams::default();
    let omega_l = plant.gfl_omega_l();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;

    for _ in 0..20 {
        let gains = PiGains { kp: rng.random_range(0.0..20.0), ki: rng.random_range(0.0..100.0) };
        let actor = PiActor::new(gains, omega_l);
        for _ in 0..1000 {
            let v = Dq::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let i = Dq::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let iref = Dq::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let int = Dq::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let meas = BusMeasurement { v_dq: v, i_dq: i, ..Default::default() };
            let (u, _) = classical_current_controller(gains, &meas, iref, int, omega_l, plant.dt_sim);
            let e = iref - i;
            let obs = [e.d, int.d, e.q, int.q, v.d, v.q, i.d, i.q];
            let a = actor.forward(&obs);
            worst = worst.max((a[0] - u.d).abs()).max((a[1] - u.q).abs());
        }
    }
    println!("20000 operating points, max |actor - controller| = {worst:.3e}");
}
