//! Averaged dq model of a GFM inverter, a GFL inverter and a resistive load
//! sharing one bus.
//!
//! The network is written in a frame rotating at nominal frequency:
//!
//! ```text
//! (Lg/wb) d(ig)/dt = eg - v - Rg*ig - j*Lg*ig
//! (Ll/wb) d(il)/dt = ul - v - Rl*il - j*Ll*il      (breaker closed)
//! (Cf/wb) d(v)/dt  = ig + il - v/Rload - j*Cf*v
//! ```
//!
//! Electrical states advance with RK4 under zero-order-hold inverter
//! voltages; controller states (droop filters, PI integrators, PLL, sensor
//! filter) advance with forward Euler from the pre-step measurements.

use super::controller::{compute_power, integrate_error};
use super::dq::{wrap_angle, Dq};
use super::params::PlantParams;
use super::state::{BusMeasurement, PlantState};
use crate::error::{Error, Result};

/// Command bound of the GFL inverter voltage (pu).
pub const COMMAND_LIMIT: f64 = 2.0;

/// Canonical discharged state: zero currents and voltages, integrators
/// cleared, breaker open, `t = 0`.
pub fn reset_plant(params: &PlantParams, seed: u64) -> Result<PlantState> {
    params.validate()?;
    Ok(PlantState {
        gfm_omega: 1.0,
        seed,
        ..PlantState::default()
    })
}

/// The GFL's view of the bus in its PLL frame.
pub fn measure(state: &PlantState) -> BusMeasurement {
    let i_dq = state.gfl_il.into_frame(state.pll_theta);
    let v_dq = state.gfl_v_sensed;
    let (p, q) = compute_power(v_dq, i_dq);
    BusMeasurement { v_dq, i_dq, p, q }
}

pub fn clamp_command(u: Dq) -> Dq {
    u.clamp(COMMAND_LIMIT)
}

#[derive(Clone, Copy)]
struct Electrical {
    ig: Dq,
    v: Dq,
    il: Dq,
}

impl Electrical {
    fn axpy(self, h: f64, k: Electrical) -> Electrical {
        Electrical {
            ig: self.ig + k.ig * h,
            v: self.v + k.v * h,
            il: self.il + k.il * h,
        }
    }
}

struct Coefficients {
    wb: f64,
    lg: f64,
    rg: f64,
    ll: f64,
    rl: f64,
    cf: f64,
    g_load: f64,
}

fn derivatives(x: Electrical, eg: Dq, ul: Dq, closed: bool, c: &Coefficients) -> Electrical {
    let dig = (eg - x.v - x.ig * c.rg - x.ig.rotate_quarter() * c.lg) * (c.wb / c.lg);
    let dil = if closed {
        (ul - x.v - x.il * c.rl - x.il.rotate_quarter() * c.ll) * (c.wb / c.ll)
    } else {
        Dq::ZERO
    };
    let dv = (x.ig + x.il - x.v * c.g_load - x.v.rotate_quarter() * c.cf) * (c.wb / c.cf);
    Electrical {
        ig: dig,
        v: dv,
        il: dil,
    }
}

/// GFM droop plus cascaded voltage/current control; returns the inverter
/// voltage in the network frame together with the errors to integrate.
fn gfm_control(state: &PlantState, params: &PlantParams) -> (Dq, Dq, Dq) {
    let delta = state.gfm_delta;
    let w = state.gfm_omega;
    let v = state.bus_v.into_frame(delta);
    let ig = state.gfm_il.into_frame(delta);
    let i_out = (state.bus_v * (1.0 / params.r_load) - state.gfl_il).into_frame(delta);

    let v_ref = Dq::new(params.v_nom - params.droop_mq * state.gfm_q_filt, 0.0);
    let ev = v_ref - v;
    let ig_ref = ev * params.gfm_kpv
        + state.gfm_int_v * params.gfm_kiv
        + i_out
        + v.rotate_quarter() * (w * params.gfm_cf);
    let ec = ig_ref - ig;
    let eg = ec * params.gfm_kpc
        + state.gfm_int_c * params.gfm_kic
        + v
        + ig.rotate_quarter() * (w * params.gfm_lf);
    (eg.from_frame(delta), ev, ec)
}

/// Advance the plant by one `dt_sim` with the GFL voltage command `u_cmd`
/// (PLL frame). `iref` is the GFL current reference used to advance the
/// tracking-error integrators that are exposed as observations.
pub fn step_plant(
    state: &PlantState,
    params: &PlantParams,
    u_cmd: Dq,
    iref: Dq,
) -> Result<(PlantState, BusMeasurement)> {
    state.ensure_finite()?;
    if !u_cmd.is_finite()
        || u_cmd.d.abs() > COMMAND_LIMIT
        || u_cmd.q.abs() > COMMAND_LIMIT
    {
        return Err(Error::Usage(format!(
            "GFL voltage command {u_cmd:?} outside +/-{COMMAND_LIMIT} pu"
        )));
    }
    let dt = params.dt_sim;
    let wb = params.omega0();
    let mut next = state.clone();

    let closed = state.breaker_closed;
    let (eg, ev, ec) = gfm_control(state, params);
    let ul = u_cmd.from_frame(state.pll_theta);

    let coeffs = Coefficients {
        wb,
        lg: params.gfm_lf,
        rg: params.gfm_rf,
        ll: params.gfl_lf,
        rl: params.gfl_rf,
        cf: params.gfm_cf,
        g_load: 1.0 / params.r_load,
    };
    let x0 = Electrical {
        ig: state.gfm_il,
        v: state.bus_v,
        il: state.gfl_il,
    };
    let k1 = derivatives(x0, eg, ul, closed, &coeffs);
    let k2 = derivatives(x0.axpy(0.5 * dt, k1), eg, ul, closed, &coeffs);
    let k3 = derivatives(x0.axpy(0.5 * dt, k2), eg, ul, closed, &coeffs);
    let k4 = derivatives(x0.axpy(dt, k3), eg, ul, closed, &coeffs);
    let sum = Electrical {
        ig: k1.ig + (k2.ig + k3.ig) * 2.0 + k4.ig,
        v: k1.v + (k2.v + k3.v) * 2.0 + k4.v,
        il: k1.il + (k2.il + k3.il) * 2.0 + k4.il,
    };
    let x1 = x0.axpy(dt / 6.0, sum);
    next.gfm_il = x1.ig;
    next.bus_v = x1.v;
    next.gfl_il = if closed { x1.il } else { Dq::ZERO };

    // GFM: power filters, droops, PI integrators, internal angle.
    let (p_gfm, q_gfm) = compute_power(state.bus_v, state.gfm_il);
    let a_pow = 1.0 - (-std::f64::consts::TAU * params.power_filter_hz * dt).exp();
    next.gfm_p_filt = state.gfm_p_filt + a_pow * (p_gfm - state.gfm_p_filt);
    next.gfm_q_filt = state.gfm_q_filt + a_pow * (q_gfm - state.gfm_q_filt);
    next.gfm_omega = 1.0 - params.droop_mp * next.gfm_p_filt;
    next.gfm_int_v = integrate_error(state.gfm_int_v, ev, dt);
    next.gfm_int_c = integrate_error(state.gfm_int_c, ec, dt);
    next.gfm_delta = wrap_angle(state.gfm_delta + wb * (state.gfm_omega - 1.0) * dt);

    // GFL: tracking-error integrators, PLL, voltage sensor.
    let meas = measure(state);
    if closed {
        next.gfl_int_c = integrate_error(state.gfl_int_c, iref - meas.i_dq, dt);
    }
    let v_pll = state.bus_v.into_frame(state.pll_theta);
    let omega_pll = 1.0 + params.pll_kp * v_pll.q + params.pll_ki * state.pll_int;
    next.pll_int = state.pll_int + v_pll.q * dt;
    next.pll_theta = wrap_angle(state.pll_theta + wb * (omega_pll - 1.0) * dt);
    let a_meas = if params.vmeas_tau > 0.0 {
        1.0 - (-dt / params.vmeas_tau).exp()
    } else {
        1.0
    };
    next.gfl_v_sensed = state.gfl_v_sensed + (v_pll - state.gfl_v_sensed) * a_meas;

    next.step = state.step + 1;
    next.t = next.step as f64 * dt;
    if !next.breaker_closed && next.t >= params.connect_time - 1e-9 * dt {
        next.breaker_closed = true;
    }

    next.ensure_finite()?;
    let out = measure(&next);
    Ok((next, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::controller::{classical_current_controller, current_reference};
    use crate::sim::state::PiGains;

    fn run_gfm_only(seconds: f64) -> (PlantState, PlantParams) {
        let params = PlantParams {
            connect_time: 10.0,
            ..PlantParams::default()
        };
        let mut s = reset_plant(&params, 0).unwrap();
        let n = params.steps_for(seconds).unwrap();
        for _ in 0..n {
            let meas = measure(&s);
            s = step_plant(&s, &params, clamp_command(meas.v_dq), Dq::ZERO).unwrap().0;
        }
        (s, params)
    }

    #[test]
    fn reset_is_discharged_and_deterministic() {
        let p = PlantParams::default();
        let a = reset_plant(&p, 0).unwrap();
        assert_eq!(a.gfl_il, Dq::ZERO);
        assert_eq!(a.t, 0.0);
        assert!(!a.breaker_closed);
        assert_eq!(a, reset_plant(&p, 0).unwrap());
    }

    #[test]
    fn reset_rejects_bad_params() {
        let p = PlantParams {
            dt_sim: 0.0,
            ..PlantParams::default()
        };
        assert!(matches!(reset_plant(&p, 0), Err(Error::Config(_))));
    }

    #[test]
    fn gfm_alone_regulates_bus_voltage() {
        let (s, params) = run_gfm_only(0.4);
        let v = s.bus_voltage_magnitude();
        assert!((v - 1.0).abs() <= 0.05, "bus voltage {v}");
        // Load draws V^2/R and the GFM supplies it at steady state.
        let p_load = s.load_power(params.r_load);
        assert!((s.gfm_power() - p_load).abs() < 0.01 * p_load);
        assert_eq!(s.gfl_il, Dq::ZERO);
    }

    #[test]
    fn nan_state_reports_divergence() {
        let p = PlantParams::default();
        let mut s = reset_plant(&p, 0).unwrap();
        s.bus_v.d = f64::NAN;
        let err = step_plant(&s, &p, Dq::ZERO, Dq::ZERO).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn out_of_range_command_is_rejected() {
        let p = PlantParams::default();
        let s = reset_plant(&p, 0).unwrap();
        assert!(step_plant(&s, &p, Dq::new(2.5, 0.0), Dq::ZERO).is_err());
    }

    #[test]
    fn steady_state_power_balance_with_gfl() {
        let params = PlantParams::default();
        let mut s = reset_plant(&params, 0).unwrap();
        for _ in 0..params.steps_for(1.5).unwrap() {
            let meas = measure(&s);
            let iref = current_reference(&meas, 0.5, 0.0, s.breaker_closed);
            let (u, _) = classical_current_controller(
                PiGains::INITIAL,
                &meas,
                iref,
                s.gfl_int_c,
                params.gfl_omega_l(),
                params.dt_sim,
            );
            s = step_plant(&s, &params, clamp_command(u), iref).unwrap().0;
            assert!(s.t < params.connect_time || s.breaker_closed);
        }
        let p_load = s.load_power(params.r_load);
        let imbalance = s.gfm_power() + s.gfl_power() - p_load;
        assert!(imbalance.abs() < 0.01 * p_load, "imbalance {imbalance}");
        assert!((measure(&s).p - 0.5).abs() < 0.01);
    }
}
