use super::controller::{classical_current_controller, current_reference};
use super::dq::Dq;
use super::params::PlantParams;
use super::plant::{clamp_command, measure, step_plant};
use super::state::{BusMeasurement, PiGains, PlantState};
use crate::error::Result;

/// Signals produced by the GFL current controller on one plant step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlSignals {
    pub iref: Dq,
    pub u_cmd: Dq,
}

/// One plant step under the classical PI current controller. The reference
/// is derived from the measurement taken before the step.
pub fn pi_closed_loop_step(
    state: &PlantState,
    params: &PlantParams,
    gains: PiGains,
    pref: f64,
    qref: f64,
) -> Result<(PlantState, BusMeasurement, ControlSignals)> {
    let meas = measure(state);
    let iref = current_reference(&meas, pref, qref, state.breaker_closed);
    let (u, _) = classical_current_controller(
        gains,
        &meas,
        iref,
        state.gfl_int_c,
        params.gfl_omega_l(),
        params.dt_sim,
    );
    let u_cmd = clamp_command(u);
    let (next, out) = step_plant(state, params, u_cmd, iref)?;
    Ok((next, out, ControlSignals { iref, u_cmd }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::plant::reset_plant;

    #[test]
    fn integrator_matches_controller_update() {
        let params = PlantParams::default();
        let mut s = reset_plant(&params, 0).unwrap();
        for _ in 0..params.steps_for(0.6).unwrap() {
            let m = measure(&s);
            let iref = current_reference(&m, 0.5, 0.0, s.breaker_closed);
            let (_, int_next) = classical_current_controller(
                PiGains::INITIAL,
                &m,
                iref,
                s.gfl_int_c,
                params.gfl_omega_l(),
                params.dt_sim,
            );
            let closed = s.breaker_closed;
            s = pi_closed_loop_step(&s, &params, PiGains::INITIAL, 0.5, 0.0).unwrap().0;
            if closed {
                assert_eq!(s.gfl_int_c, int_next);
            }
        }
        assert!(s.breaker_closed);
    }
}
