use super::dq::Dq;
use super::state::{BusMeasurement, PiGains};

/// Floor on the sensed d-axis voltage used to turn power setpoints into
/// current references.
pub const VD_REFERENCE_FLOOR: f64 = 0.1;

/// Generator-convention power from a voltage and a current in the same frame:
/// `P = vd*id + vq*iq`, `Q = vq*id - vd*iq`.
pub fn compute_power(v: Dq, i: Dq) -> (f64, f64) {
    (v.d * i.d + v.q * i.q, v.q * i.d - v.d * i.q)
}

/// Current references for the power setpoints. The GFL is dispatched only
/// once its breaker is closed; before that the reference is zero.
pub fn current_reference(meas: &BusMeasurement, pref: f64, qref: f64, dispatched: bool) -> Dq {
    if !dispatched {
        return Dq::ZERO;
    }
    let vd = meas.v_dq.d.max(VD_REFERENCE_FLOOR);
    Dq::new(pref / vd, -qref / vd)
}

/// Forward-Euler update of the current-error integrators.
#[inline]
pub fn integrate_error(int_state: Dq, err: Dq, dt: f64) -> Dq {
    Dq::new(int_state.d + err.d * dt, int_state.q + err.q * dt)
}

/// Cascaded dq current PI with voltage feedforward and cross-coupling
/// decoupling:
///
/// ```text
/// Ud = Kp*ed + Ki*int_ed + Vd - wL*iq
/// Uq = Kp*eq + Ki*int_eq + Vq + wL*id
/// ```
///
/// Returns the command and the integrator state for the next step.
pub fn classical_current_controller(
    gains: PiGains,
    meas: &BusMeasurement,
    iref: Dq,
    int_state: Dq,
    omega_l: f64,
    dt: f64,
) -> (Dq, Dq) {
    let err = iref - meas.i_dq;
    let u = Dq::new(
        gains.kp * err.d + gains.ki * int_state.d + meas.v_dq.d - omega_l * meas.i_dq.q,
        gains.kp * err.q + gains.ki * int_state.q + meas.v_dq.q + omega_l * meas.i_dq.d,
    );
    (u, integrate_error(int_state, err, dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meas(v: Dq, i: Dq) -> BusMeasurement {
        let (p, q) = compute_power(v, i);
        BusMeasurement { v_dq: v, i_dq: i, p, q }
    }

    #[test]
    fn proportional_plus_integral_on_d_axis() {
        // iref_d - id = 0.2, integral 0.1
        let m = meas(Dq::ZERO, Dq::ZERO);
        let (u, _) = classical_current_controller(
            PiGains::INITIAL,
            &m,
            Dq::new(0.2, 0.0),
            Dq::new(0.1, 0.0),
            0.15,
            50e-6,
        );
        assert!((u.d - 0.7).abs() < 1e-15);
        assert_eq!(u.q, 0.0);
    }

    #[test]
    fn feedforward_only() {
        let m = meas(Dq::new(1.0, 0.0), Dq::ZERO);
        let (u, int) =
            classical_current_controller(PiGains::INITIAL, &m, Dq::ZERO, Dq::ZERO, 0.15, 50e-6);
        assert_eq!(u, Dq::new(1.0, 0.0));
        assert_eq!(int, Dq::ZERO);
    }

    #[test]
    fn cross_coupling_term() {
        // iq = 1 with a matching reference so the error is zero.
        let m = meas(Dq::ZERO, Dq::new(0.0, 1.0));
        let (u, _) = classical_current_controller(
            PiGains::INITIAL,
            &m,
            Dq::new(0.0, 1.0),
            Dq::ZERO,
            0.3,
            50e-6,
        );
        assert!((u.d + 0.3).abs() < 1e-15);
        assert_eq!(u.q, 0.0);
    }

    #[test]
    fn integrator_is_forward_euler() {
        let m = meas(Dq::ZERO, Dq::new(0.1, 0.0));
        let (_, int) = classical_current_controller(
            PiGains::INITIAL,
            &m,
            Dq::new(0.5, 0.0),
            Dq::new(1.0, 2.0),
            0.15,
            0.01,
        );
        assert!((int.d - (1.0 + 0.4 * 0.01)).abs() < 1e-15);
        assert_eq!(int.q, 2.0);
    }

    #[test]
    fn power_sign_convention() {
        assert_eq!(compute_power(Dq::new(1.0, 0.0), Dq::new(0.5, 0.0)), (0.5, 0.0));
        assert_eq!(compute_power(Dq::new(1.0, 0.0), Dq::new(0.0, 0.5)), (0.0, -0.5));
        let (p, q) = compute_power(Dq::ZERO, Dq::new(0.3, -0.7));
        assert_eq!((p, q), (0.0, 0.0));
    }

    #[test]
    fn reference_is_zero_until_dispatched() {
        let m = meas(Dq::new(1.0, 0.0), Dq::ZERO);
        assert_eq!(current_reference(&m, 0.5, 0.0, false), Dq::ZERO);
        assert_eq!(current_reference(&m, 0.5, 0.0, true), Dq::new(0.5, 0.0));
        let low = meas(Dq::new(0.01, 0.0), Dq::ZERO);
        assert_eq!(current_reference(&low, 0.5, 0.2, true), Dq::new(5.0, -2.0));
    }
}
