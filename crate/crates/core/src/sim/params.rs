use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electrical and control parameters of the two-inverter microgrid, per-unit
/// on the inverter rating unless noted.
///
/// The GFM loop gains are hand-tuned and never trained. `vmeas_tau` is the
/// time constant of the first-order voltage sensor filter in front of the
/// GFL controller; the current controller's voltage feedforward and its
/// current reference both use the sensed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    /// Nominal frequency (Hz).
    pub f0: f64,
    /// Integration step (s).
    pub dt_sim: f64,
    pub gfl_lf: f64,
    pub gfl_rf: f64,
    pub gfm_lf: f64,
    pub gfm_rf: f64,
    pub gfm_cf: f64,
    pub r_load: f64,
    /// P-f droop slope (pu/pu).
    pub droop_mp: f64,
    /// Q-V droop slope (pu/pu).
    pub droop_mq: f64,
    pub gfm_kpv: f64,
    pub gfm_kiv: f64,
    pub gfm_kpc: f64,
    pub gfm_kic: f64,
    /// Cut-off of the GFM power measurement filter feeding the droops (Hz).
    pub power_filter_hz: f64,
    pub pll_kp: f64,
    pub pll_ki: f64,
    /// GFL voltage sensor filter time constant (s). Zero disables the filter.
    pub vmeas_tau: f64,
    pub v_nom: f64,
    /// GFL breaker close time (s).
    pub connect_time: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            f0: 60.0,
            dt_sim: 50e-6,
            gfl_lf: 0.15,
            gfl_rf: 0.005,
            gfm_lf: 0.08,
            gfm_rf: 0.004,
            gfm_cf: 0.3,
            r_load: 1.25,
            droop_mp: 0.01,
            droop_mq: 0.05,
            gfm_kpv: 1.0,
            gfm_kiv: 50.0,
            gfm_kpc: 2.5,
            gfm_kic: 20.0,
            power_filter_hz: 10.0,
            pll_kp: 0.1,
            pll_ki: 2.0,
            vmeas_tau: 3e-3,
            v_nom: 1.0,
            connect_time: 0.5,
        }
    }
}

impl PlantParams {
    /// Base angular frequency `2 pi f0` (rad/s).
    pub fn omega0(&self) -> f64 {
        std::f64::consts::TAU * self.f0
    }

    /// The cross-coupling reactance `omega L` seen by the GFL current
    /// controller at nominal frequency (pu).
    pub fn gfl_omega_l(&self) -> f64 {
        self.gfl_lf
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("f0", self.f0),
            ("dt_sim", self.dt_sim),
            ("gfl_lf", self.gfl_lf),
            ("gfl_rf", self.gfl_rf),
            ("gfm_lf", self.gfm_lf),
            ("gfm_rf", self.gfm_rf),
            ("gfm_cf", self.gfm_cf),
            ("r_load", self.r_load),
            ("power_filter_hz", self.power_filter_hz),
            ("v_nom", self.v_nom),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("plant.{name} must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("droop_mp", self.droop_mp),
            ("droop_mq", self.droop_mq),
            ("gfm_kpv", self.gfm_kpv),
            ("gfm_kiv", self.gfm_kiv),
            ("gfm_kpc", self.gfm_kpc),
            ("gfm_kic", self.gfm_kic),
            ("pll_kp", self.pll_kp),
            ("pll_ki", self.pll_ki),
            ("vmeas_tau", self.vmeas_tau),
            ("connect_time", self.connect_time),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Config(format!("plant.{name} must be >= 0, got {value}")));
            }
        }
        Ok(())
    }

    /// Number of integration steps covering `seconds`, if it is a whole number.
    pub fn steps_for(&self, seconds: f64) -> Option<u64> {
        let n = seconds / self.dt_sim;
        let rounded = n.round();
        if rounded >= 0.0 && (n - rounded).abs() <= 1e-6 * rounded.max(1.0) {
            Some(rounded as u64)
        } else {
            None
        }
    }
}
