use serde::{Deserialize, Serialize};

use super::dq::Dq;
use crate::error::{Error, Result};

/// Full continuous and discrete state of the microgrid.
///
/// Electrical quantities (`gfm_il`, `bus_v`, `gfl_il`) live in the network
/// frame rotating at nominal frequency. Controller states live in the frame
/// of the controller that owns them (GFM internal angle, GFL PLL angle).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub gfm_il: Dq,
    /// Capacitor voltage of the GFM filter, which is also the common bus.
    pub bus_v: Dq,
    pub gfm_delta: f64,
    pub gfm_omega: f64,
    pub gfm_p_filt: f64,
    pub gfm_q_filt: f64,
    pub gfm_int_v: Dq,
    pub gfm_int_c: Dq,
    pub gfl_il: Dq,
    /// Integrals of the GFL current tracking error, PLL frame.
    pub gfl_int_c: Dq,
    /// Output of the GFL voltage sensor filter, PLL frame.
    pub gfl_v_sensed: Dq,
    pub pll_theta: f64,
    pub pll_int: f64,
    pub breaker_closed: bool,
    pub step: u64,
    pub t: f64,
    pub seed: u64,
}

impl PlantState {
    pub fn is_finite(&self) -> bool {
        [
            self.gfm_il,
            self.bus_v,
            self.gfm_int_v,
            self.gfm_int_c,
            self.gfl_il,
            self.gfl_int_c,
            self.gfl_v_sensed,
        ]
        .iter()
        .all(|x| x.is_finite())
            && [
                self.gfm_delta,
                self.gfm_omega,
                self.gfm_p_filt,
                self.gfm_q_filt,
                self.pll_theta,
                self.pll_int,
                self.t,
            ]
            .iter()
            .all(|x| x.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Diverged {
                t: self.t,
                detail: format!("non-finite plant state {self:?}"),
            })
        }
    }

    pub fn bus_voltage_magnitude(&self) -> f64 {
        self.bus_v.magnitude()
    }

    /// Real power delivered by the GFM into the bus.
    pub fn gfm_power(&self) -> f64 {
        self.bus_v.d * self.gfm_il.d + self.bus_v.q * self.gfm_il.q
    }

    /// Real power injected by the GFL at the bus (instantaneous voltage).
    pub fn gfl_power(&self) -> f64 {
        self.bus_v.d * self.gfl_il.d + self.bus_v.q * self.gfl_il.q
    }

    pub fn load_power(&self, r_load: f64) -> f64 {
        let v = self.bus_voltage_magnitude();
        v * v / r_load
    }
}

/// Proportional and integral gains of the GFL current controller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiGains {
    pub kp: f64,
    pub ki: f64,
}

impl PiGains {
    pub const INITIAL: PiGains = PiGains { kp: 1.0, ki: 5.0 };

    pub fn new(kp: f64, ki: f64) -> Result<Self> {
        if !(kp.is_finite() && ki.is_finite() && kp >= 0.0 && ki >= 0.0) {
            return Err(Error::Usage(format!(
                "controller gains must be finite and nonnegative, got kp={kp}, ki={ki}"
            )));
        }
        Ok(PiGains { kp, ki })
    }
}

/// What the GFL controller sees at the point of connection, in its PLL frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BusMeasurement {
    /// Sensed (filtered) bus voltage.
    pub v_dq: Dq,
    /// GFL filter current.
    pub i_dq: Dq,
    pub p: f64,
    pub q: f64,
}
