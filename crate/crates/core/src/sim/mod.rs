//! Fixed-step dq-frame simulator of a grid-forming and a grid-following
//! inverter feeding a resistive load, plus the classical GFL current
//! controller.

mod closed_loop;
mod controller;
mod dq;
mod params;
mod plant;
mod state;

pub use closed_loop::{pi_closed_loop_step, ControlSignals};
pub use controller::{
    classical_current_controller, compute_power, current_reference, integrate_error,
    VD_REFERENCE_FLOOR,
};
pub use dq::{wrap_angle, Dq};
pub use params::PlantParams;
pub use plant::{clamp_command, measure, reset_plant, step_plant, COMMAND_LIMIT};
pub use state::{BusMeasurement, PiGains, PlantState};
