//! Dense networks with hand-written gradients, the PI actor, the Gaussian
//! action head and the two actor-critic policies.

mod dense;
mod gaussian;
mod pi_actor;
mod policy;

pub use dense::{Activation, DenseNet, Layer};
pub use gaussian::{
    entropy, scale_to_bounds, tanh_log_det, tanh_log_det_grad, unscale_from_bounds, GaussianHead,
    HALF_LN_2PI,
};
pub use pi_actor::PiActor;
pub use policy::{
    ActionSample, Actor, ActorCritic, Evaluation, ADAPTIVE_LOG_STD_INIT, FIXED_LOG_STD_INIT,
};
