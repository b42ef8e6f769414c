//! Reduced-order simulation of a biped walker that carries two actuated
//! supernumerary arms, plus the training and analysis stack built around it:
//! a PPO-trained residual footstep policy, a model-based arm-balancing
//! controller, and gait stability metrics (DTW, per-cycle stability margins,
//! ground-reaction phase-plane geometry).

pub mod balance;
pub mod gait;
pub mod harness;
pub mod learning;
pub mod metrics;
pub mod model;
mod vec2;
