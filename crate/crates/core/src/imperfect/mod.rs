//! Pulse noise, detuned frames and noisy ensembles.

mod ensemble;
mod frame;
mod noise;

pub use ensemble::{ensemble_fidelity, EnsembleStats};
pub use frame::{rotating_frame_transform, FrameDirection};
pub use noise::{child_seed, noise_trajectory, perturb_pulses, NoiseParams};
