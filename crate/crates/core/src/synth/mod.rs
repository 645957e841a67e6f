//! Receiver-pulse synthesis.
//!
//! For each target column `l` (in order) the receiver coupling `g_{B,l}` is
//! chosen so that the excitation started in `Psi_l^dag |vac>` never travels
//! past receiver `l`: the out-field after that receiver vanishes at all
//! times. Because the network is cascaded, the field arriving at receiver
//! `l` depends only on the emitters and on receivers `< l`, so the pulses
//! are fixed one after the other.
//!
//! Two constructions are provided. The explicit one closes the condition in
//! quadrature, `g_{B,l} = F* / sqrt(int |F|^2)` with `F` the field arriving at
//! receiver `l`. The implicit one co-integrates the receiver amplitude and
//! divides the arriving field by it at every step.

mod clamp;
mod emitter;
mod explicit;
mod implicit;
mod pulses;
mod receiver;
mod report;
mod trim;

pub use clamp::clamp_pulse;
pub use emitter::{emitter_pulses, EmitterParams};
pub use explicit::{synthesize_explicit, synthesize_explicit_with};
pub use implicit::{synthesize_implicit, synthesize_implicit_with};
pub use pulses::{Interval, PulseSet};
pub use report::{phase_correct, SynthesisReport, Warning};
pub use trim::{trim_window, TrimOptions, TrimResult};

use serde::{Deserialize, Serialize};

use crate::network::NetworkConfig;
use crate::numkit::Unitary;
use crate::Result;

/// Which construction produces the receiver pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Explicit,
    Implicit,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "explicit" => Ok(Self::Explicit),
            "implicit" => Ok(Self::Implicit),
            other => Err(crate::Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

/// Phase given to a clamped coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampPhase {
    /// Phase of the synthesis formula's numerator at the current time.
    #[default]
    CurrentNumerator,
    /// Phase of the conjugated register-A out-field `F_{N,l}(t0, t0)*`, fixed
    /// for the whole clamp.
    InitialOutField,
}

/// Time stepping of the receiver amplitude in the implicit construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicitScheme {
    /// Forward Euler, closing the loop with the previous step's amplitude.
    Euler,
    /// Classical RK4 with the dark condition solved at every stage.
    #[default]
    Rk4,
}

/// Quadrature of the running integral `int |F|^2` in the explicit construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Trapezoid,
    /// Piecewise cubic through the four nearest samples.
    #[default]
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SynthesisOptions {
    pub clamp_phase: ClampPhase,
    pub implicit_scheme: ImplicitScheme,
    pub quadrature: Quadrature,
}

/// Runs the chosen construction with the given options.
pub fn synthesize(
    method: Method,
    config: &NetworkConfig,
    target: &Unitary,
    emitter: &PulseSet,
    opts: &SynthesisOptions,
) -> Result<SynthesisReport> {
    match method {
        Method::Explicit => synthesize_explicit_with(config, target, emitter, opts),
        Method::Implicit => synthesize_implicit_with(config, target, emitter, opts),
    }
}
