//! Transmit-power minimization for a two-user cooperative NOMA cell assisted
//! by a reconfigurable intelligent surface (RIS).
//!
//! The BS serves a near user UE_n and a far user UE_f. UE_n relays UE_f's
//! message, either in a second time slot (half duplex, HD) or while it
//! receives (full duplex, FD). The crate covers
//!
//! * channel draws for the cell ([`scenario`]) and effective gains ([`gains`]),
//! * closed-form optimal power for fixed phases ([`power`]),
//! * semidefinite relaxation of the phase step ([`phase_opt`], [`sdp`]),
//! * the alternating loop and no-RIS baselines ([`alt_opt`]),
//! * brute-force references ([`oracle`]) and Monte-Carlo sweeps ([`experiments`]).
//!
//! Runnable walk-throughs live in `examples/`, e.g.
//! `cargo run --release --example fd_power_control`.

// Domain checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alt_opt;
pub mod error;
pub mod experiments;
pub mod gains;
pub mod linalg;
pub mod oracle;
pub mod phase_opt;
pub mod power;
pub mod scenario;
pub mod sdp;

pub use error::{Error, Result};
pub use gains::{LinkGains, Mode, PhaseVector};
pub use power::{PowerBudget, PowerSolution, SinrTargets};
pub use scenario::{ChannelRealization, ScenarioConfig};
