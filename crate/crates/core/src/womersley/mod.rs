//! Analytical references for oscillatory pipe and channel flow.

pub mod bessel;
mod channel;
mod pipe;

pub use bessel::{bessel_j, bessel_j0, bessel_j1, j_three_halves, Order};
pub use channel::{channel_velocity, ChannelReference};
pub use pipe::{alpha_to_omega, WomersleyReference};
