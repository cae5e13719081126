//! Reverse-mode automatic differentiation over real tensors.
//!
//! Operations are recorded eagerly on a [`Tape`]; one [`Tape::backward`] pass
//! from a scalar output fills gradients for every leaf that requested them.
//! Both the neural scheduler training loop and the classical power step drive
//! their gradients through this module.

mod adamw;
mod tape;

pub use adamw::{AdamW, AdamWConfig};
pub use tape::{EveChannels, Gradients, NodeId, Tape, TapeError};

/// Exact GELU: `x * Phi(x)` with the Gaussian CDF.
pub fn gelu(x: f64) -> f64 {
    x * gauss_cdf(x)
}

/// Derivative of the exact GELU: `Phi(x) + x * phi(x)`.
pub fn gelu_grad(x: f64) -> f64 {
    gauss_cdf(x) + x * gauss_pdf(x)
}

pub fn gauss_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

pub fn gauss_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
