//! Equilibrium-informed neural networks (EINNs) for bifurcation analysis.
//!
//! The usual way to chart the equilibria of a parameterized ODE system
//! `du/dt = F(u; λ)` is to fix λ, solve `F(u; λ) = 0`, and repeat over a
//! parameter sweep. This crate also implements the reverse mapping: sample
//! candidate equilibrium states `u*`, then train a small feed-forward
//! network to emit the parameter value λ (and any companion state
//! components) that make each candidate an actual equilibrium, by
//! minimizing the squared right-hand-side residuals. Saddle-node critical
//! thresholds then show up as interior extrema of the learned λ(u*), found
//! by differentiating the network with respect to its input.
//!
//! Every result the network produces can be checked against the classical
//! route, which is also provided: bracketed root finding over a parameter
//! sweep, closed-form inverse maps for the built-in models, and linear
//! stability classification.
//!
//! Module map:
//!
//! - [`exprdsl`] — expression parser/evaluator with exact forward-mode
//!   derivatives; models are data, not code.
//! - [`net`] — the feed-forward network, its gradients, and Adam.
//! - [`models`] — model specification format, validation, and the built-in
//!   zoo.
//! - [`einn`] — candidate sampling, residual-loss training, diagram
//!   prediction, and threshold detection.
//! - [`oracle`] — root-finding sweeps, closed-form inverses, analytic
//!   thresholds, and stability tags for independent verification.

pub mod einn;
pub mod exprdsl;
pub mod models;
pub mod net;
pub mod oracle;
