//! Independent oracles used by the workspace test suites.
//!
//! Everything here recomputes expected values from first principles and
//! shares no code with the implementation paths it checks: option prices
//! come from numeric quadrature over the lognormal terminal density,
//! best splits from exhaustive enumeration, gradients from central finite
//! differences, and GARCH paths from the textbook recursion driven by a
//! self-contained RNG.

pub mod bruteforce;
pub mod garchsim;
pub mod quadrature;
pub mod rng;

/// Central finite difference of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
