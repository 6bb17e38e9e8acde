//! Special functions: gamma family, quadrature, and the G/J integral family.

pub mod gamma;
pub mod integrals;
pub mod quad;

pub use gamma::{
    exp_integral_e1, ln_gamma, ln_gamma_complex, polygamma, upper_incomplete_gamma, EULER_GAMMA,
    ZETA3,
};
pub use integrals::{integral_g, integral_j, EvalResult, IntegralParams, Method};
