//! Float helpers that work without `std`.

pub(crate) use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `e^{i phi}`.
#[inline]
pub(crate) fn cis(phi: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(cos(phi), sin(phi))
}
