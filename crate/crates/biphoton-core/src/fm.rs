//! Float-math dispatch: `std` intrinsics when available, `libm` otherwise.

#![allow(dead_code)]

macro_rules! unary {
    ($name:ident, $libm:ident) => {
        #[cfg(feature = "std")]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            f64::$name(x)
        }
        #[cfg(not(feature = "std"))]
        #[inline(always)]
        pub(crate) fn $name(x: f64) -> f64 {
            libm::$libm(x)
        }
    };
}

unary!(exp, exp);
unary!(ln, log);
unary!(sqrt, sqrt);
unary!(sin, sin);
unary!(cos, cos);
unary!(acos, acos);
unary!(cosh, cosh);
unary!(sinh, sinh);
unary!(abs, fabs);
unary!(floor, floor);
unary!(ceil, ceil);

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn expm1(x: f64) -> f64 {
    f64::exp_m1(x)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    f64::powf(x, y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    f64::hypot(x, y)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[cfg(feature = "std")]
#[inline(always)]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    f64::atan2(y, x)
}
#[cfg(not(feature = "std"))]
#[inline(always)]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
