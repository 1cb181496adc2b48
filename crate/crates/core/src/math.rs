// Float intrinsics for no_std. libm is also bit-reproducible across targets,
// which the determinism guarantees rely on.

pub(crate) use libm::{asin, atan2, cos, exp, fabs as abs, floor, log, pow, sin, sqrt};

#[inline]
pub(crate) fn to_rad(deg: f64) -> f64 {
    deg * (core::f64::consts::PI / 180.0)
}

#[inline]
pub(crate) fn to_deg(rad: f64) -> f64 {
    rad * (180.0 / core::f64::consts::PI)
}

/// Wraps an angle in degrees into `[0, 360)`.
#[inline]
pub(crate) fn wrap_360(deg: f64) -> f64 {
    let w = deg - 360.0 * floor(deg / 360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Wraps an angle in degrees into `[-180, 180)`.
#[inline]
pub(crate) fn wrap_180(deg: f64) -> f64 {
    wrap_360(deg + 180.0) - 180.0
}
