//! Meyer-type windows used for the radial and angular partitions.

use std::f64::consts::FRAC_PI_2;

/// Meyer auxiliary polynomial: 0 below 0, 1 above 1, `nu(x) + nu(1 - x) = 1`.
pub(crate) fn meyer_nu(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3))
    }
}

/// 1D low-pass profile: 1 on `|t| <= 1`, 0 on `|t| >= 2`, smooth and
/// non-increasing in `|t|` between.
pub(crate) fn lowpass_profile(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        (FRAC_PI_2 * meyer_nu(a - 1.0)).cos()
    }
}

/// Rising / falling halves of a squared partition of unity at parameter `u`
/// in `[0, 1]`: `rise^2 + fall^2 = 1`.
pub(crate) fn transition(u: f64) -> (f64, f64) {
    let v = FRAC_PI_2 * meyer_nu(u);
    (v.sin(), v.cos())
}

/// Position on the perimeter of the unit square for the direction `(x, y)`,
/// in `[0, 8)`, counterclockwise from the positive `x` axis. Equal steps in
/// this parameter are equal steps in slope within each cone.
pub(crate) fn pseudo_angle(x: f64, y: f64) -> f64 {
    let m = x.abs().max(y.abs());
    debug_assert!(m > 0.0);
    let (qx, qy) = (x / m, y / m);
    let s = if qx >= qy.abs() {
        qy
    } else if qy >= qx.abs() {
        2.0 - qx
    } else if -qx >= qy.abs() {
        4.0 - qy
    } else {
        6.0 + qx
    };
    if s < 0.0 {
        s + 8.0
    } else if s >= 8.0 {
        s - 8.0
    } else {
        s
    }
}
