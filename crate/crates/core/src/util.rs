//! Small numeric helpers shared across modules.

/// Snaps `x` to the nearest integer when it is within a relative tolerance,
/// absorbing floating-point noise in products like `(1 - q) * len` before a
/// floor or ceiling is taken.
fn snap_to_integer(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * (1.0 + x.abs()) {
        nearest
    } else {
        x
    }
}

/// `floor(x)` as usize, tolerant of values a hair below an integer.
pub(crate) fn tolerant_floor(x: f64) -> usize {
    snap_to_integer(x).floor().max(0.0) as usize
}

/// `ceil(x)` as usize, tolerant of values a hair above an integer.
pub(crate) fn tolerant_ceil(x: f64) -> usize {
    snap_to_integer(x).ceil().max(0.0) as usize
}
