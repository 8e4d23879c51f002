//! History segments `psi: [-tau_max, 0] -> R^n` and quadrature over them.

/// Initial panel count for adaptive Simpson on smooth pieces.
pub const SIMPSON_START_PANELS: usize = 64;
/// Panel cap for adaptive Simpson.
pub const SIMPSON_MAX_PANELS: usize = 1024;
/// Agreement required between successive Simpson refinements.
pub const SIMPSON_TOLERANCE: f64 = 1e-10;

/// A function segment `psi(s)`, `s <= 0`, as consumed by the conserved and
/// Lyapunov functionals.
pub trait Segment {
    fn dim(&self) -> usize;

    /// `psi(s)`.
    fn value(&self, s: f64) -> Vec<f64>;

    /// `int_lo^hi g(psi(s)) ds` for `lo <= hi <= 0`.
    fn integrate(&self, lo: f64, hi: f64, g: &dyn Fn(&[f64]) -> f64) -> f64;

    /// Constant value, when the segment is known to be constant.
    fn as_constant(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Composite Simpson rule with an even number of panels.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels >= 2 && panels.is_multiple_of(2));
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Simpson starting at 64 panels, doubling until successive values agree to
/// `1e-10` (scaled by the magnitude when it exceeds one), capped at 1024.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut panels = SIMPSON_START_PANELS;
    let mut prev = simpson(f, a, b, panels);
    while panels < SIMPSON_MAX_PANELS {
        panels *= 2;
        let next = simpson(f, a, b, panels);
        if (next - prev).abs() <= SIMPSON_TOLERANCE * next.abs().max(1.0) {
            return next;
        }
        prev = next;
    }
    prev
}
