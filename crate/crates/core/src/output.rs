//! Text formats shared by the CSV and JSON writers.

use num_complex::Complex64;

fn clean(x: f64) -> f64 {
    // avoid printing "-0"
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// `re+imj` with shortest round-trip digits, e.g. `0.25-1j`.
pub fn format_complex(c: Complex64) -> String {
    format!("{}{:+}j", clean(c.re), clean(c.im))
}
