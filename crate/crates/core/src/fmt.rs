//! Float serialization used by every CSV/JSON emitter: 17 significant
//! digits, which round-trips f64 exactly and keeps outputs byte-stable.

/// Format with 17 significant digits in scientific notation.
pub fn g17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::g17;

    #[test]
    fn round_trips_f64_exactly() {
        for &x in &[
            0.0,
            1.0,
            -1.0 / 3.0,
            std::f64::consts::PI,
            1.2345678901234567e-300,
            6.02214076e23,
        ] {
            let s = g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
