//! Number formatting shared by every file writer.

/// Scientific notation with 17 significant digits, `.` decimal separator.
/// Round-trips every finite `f64`; NaN is written as `NaN`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, -3.24, 1e-300, 6.02214076e23, f64::MAX] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }
}
