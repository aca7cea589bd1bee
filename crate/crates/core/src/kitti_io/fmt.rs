/// C `printf("%.Ne")` formatting: `7.215377000000e+02`.
pub(crate) fn sci(value: f64, precision: usize) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    let s = format!("{value:.precision$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::sci;

    #[test]
    fn matches_c_style() {
        assert_eq!(sci(721.5377, 12), "7.215377000000e+02");
        assert_eq!(sci(0.0, 3), "0.000e+00");
        assert_eq!(sci(-0.004069766, 6), "-4.069766e-03");
        assert_eq!(sci(1e-120, 2), "1.00e-120");
    }

    #[test]
    fn twelve_significant_digits_round_trip() {
        for v in [1.0 / 3.0, -7.21537719e2, 4.485728e1, 2.163791e-1, 6.02e23] {
            let back: f64 = sci(v, 11).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11, "{v} -> {back}");
        }
    }
}
