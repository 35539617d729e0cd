//! Shared numeric formatting for data files.

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(sci17(x).parse::<f64>().unwrap(), x);
        }
    }
}
