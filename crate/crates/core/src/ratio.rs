//! Exact decimal rendering of integer ratios.

/// `num / den` rounded half-to-even to `decimals` places, computed in integer
/// arithmetic. Returns `None` when `den` is zero.
pub fn fixed_point(num: u64, den: u64, decimals: u32) -> Option<String> {
    if den == 0 {
        return None;
    }
    let scale = 10u128.pow(decimals);
    let scaled = num as u128 * scale;
    let den = den as u128;
    let mut q = scaled / den;
    let r = scaled % den;
    if 2 * r > den || (2 * r == den && q % 2 == 1) {
        q += 1;
    }
    let int = q / scale;
    if decimals == 0 {
        return Some(int.to_string());
    }
    let frac = q % scale;
    Some(format!("{int}.{frac:0width$}", width = decimals as usize))
}

/// Percentage with one decimal, e.g. `98.7%`. A zero denominator renders as `0.0%`.
pub fn percent(num: u64, den: u64) -> String {
    let value = fixed_point(num.saturating_mul(100), den, 1).unwrap_or_else(|| "0.0".into());
    format!("{value}%")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_half_even() {
        assert_eq!(fixed_point(1, 8, 2).unwrap(), "0.12"); // 0.125 -> even
        assert_eq!(fixed_point(3, 8, 2).unwrap(), "0.38"); // 0.375 -> even
        assert_eq!(fixed_point(5, 8, 2).unwrap(), "0.62");
        assert_eq!(fixed_point(1, 3, 4).unwrap(), "0.3333");
        assert_eq!(fixed_point(2, 3, 4).unwrap(), "0.6667");
        assert_eq!(fixed_point(1, 1, 4).unwrap(), "1.0000");
        assert_eq!(fixed_point(5, 2, 0).unwrap(), "2");
        assert_eq!(fixed_point(7, 2, 0).unwrap(), "4");
        assert_eq!(fixed_point(1, 0, 4), None);
    }

    #[test]
    fn table_one_ratios() {
        assert_eq!(fixed_point(5_390_141, 38_202_354, 4).unwrap(), "0.1411");
        assert_eq!(fixed_point(1_364_314, 1_659_619, 4).unwrap(), "0.8221");
        assert_eq!(fixed_point(733_208, 1_716_286, 4).unwrap(), "0.4272");
    }

    #[test]
    fn percentages() {
        assert_eq!(percent(13_794, 13_975), "98.7%");
        assert_eq!(percent(181, 13_975), "1.3%");
        assert_eq!(percent(0, 0), "0.0%");
        assert_eq!(percent(3, 8768), "0.0%");
        assert_eq!(percent(9018, 9018), "100.0%");
    }
}
