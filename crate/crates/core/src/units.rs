//! Unit conversions between ordinary frequencies (as quoted in configs) and the
//! internal angular-frequency convention (rad/ns, time in ns).

use std::f64::consts::PI;

/// Ordinary frequency in GHz to angular frequency in rad/ns.
pub fn ghz_to_rad_per_ns(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

/// Ordinary frequency in MHz to angular frequency in rad/ns.
pub fn mhz_to_rad_per_ns(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e-3
}

/// Angular frequency in rad/ns to ordinary frequency in GHz.
pub fn rad_per_ns_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// Angular frequency in rad/s to rad/ns.
pub fn rad_per_s_to_rad_per_ns(w: f64) -> f64 {
    w * 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_ghz_coupling() {
        assert!((ghz_to_rad_per_ns(9.0) - 56.548_667_764_616_276).abs() < 1e-12);
        assert!((rad_per_ns_to_ghz(ghz_to_rad_per_ns(9.0)) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn mhz_is_thousandth_of_ghz() {
        assert!((mhz_to_rad_per_ns(1000.0) - ghz_to_rad_per_ns(1.0)).abs() < 1e-14);
    }
}
