//! Centralized dB/linear and dBm/Watt conversions.

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a power ratio from dB to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts transmit power from dBm to Watts: `10^((dBm - 30) / 10)`.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts transmit power from Watts to dBm.
#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Wavelength in meters for a carrier frequency in Hz.
#[inline]
pub fn wavelength(f_c_hz: f64) -> f64 {
    SPEED_OF_LIGHT / f_c_hz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_watts_round_trip() {
        assert!((dbm_to_watts(43.0) - 19.952623149688797).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(27.3)) - 27.3).abs() < 1e-12);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn db_linear_round_trip() {
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-12);
        assert!((db_to_linear(linear_to_db(0.37)) - 0.37).abs() < 1e-12);
    }

    #[test]
    fn wavelength_at_3p5_ghz() {
        // c / f_c for the 3.5 GHz carrier used throughout.
        assert!((wavelength(3.5e9) - 0.08565498800000001).abs() < 1e-9);
    }
}
