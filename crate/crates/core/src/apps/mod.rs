//! Application solvers built on the transforms: AoI rate control, multi-radar
//! waveform design and secure power control.

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

pub mod aoi;
pub mod radar;
pub mod secure;

/// `10^(dBm/10)` milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / core::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_mw(0.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_mw(-10.0) - 0.1).abs() < 1e-15);
        assert!((dbm_to_mw(30.0) - 1000.0).abs() < 1e-9);
        assert!((nats_to_bits(core::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }
}
