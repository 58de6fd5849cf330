//! Physical constants and unit conversions. Everything inside the crate is
//! SI (meters, radians, watts); decibels only appear at the boundary.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Mean Earth radius, m.
pub const EARTH_RADIUS: f64 = 6_371_000.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Amplitude factor of a power loss given in dB, i.e. `10^(-loss/20)`.
pub fn db_loss_to_amplitude(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 20.0)
}

pub fn km_to_m(km: f64) -> f64 {
    km * 1e3
}

pub fn m_to_km(m: f64) -> f64 {
    m * 1e-3
}
