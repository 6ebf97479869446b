//! dB ↔ linear conversions. Powers and variances are stored linearly (watts).

#[allow(unused_imports)]
use num_traits::Float;

/// `10·log10(x)`.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// `10^(db/10)`.
pub fn to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
