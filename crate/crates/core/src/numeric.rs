//! Fixed-precision numbers for serialized output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of fractional digits written for every real value.
pub const DECIMALS: usize = 6;

/// A real value quantized to six decimals (ties to even), so that its
/// serialized form is byte-stable. Negative zero is folded into zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Fixed6(f64);

impl Fixed6 {
    pub fn new(value: f64) -> Self {
        if !value.is_finite() {
            return Fixed6(value);
        }
        let q: f64 = format!("{value:.DECIMALS$}").parse().expect("formatted float parses");
        Fixed6(if q == 0.0 { 0.0 } else { q })
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for Fixed6 {
    fn from(v: f64) -> Self {
        Fixed6::new(v)
    }
}

impl fmt::Display for Fixed6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.DECIMALS$}", self.0)
    }
}

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n = serde_json::Number::from_str(&self.to_string()).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fixed6 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Fixed6::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digits_ties_to_even() {
        assert_eq!(serde_json::to_string(&Fixed6::new(4.655)).unwrap(), "4.655000");
        assert_eq!(serde_json::to_string(&Fixed6::new(2.0)).unwrap(), "2.000000");
        assert_eq!(Fixed6::new(0.0000005).to_string(), "0.000000");
        assert_eq!(Fixed6::new(0.0000015).to_string(), "0.000002");
    }

    #[test]
    fn negative_zero_folds() {
        assert_eq!(Fixed6::new(-0.0000001).to_string(), "0.000000");
        assert_eq!(serde_json::to_string(&Fixed6::new(-0.0)).unwrap(), "0.000000");
    }

    #[test]
    fn round_trips() {
        for v in [1.0 / 3.0, -2.5e-3, 123456.789012345, 4.9] {
            let f = Fixed6::new(v);
            let back: Fixed6 = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
            assert_eq!(back, f);
        }
    }
}
