use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An `L^p` exponent, `1 <= p <= ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::ParameterDomain(format!("norm exponent must be >= 1, got {p}")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// Accumulates `(weight, value)` samples into a norm. Weights are used
    /// as given; for `p = ∞` they only select the support (`w > 0`).
    pub fn norm(&self, samples: impl IntoIterator<Item = (f64, f64)>) -> f64 {
        if self.is_infinite() {
            samples.into_iter().filter(|(w, _)| *w > 0.0).fold(0.0, |m, (_, v)| m.max(v.abs()))
        } else if self.0 == 2.0 {
            samples.into_iter().map(|(w, v)| w * v * v).sum::<f64>().sqrt()
        } else {
            let p = self.0;
            samples.into_iter().map(|(w, v)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }

    /// `Σ w |v|^p` without the final root; `max |v|` for `p = ∞`.
    pub fn power_sum(&self, samples: impl IntoIterator<Item = (f64, f64)>) -> f64 {
        if self.is_infinite() {
            self.norm(samples)
        } else {
            let p = self.0;
            samples.into_iter().map(|(w, v)| w * v.abs().powf(p)).sum()
        }
    }

    pub fn root(&self, power_sum: f64) -> f64 {
        if self.is_infinite() {
            power_sum
        } else {
            power_sum.max(0.0).powf(1.0 / self.0)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Number(p) => p,
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Inf") => f64::INFINITY,
            Raw::Text(s) => return Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let s = [(0.5, 3.0), (0.5, -4.0)];
        assert!((Exponent::TWO.norm(s) - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(Exponent::INFINITY.norm(s), 4.0);
        assert!((Exponent::ONE.norm(s) - 3.5).abs() < 1e-15);
        assert!(Exponent::new(0.5).is_err());
    }

    #[test]
    fn serde_forms() {
        let p: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(p.is_infinite());
        let q: Exponent = serde_json::from_str("3").unwrap();
        assert_eq!(q.value(), 3.0);
        assert!(serde_json::from_str::<Exponent>("0.2").is_err());
        assert_eq!(serde_json::to_string(&p).unwrap(), "\"inf\"");
    }
}
