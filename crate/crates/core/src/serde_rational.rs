//! Serializes rationals as exact strings (`"3"`, `"0.25"`, `"1/3"`).

use serde::Serializer;

use crate::format::format_rational;
use crate::Rational;

pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }
}
