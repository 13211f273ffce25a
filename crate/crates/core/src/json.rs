//! JSON helpers: integers travel as strings so that arbitrary precision survives.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// An integer written either as a JSON string or a JSON number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLiteral(pub BigInt);

impl<'de> Deserialize<'de> for IntLiteral {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Str(s) => s
                .trim()
                .parse()
                .map(IntLiteral)
                .map_err(|_| serde::de::Error::custom(format!("{s:?} is not an integer"))),
            Raw::Int(i) => Ok(IntLiteral(BigInt::from(i))),
        }
    }
}

impl Serialize for IntLiteral {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

pub fn int_matrix_to_json(m: &[Vec<BigInt>]) -> Vec<Vec<IntLiteral>> {
    m.iter().map(|r| r.iter().cloned().map(IntLiteral).collect()).collect()
}

pub fn int_matrix_from_json(m: Vec<Vec<IntLiteral>>) -> Vec<Vec<BigInt>> {
    m.into_iter().map(|r| r.into_iter().map(|x| x.0).collect()).collect()
}
