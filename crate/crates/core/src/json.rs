//! Serde helpers. Big integers travel as decimal strings so that any JSON
//! reader keeps them exact; plain JSON integers are accepted on input.

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum BigRepr {
    Text(String),
    Signed(i64),
    Unsigned(u64),
}

impl BigRepr {
    fn into_big<E: serde::de::Error>(self) -> Result<BigInt, E> {
        match self {
            BigRepr::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| E::custom(format!("not a decimal integer: {s:?}"))),
            BigRepr::Signed(v) => Ok(v.into()),
            BigRepr::Unsigned(v) => Ok(v.into()),
        }
    }
}

pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigInt, D::Error> {
        BigRepr::deserialize(de)?.into_big()
    }
}

pub mod big_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigInt], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<BigRepr>::deserialize(de)?
            .into_iter()
            .map(BigRepr::into_big)
            .collect()
    }
}
