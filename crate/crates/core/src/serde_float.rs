//! Reals that may be infinite, written as `"inf"` / `"-inf"` in JSON.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub(crate) fn encode(v: f64) -> serde_json::Value {
    if v == f64::INFINITY {
        serde_json::Value::from("inf")
    } else if v == f64::NEG_INFINITY {
        serde_json::Value::from("-inf")
    } else {
        serde_json::Value::from(v)
    }
}

pub(crate) fn decode(v: &serde_json::Value) -> Result<f64, String> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| "bad number".to_string()),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => Err(format!("unrecognized real {other:?}")),
        },
        other => Err(format!("expected a number, found {other}")),
    }
}

pub(crate) fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    encode(*v).serialize(s)
}

pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let raw = serde_json::Value::deserialize(d)?;
    decode(&raw).map_err(serde::de::Error::custom)
}
