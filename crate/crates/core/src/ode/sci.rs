//! Serializers writing `f64` values as JSON numbers with 17 significant
//! digits, so certificates survive a text round trip bit for bit.

use serde::ser::{Serialize, SerializeSeq, Serializer};
use serde_json::value::RawValue;

fn raw(x: f64) -> Box<RawValue> {
    assert!(x.is_finite(), "non-finite value {x} cannot be written to JSON");
    RawValue::from_string(format!("{x:.16e}")).expect("scientific notation is valid JSON")
}

pub fn f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw(*x).serialize(s)
}

pub fn opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => raw(*x).serialize(s),
        None => s.serialize_none(),
    }
}

pub fn vec_f64<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&raw(x))?;
    }
    seq.end()
}

pub fn map_f64<S: Serializer>(m: &std::collections::BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, &v) in m {
        map.serialize_entry(k, &raw(v))?;
    }
    map.end()
}

#[cfg(test)]
mod tests {
    use serde::Serialize;

    #[derive(Serialize)]
    struct Probe {
        #[serde(serialize_with = "super::f64")]
        x: f64,
        #[serde(serialize_with = "super::vec_f64")]
        v: Vec<f64>,
    }

    #[test]
    fn seventeen_digits_roundtrip() {
        let x = 0.1 + 0.2;
        let text = serde_json::to_string(&Probe { x, v: vec![1.0 / 3.0, -2.5e-300] }).unwrap();
        assert!(text.contains("3.0000000000000004e-1"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), x.to_bits());
        assert_eq!(back["v"][0].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(back["v"][1].as_f64().unwrap(), -2.5e-300);
    }
}
