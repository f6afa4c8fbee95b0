//! Canonical JSON: UTF-8, lexicographically sorted object keys, no
//! insignificant whitespace, integers only. Everything that gets hashed
//! as JSON goes through here.

use serde::Serialize;
use serde_json::Value;

/// Serializes any value to canonical JSON bytes. Values are routed
/// through `serde_json::Value`, whose map type keeps keys sorted, so
/// struct field declaration order never leaks into hashes.
///
/// Panics if the value contains a non-integer number; canonical JSON in
/// this crate is integer-only by construction (fixed-point values are
/// serialized as scaled integers).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    check_integers_only(&v);
    serde_json::to_vec(&v).expect("canonical JSON serialization")
}

fn check_integers_only(v: &Value) {
    match v {
        Value::Number(n) => {
            assert!(
                n.is_i64() || n.is_u64(),
                "canonical JSON forbids non-integer numbers: {n}"
            );
        }
        Value::Array(items) => items.iter().for_each(check_integers_only),
        Value::Object(map) => map.values().for_each(check_integers_only),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize)]
    struct Sample {
        zebra: u32,
        apple: &'static str,
        middle: Vec<i64>,
    }

    #[test]
    fn keys_are_sorted_and_compact() {
        let s = Sample {
            zebra: 1,
            apple: "x",
            middle: vec![-3, 4],
        };
        let bytes = to_canonical_json(&s);
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            r#"{"apple":"x","middle":[-3,4],"zebra":1}"#
        );
    }

    #[test]
    #[should_panic(expected = "forbids non-integer")]
    fn floats_rejected() {
        to_canonical_json(&serde_json::json!({ "x": 1.5 }));
    }
}
