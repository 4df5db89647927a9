//! Canonical JSON: UTF-8, object keys sorted, no insignificant whitespace.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Serializes `value` in canonical form.
///
/// `serde_json::Map` is backed by a `BTreeMap` (the `preserve_order`
/// feature is not enabled anywhere in the workspace), so routing through
/// [`serde_json::Value`] sorts every object's keys.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("in-memory types always serialize");
    value.to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the canonical serialization.
pub fn canonical_hash<T: Serialize + ?Sized>(value: &T) -> String {
    sha256_hex(to_canonical_string(value).as_bytes())
}
