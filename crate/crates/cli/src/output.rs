//! JSON rendering helpers: exact rational strings with float companions.

use ndtlab_core::rat::Rat;
use serde_json::{json, Value};

/// 12 significant digits, scientific; deterministic across platforms.
pub fn float_str(v: f64) -> String {
    format!("{v:.11e}")
}

/// A rational as {"exact": "p/q", "float": ...}.
pub fn rat_json(v: &Rat) -> Value {
    json!({ "exact": v.to_string(), "float": float_str(v.to_f64()) })
}
