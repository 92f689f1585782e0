//! Ground data values carried by events.
//!
//! Values follow the JSON object model: null, booleans, numbers, strings,
//! objects and arrays. Numbers compare exactly, with the one deliberate
//! identification that integer `42` equals decimal `42.0` (JSON carriers do
//! not distinguish them reliably).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A numeric literal, either integral or decimal.
///
/// Equality and ordering are numeric: `Int(42) == Float(42.0)`. NaN is not
/// representable (rejected at construction from JSON; JSON has no NaN).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }

    /// Exact numeric comparison across the two representations.
    fn cmp_exact(self, other: Number) -> Ordering {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a.cmp(&b),
            _ => {
                // Desk-scale values fit f64 exactly; totality is all we need
                // beyond that.
                self.as_f64()
                    .partial_cmp(&other.as_f64())
                    .unwrap_or(Ordering::Equal)
            }
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(*other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(*other)
    }
}

impl std::hash::Hash for Number {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        // Consistent with numeric equality: integral floats hash as ints.
        match self {
            Number::Int(i) => i.hash(state),
            Number::Float(f) => {
                if f.fract() == 0.0 && *f >= i64::MIN as f64 && *f <= i64::MAX as f64 {
                    (*f as i64).hash(state)
                } else {
                    f.to_bits().hash(state)
                }
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl From<i64> for Number {
    fn from(i: i64) -> Self {
        Number::Int(i)
    }
}

/// A ground structured data value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataValue {
    Null,
    Bool(bool),
    Num(Number),
    Str(String),
    Array(Vec<DataValue>),
    Object(BTreeMap<String, DataValue>),
}

impl DataValue {
    pub fn int(i: i64) -> Self {
        DataValue::Num(Number::Int(i))
    }

    pub fn str(s: impl Into<String>) -> Self {
        DataValue::Str(s.into())
    }

    pub fn from_json(v: &serde_json::Value) -> DataValue {
        match v {
            serde_json::Value::Null => DataValue::Null,
            serde_json::Value::Bool(b) => DataValue::Bool(*b),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    DataValue::Num(Number::Int(i))
                } else {
                    DataValue::Num(Number::Float(n.as_f64().unwrap_or(0.0)))
                }
            }
            serde_json::Value::String(s) => DataValue::Str(s.clone()),
            serde_json::Value::Array(items) => {
                DataValue::Array(items.iter().map(DataValue::from_json).collect())
            }
            serde_json::Value::Object(map) => DataValue::Object(
                map.iter()
                    .map(|(k, v)| (k.clone(), DataValue::from_json(v)))
                    .collect(),
            ),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            DataValue::Null => serde_json::Value::Null,
            DataValue::Bool(b) => serde_json::Value::Bool(*b),
            DataValue::Num(Number::Int(i)) => serde_json::Value::from(*i),
            DataValue::Num(Number::Float(f)) => serde_json::Value::from(*f),
            DataValue::Str(s) => serde_json::Value::String(s.clone()),
            DataValue::Array(items) => {
                serde_json::Value::Array(items.iter().map(DataValue::to_json).collect())
            }
            DataValue::Object(map) => serde_json::Value::Object(
                map.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
            ),
        }
    }
}

// Rendering data as compact JSON keeps traces and diagnostics readable.
impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// A ground event: a data value whose top level is an object.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventValue {
    fields: BTreeMap<String, DataValue>,
}

impl EventValue {
    /// Builds an event from a data value, which must be an object at the top
    /// level.
    pub fn new(value: DataValue) -> Result<EventValue, NotAnObject> {
        match value {
            DataValue::Object(fields) => Ok(EventValue { fields }),
            other => Err(NotAnObject(other)),
        }
    }

    pub fn from_fields(fields: impl IntoIterator<Item = (String, DataValue)>) -> EventValue {
        EventValue {
            fields: fields.into_iter().collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<EventValue, EventParseError> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| EventParseError::Json(e.to_string()))?;
        EventValue::new(DataValue::from_json(&v)).map_err(|_| EventParseError::NotAnObject)
    }

    pub fn fields(&self) -> &BTreeMap<String, DataValue> {
        &self.fields
    }

    pub fn get(&self, key: &str) -> Option<&DataValue> {
        self.fields.get(key)
    }

    pub fn as_value(&self) -> DataValue {
        DataValue::Object(self.fields.clone())
    }
}

impl fmt::Display for EventValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_value().to_json())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("event payload must be an object at the top level, got {0}")]
pub struct NotAnObject(pub DataValue);

#[derive(Debug, Clone, thiserror::Error)]
pub enum EventParseError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("event payload must be a JSON object")]
    NotAnObject,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_equals_integral_float() {
        assert_eq!(DataValue::int(42), DataValue::Num(Number::Float(42.0)));
        assert_ne!(DataValue::int(42), DataValue::Num(Number::Float(42.5)));
    }

    #[test]
    fn number_hash_consistent_with_eq() {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let h = |n: Number| {
            let mut s = DefaultHasher::new();
            n.hash(&mut s);
            s.finish()
        };
        assert_eq!(h(Number::Int(7)), h(Number::Float(7.0)));
    }

    #[test]
    fn event_requires_object() {
        assert!(EventValue::new(DataValue::int(1)).is_err());
        assert!(EventValue::from_json_str(r#"{"a": 1}"#).is_ok());
        assert!(EventValue::from_json_str("[1,2]").is_err());
        assert!(EventValue::from_json_str("not json").is_err());
    }

    #[test]
    fn json_round_trip() {
        let e = EventValue::from_json_str(
            r#"{"event":"func_post","name":"fs.open","res":42,"extra":[1,2.5,null,true]}"#,
        )
        .unwrap();
        let back = EventValue::from_json_str(&e.to_string()).unwrap();
        assert_eq!(e, back);
    }
}
