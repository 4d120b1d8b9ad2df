//! The JSON envelope every operation result is reported in.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One operation's inputs, the hypotheses it was stated under, the
/// hypotheses it actually checked, and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub op: String,
    pub inputs: Value,
    pub nominal_preconditions: Vec<String>,
    pub enforced_preconditions: Vec<String>,
    pub output: Value,
    pub verified: bool,
    pub violations: Vec<Value>,
    /// Seconds since the Unix epoch; left out of stable output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

impl Certificate {
    pub fn new(op: impl Into<String>, inputs: Value) -> Self {
        Certificate {
            op: op.into(),
            inputs,
            nominal_preconditions: Vec::new(),
            enforced_preconditions: Vec::new(),
            output: Value::Null,
            verified: false,
            violations: Vec::new(),
            generated_at: None,
        }
    }

    pub fn nominal(mut self, items: &[&str]) -> Self {
        self.nominal_preconditions = items.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn enforced(mut self, items: &[&str]) -> Self {
        self.enforced_preconditions = items.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_output(mut self, output: Value, verified: bool) -> Self {
        self.output = output;
        self.verified = verified;
        self
    }

    pub fn violation(mut self, v: Value) -> Self {
        self.violations.push(v);
        self
    }

    /// Stamps the current time unless `stable` is set.
    pub fn stamped(mut self, stable: bool) -> Self {
        self.generated_at = if stable {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        };
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn stable_output_omits_timestamp() {
        let c = Certificate::new("large.check", json!({"set": [4, 5]}))
            .with_output(json!(true), true)
            .stamped(true);
        let text = serde_json::to_string(&c).unwrap();
        assert!(!text.contains("generated_at"));
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(Certificate::new("x", Value::Null).stamped(false).generated_at.is_some());
    }
}
