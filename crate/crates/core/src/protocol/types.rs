use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccountId(pub String);

impl AccountId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AccountId {
    fn from(s: &str) -> Self {
        Self(s.into())
    }
}

/// Logical time with a per-instance sequence number; ordered lexicographically.
///
/// Accepted moves get sequence numbers from 1 upwards. A window closing at
/// time `t` is stamped `(t, 0)`, so it precedes every move made at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Timestamp {
    pub time: u64,
    pub seq: u64,
}

impl Timestamp {
    pub fn new(time: u64, seq: u64) -> Self {
        Self { time, seq }
    }

    pub fn deadline(time: u64) -> Self {
        Self { time, seq: 0 }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.time, self.seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pending,
    Validated,
    Invalidated,
    Answered,
    Unanswered,
}

impl Status {
    pub fn is_pending(self) -> bool {
        self == Status::Pending
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pending => "pending",
            Status::Validated => "validated",
            Status::Invalidated => "invalidated",
            Status::Answered => "answered",
            Status::Unanswered => "unanswered",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Quiescence,
    EarlyStop,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quiescence" => Ok(Mode::Quiescence),
            "early-stop" => Ok(Mode::EarlyStop),
            other => Err(format!("unknown mode {other:?} (expected quiescence or early-stop)")),
        }
    }
}

/// A status change produced by resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub node: NodeId,
    pub status: Status,
    pub determined_at: Timestamp,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadlines_precede_moves_at_the_same_time() {
        assert!(Timestamp::deadline(5) < Timestamp::new(5, 1));
        assert!(Timestamp::new(4, 99) < Timestamp::deadline(5));
    }

    #[test]
    fn node_ids_work_as_json_keys() {
        let mut m = std::collections::BTreeMap::new();
        m.insert(NodeId(7), 1u64);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"7":1}"#);
        let back: std::collections::BTreeMap<NodeId, u64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
