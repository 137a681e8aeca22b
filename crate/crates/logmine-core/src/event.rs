//! In-memory event log model: events grouped into traces, traces into a log.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// One observed activity execution.
///
/// `activity` is the normalized `concept:name`. Timestamps are kept as epoch
/// milliseconds so the core stays independent of any datetime crate; the
/// ingestion layer converts ISO-8601 instants before constructing events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub activity: String,
    pub timestamp: Option<i64>,
    /// Remaining attributes (lifecycle, resource, ...), preserved verbatim.
    pub attributes: Vec<(String, String)>,
}

impl Event {
    pub fn new(activity: impl Into<String>) -> Self {
        Event {
            activity: activity.into(),
            timestamp: None,
            attributes: Vec::new(),
        }
    }
}

/// Ordered activity sequence of one case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }
}

/// A non-empty list of traces plus the activity alphabet in first-occurrence
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub traces: Vec<Trace>,
    pub activity_alphabet: Vec<String>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogError {
    /// The log contains no traces or no events at all.
    EmptyLog,
    /// An event carried an activity name that normalizes to the empty string.
    EmptyActivity { case_id: String },
}

impl fmt::Display for LogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogError::EmptyLog => write!(f, "event log contains no events"),
            LogError::EmptyActivity { case_id } => {
                write!(f, "trace {case_id:?} has an event with an empty activity name")
            }
        }
    }
}

impl core::error::Error for LogError {}

/// Normalize an activity name: trim, collapse internal whitespace runs to a
/// single `_`. Case is preserved.
pub fn normalize_activity(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut in_ws = false;
    for ch in raw.trim().chars() {
        if ch.is_whitespace() {
            in_ws = true;
        } else {
            if in_ws {
                out.push('_');
                in_ws = false;
            }
            out.push(ch);
        }
    }
    out
}

impl EventLog {
    /// Assemble a log from traces: normalizes activity names, drops empty
    /// traces, sorts each trace by timestamp when every event carries one,
    /// and computes the alphabet in first-occurrence order.
    pub fn from_traces(traces: Vec<Trace>, source: impl Into<String>) -> Result<Self, LogError> {
        let mut cleaned: Vec<Trace> = Vec::with_capacity(traces.len());
        for mut trace in traces {
            if trace.events.is_empty() {
                continue;
            }
            for event in &mut trace.events {
                let norm = normalize_activity(&event.activity);
                if norm.is_empty() {
                    return Err(LogError::EmptyActivity {
                        case_id: trace.case_id.clone(),
                    });
                }
                event.activity = norm;
            }
            if trace.events.iter().all(|e| e.timestamp.is_some()) {
                // Stable sort keeps document order for equal instants.
                trace.events.sort_by_key(|e| e.timestamp);
            }
            cleaned.push(trace);
        }
        if cleaned.is_empty() {
            return Err(LogError::EmptyLog);
        }
        let mut alphabet = Vec::new();
        let mut seen = BTreeSet::new();
        for trace in &cleaned {
            for event in &trace.events {
                if seen.insert(event.activity.clone()) {
                    alphabet.push(event.activity.clone());
                }
            }
        }
        Ok(EventLog {
            traces: cleaned,
            activity_alphabet: alphabet,
            source: source.into(),
        })
    }

    pub fn trace_count(&self) -> usize {
        self.traces.len()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }

    /// Traces as bare activity-name sequences.
    pub fn activity_sequences(&self) -> Vec<Vec<String>> {
        self.traces
            .iter()
            .map(|t| t.activities().map(|a| a.to_string()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn trace(case: &str, acts: &[&str]) -> Trace {
        Trace {
            case_id: case.to_string(),
            events: acts.iter().map(|a| Event::new(*a)).collect(),
        }
    }

    #[test]
    fn normalization_collapses_whitespace() {
        assert_eq!(normalize_activity("  Register   request "), "Register_request");
        assert_eq!(normalize_activity("Decide"), "Decide");
        assert_eq!(normalize_activity("a\tb\nc"), "a_b_c");
        // case is preserved
        assert_eq!(normalize_activity("Pay Compensation"), "Pay_Compensation");
    }

    #[test]
    fn alphabet_is_first_occurrence_order() {
        let log = EventLog::from_traces(
            vec![trace("1", &["b", "a"]), trace("2", &["c", "a"])],
            "test",
        )
        .unwrap();
        assert_eq!(log.activity_alphabet, vec!["b", "a", "c"]);
    }

    #[test]
    fn alphabet_matches_trace_contents() {
        let log = EventLog::from_traces(
            vec![trace("1", &["x", "y"]), trace("2", &["y", "z"])],
            "test",
        )
        .unwrap();
        let mut seen = BTreeSet::new();
        for t in &log.traces {
            for a in t.activities() {
                seen.insert(a.to_string());
            }
        }
        let alpha: BTreeSet<String> = log.activity_alphabet.iter().cloned().collect();
        assert_eq!(seen, alpha);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert_eq!(
            EventLog::from_traces(vec![], "test").unwrap_err(),
            LogError::EmptyLog
        );
        let only_empty = vec![Trace { case_id: "1".into(), events: vec![] }];
        assert_eq!(
            EventLog::from_traces(only_empty, "test").unwrap_err(),
            LogError::EmptyLog
        );
    }

    #[test]
    fn timestamped_traces_are_sorted() {
        let mut t = trace("1", &["b", "a"]);
        t.events[0].timestamp = Some(20);
        t.events[1].timestamp = Some(10);
        let log = EventLog::from_traces(vec![t], "test").unwrap();
        let seq: Vec<&str> = log.traces[0].activities().collect();
        assert_eq!(seq, vec!["a", "b"]);
    }

    #[test]
    fn untimestamped_traces_keep_document_order() {
        let mut t = trace("1", &["b", "a"]);
        t.events[0].timestamp = Some(20);
        let log = EventLog::from_traces(vec![t], "test").unwrap();
        let seq: Vec<&str> = log.traces[0].activities().collect();
        assert_eq!(seq, vec!["b", "a"]);
    }
}
