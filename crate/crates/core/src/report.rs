use std::fmt;
use std::time::Duration;

use serde::Serialize;

/// Counters collected by one pass over a formula.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PassReport {
    pub pass: String,
    pub round: usize,
    pub clauses_removed: usize,
    pub clauses_shortened: usize,
    pub literals_removed: usize,
    pub units_added: usize,
    pub equivalences_added: usize,
    pub conflicts: usize,
    #[serde(serialize_with = "as_seconds")]
    pub wall_time: Duration,
}

fn as_seconds<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl PassReport {
    pub fn new(pass: impl Into<String>) -> Self {
        PassReport {
            pass: pass.into(),
            ..Default::default()
        }
    }

    /// Whether the pass touched the formula at all.
    pub fn changed(&self) -> bool {
        self.clauses_removed
            + self.clauses_shortened
            + self.literals_removed
            + self.units_added
            + self.equivalences_added
            + self.conflicts
            > 0
    }
}

impl fmt::Display for PassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pass={} round={} clauses_removed={} clauses_shortened={} literals_removed={} \
             units_added={} equivalences_added={} conflicts={} wall_time={:.6}",
            self.pass,
            self.round,
            self.clauses_removed,
            self.clauses_shortened,
            self.literals_removed,
            self.units_added,
            self.equivalences_added,
            self.conflicts,
            self.wall_time.as_secs_f64()
        )
    }
}
