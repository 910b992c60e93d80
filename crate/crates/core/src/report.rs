use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Integer identity verified with exact arithmetic.
    Exact,
    Pass,
    Fail,
    /// Not applicable in the current mode (e.g. exploratory parameters).
    Skipped,
    /// Measured value recorded without a pass/fail threshold.
    Info,
}

/// One line of a verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub status: Status,
    pub worst_value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Report {
    pub mode: String,
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new(mode: impl Into<String>) -> Self {
        Report {
            mode: mode.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        id: impl Into<String>,
        status: Status,
        worst_value: f64,
        tolerance: f64,
        note: impl Into<String>,
    ) {
        self.entries.push(CheckEntry {
            id: id.into(),
            status,
            worst_value,
            tolerance,
            note: note.into(),
        });
    }

    /// Records a bound check: passes iff `worst_value <= tolerance`.
    pub fn bound(&mut self, id: impl Into<String>, worst_value: f64, tolerance: f64) {
        let status = if worst_value <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self.push(id, status, worst_value, tolerance, "");
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}
