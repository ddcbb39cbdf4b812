//! Pass/fail reporting shared by every verification routine.
//!
//! A check produces named items with a signed margin: non-negative means the
//! inequality held with that much slack, negative means it failed by that much.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub id: String,
    pub pass: bool,
    /// Slack left in the checked inequality; negative on failure.
    pub margin: f64,
    pub detail: String,
}

impl CheckItem {
    pub fn from_margin(id: impl Into<String>, margin: f64, detail: impl Into<String>) -> Self {
        CheckItem {
            id: id.into(),
            pass: margin >= 0.0 && margin.is_finite(),
            margin,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            pass: true,
            items: Vec::new(),
        }
    }

    pub fn push(&mut self, item: CheckItem) {
        self.pass &= item.pass;
        self.items.push(item);
    }

    pub fn merge(&mut self, other: CheckReport) {
        for item in other.items {
            self.push(item);
        }
    }

    /// Smallest margin across items; +inf for an empty report.
    pub fn worst_margin(&self) -> f64 {
        self.items.iter().map(|i| i.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn item(&self, id: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.id == id)
    }
}
