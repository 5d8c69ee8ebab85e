//! Check records shared by the verifiers and the command-line reports.

use serde::Serialize;

/// Witnesses kept per check.
pub const MAX_WITNESSES: usize = 8;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    /// Depth of the subspace or partition the check ran on.
    pub subspace_depth: Option<u32>,
    pub max_deviation: f64,
    pub pass: bool,
    pub witnesses: Vec<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, subspace_depth: Option<u32>) -> Self {
        CheckRecord {
            name: name.into(),
            subspace_depth,
            max_deviation: 0.0,
            pass: true,
            witnesses: Vec::new(),
        }
    }

    /// Records a deviation; anything above `tol` fails the check and keeps
    /// the witness.
    pub fn observe(&mut self, deviation: f64, tol: f64, witness: impl FnOnce() -> String) {
        if deviation.is_nan() || deviation > tol {
            self.pass = false;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
        if deviation.is_nan() {
            self.max_deviation = f64::NAN;
        } else if deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
    }

    pub fn fail(&mut self, witness: impl Into<String>) {
        self.pass = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness.into());
        }
    }

    pub fn merge(&mut self, other: CheckRecord) {
        self.pass &= other.pass;
        if other.max_deviation > self.max_deviation || other.max_deviation.is_nan() {
            self.max_deviation = other.max_deviation;
        }
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        self.subspace_depth = match (self.subspace_depth, other.subspace_depth) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observe_tracks_worst_case() {
        let mut r = CheckRecord::new("x", Some(3));
        r.observe(0.0, 1e-9, || "a".into());
        assert!(r.pass);
        r.observe(0.5, 1e-9, || "b".into());
        r.observe(0.25, 1e-9, || "c".into());
        assert!(!r.pass);
        assert_eq!(r.max_deviation, 0.5);
        assert_eq!(r.witnesses, ["b", "c"]);
        let mut s = CheckRecord::new("y", Some(2));
        s.merge(r);
        assert_eq!(s.subspace_depth, Some(2));
        assert!(!s.pass);
    }
}
