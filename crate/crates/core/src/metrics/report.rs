use serde::Serialize;

/// One failed instance of a checked statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub word: String,
    pub vertex: String,
    pub measured: u64,
    pub detail: String,
}

/// Outcome of a verifier run, serialized as one JSON line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub check: String,
    pub sig: String,
    pub n: usize,
    pub t: u64,
    pub mode: String,
    pub seed: Option<u64>,
    pub tested: u64,
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_observed: Option<u64>,
    /// Failures of bounds that only appear inside a proof; reported, not counted as violations.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub internal_violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(check: &str, sig: String, n: usize, t: u64, mode: &str, seed: Option<u64>) -> Self {
        Report {
            check: check.to_string(),
            sig,
            n,
            t,
            mode: mode.to_string(),
            seed,
            tested: 0,
            violations: Vec::new(),
            max_observed: None,
            internal_violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn observe(&mut self, value: u64) {
        self.max_observed = Some(self.max_observed.map_or(value, |m| m.max(value)));
    }

    /// Merges another report of the same configuration.
    pub fn merge(&mut self, other: Report) {
        self.tested += other.tested;
        self.violations.extend(other.violations);
        self.internal_violations.extend(other.internal_violations);
        if let Some(v) = other.max_observed {
            self.observe(v);
        }
        self.notes.extend(other.notes);
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}
