use serde::Serialize;
use serde_json::{Map, Value};

use modkit::report::Check;

#[derive(Serialize)]
pub struct CheckLine {
    pub name: String,
    pub status: &'static str,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl From<&Check> for CheckLine {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.clone(),
            status: if c.passed { "pass" } else { "fail" },
            detail: c.detail.clone(),
            witness: c.witness.clone(),
        }
    }
}

/// Everything a command prints: echoed inputs, named results and checks.
#[derive(Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub checks: Vec<CheckLine>,
    pub timing: f64,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Map::new(),
            results: Map::new(),
            checks: Vec::new(),
            timing: 0.0,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn check(&mut self, c: &Check) {
        self.checks.push(c.into());
    }

    pub fn checks<'a>(&mut self, cs: impl IntoIterator<Item = &'a Check>) {
        for c in cs {
            self.check(c);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == "pass")
    }
}
