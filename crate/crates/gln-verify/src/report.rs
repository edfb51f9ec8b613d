use serde_json::{json, Value};

pub const SCHEMA: &str = "gln-verify/report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

/// One named check with its verdict and the exact data behind it.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Self { name: name.into(), passed, detail }
    }

    /// A computation that errored counts as a failed check carrying the message.
    pub fn from_result(name: impl Into<String>, r: gln_local::Result<(bool, Value)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, json!({ "error": e.to_string() })),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: String,
    pub params: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "suite": self.suite,
            "params": self.params,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "status": if c.passed { "pass" } else { "fail" },
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }

    /// Sorted keys and canonical rational strings, so equal reports render to equal bytes.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Markdown => self.markdown(),
        }
    }

    fn markdown(&self) -> String {
        let mut out = format!("# Suite `{}`\n\n", self.suite);
        out.push_str(&format!("Parameters: `{}`\n\n", self.params));
        out.push_str(&format!("Overall: **{}**\n\n", if self.passed() { "pass" } else { "fail" }));
        out.push_str("| check | status |\n|---|---|\n");
        for c in &self.checks {
            out.push_str(&format!("| {} | {} |\n", c.name, if c.passed { "pass" } else { "fail" }));
        }
        for c in &self.checks {
            if let Some(items) = c.detail.get("items").and_then(|v| v.as_array()) {
                out.push_str(&format!("\n## {}\n\n| quantity | value | main term | constant | expected |\n|---|---|---|---|---|\n", c.name));
                for it in items {
                    let f = |k: &str| it.get(k).and_then(|v| v.as_str()).unwrap_or("").to_string();
                    out.push_str(&format!("| {} | {} | {} | {} | {} |\n", f("name"), f("value"), f("main_term"), f("constant"), f("expected_constant")));
                }
            }
        }
        for c in self.checks.iter().filter(|c| !c.passed) {
            out.push_str(&format!("\n## Failure: {}\n\n```json\n{}\n```\n", c.name, serde_json::to_string_pretty(&c.detail).expect("detail serializes")));
        }
        out
    }
}
