//! Tables rendered as TSV or JSON.

use serde_json::{json, Value};
use treeshift::entropy::EntropyValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Computed, nothing to flag.
    Clean,
    /// Computed, and found a violation, inequality or gap.
    Finding,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Summary lines, printed after the table with a leading `# `.
    pub notes: Vec<String>,
    pub json: Value,
    pub status: Status,
}

impl Report {
    pub fn new(header: Vec<&'static str>, json: Value) -> Self {
        Report {
            header,
            rows: Vec::new(),
            notes: Vec::new(),
            json,
            status: Status::Clean,
        }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
            s.push('\n');
            return s;
        }
        let mut out = String::new();
        out.push_str(&self.header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str("# ");
            out.push_str(note);
            out.push('\n');
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Clean => 0,
            Status::Finding => 1,
        }
    }
}

pub fn entropy_json(v: &EntropyValue) -> Value {
    json!({
        "exact": v.exact().map(|q| treeshift::scalar::format_rational(&q)),
        "decimal": v.value(),
        "unit": v.unit().to_string(),
    })
}

pub fn decimal(v: &EntropyValue) -> String {
    format!("{:.12}", v.value())
}

pub fn exact_or_dash(v: &EntropyValue) -> String {
    v.exact()
        .map(|q| treeshift::scalar::format_rational(&q))
        .unwrap_or_else(|| "-".into())
}
