//! Line-oriented reports with a JSON twin.

use serde_json::{json, Map, Value};

/// A named report: ordered `key = value` fields, optional blocks of raw
/// lines, and an optional verdict.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Report {
    pub name: String,
    pub fields: Vec<(String, Value)>,
    pub sections: Vec<(String, Vec<String>)>,
    /// `None` for purely informational reports.
    pub verdict: Option<bool>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Report {
        Report {
            name: name.into(),
            ..Report::default()
        }
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Report {
        self.fields.push((key.into(), value.into()));
        self
    }

    /// Stores a big number as a decimal string so JSON consumers keep every digit.
    pub fn big(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Report {
        self.field(key, Value::String(value.to_string()))
    }

    pub fn section(&mut self, name: impl Into<String>, lines: Vec<String>) -> &mut Report {
        self.sections.push((name.into(), lines));
        self
    }

    pub fn verdict(&mut self, passed: bool) -> &mut Report {
        self.verdict = Some(passed);
        self
    }

    /// Folds a sub-check into the verdict; a failure anywhere fails the report.
    pub fn require(&mut self, passed: bool) -> &mut Report {
        self.verdict = Some(self.verdict.unwrap_or(true) && passed);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.unwrap_or(true)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("report = {}\n", self.name);
        for (k, v) in &self.fields {
            out.push_str(&format!("{k} = {}\n", render(v)));
        }
        for (name, lines) in &self.sections {
            out.push_str(&format!("[{name}]\n"));
            for l in lines {
                out.push_str(l);
                out.push('\n');
            }
        }
        if let Some(v) = self.verdict {
            out.push_str(&format!("verdict = {}\n", if v { "PASS" } else { "FAIL" }));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let fields: Map<String, Value> = self.fields.iter().cloned().collect();
        let sections: Map<String, Value> = self
            .sections
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        json!({
            "report": self.name,
            "fields": fields,
            "sections": sections,
            "verdict": self.verdict.map(|v| if v { "PASS" } else { "FAIL" }),
        })
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_agree() {
        let mut r = Report::new("demo");
        r.field("count", 3)
            .big("bound", "41472")
            .section("members", vec!["+[] -[]".into()])
            .require(true);
        let text = r.to_text();
        assert_eq!(
            text,
            "report = demo\ncount = 3\nbound = 41472\n[members]\n+[] -[]\nverdict = PASS\n"
        );
        let j = r.to_json();
        assert_eq!(j["fields"]["bound"], "41472");
        assert_eq!(j["verdict"], "PASS");
        r.require(false);
        assert!(!r.passed());
        assert!(r.to_text().ends_with("verdict = FAIL\n"));
    }
}
