use serde_json::{json, Map, Value};

/// Outcome of one command: a verdict, a human report and a machine report.
pub struct Report {
    pub command: &'static str,
    pub positive: bool,
    pub lines: Vec<String>,
    pub result: Map<String, Value>,
    pub model: Option<Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self { command, positive: false, lines: Vec::new(), result: Map::new(), model: None }
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        self.result.insert(key.to_string(), serde_json::to_value(value).expect("report value serializes"));
    }

    pub fn verdict(&self) -> &'static str {
        if self.positive {
            "positive"
        } else {
            "negative"
        }
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("verdict: {}\n", self.verdict()));
        out
    }

    pub fn machine(&self) -> Value {
        let mut doc = json!({
            "command": self.command,
            "verdict": self.verdict(),
            "result": Value::Object(self.result.clone()),
        });
        if let Some(m) = &self.model {
            doc["model"] = m.clone();
        }
        doc
    }

    pub fn machine_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.machine()).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Six significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn mark(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(4.125), "4.125");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.0243853588), "-0.0243854");
        assert_eq!(num(1e-9), "1.00000e-9");
        assert_eq!(vec(&[1.0, 0.25]), "[1, 0.25]");
    }
}
