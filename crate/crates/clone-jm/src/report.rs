//! Report data model: named results with expected values, residuals,
//! tolerances, pass flags, and provenance, serializable as a text table,
//! JSON, or CSV.
//!
//! Output is byte-deterministic for a fixed configuration: no timestamps,
//! no randomness, struct-ordered JSON fields, and shortest-round-trip
//! float formatting.

use serde::Serialize;

/// Scalar payload of a report entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Computed {
    Real(f64),
    Complex { re: f64, im: f64 },
    /// A max-norm of an operator-valued result.
    MatrixNorm(f64),
}

impl std::fmt::Display for Computed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Computed::Real(v) | Computed::MatrixNorm(v) => write!(f, "{v}"),
            Computed::Complex { re, im } => write!(f, "{re}{im:+}i"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    pub name: String,
    pub computed: Computed,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: String,
}

impl ReportEntry {
    /// A computed value checked against an expected one; the residual is
    /// their absolute difference.
    pub fn value(
        name: impl Into<String>,
        computed: f64,
        expected: f64,
        tolerance: f64,
        provenance: impl Into<String>,
    ) -> Self {
        let residual = (computed - expected).abs();
        Self {
            name: name.into(),
            computed: Computed::Real(computed),
            expected: Some(expected),
            residual: Some(residual),
            tolerance,
            pass: residual <= tolerance,
            provenance: provenance.into(),
        }
    }

    /// A residual-type result (already a norm); passes when at or below
    /// the tolerance.
    pub fn residual(
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        provenance: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            computed: Computed::MatrixNorm(residual),
            expected: None,
            residual: Some(residual),
            tolerance,
            pass: residual <= tolerance,
            provenance: provenance.into(),
        }
    }

    /// A residual that is *expected to be large* (a demonstrated failure
    /// of some property); passes when at or above the threshold.
    pub fn expected_large(
        name: impl Into<String>,
        residual: f64,
        threshold: f64,
        provenance: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            computed: Computed::MatrixNorm(residual),
            expected: None,
            residual: Some(residual),
            tolerance: threshold,
            pass: residual >= threshold,
            provenance: provenance.into(),
        }
    }

    /// Raw constructor for entries with bespoke pass semantics.
    pub fn raw(
        name: impl Into<String>,
        computed: Computed,
        expected: Option<f64>,
        residual: Option<f64>,
        tolerance: f64,
        pass: bool,
        provenance: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            computed,
            expected,
            residual,
            tolerance,
            pass,
            provenance: provenance.into(),
        }
    }
}

/// A named collection of entries plus the configuration that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: serde_json::Value,
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn new(config: &impl Serialize, entries: Vec<ReportEntry>) -> Self {
        Self {
            config: serde_json::to_value(config).expect("config serializes"),
            entries,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,computed,expected,residual,tolerance,pass,provenance\n");
        for e in &self.entries {
            let expected = e.expected.map(|v| v.to_string()).unwrap_or_default();
            let residual = e.residual.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&e.name),
                e.computed,
                expected,
                residual,
                e.tolerance,
                e.pass,
                csv_field(&e.provenance),
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let name_width = self
            .entries
            .iter()
            .map(|e| e.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        out.push_str(&format!(
            "{:<name_width$}  {:>13}  {:>13}  {:>10}  {:>8}  {:<4}  provenance\n",
            "name", "computed", "expected", "residual", "tol", "ok"
        ));
        for e in &self.entries {
            let computed = format_scalar(&e.computed);
            let expected = e
                .expected
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| "-".into());
            let residual = e
                .residual
                .map(|v| format!("{v:.2e}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<name_width$}  {:>13}  {:>13}  {:>10}  {:>8.1e}  {:<4}  {}\n",
                e.name,
                computed,
                expected,
                residual,
                e.tolerance,
                if e.pass { "ok" } else { "FAIL" },
                e.provenance,
            ));
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Table => self.to_table(),
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn format_scalar(c: &Computed) -> String {
    match c {
        Computed::Real(v) | Computed::MatrixNorm(v) => {
            if v.abs() < 1e-3 && *v != 0.0 {
                format!("{v:.6e}")
            } else {
                format!("{v:.6}")
            }
        }
        Computed::Complex { re, im } => format!("{re:.4}{im:+.4}i"),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Output format for the command-line reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report::new(
            &serde_json::json!({"n": 3}),
            vec![
                ReportEntry::value("alpha", 2.18, 2.18, 1e-12, "identity"),
                ReportEntry::residual("beta", 3.0e-7, 1e-6, "derived oracle"),
                ReportEntry::expected_large("gamma", 0.04, 1e-2, "demonstrated failure"),
            ],
        )
    }

    #[test]
    fn pass_semantics() {
        let r = sample();
        assert!(r.all_pass());
        let failing = ReportEntry::value("d", 1.0, 2.0, 1e-3, "x");
        assert!(!failing.pass);
        let too_small = ReportEntry::expected_large("e", 1e-5, 1e-2, "x");
        assert!(!too_small.pass);
    }

    #[test]
    fn json_is_stable_across_renders() {
        let a = sample().to_json();
        let b = sample().to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"entries\""));
        assert!(a.contains("\"provenance\""));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("name,computed"));
        assert!(lines[1].starts_with("alpha,"));
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn table_marks_failures() {
        let mut r = sample();
        r.entries
            .push(ReportEntry::value("bad", 1.0, 2.0, 1e-6, "x"));
        let table = r.to_table();
        assert!(table.contains("FAIL"));
        assert!(!r.all_pass());
    }
}
