use serde::{Deserialize, Serialize};

use super::ExperimentConfig;

pub const CSV_HEADER: [&str; 14] = [
    "experiment",
    "N",
    "alpha",
    "c0",
    "epsilon",
    "beta",
    "samples",
    "seed",
    "quantity",
    "estimate",
    "stderr",
    "comparator",
    "margin",
    "pass",
];

/// One measured quantity. `margin` is the signed slack of the check
/// (`pass` iff `margin >= 0`); purely informational rows have no margin and
/// always pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: Option<usize>,
    pub quantity: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub comparator: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
}

impl ReportRow {
    pub fn info(n: Option<usize>, quantity: &str, estimate: f64, stderr: Option<f64>) -> Self {
        Self {
            n,
            quantity: quantity.to_string(),
            estimate,
            stderr,
            comparator: None,
            margin: None,
            pass: true,
        }
    }

    /// Informational row that also records a reference value.
    pub fn reference(n: Option<usize>, quantity: &str, estimate: f64, comparator: f64) -> Self {
        Self { comparator: Some(comparator), ..Self::info(n, quantity, estimate, None) }
    }

    pub fn check(
        n: Option<usize>,
        quantity: &str,
        estimate: f64,
        stderr: Option<f64>,
        comparator: f64,
        margin: f64,
    ) -> Self {
        Self {
            n,
            quantity: quantity.to_string(),
            estimate,
            stderr,
            comparator: Some(comparator),
            margin: Some(margin),
            pass: margin >= 0.0,
        }
    }

    /// `estimate <= comparator + slack`.
    pub fn at_most(
        n: Option<usize>,
        quantity: &str,
        estimate: f64,
        stderr: Option<f64>,
        comparator: f64,
        slack: f64,
    ) -> Self {
        Self::check(n, quantity, estimate, stderr, comparator, comparator + slack - estimate)
    }

    /// `estimate >= comparator - slack`.
    pub fn at_least(
        n: Option<usize>,
        quantity: &str,
        estimate: f64,
        stderr: Option<f64>,
        comparator: f64,
        slack: f64,
    ) -> Self {
        Self::check(n, quantity, estimate, stderr, comparator, estimate - comparator + slack)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub inputs: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub wall_time_secs: f64,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(name: &str, inputs: &ExperimentConfig) -> Self {
        Self {
            name: name.to_string(),
            inputs: inputs.clone(),
            rows: Vec::new(),
            wall_time_secs: 0.0,
            seed: inputs.seed,
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// First row with this quantity name (and `N`, when given).
    pub fn row(&self, quantity: &str, n: Option<usize>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity && (n.is_none() || r.n == n))
    }

    /// Appends another report's rows under this report's name.
    pub fn absorb(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.wall_time_secs += other.wall_time_secs;
    }

    /// CSV with the fixed header; wall time is not part of the table.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        self.write_csv_rows(&mut w);
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Rows only, for concatenating several reports under one header.
    pub fn to_csv_rows(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        self.write_csv_rows(&mut w);
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    fn write_csv_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let cfg = &self.inputs;
        for r in &self.rows {
            w.write_record([
                self.name.clone(),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                cfg.alpha.to_string(),
                cfg.c0.to_string(),
                cfg.epsilon.to_string(),
                cfg.beta.to_string(),
                cfg.samples.to_string(),
                self.seed.to_string(),
                r.quantity.clone(),
                r.estimate.to_string(),
                opt(r.stderr),
                opt(r.comparator),
                opt(r.margin),
                r.pass.to_string(),
            ])
            .expect("in-memory write");
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
