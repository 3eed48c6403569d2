//! Check records and the three output files: `report.json`,
//! `constants.csv` and `plotdata.tsv`.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::ExactRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// One verified statement. Inequality checks keep both sides exactly so a
/// failure names the violated inequality and what violates it.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub relation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<ExactRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<ExactRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    fn cmp(name: &str, relation: &str, ok: bool, lhs: ExactRational, rhs: ExactRational) -> Self {
        Check {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            relation: relation.to_string(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            witness: None,
            detail: String::new(),
        }
    }

    pub fn le(name: &str, lhs: ExactRational, rhs: ExactRational) -> Self {
        let ok = lhs <= rhs;
        Self::cmp(name, "<=", ok, lhs, rhs)
    }

    pub fn lt(name: &str, lhs: ExactRational, rhs: ExactRational) -> Self {
        let ok = lhs < rhs;
        Self::cmp(name, "<", ok, lhs, rhs)
    }

    pub fn eq(name: &str, lhs: ExactRational, rhs: ExactRational) -> Self {
        let ok = lhs == rhs;
        let mut c = Self::cmp(name, "==", ok, lhs.clone(), rhs.clone());
        if !ok {
            c.detail = format!("discrepancy {}", lhs - rhs);
        }
        c
    }

    pub fn holds(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            relation: "holds".into(),
            lhs: None,
            rhs: None,
            witness: None,
            detail: detail.into(),
        }
    }

    pub fn not_applicable(name: &str, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            status: Status::NotApplicable,
            relation: "n/a".into(),
            lhs: None,
            rhs: None,
            witness: None,
            detail: detail.into(),
        }
    }

    pub fn with_witness<T: Serialize>(mut self, w: &T) -> Self {
        self.witness = serde_json::to_value(w).ok();
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// A row of `constants.csv`.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantRow {
    pub quantity: String,
    pub stage: Option<usize>,
    pub n: Option<u32>,
    pub r: Option<u32>,
    pub value: ExactRational,
}

/// A point of `plotdata.tsv`. `y_approx` is a decimal rendering for
/// plotting tools only.
#[derive(Clone, Debug)]
pub struct PlotPoint {
    pub series: String,
    pub x: ExactRational,
    pub y: ExactRational,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub mode: String,
    pub results: serde_json::Map<String, Value>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub constants: Vec<ConstantRow>,
    #[serde(skip)]
    pub plot: Vec<PlotPoint>,
}

impl Report {
    pub fn new(mode: &str) -> Self {
        Report { mode: mode.to_string(), ..Default::default() }
    }

    pub fn put<T: Serialize>(&mut self, key: &str, v: &T) -> Result<()> {
        self.results.insert(key.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn constant(&mut self, quantity: &str, stage: Option<usize>, n: Option<u32>, r: Option<u32>, value: ExactRational) {
        self.constants.push(ConstantRow { quantity: quantity.to_string(), stage, n, r, value });
    }

    pub fn point(&mut self, series: &str, x: ExactRational, y: ExactRational) {
        self.plot.push(PlotPoint { series: series.to_string(), x, y });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Full<'a> {
            mode: &'a str,
            passed: bool,
            results: &'a serde_json::Map<String, Value>,
            checks: &'a [Check],
            failures: Vec<&'a Check>,
        }
        let full = Full {
            mode: &self.mode,
            passed: self.all_passed(),
            results: &self.results,
            checks: &self.checks,
            failures: self.failures(),
        };
        Ok(serde_json::to_string_pretty(&full)? + "\n")
    }

    pub fn constants_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "stage", "n", "r", "value"]).map_err(csv_err)?;
        for row in &self.constants {
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                row.quantity.clone(),
                opt(row.stage.map(|s| s.to_string())),
                opt(row.n.map(|s| s.to_string())),
                opt(row.r.map(|s| s.to_string())),
                row.value.to_string(),
            ])
            .map_err(csv_err)?;
        }
        bytes_to_string(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
    }

    pub fn plot_tsv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
        w.write_record(["series", "x", "y", "y_approx"]).map_err(csv_err)?;
        for p in &self.plot {
            w.write_record([p.series.clone(), p.x.to_string(), p.y.to_string(), format!("{:.6}", p.y.to_f64())])
                .map_err(csv_err)?;
        }
        bytes_to_string(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
    }

    /// Renders every file first, then writes them, so nothing partial is
    /// left behind when rendering fails.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let files = [
            ("report.json", self.to_json()?),
            ("constants.csv", self.constants_csv()?),
            ("plotdata.tsv", self.plot_tsv()?),
        ];
        std::fs::create_dir_all(dir)?;
        for (name, body) in files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn bytes_to_string(b: Vec<u8>) -> Result<String> {
    String::from_utf8(b).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn failure_record_names_both_sides() {
        let mut r = Report::new("test");
        r.check(Check::le("ratio bound", q(3, 1), q(2, 1)).with_witness(&"here"));
        r.check(Check::not_applicable("series", "b^r >= 2"));
        assert!(!r.all_passed());
        let j: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(j["failures"][0]["lhs"], "3/1");
        assert_eq!(j["failures"][0]["witness"], "here");
        assert_eq!(j["checks"][1]["status"], "not-applicable");
    }

    #[test]
    fn csv_and_tsv_layout() {
        let mut r = Report::new("test");
        r.constant("doubling", None, Some(3), None, q(5, 1));
        r.point("C(n)", q(3, 1), q(1, 3));
        assert_eq!(r.constants_csv().unwrap(), "quantity,stage,n,r,value\ndoubling,,3,,5/1\n");
        assert_eq!(r.plot_tsv().unwrap(), "series\tx\ty\ty_approx\nC(n)\t3/1\t1/3\t0.333333\n");
    }
}
