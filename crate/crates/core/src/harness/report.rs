use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::{ResultRecord, Row};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// `None` collects checks outside the report rows.
    pub row: Option<Row>,
    pub label: String,
    pub criteria: Vec<u32>,
    pub checks: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub rows: Vec<SummaryRow>,
    /// Report rows with no checks in any record.
    pub missing: Vec<Row>,
    /// Unreadable `results.json` files.
    pub errors: Vec<String>,
    /// Set when rows are missing or records could not be read.
    pub partial: bool,
}

fn collect(dir: &Path, out: &mut Vec<ResultRecord>, errors: &mut Vec<String>) -> Result<()> {
    let mut read = |p: &Path| match std::fs::read_to_string(p)
        .map_err(crate::Error::from)
        .and_then(|t| Ok(serde_json::from_str::<ResultRecord>(&t)?))
    {
        Ok(r) => out.push(r),
        Err(e) => errors.push(format!("{}: {e}", p.display())),
    };
    let own = dir.join("results.json");
    if own.is_file() {
        read(&own);
    }
    let mut subdirs: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        let p = d.join("results.json");
        if p.is_file() {
            read(&p);
        }
    }
    Ok(())
}

/// Aggregates the ledgers of `dir/results.json` and `dir/*/results.json`
/// into one row per report row present.
pub fn report(dir: &Path) -> Result<Summary> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    collect(dir, &mut records, &mut errors)?;
    let entries: Vec<_> = records.iter().flat_map(|r| r.ledger.iter()).collect();
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for row in Row::ALL {
        let es: Vec<_> = entries.iter().filter(|e| e.row == Some(row)).collect();
        if es.is_empty() {
            missing.push(row);
            continue;
        }
        let failures: Vec<String> = es.iter().filter(|e| !e.pass).map(|e| e.id.clone()).collect();
        rows.push(SummaryRow {
            row: Some(row),
            label: row.label().to_string(),
            criteria: row.criteria().to_vec(),
            checks: es.len(),
            pass: failures.is_empty(),
            failures,
        });
    }
    let other: Vec<_> = entries.iter().filter(|e| e.row.is_none()).collect();
    if !other.is_empty() {
        let failures: Vec<String> = other.iter().filter(|e| !e.pass).map(|e| e.id.clone()).collect();
        rows.push(SummaryRow {
            row: None,
            label: "other checks".into(),
            criteria: Vec::new(),
            checks: other.len(),
            pass: failures.is_empty(),
            failures,
        });
    }
    Ok(Summary {
        records: records.len(),
        partial: !missing.is_empty() || !errors.is_empty(),
        rows,
        missing,
        errors,
    })
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Columns `row,criteria,checks,failures,status`; criteria and failures
    /// are `;`-separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,criteria,checks,failures,status")?;
        for r in &self.rows {
            let crit: Vec<String> = r.criteria.iter().map(u32::to_string).collect();
            writeln!(
                w,
                "{},{},{},{},{}",
                r.row.map_or("other".to_string(), |x| serde_json::to_value(x).unwrap().as_str().unwrap().to_string()),
                crit.join(";"),
                r.checks,
                r.failures.join(";"),
                if r.pass { "pass" } else { "fail" }
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} record(s)", self.records);
        for r in &self.rows {
            let crit: Vec<String> = r.criteria.iter().map(u32::to_string).collect();
            let _ = writeln!(
                s,
                "{:4}  {:<58} criteria [{}]  {} check(s){}",
                if r.pass { "PASS" } else { "FAIL" },
                r.label,
                crit.join(", "),
                r.checks,
                if r.failures.is_empty() { String::new() } else { format!("  failed: {}", r.failures.join(", ")) }
            );
        }
        if self.partial {
            let _ = writeln!(s, "PARTIAL: {} row(s) without results", self.missing.len());
            for e in &self.errors {
                let _ = writeln!(s, "unreadable: {e}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run, ExperimentConfig, ExperimentKind};

    #[test]
    fn empty_dir_is_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let s = report(dir.path()).unwrap();
        assert_eq!((s.records, s.rows.len(), s.partial), (0, 0, true));
    }

    #[test]
    fn one_passing_record_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::new(ExperimentKind::Verify);
        c.suite = Some("cantor".into());
        c.seed = Some(1);
        c.out = Some(dir.path().join("run"));
        run(&c).unwrap();
        std::fs::create_dir(dir.path().join("broken")).unwrap();
        std::fs::write(dir.path().join("broken/results.json"), "{").unwrap();
        let s = report(dir.path()).unwrap();
        assert_eq!(s.records, 1);
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].row, Some(Row::BoundaryNullSets));
        assert!(s.rows[0].pass && s.partial && s.errors.len() == 1);
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("boundary-null-sets,6,3,,pass"));
    }
}
