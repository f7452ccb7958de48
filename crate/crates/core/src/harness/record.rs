use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;

/// Summary rows of the verification report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Row {
    ClosedSetInequality,
    OpenSetEquality,
    BorelInequality,
    CapacityAxioms,
    PluripolarSets,
    BoundaryDiscFormula,
    BoundaryNullSets,
}

impl Row {
    pub const ALL: [Row; 7] = [
        Row::ClosedSetInequality,
        Row::OpenSetEquality,
        Row::BorelInequality,
        Row::CapacityAxioms,
        Row::PluripolarSets,
        Row::BoundaryDiscFormula,
        Row::BoundaryNullSets,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Row::ClosedSetInequality => "closed sets: disc bound within tolerance of the envelope",
            Row::OpenSetEquality => "open sets: disc functional equals the envelope",
            Row::BorelInequality => "grid envelope accuracy for the Borel inequality",
            Row::CapacityAxioms => "capacity is monotone and continuous along limits",
            Row::PluripolarSets => "pluripolar sets are invisible to discs",
            Row::BoundaryDiscFormula => "boundary sets: Blaschke discs attain harmonic measure",
            Row::BoundaryNullSets => "boundary sets with null parts",
        }
    }

    /// Acceptance criterion ids aggregated into the row.
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Row::ClosedSetInequality => &[3, 4],
            Row::OpenSetEquality => &[2],
            Row::BorelInequality => &[1],
            Row::CapacityAxioms => &[7],
            Row::PluripolarSets => &[8],
            Row::BoundaryDiscFormula => &[5],
            Row::BoundaryNullSets => &[6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub id: String,
    pub criterion: Option<u32>,
    pub row: Option<Row>,
    pub pass: bool,
    pub value: Option<f64>,
    pub target: Option<f64>,
    pub detail: String,
}

impl LedgerEntry {
    pub fn new(id: impl Into<String>, row: Option<Row>, criterion: Option<u32>, pass: bool) -> Self {
        Self {
            id: id.into(),
            criterion,
            row,
            pass,
            value: None,
            target: None,
            detail: String::new(),
        }
    }

    pub fn with_value(mut self, value: f64, target: f64) -> Self {
        self.value = Some(value);
        self.target = Some(target);
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub kind: ExperimentKind,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub version: String,
    pub outputs: serde_json::Value,
    pub ledger: Vec<LedgerEntry>,
    /// Wall-clock seconds per step; excluded from the numeric payload.
    pub timings: BTreeMap<String, f64>,
}

impl ResultRecord {
    pub fn passed(&self) -> bool {
        self.ledger.iter().all(|e| e.pass)
    }

    /// Canonical bytes of everything the run computed: config hash,
    /// outputs and ledger, without timestamps or timings.
    pub fn numeric_payload(&self) -> Result<Vec<u8>> {
        let v = serde_json::json!({
            "config_hash": self.config_hash,
            "outputs": self.outputs,
            "ledger": self.ledger,
        });
        Ok(serde_json::to_vec(&v)?)
    }

    pub fn entry(&self, id: &str) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.id == id)
    }
}

/// Hex SHA-256 of the config as canonical JSON (object keys sorted), with
/// the output directory left out.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let mut c = config.clone();
    c.out = None;
    let v: serde_json::Value = serde_json::to_value(&c)?;
    let bytes = serde_json::to_vec(&v)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
