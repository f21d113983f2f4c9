//! Persistent τ/τ₊ database in JSON Lines.
//!
//! Line 1 is `{"format":"chainsmith-memo","version":1}`. Every following line
//! is one [`MemoRecord`]. Records are keyed by `(value, model)` and only ever
//! improve: a store replaces an existing record when it is shorter, or equally
//! long and newly proven optimal.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{evaluate, format_chain, parse_chain, Model, Program};

use super::SearchResult;

pub const MEMO_FORMAT: &str = "chainsmith-memo";
pub const MEMO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MemoError {
    #[error("memo i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: bad memo header ({reason})")]
    Header { line: usize, reason: String },
    #[error("line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("invalid record: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoRecord {
    /// Decimal, no sign, no leading zeros.
    pub value: String,
    pub model: Model,
    pub length: usize,
    /// Canonical chain text.
    pub witness: String,
    pub optimal: bool,
}

impl MemoRecord {
    pub fn from_result(result: &SearchResult) -> Self {
        MemoRecord {
            value: result.target.to_string(),
            model: result.model,
            length: result.length,
            witness: format_chain(&result.witness),
            optimal: result.proven_optimal,
        }
    }

    /// Re-parses and re-evaluates the witness against the stored claims.
    pub fn validate(&self) -> Result<(BigUint, Program), String> {
        let value: BigUint = self
            .value
            .parse()
            .map_err(|_| format!("value `{}` is not a decimal integer", self.value))?;
        if value.to_string() != self.value {
            return Err(format!(
                "value `{}` is not in canonical decimal form",
                self.value
            ));
        }
        let program = parse_chain(&self.witness).map_err(|e| format!("witness: {e}"))?;
        if program.len() != self.length {
            return Err(format!(
                "witness has {} steps but length is {}",
                program.len(),
                self.length
            ));
        }
        if self.model == Model::Amc && program.has_subtraction() {
            return Err("amc witness contains a subtraction".to_string());
        }
        let (computed, _) = evaluate(&program);
        if computed != BigInt::from(value.clone()) {
            return Err(format!(
                "witness evaluates to {computed}, not {}",
                self.value
            ));
        }
        Ok((value, program))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreOutcome {
    Inserted,
    Replaced,
    /// The stored record is at least as good; nothing changed.
    Rejected,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoDb {
    records: BTreeMap<(Model, BigUint), MemoRecord>,
}

impl MemoDb {
    pub fn new() -> Self {
        MemoDb::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, value: &BigUint, model: Model) -> Option<&MemoRecord> {
        self.records.get(&(model, value.clone()))
    }

    pub fn records(&self) -> impl Iterator<Item = &MemoRecord> {
        self.records.values()
    }

    pub fn store(&mut self, record: MemoRecord) -> Result<StoreOutcome, MemoError> {
        let (value, _) = record.validate().map_err(MemoError::Invalid)?;
        let key = (record.model, value);
        match self.records.get(&key) {
            None => {
                self.records.insert(key, record);
                Ok(StoreOutcome::Inserted)
            }
            Some(old) => {
                let upgrade = record.length < old.length
                    || (record.length == old.length && record.optimal && !old.optimal);
                if upgrade {
                    self.records.insert(key, record);
                    Ok(StoreOutcome::Replaced)
                } else {
                    Ok(StoreOutcome::Rejected)
                }
            }
        }
    }

    /// Parses a memo file. With `repair`, corrupt record lines are skipped and
    /// returned alongside the database; otherwise the first one is fatal.
    pub fn parse(text: &str, repair: bool) -> Result<(MemoDb, Vec<MemoError>), MemoError> {
        let mut lines = text.lines().enumerate();
        let mut db = MemoDb::new();
        let mut skipped = Vec::new();
        match lines.next() {
            None => return Ok((db, skipped)),
            Some((_, first)) => {
                let header: Header =
                    serde_json::from_str(first).map_err(|e| MemoError::Header {
                        line: 1,
                        reason: e.to_string(),
                    })?;
                if header.format != MEMO_FORMAT || header.version != MEMO_VERSION {
                    return Err(MemoError::Header {
                        line: 1,
                        reason: format!("unsupported {} v{}", header.format, header.version),
                    });
                }
            }
        }
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<MemoRecord>(raw)
                .map_err(|e| e.to_string())
                .and_then(|rec| rec.validate().map(|_| rec));
            let err = match parsed {
                Ok(rec) => match db.store(rec) {
                    Ok(_) => continue,
                    Err(e) => e.to_string(),
                },
                Err(reason) => reason,
            };
            let err = MemoError::Corrupt { line, reason: err };
            if repair {
                skipped.push(err);
            } else {
                return Err(err);
            }
        }
        Ok((db, skipped))
    }

    /// Loads `path`; a missing file is an empty database.
    pub fn load(path: &Path, repair: bool) -> Result<(MemoDb, Vec<MemoError>), MemoError> {
        match fs::read_to_string(path) {
            Ok(text) => MemoDb::parse(&text, repair),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok((MemoDb::new(), Vec::new())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header {
            format: MEMO_FORMAT.to_string(),
            version: MEMO_VERSION,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for record in self.records.values() {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Writes through a sibling temp file and renames over `path`.
    pub fn save(&self, path: &Path) -> Result<(), MemoError> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        fs::write(&tmp, self.to_jsonl())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::tower_slp;

    fn tower3_record(optimal: bool) -> MemoRecord {
        MemoRecord {
            value: "255".into(),
            model: Model::Slp,
            length: 5,
            witness: format_chain(&tower_slp(3).unwrap()),
            optimal,
        }
    }

    #[test]
    fn store_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("memo.jsonl");
        let mut db = MemoDb::new();
        assert_eq!(
            db.store(tower3_record(true)).unwrap(),
            StoreOutcome::Inserted
        );
        db.save(&path).unwrap();

        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"format\":\"chainsmith-memo\",\"version\":1}\n"));
        assert!(text.contains(r#""witness":"+ 0 0\n* 1 1\n* 2 2\n* 3 3\n- 4 0\n""#));

        let (loaded, skipped) = MemoDb::load(&path, false).unwrap();
        assert!(skipped.is_empty());
        assert_eq!(
            loaded.get(&BigUint::from(255u32), Model::Slp),
            Some(&tower3_record(true))
        );
        assert_eq!(loaded, db);
    }

    #[test]
    fn wrong_value_fails_validation() {
        let text = format!(
            "{}\n{}\n",
            r#"{"format":"chainsmith-memo","version":1}"#,
            r#"{"value":"254","model":"slp","length":5,"witness":"+ 0 0\n* 1 1\n* 2 2\n* 3 3\n- 4 0\n","optimal":true}"#
        );
        let err = MemoDb::parse(&text, false).unwrap_err();
        assert!(matches!(err, MemoError::Corrupt { line: 2, .. }), "{err}");

        let (db, skipped) = MemoDb::parse(&text, true).unwrap();
        assert!(db.is_empty());
        assert_eq!(skipped.len(), 1);
    }

    #[test]
    fn bad_header_and_garbage() {
        assert!(matches!(
            MemoDb::parse("{\"format\":\"other\",\"version\":1}\n", false),
            Err(MemoError::Header { line: 1, .. })
        ));
        let text = "{\"format\":\"chainsmith-memo\",\"version\":1}\nnot json\n";
        assert!(matches!(
            MemoDb::parse(text, false),
            Err(MemoError::Corrupt { line: 2, .. })
        ));
    }

    #[test]
    fn amc_record_with_subtraction_is_invalid() {
        let mut rec = tower3_record(true);
        rec.model = Model::Amc;
        assert!(MemoDb::new().store(rec).is_err());
    }

    #[test]
    fn only_improvements_replace() {
        let mut db = MemoDb::new();
        let short = MemoRecord {
            value: "16".into(),
            model: Model::Amc,
            length: 3,
            witness: "+ 0 0\n* 1 1\n* 2 2\n".into(),
            optimal: true,
        };
        let long = MemoRecord {
            value: "16".into(),
            model: Model::Amc,
            length: 4,
            witness: "+ 0 0\n+ 1 1\n+ 2 2\n+ 3 3\n".into(),
            optimal: false,
        };
        db.store(short.clone()).unwrap();
        let before = db.clone();
        assert_eq!(db.store(long.clone()).unwrap(), StoreOutcome::Rejected);
        assert_eq!(db, before);

        let mut db = MemoDb::new();
        db.store(long).unwrap();
        let unproven = MemoRecord {
            optimal: false,
            ..short.clone()
        };
        assert_eq!(db.store(unproven).unwrap(), StoreOutcome::Replaced);
        assert_eq!(db.store(short.clone()).unwrap(), StoreOutcome::Replaced);
        assert_eq!(db.store(short).unwrap(), StoreOutcome::Rejected);
    }

    #[test]
    fn missing_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let (db, _) = MemoDb::load(&dir.path().join("absent.jsonl"), false).unwrap();
        assert!(db.is_empty());
    }
}
