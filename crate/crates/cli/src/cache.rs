//! Append-only JSON-lines result cache keyed by
//! (composition, digits, algorithm, library version).

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::ResultRecord;

pub fn lookup(path: &Path, composition: &str, digits: u32, algorithm: &str, version: &str) -> Option<ResultRecord> {
    let file = std::fs::File::open(path).ok()?;
    for line in BufReader::new(file).lines() {
        let Ok(line) = line else { break };
        let Ok(rec) = serde_json::from_str::<ResultRecord>(&line) else {
            continue; // tolerate foreign or truncated lines
        };
        if rec.composition == composition
            && rec.digits == digits
            && rec.algorithm == algorithm
            && rec.version == version
        {
            return Some(rec);
        }
    }
    None
}

pub fn append(path: &Path, record: &ResultRecord) -> std::io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let line = serde_json::to_string(record).expect("records serialize");
    writeln!(file, "{}", line)
}
