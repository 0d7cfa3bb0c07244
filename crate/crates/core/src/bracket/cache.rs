//! Line-oriented bracket cache:
//!
//! ```text
//! WPBRACKET v1
//! g|d1,d2,...,dn|numerator|denominator
//! ```
//!
//! The grade is implied by the key and never written. Records are sorted by
//! key, so equal tables produce identical files.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rug::{Integer, Rational};

use super::engine::{ExactEngine, Preload};
use super::key::BracketKey;
use crate::arith::PiValue;
use crate::error::{Error, Result};

pub const CACHE_HEADER: &str = "WPBRACKET v1";

pub fn write_records<W: Write>(records: &[(BracketKey, PiValue)], out: W) -> Result<usize> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{CACHE_HEADER}")?;
    let mut sorted: Vec<&(BracketKey, PiValue)> = records.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for (k, v) in &sorted {
        let d: Vec<String> = k.d().iter().map(|x| x.to_string()).collect();
        let q = v.rational();
        writeln!(w, "{}|{}|{}|{}", k.g(), d.join(","), q.numer(), q.denom())?;
    }
    w.flush()?;
    Ok(sorted.len())
}

/// Parses a cache stream. Line numbers in errors are 1-based and count the
/// header; repeated keys with different values are rejected.
pub fn read_records<R: Read>(input: R) -> Result<Vec<(BracketKey, PiValue)>> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(Error::CacheFormat {
                line: 1,
                reason: "missing header".into(),
            })
        }
    };
    if header.trim_end() != CACHE_HEADER {
        return Err(Error::CacheVersion {
            expected: CACHE_HEADER.into(),
            found: header,
        });
    }
    let mut out: Vec<(BracketKey, PiValue)> = Vec::new();
    let mut seen: std::collections::HashMap<BracketKey, usize> = Default::default();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = parse_record(&line).map_err(|reason| Error::CacheFormat { line: lineno, reason })?;
        if let Some(&j) = seen.get(&key) {
            if out[j].1 != value {
                return Err(Error::CacheConflict {
                    line: lineno,
                    key: key.to_string(),
                });
            }
            continue;
        }
        seen.insert(key.clone(), out.len());
        out.push((key, value));
    }
    Ok(out)
}

fn parse_record(line: &str) -> std::result::Result<(BracketKey, PiValue), String> {
    let fields: Vec<&str> = line.trim_end().split('|').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 `|`-separated fields, found {}", fields.len()));
    }
    let g: i64 = fields[0].parse().map_err(|_| format!("bad genus `{}`", fields[0]))?;
    let d: Vec<i64> = if fields[1].is_empty() {
        Vec::new()
    } else {
        fields[1]
            .split(',')
            .map(|x| x.parse::<i64>().map_err(|_| format!("bad entry `{x}`")))
            .collect::<std::result::Result<_, _>>()?
    };
    let key = BracketKey::new(g, &d).map_err(|e| e.to_string())?;
    if !d.windows(2).all(|w| w[0] >= w[1]) {
        return Err("entries are not in canonical (descending) order".into());
    }
    let num: Integer = fields[2].parse().map_err(|_| format!("bad numerator `{}`", fields[2]))?;
    let den: Integer = fields[3].parse().map_err(|_| format!("bad denominator `{}`", fields[3]))?;
    if den <= 0 {
        return Err("denominator must be positive".into());
    }
    let q = Rational::from((num, den));
    if key.d0() < 0 && q != 0 {
        return Err(format!("{key} is dimensionally zero but has a nonzero value"));
    }
    let grade = key.d0().max(0) as i32;
    Ok((key, PiValue::new(q, grade)))
}

/// Writes every computed bracket of `engine` to `path`.
pub fn store(engine: &ExactEngine, path: &Path) -> Result<usize> {
    let records = engine.snapshot();
    let tmp = path.with_extension("tmp");
    let n = write_records(&records, fs::File::create(&tmp)?)?;
    fs::rename(&tmp, path)?;
    Ok(n)
}

/// Merges the records of `path` into `engine`; returns the number of records
/// read. A record that disagrees with an existing entry is an error naming
/// its line.
pub fn load(engine: &ExactEngine, path: &Path) -> Result<usize> {
    let file = fs::File::open(path)?;
    let records = read_records(file)?;
    // Line numbers of the records, header on line 1, blank lines skipped.
    let text = fs::read_to_string(path)?;
    let mut linenos = text
        .lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1);
    let count = records.len();
    for (key, value) in records {
        let lineno = linenos.next().unwrap_or(0);
        if engine.preload(key.clone(), value)? == Preload::Conflict {
            return Err(Error::CacheConflict {
                line: lineno,
                key: key.to_string(),
            });
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::EngineConfig;

    fn engine() -> ExactEngine {
        ExactEngine::exact(EngineConfig { workers: 1, ..Default::default() }).unwrap()
    }

    #[test]
    fn header_only_is_empty() {
        let r = read_records(format!("{CACHE_HEADER}\n").as_bytes()).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn corrupted_line_is_named() {
        let text = format!("{CACHE_HEADER}\n1|0|1|12\n1|1|x|2\n");
        match read_records(text.as_bytes()) {
            Err(Error::CacheFormat { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_version() {
        assert!(matches!(
            read_records("WPBRACKET v2\n".as_bytes()),
            Err(Error::CacheVersion { .. })
        ));
    }

    #[test]
    fn conflicting_duplicate() {
        let text = format!("{CACHE_HEADER}\n1|0|1|12\n1|0|1|24\n");
        assert!(matches!(
            read_records(text.as_bytes()),
            Err(Error::CacheConflict { line: 3, .. })
        ));
    }

    #[test]
    fn round_trip() {
        let e = engine();
        e.volume(3, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wpb");
        let n = store(&e, &path).unwrap();
        assert_eq!(n, e.snapshot().len());
        let fresh = engine();
        assert_eq!(load(&fresh, &path).unwrap(), n);
        assert_eq!(fresh.snapshot(), e.snapshot());
        // Loading again is a no-op merge.
        assert_eq!(load(&fresh, &path).unwrap(), n);
    }

    #[test]
    fn conflict_with_table() {
        let e = engine();
        e.volume(1, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wpb");
        fs::write(&path, format!("{CACHE_HEADER}\n1|0,0|1|5\n")).unwrap();
        assert!(matches!(load(&e, &path), Err(Error::CacheConflict { line: 2, .. })));
    }
}
