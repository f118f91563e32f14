//! Tables and reports. Every CSV row and JSON document carries the config hash.

use holozeros::{Error, Result};
use serde::Serialize;
use std::path::Path;

fn io(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes `header` and `rows` with a leading `config_hash` column.
pub fn write_csv(path: &Path, hash: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    let mut full = vec!["config_hash"];
    full.extend_from_slice(header);
    w.write_record(&full).map_err(|e| io(path, e))?;
    for row in rows {
        w.write_record(std::iter::once(hash).chain(row.iter().map(String::as_str))).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    config_hash: &'a str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with `config_hash` and `command` first, then the fields of `body` in
/// declaration order.
pub fn write_json<T: Serialize>(path: &Path, hash: &str, command: &str, body: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(&Tagged { config_hash: hash, command, body })? + "\n";
    std::fs::write(path, text).map_err(|e| io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_prefixes_the_hash() {
        let dir = std::env::temp_dir().join(format!("hz-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.csv");
        write_csv(&p, "abc", &["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "config_hash,a,b\nabc,1,\"x,y\"\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn json_leads_with_hash_and_command() {
        #[derive(Serialize)]
        struct B {
            z: i32,
            a: i32,
        }
        let dir = std::env::temp_dir().join(format!("hz-json-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.json");
        write_json(&p, "abc", "count", &B { z: 1, a: 2 }).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let keys: Vec<usize> = ["config_hash", "command", "\"z\"", "\"a\""].iter().map(|k| text.find(k).unwrap()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{text}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
