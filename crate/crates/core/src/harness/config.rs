use std::collections::BTreeMap;
use std::path::Path;

use crate::error::Error;

/// `key = value` lines; `#` starts a comment. Keys use the long flag names.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key=value", i + 1)));
        };
        let k = k.trim().replace('_', "-");
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k}", i + 1)));
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses() {
        let c = parse_config("# x\nestimator = ts4c1\nmemory=1000  # M\nout_dir=res\n\n").unwrap();
        assert_eq!(c["estimator"], "ts4c1");
        assert_eq!(c["memory"], "1000");
        assert_eq!(c["out-dir"], "res");
    }

    #[test]
    fn rejects() {
        assert!(parse_config("memory").is_err());
        assert!(parse_config("a=1\na=2").is_err());
        assert!(parse_config("=3").is_err());
    }
}
