//! The daemon's status file: flat `key=value` lines rewritten every second.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Where `serve` writes and `status` reads when no path is configured.
pub fn default_path() -> PathBuf {
    std::env::temp_dir().join("netforge.status")
}

/// A status snapshot older than this is reported as stale.
pub const STALE_AFTER_SECS: u64 = 5;

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn render(fields: &[(&str, String)]) -> String {
    fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn parse(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Replaces the file atomically so readers never see a partial write.
pub fn write(path: &Path, text: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

pub fn read(path: &Path) -> io::Result<BTreeMap<String, String>> {
    Ok(parse(&fs::read_to_string(path)?))
}

/// True when the snapshot's `updated_unix` is recent.
pub fn is_fresh(fields: &BTreeMap<String, String>) -> bool {
    fields
        .get("updated_unix")
        .and_then(|v| v.parse::<u64>().ok())
        .is_some_and(|t| unix_now().saturating_sub(t) <= STALE_AFTER_SECS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s");
        write(&p, &render(&[("mode", "proxy".into()), ("updated_unix", unix_now().to_string())])).unwrap();
        let f = read(&p).unwrap();
        assert_eq!(f["mode"], "proxy");
        assert!(is_fresh(&f));
    }
}
