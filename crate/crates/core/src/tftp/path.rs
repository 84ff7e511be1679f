use std::path::{Component, Path, PathBuf};

use super::OpenError;

/// Maps a requested TFTP filename onto a path strictly inside `root`.
///
/// Backslashes are treated as separators. Absolute paths, drive prefixes
/// and `..` components are refused; `.` and empty segments are dropped.
/// Symlinks that lead out of the root are caught after canonicalization.
pub fn resolve(root: &Path, filename: &str) -> Result<PathBuf, OpenError> {
    let normalized = filename.replace('\\', "/");
    if normalized.starts_with('/') || normalized.contains(':') {
        return Err(OpenError::AccessViolation(filename.to_string()));
    }
    let mut relative = PathBuf::new();
    for segment in normalized.split('/') {
        match segment {
            "" | "." => continue,
            ".." => return Err(OpenError::AccessViolation(filename.to_string())),
            s => {
                let mut comps = Path::new(s).components();
                match (comps.next(), comps.next()) {
                    (Some(Component::Normal(_)), None) => relative.push(s),
                    _ => return Err(OpenError::AccessViolation(filename.to_string())),
                }
            }
        }
    }
    if relative.as_os_str().is_empty() {
        return Err(OpenError::FileNotFound(filename.to_string()));
    }

    let root = root
        .canonicalize()
        .map_err(|_| OpenError::AccessViolation(filename.to_string()))?;
    let candidate = root.join(&relative);
    let resolved = match candidate.canonicalize() {
        Ok(p) => p,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(OpenError::FileNotFound(filename.to_string()))
        }
        Err(_) => return Err(OpenError::AccessViolation(filename.to_string())),
    };
    if !resolved.starts_with(&root) {
        return Err(OpenError::AccessViolation(filename.to_string()));
    }
    if !resolved.is_file() {
        return Err(OpenError::AccessViolation(filename.to_string()));
    }
    Ok(resolved)
}
