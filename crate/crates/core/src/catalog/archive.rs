//! `NFIMG001` image archive.
//!
//! ```text
//! magic        8   "NFIMG001"
//! file_count   u32
//! record * file_count:
//!   path_len   u16
//!   path       path_len bytes, UTF-8, '/'-separated, relative
//!   mode       u32 permission bits
//!   size       u64 uncompressed length
//!   digest     32  SHA-256 of the uncompressed content
//!   clen       u64 compressed length
//!   payload    clen bytes, raw DEFLATE
//!   seal       32  SHA-256 of this record's preceding bytes
//! trailer      32  SHA-256 of everything before it
//! ```
//!
//! Integers are big-endian. Records are sorted by path bytes and carry no
//! timestamps or ownership, so capturing the same tree twice gives the same
//! bytes. The per-record seal lets extraction name the damaged entry.

use std::fs;
use std::io::{Read, Write};
use std::path::{Component, Path, PathBuf};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use super::CatalogError;
use crate::digest::Digest;

pub const ARCHIVE_MAGIC: &[u8; 8] = b"NFIMG001";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveSummary {
    pub file_count: usize,
    pub total_bytes: u64,
    pub archive_bytes: u64,
    pub trailer: Digest,
    /// Set when the source held no regular files.
    pub empty: bool,
    /// Entries that were not captured (symlinks, special files, non-UTF-8 names).
    pub skipped: Vec<(PathBuf, String)>,
}

struct SourceFile {
    rel: String,
    abs: PathBuf,
    mode: u32,
}

#[cfg(unix)]
fn mode_of(meta: &fs::Metadata) -> u32 {
    use std::os::unix::fs::PermissionsExt;
    meta.permissions().mode() & 0o7777
}

#[cfg(not(unix))]
fn mode_of(meta: &fs::Metadata) -> u32 {
    if meta.permissions().readonly() {
        0o444
    } else {
        0o644
    }
}

fn walk(
    root: &Path,
    dir: &Path,
    files: &mut Vec<SourceFile>,
    skipped: &mut Vec<(PathBuf, String)>,
) -> Result<(), CatalogError> {
    let unreadable = |source| CatalogError::SourceUnreadable {
        path: dir.to_path_buf(),
        source,
    };
    for item in fs::read_dir(dir).map_err(unreadable)? {
        let item = item.map_err(unreadable)?;
        let path = item.path();
        let meta = fs::symlink_metadata(&path).map_err(|source| CatalogError::SourceUnreadable {
            path: path.clone(),
            source,
        })?;
        let rel = path.strip_prefix(root).expect("walk stays under root");
        if meta.file_type().is_symlink() {
            skipped.push((rel.to_path_buf(), "symbolic link not followed".into()));
        } else if meta.is_dir() {
            walk(root, &path, files, skipped)?;
        } else if meta.is_file() {
            let Some(text) = rel.to_str() else {
                skipped.push((rel.to_path_buf(), "path is not valid UTF-8".into()));
                continue;
            };
            let rel = text.replace(std::path::MAIN_SEPARATOR, "/");
            if rel.len() > u16::MAX as usize {
                skipped.push((PathBuf::from(text), "path too long".into()));
                continue;
            }
            files.push(SourceFile {
                rel,
                abs: path,
                mode: mode_of(&meta),
            });
        } else {
            skipped.push((rel.to_path_buf(), "not a regular file".into()));
        }
    }
    Ok(())
}

/// Packs every regular file under `source_dir` into an archive at `out_path`.
pub fn capture(source_dir: &Path, out_path: &Path) -> Result<ArchiveSummary, CatalogError> {
    let mut files = Vec::new();
    let mut skipped = Vec::new();
    walk(source_dir, source_dir, &mut files, &mut skipped)?;
    files.sort_by(|a, b| a.rel.as_bytes().cmp(b.rel.as_bytes()));
    skipped.sort();

    let mut out = ARCHIVE_MAGIC.to_vec();
    out.extend_from_slice(&(files.len() as u32).to_be_bytes());
    let mut total_bytes = 0u64;
    for f in &files {
        let content = fs::read(&f.abs).map_err(|source| CatalogError::SourceUnreadable {
            path: f.abs.clone(),
            source,
        })?;
        total_bytes += content.len() as u64;
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&content)
            .and_then(|_| enc.try_finish())
            .map_err(|e| CatalogError::io(&f.abs, e))?;
        let compressed = enc.finish().map_err(|e| CatalogError::io(&f.abs, e))?;

        let start = out.len();
        out.extend_from_slice(&(f.rel.len() as u16).to_be_bytes());
        out.extend_from_slice(f.rel.as_bytes());
        out.extend_from_slice(&f.mode.to_be_bytes());
        out.extend_from_slice(&(content.len() as u64).to_be_bytes());
        out.extend_from_slice(Digest::of(&content).as_bytes());
        out.extend_from_slice(&(compressed.len() as u64).to_be_bytes());
        out.extend_from_slice(&compressed);
        let seal = Digest::of(&out[start..]);
        out.extend_from_slice(seal.as_bytes());
    }
    let trailer = Digest::of(&out);
    out.extend_from_slice(trailer.as_bytes());
    fs::write(out_path, &out).map_err(|e| CatalogError::io(out_path, e))?;

    Ok(ArchiveSummary {
        file_count: files.len(),
        total_bytes,
        archive_bytes: out.len() as u64,
        trailer,
        empty: files.is_empty(),
        skipped,
    })
}

struct Record {
    path: String,
    mode: u32,
    content: Vec<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.at.checked_add(n)?;
        let s = self.bytes.get(self.at..end)?;
        self.at = end;
        Some(s)
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_be_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_be_bytes(b.try_into().unwrap()))
    }
}

fn is_safe_relative(path: &str) -> bool {
    !path.is_empty()
        && !path.contains('\\')
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_)))
}

fn read_record(cur: &mut Cursor<'_>, index: usize) -> Result<Record, CatalogError> {
    let start = cur.at;
    let mut path_hint = format!("record #{index}");
    let corrupt = |path: &str, reason: &str| CatalogError::CorruptArchive {
        index: Some(index),
        path: path.to_string(),
        reason: reason.to_string(),
    };
    let body = (|| {
        let path_len = cur.u16()? as usize;
        let path = cur.take(path_len)?;
        path_hint = String::from_utf8_lossy(path).into_owned();
        let mode = cur.u32()?;
        let size = cur.u64()?;
        let digest = cur.take(32)?;
        let clen = cur.u64()?;
        let payload = cur.take(usize::try_from(clen).ok()?)?;
        let sealed = &cur.bytes[start..cur.at];
        let seal = cur.take(32)?;
        Some((path.to_vec(), mode, size, digest, payload, sealed, seal))
    })();
    let Some((path, mode, size, digest, payload, sealed, seal)) = body else {
        return Err(corrupt(&path_hint, "record overruns the archive"));
    };
    let path_text = String::from_utf8_lossy(&path).into_owned();
    if Digest::of(sealed).as_bytes() != seal {
        return Err(corrupt(&path_text, "record seal mismatch"));
    }
    let path = String::from_utf8(path).map_err(|_| corrupt(&path_text, "path is not UTF-8"))?;
    if !is_safe_relative(&path) {
        return Err(corrupt(&path, "unsafe path"));
    }
    let mut content = Vec::new();
    DeflateDecoder::new(payload)
        .take(size.saturating_add(1))
        .read_to_end(&mut content)
        .map_err(|_| corrupt(&path, "payload does not decompress"))?;
    if content.len() as u64 != size {
        return Err(corrupt(&path, "size mismatch"));
    }
    if Digest::of(&content).as_bytes() != digest {
        return Err(corrupt(&path, "content digest mismatch"));
    }
    Ok(Record {
        path,
        mode,
        content,
    })
}

fn parse(bytes: &[u8]) -> Result<Vec<Record>, CatalogError> {
    if bytes.len() < 8 || &bytes[..8] != ARCHIVE_MAGIC {
        return Err(CatalogError::BadMagic);
    }
    let header = |reason: &str| CatalogError::CorruptArchive {
        index: None,
        path: "<header>".into(),
        reason: reason.into(),
    };
    let mut cur = Cursor { bytes, at: 8 };
    let count = cur.u32().ok_or_else(|| header("missing file count"))? as usize;
    let mut records: Vec<Record> = Vec::new();
    for index in 0..count {
        let record = read_record(&mut cur, index)?;
        if let Some(prev) = records.last() {
            if prev.path.as_bytes() >= record.path.as_bytes() {
                return Err(CatalogError::CorruptArchive {
                    index: Some(index),
                    path: record.path,
                    reason: "records out of order".into(),
                });
            }
        }
        records.push(record);
    }
    let trailer_at = cur.at;
    let trailer = cur.take(32);
    let intact = trailer.is_some_and(|t| Digest::of(&bytes[..trailer_at]).as_bytes() == t)
        && cur.at == bytes.len();
    if !intact {
        return Err(CatalogError::CorruptArchive {
            index: None,
            path: "<trailer>".into(),
            reason: "archive digest mismatch".into(),
        });
    }
    Ok(records)
}

/// Recreates the archived tree under `dest_dir`, which must be empty or absent.
/// The whole archive is verified before anything is written.
pub fn extract(archive_path: &Path, dest_dir: &Path) -> Result<usize, CatalogError> {
    let bytes = fs::read(archive_path).map_err(|e| CatalogError::io(archive_path, e))?;
    let records = parse(&bytes)?;
    if dest_dir.exists() {
        let mut it = fs::read_dir(dest_dir).map_err(|e| CatalogError::io(dest_dir, e))?;
        if it.next().is_some() {
            return Err(CatalogError::DestinationNotEmpty(dest_dir.to_path_buf()));
        }
    }
    fs::create_dir_all(dest_dir).map_err(|e| CatalogError::io(dest_dir, e))?;
    for r in &records {
        let target = dest_dir.join(&r.path);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|e| CatalogError::io(parent, e))?;
        }
        fs::write(&target, &r.content).map_err(|e| CatalogError::io(&target, e))?;
        set_mode(&target, r.mode)?;
    }
    Ok(records.len())
}

#[cfg(unix)]
fn set_mode(path: &Path, mode: u32) -> Result<(), CatalogError> {
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(path, fs::Permissions::from_mode(mode)).map_err(|e| CatalogError::io(path, e))
}

#[cfg(not(unix))]
fn set_mode(_path: &Path, _mode: u32) -> Result<(), CatalogError> {
    Ok(())
}
