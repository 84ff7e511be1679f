//! Deployable image catalog: the `WIA_WDS/<id>/{install,image.meta}` tree,
//! the generated `menu.txt`, and the `NFIMG001` capture archive.

mod archive;
mod manifest;
mod meta;
mod scan;

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::str::FromStr;

pub use archive::{capture, extract, ArchiveSummary, ARCHIVE_MAGIC};
pub use manifest::{ImageEntry, ManifestError, MenuManifest, MENU_HEADER};
pub use meta::ImageMeta;
pub use scan::{scan_catalog, verify_image, Diagnostic, ScanOutcome};

pub const CATALOG_DIR: &str = "WIA_WDS";
pub const PAYLOAD_NAME: &str = "install";
pub const META_NAME: &str = "image.meta";
pub const MENU_NAME: &str = "menu.txt";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read source {path}: {source}")]
    SourceUnreadable { path: PathBuf, source: io::Error },
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("not an image archive (bad magic)")]
    BadMagic,
    #[error("corrupt archive at {path}: {reason}")]
    CorruptArchive {
        /// Record number, when the damage lies inside a record.
        index: Option<usize>,
        path: String,
        reason: String,
    },
    #[error("destination {0} exists and is not empty")]
    DestinationNotEmpty(PathBuf),
    #[error("payload vanished: {0}")]
    FileVanished(PathBuf),
}

impl CatalogError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CatalogError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Firmware architecture an image targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arch {
    Bios32,
    Bios64,
    Uefi32,
    Uefi64,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::Bios32, Arch::Bios64, Arch::Uefi32, Arch::Uefi64];

    pub fn as_str(&self) -> &'static str {
        match self {
            Arch::Bios32 => "bios32",
            Arch::Bios64 => "bios64",
            Arch::Uefi32 => "uefi32",
            Arch::Uefi64 => "uefi64",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Arch::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown arch {s:?}"))
    }
}

/// Image ids are directory names drawn from `[A-Za-z0-9_.-]`.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'))
}
