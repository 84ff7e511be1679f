use super::{is_valid_id, Arch};
use crate::digest::Digest;

pub const MENU_HEADER: &str = "NETFORGE-MENU";

/// One deployable image as listed in the menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEntry {
    pub id: String,
    pub display_name: String,
    pub arch: Arch,
    /// Relative to the TFTP root: `WIA_WDS/<id>/install`.
    pub payload_path: String,
    pub payload_size: u64,
    pub digest: Digest,
}

impl ImageEntry {
    fn line(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}",
            self.id, self.display_name, self.arch, self.payload_path, self.payload_size, self.digest
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("menu header missing or malformed")]
    BadHeader,
    #[error("menu line {line}: {reason}")]
    BadEntry { line: usize, reason: String },
    #[error("menu entries are not sorted by id or contain duplicates")]
    Unsorted,
    #[error("catalog digest does not match the listed entries")]
    DigestMismatch,
}

/// The multi-boot menu served to clients as `WIA_WDS/menu.txt`.
///
/// ```text
/// NETFORGE-MENU v<version> <catalog digest>
/// <id>|<display name>|<arch>|<payload path>|<size>|<payload digest>
/// ```
///
/// The catalog digest is SHA-256 over the entry lines, each terminated by
/// `\n`, so it is independent of the version counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MenuManifest {
    pub version: u64,
    pub entries: Vec<ImageEntry>,
    pub catalog_digest: Digest,
}

fn entries_digest(entries: &[ImageEntry]) -> Digest {
    let mut body = String::new();
    for e in entries {
        body.push_str(&e.line());
        body.push('\n');
    }
    Digest::of(body.as_bytes())
}

impl MenuManifest {
    pub fn new(version: u64, mut entries: Vec<ImageEntry>) -> Self {
        entries.sort_by(|a, b| a.id.as_bytes().cmp(b.id.as_bytes()));
        let catalog_digest = entries_digest(&entries);
        MenuManifest {
            version,
            entries,
            catalog_digest,
        }
    }

    pub fn empty() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn entry(&self, id: &str) -> Option<&ImageEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn entry_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.entries.iter().map(ImageEntry::line)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{MENU_HEADER} v{} {}\n", self.version, self.catalog_digest);
        for line in self.entry_lines() {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Reads just the version from a header line, for files whose body is damaged.
    pub fn peek_version(text: &str) -> Option<u64> {
        let header = text.lines().next()?;
        let mut parts = header.split(' ');
        (parts.next()? == MENU_HEADER).then_some(())?;
        parts.next()?.strip_prefix('v')?.parse().ok()
    }

    pub fn parse(text: &str) -> Result<MenuManifest, ManifestError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(ManifestError::BadHeader)?;
        let parts: Vec<&str> = header.split(' ').collect();
        let [tag, version, digest] = parts.as_slice() else {
            return Err(ManifestError::BadHeader);
        };
        if *tag != MENU_HEADER {
            return Err(ManifestError::BadHeader);
        }
        let version = version
            .strip_prefix('v')
            .and_then(|v| v.parse().ok())
            .ok_or(ManifestError::BadHeader)?;
        let catalog_digest: Digest = digest.parse().map_err(|_| ManifestError::BadHeader)?;

        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let bad = |reason: &str| ManifestError::BadEntry {
                line: n,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split('|').collect();
            let [id, name, arch, path, size, digest] = fields.as_slice() else {
                return Err(bad("expected 6 fields"));
            };
            if !is_valid_id(id) {
                return Err(bad("invalid id"));
            }
            entries.push(ImageEntry {
                id: id.to_string(),
                display_name: name.to_string(),
                arch: arch.parse().map_err(|e: String| bad(&e))?,
                payload_path: path.to_string(),
                payload_size: size.parse().map_err(|_| bad("invalid size"))?,
                digest: digest.parse().map_err(|_| bad("invalid digest"))?,
            });
        }
        if entries
            .windows(2)
            .any(|w| w[0].id.as_bytes() >= w[1].id.as_bytes())
        {
            return Err(ManifestError::Unsorted);
        }
        if entries_digest(&entries) != catalog_digest {
            return Err(ManifestError::DigestMismatch);
        }
        Ok(MenuManifest {
            version,
            entries,
            catalog_digest,
        })
    }
}
