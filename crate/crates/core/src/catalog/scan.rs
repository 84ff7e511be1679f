use std::fs;
use std::io;
use std::path::Path;

use super::{
    is_valid_id, CatalogError, ImageEntry, ImageMeta, MenuManifest, CATALOG_DIR, MENU_NAME,
    META_NAME, PAYLOAD_NAME,
};
use crate::digest::Digest;

/// Why an image directory was left out of the menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub dir: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOutcome {
    pub manifest: MenuManifest,
    pub diagnostics: Vec<Diagnostic>,
    /// True when `menu.txt` was (re)written by this scan.
    pub changed: bool,
}

fn inspect(dir: &Path, id: &str) -> Result<ImageEntry, String> {
    if !is_valid_id(id) {
        return Err(format!("invalid image id {id:?}"));
    }
    let payload = dir.join(PAYLOAD_NAME);
    if !payload.is_file() {
        let misnamed = fs::read_dir(dir)
            .map_err(|e| format!("unreadable: {e}"))?
            .filter_map(Result::ok)
            .any(|e| {
                let name = e.file_name().to_string_lossy().to_ascii_lowercase();
                name.starts_with("install.") || name == "install"
            });
        return Err(if misnamed {
            "payload must be named install".into()
        } else {
            "missing install payload".into()
        });
    }
    let meta_path = dir.join(META_NAME);
    let meta_text = match fs::read_to_string(&meta_path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err("missing image.meta".into()),
        Err(e) => return Err(format!("image.meta unreadable: {e}")),
    };
    let meta = ImageMeta::parse(&meta_text).map_err(|e| format!("image.meta: {e}"))?;
    let file = fs::File::open(&payload).map_err(|e| format!("payload unreadable: {e}"))?;
    let size = file
        .metadata()
        .map_err(|e| format!("payload unreadable: {e}"))?
        .len();
    let digest = Digest::of_reader(io::BufReader::new(file))
        .map_err(|e| format!("payload unreadable: {e}"))?;
    Ok(ImageEntry {
        id: id.to_string(),
        display_name: meta.name,
        arch: meta.arch,
        payload_path: format!("{CATALOG_DIR}/{id}/{PAYLOAD_NAME}"),
        payload_size: size,
        digest,
    })
}

/// Builds the menu from `<root>/WIA_WDS/*` and refreshes `menu.txt`.
///
/// Malformed image directories are skipped with a diagnostic. The menu file
/// is rewritten (atomically, with the version bumped) only when its entries
/// differ from what is on disk, so scanning an unchanged tree is a no-op.
pub fn scan_catalog(root: &Path) -> Result<ScanOutcome, CatalogError> {
    let catalog = root.join(CATALOG_DIR);
    if !catalog.is_dir() {
        return Ok(ScanOutcome {
            manifest: MenuManifest::empty(),
            diagnostics: Vec::new(),
            changed: false,
        });
    }
    let mut dirs: Vec<(String, std::path::PathBuf)> = Vec::new();
    for item in fs::read_dir(&catalog).map_err(|e| CatalogError::io(&catalog, e))? {
        let item = item.map_err(|e| CatalogError::io(&catalog, e))?;
        if item.file_type().map(|t| t.is_dir()).unwrap_or(false) {
            dirs.push((item.file_name().to_string_lossy().into_owned(), item.path()));
        }
    }
    dirs.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));

    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    for (id, path) in dirs {
        match inspect(&path, &id) {
            Ok(entry) => entries.push(entry),
            Err(message) => diagnostics.push(Diagnostic { dir: id, message }),
        }
    }

    let menu_path = catalog.join(MENU_NAME);
    let previous = fs::read_to_string(&menu_path).ok();
    let fresh = MenuManifest::new(0, entries);
    if let Some(old) = previous.as_deref().and_then(|t| MenuManifest::parse(t).ok()) {
        if old.entries == fresh.entries && old.render() == previous.as_deref().unwrap_or_default() {
            return Ok(ScanOutcome {
                manifest: old,
                diagnostics,
                changed: false,
            });
        }
    }
    let old_version = previous
        .as_deref()
        .and_then(MenuManifest::peek_version)
        .unwrap_or(0);
    let manifest = MenuManifest {
        version: old_version + 1,
        ..fresh
    };
    let tmp = catalog.join(format!(".{MENU_NAME}.tmp"));
    fs::write(&tmp, manifest.render()).map_err(|e| CatalogError::io(&tmp, e))?;
    fs::rename(&tmp, &menu_path).map_err(|e| CatalogError::io(&menu_path, e))?;
    Ok(ScanOutcome {
        manifest,
        diagnostics,
        changed: true,
    })
}

/// Recomputes the payload digest and compares it with the entry.
pub fn verify_image(entry: &ImageEntry, root: &Path) -> Result<bool, CatalogError> {
    let path = root.join(&entry.payload_path);
    let file = match fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(CatalogError::FileVanished(path))
        }
        Err(e) => return Err(CatalogError::io(&path, e)),
    };
    let digest = Digest::of_reader(io::BufReader::new(file)).map_err(|e| CatalogError::io(&path, e))?;
    Ok(digest == entry.digest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Arch;

    fn add_image(root: &Path, id: &str, payload_name: &str, meta: Option<&str>, bytes: &[u8]) {
        let dir = root.join(CATALOG_DIR).join(id);
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join(payload_name), bytes).unwrap();
        if let Some(m) = meta {
            fs::write(dir.join(META_NAME), m).unwrap();
        }
    }

    #[test]
    fn two_images_sorted() {
        let root = tempfile::tempdir().unwrap();
        add_image(root.path(), "WIN10_LAB_B", "install", Some("name=Lab B\narch=uefi64\n"), b"bbb");
        add_image(root.path(), "WIN10_LAB_A", "install", Some("name=Lab A\narch=bios32\n"), b"aa");
        let out = scan_catalog(root.path()).unwrap();
        assert!(out.diagnostics.is_empty());
        assert!(out.changed);
        let ids: Vec<&str> = out.manifest.entries.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["WIN10_LAB_A", "WIN10_LAB_B"]);
        let a = &out.manifest.entries[0];
        assert_eq!(a.arch, Arch::Bios32);
        assert_eq!(a.payload_path, "WIA_WDS/WIN10_LAB_A/install");
        assert_eq!(a.payload_size, 2);
        assert_eq!(a.digest, Digest::of(b"aa"));
        let on_disk = fs::read_to_string(root.path().join("WIA_WDS/menu.txt")).unwrap();
        assert_eq!(on_disk, out.manifest.render());
        assert_eq!(out.manifest.version, 1);
    }

    #[test]
    fn absent_catalog_is_empty() {
        let root = tempfile::tempdir().unwrap();
        let out = scan_catalog(root.path()).unwrap();
        assert!(out.manifest.entries.is_empty());
        assert!(!out.changed);
        assert!(!root.path().join(CATALOG_DIR).exists());
    }

    #[test]
    fn misnamed_and_missing_payloads() {
        let root = tempfile::tempdir().unwrap();
        add_image(root.path(), "GOOD", "install", Some("name=Good\narch=bios64\n"), b"x");
        add_image(root.path(), "WIM", "install.wim", Some("name=W\narch=bios64\n"), b"x");
        fs::create_dir_all(root.path().join("WIA_WDS/EMPTY")).unwrap();
        fs::write(root.path().join("WIA_WDS/EMPTY/image.meta"), "name=E\narch=bios64\n").unwrap();
        add_image(root.path(), "NOMETA", "install", None, b"x");
        let out = scan_catalog(root.path()).unwrap();
        assert_eq!(out.manifest.entries.len(), 1);
        let diags: Vec<(&str, &str)> = out
            .diagnostics
            .iter()
            .map(|d| (d.dir.as_str(), d.message.as_str()))
            .collect();
        assert_eq!(
            diags,
            vec![
                ("EMPTY", "missing install payload"),
                ("NOMETA", "missing image.meta"),
                ("WIM", "payload must be named install"),
            ]
        );
    }

    #[test]
    fn rescan_unchanged_is_noop_and_change_bumps_version() {
        let root = tempfile::tempdir().unwrap();
        add_image(root.path(), "A", "install", Some("name=A\narch=bios64\n"), b"1");
        let first = scan_catalog(root.path()).unwrap();
        let bytes = fs::read(root.path().join("WIA_WDS/menu.txt")).unwrap();
        let second = scan_catalog(root.path()).unwrap();
        assert!(!second.changed);
        assert_eq!(second.manifest, first.manifest);
        assert_eq!(fs::read(root.path().join("WIA_WDS/menu.txt")).unwrap(), bytes);

        add_image(root.path(), "B", "install", Some("name=B\narch=bios64\n"), b"2");
        let third = scan_catalog(root.path()).unwrap();
        assert!(third.changed);
        assert_eq!(third.manifest.version, 2);
        assert_ne!(third.manifest.catalog_digest, first.manifest.catalog_digest);
    }

    #[test]
    fn damaged_menu_is_repaired() {
        let root = tempfile::tempdir().unwrap();
        add_image(root.path(), "A", "install", Some("name=A\narch=bios64\n"), b"1");
        scan_catalog(root.path()).unwrap();
        let menu = root.path().join("WIA_WDS/menu.txt");
        let text = fs::read_to_string(&menu).unwrap();
        fs::write(&menu, text.replace("|1|", "|9|")).unwrap();
        let out = scan_catalog(root.path()).unwrap();
        assert!(out.changed);
        assert_eq!(out.manifest.version, 2);
        assert_eq!(fs::read_to_string(&menu).unwrap(), out.manifest.render());
    }

    #[test]
    fn verify_detects_changes() {
        let root = tempfile::tempdir().unwrap();
        add_image(root.path(), "A", "install", Some("name=A\narch=bios64\n"), b"payload");
        let entry = scan_catalog(root.path()).unwrap().manifest.entries[0].clone();
        assert!(verify_image(&entry, root.path()).unwrap());
        let p = root.path().join("WIA_WDS/A/install");
        fs::write(&p, b"payloa").unwrap();
        assert!(!verify_image(&entry, root.path()).unwrap());
        fs::remove_file(&p).unwrap();
        assert!(matches!(
            verify_image(&entry, root.path()),
            Err(CatalogError::FileVanished(_))
        ));
    }
}
