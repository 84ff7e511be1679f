//! Startup maintenance pass: make sure the boot artifacts exist, rebuild the
//! menu, and re-verify every image before serving.

use std::fs;
use std::path::Path;

use netforge_core::catalog::{scan_catalog, verify_image, CatalogError, MenuManifest, CATALOG_DIR, MENU_NAME};
use netforge_core::dhcp::DEFAULT_NBP_PATH;
use netforge_core::nbp;

use crate::log::{Component, Logger};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepareReport {
    /// Images listed in the menu whose payload digest re-verified.
    pub ok: usize,
    /// Image directories left out (malformed) or failing verification.
    pub skipped: usize,
    /// Menu rewrites (0 or 1).
    pub repaired: usize,
    /// Directories or bootstrap files created.
    pub created: usize,
    pub diagnostics: Vec<String>,
    pub manifest: MenuManifest,
}

impl PrepareReport {
    pub fn changes(&self) -> usize {
        self.repaired + self.created
    }
}

pub fn prepare(root: &Path, log: &Logger) -> Result<PrepareReport, CatalogError> {
    const C: Component = Component::Bnl;
    log.info(C, "Preparation/Maintenance procedures \"Start\" ***");
    let result = run(root, log);
    if let Err(e) = &result {
        log.error(C, format!("Preparation failed: {e}"));
    }
    log.info(C, "Preparation/Maintenance procedures \"End\" ***");
    result
}

fn run(root: &Path, log: &Logger) -> Result<PrepareReport, CatalogError> {
    const C: Component = Component::Bnl;
    let mut created = 0;
    let catalog = root.join(CATALOG_DIR);
    if !catalog.is_dir() {
        fs::create_dir_all(&catalog).map_err(|e| io(&catalog, e))?;
        log.info(C, format!("Created OK, {}", catalog.display()));
        created += 1;
    }

    let nbp_path = root.join(DEFAULT_NBP_PATH);
    let valid = fs::read(&nbp_path).map(|b| nbp::verify(&b)).unwrap_or(false);
    if valid {
        log.info(C, format!("Verified OK, {}", nbp_path.display()));
    } else {
        let tmp = nbp_path.with_extension("tmp");
        fs::write(&tmp, nbp::build_stub()).map_err(|e| io(&tmp, e))?;
        fs::rename(&tmp, &nbp_path).map_err(|e| io(&nbp_path, e))?;
        log.info(C, format!("Created OK, {}", nbp_path.display()));
        created += 1;
    }

    let outcome = scan_catalog(root)?;
    let mut diagnostics = Vec::new();
    let mut skipped = 0;
    for d in &outcome.diagnostics {
        let line = format!("Skipped {}/{}: {}", CATALOG_DIR, d.dir, d.message);
        log.warn(C, &line);
        diagnostics.push(line);
        skipped += 1;
    }

    let mut ok = 0;
    for entry in &outcome.manifest.entries {
        match verify_image(entry, root) {
            Ok(true) => {
                ok += 1;
                log.info(
                    C,
                    format!("Verified OK, {} ({} bytes)", entry.payload_path, entry.payload_size),
                );
            }
            Ok(false) => {
                skipped += 1;
                let line = format!("Skipped {}: payload changed during preparation", entry.payload_path);
                log.warn(C, &line);
                diagnostics.push(line);
            }
            Err(e) => {
                skipped += 1;
                let line = format!("Skipped {}: {e}", entry.payload_path);
                log.warn(C, &line);
                diagnostics.push(line);
            }
        }
    }

    let menu = catalog.join(MENU_NAME);
    let repaired = if outcome.changed {
        log.info(
            C,
            format!("Created OK, {} (v{}, {} entries)", menu.display(), outcome.manifest.version, outcome.manifest.entries.len()),
        );
        1
    } else {
        log.info(C, format!("Unchanged, {} (v{})", menu.display(), outcome.manifest.version));
        0
    };

    Ok(PrepareReport {
        ok,
        skipped,
        repaired,
        created,
        diagnostics,
        manifest: outcome.manifest,
    })
}

fn io(path: &Path, source: std::io::Error) -> CatalogError {
    CatalogError::Io {
        path: path.to_path_buf(),
        source,
    }
}
