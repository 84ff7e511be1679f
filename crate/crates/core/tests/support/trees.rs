//! Random directory trees for capture/extract checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;

/// Writes up to `max_files` files (depth <= 4, sizes 0..=64 KiB) under
/// `root` and returns relative path -> content.
pub fn random_tree<R: Rng>(rng: &mut R, root: &Path, max_files: usize) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let count = rng.gen_range(0..=max_files);
    for _ in 0..count {
        let depth = rng.gen_range(0..4);
        let mut rel = String::new();
        for _ in 0..depth {
            rel.push_str(&format!("d{}/", rng.gen_range(0..3)));
        }
        rel.push_str(&format!("f{}.bin", rng.gen_range(0..1000)));
        // a file name may collide with a directory name chosen earlier
        if files.keys().any(|k: &String| k.starts_with(&format!("{rel}/"))) {
            continue;
        }
        let size = match rng.gen_range(0..4) {
            0 => 0,
            1 => rng.gen_range(1..64),
            _ => rng.gen_range(0..=64 * 1024),
        };
        let content: Vec<u8> = if rng.gen_bool(0.5) {
            (0..size).map(|_| rng.gen()).collect()
        } else {
            (0..size).map(|i| (i % 7) as u8).collect()
        };
        let path = root.join(&rel);
        if path.parent().is_some_and(|p| p.is_file()) {
            continue;
        }
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &content).unwrap();
        files.insert(rel, content);
    }
    files
}

/// Reads a tree back as relative path -> content.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn go(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                go(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_str().unwrap().replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    go(root, root, &mut out);
    out
}
