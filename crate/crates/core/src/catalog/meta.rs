use super::Arch;

/// Contents of an image's `image.meta` sidecar: flat `key=value` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub name: String,
    pub arch: Arch,
}

impl ImageMeta {
    pub fn parse(text: &str) -> Result<ImageMeta, String> {
        let mut name = None;
        let mut arch = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "name" => &mut name,
                "arch" => &mut arch,
                other => return Err(format!("line {}: unknown key {other:?}", n + 1)),
            };
            if slot.replace(value.to_string()).is_some() {
                return Err(format!("line {}: duplicate key {key:?}", n + 1));
            }
        }
        let name = name.ok_or("missing key \"name\"")?;
        if name.is_empty() || name.contains('|') || name.chars().any(char::is_control) {
            return Err(format!("invalid display name {name:?}"));
        }
        let arch = arch.ok_or("missing key \"arch\"")?.parse()?;
        Ok(ImageMeta { name, arch })
    }

    pub fn render(&self) -> String {
        format!("name={}\narch={}\n", self.name, self.arch)
    }
}
