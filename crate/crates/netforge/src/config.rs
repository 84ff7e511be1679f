//! Flat `key=value` server configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys and
//! repeated keys are errors. Overrides from the command line are applied on
//! top of the file before validation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use netforge_core::dhcp::{LeasePool, DEFAULT_LEASE_TTL};
use netforge_core::dhcp::{BootInfo, DhcpEngine, ServiceMode, BOOT_SERVICE_PORT, DHCP_SERVER_PORT};
use netforge_core::tftp::{SessionConfig, TFTP_PORT};
use netforge_core::MacAddr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    /// `line` is 0 for problems not tied to a file line (missing file,
    /// command-line overrides).
    #[error("{}: {message}", if *.line == 0 { "config".to_string() } else { format!("line {}", .line) })]
    Parse { line: usize, message: String },
    #[error("constraint violated: {0}")]
    Constraint(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FullDhcp,
    Proxy,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::FullDhcp => "full-dhcp",
            Mode::Proxy => "proxy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub bind_address: Ipv4Addr,
    pub tftp_root: PathBuf,
    pub mode: Mode,
    pub pool_first: Option<Ipv4Addr>,
    pub pool_mask: Option<Ipv4Addr>,
    pub pool_size: Option<u32>,
    pub lease_ttl: u64,
    pub mac_allow_list: Option<Vec<MacAddr>>,
    pub log_path: Option<PathBuf>,
    pub dhcp_port: u16,
    pub boot_port: u16,
    pub tftp_port: u16,
    pub status_path: Option<PathBuf>,
    pub tftp_timeout_ms: u64,
    pub tftp_retries: u32,
}

const KEYS: &[&str] = &[
    "bind_address",
    "tftp_root",
    "mode",
    "pool_first",
    "pool_mask",
    "pool_size",
    "lease_ttl",
    "mac_allow_list",
    "log_path",
    "dhcp_port",
    "boot_port",
    "tftp_port",
    "status_path",
    "tftp_timeout_ms",
    "tftp_retries",
];

fn value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse()
        .map_err(|_| parse_err(line, format!("invalid value {raw:?} for {key}")))
}

impl ServerConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::load_with(path, &[])
    }

    /// Loads `path` and applies `key=value` overrides on top.
    pub fn load_with(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| parse_err(0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse_with(&text, overrides)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with(text, &[])
    }

    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut pairs: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (k, v) = trimmed
                .split_once('=')
                .ok_or_else(|| parse_err(line, "expected key=value"))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(parse_err(line, format!("unknown key {k:?}")));
            }
            if pairs.insert(k.to_string(), (line, v.trim().to_string())).is_some() {
                return Err(parse_err(line, format!("duplicate key {k:?}")));
            }
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| parse_err(0, format!("override {o:?} is not key=value")))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(parse_err(0, format!("unknown key {k:?} in override")));
            }
            pairs.insert(k.to_string(), (0, v.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    fn from_pairs(mut pairs: BTreeMap<String, (usize, String)>) -> Result<Self, ConfigError> {
        let mut take = |k: &str| pairs.remove(k).filter(|(_, v)| !v.is_empty());
        let required = |k: &str, v: Option<(usize, String)>| {
            v.ok_or_else(|| parse_err(0, format!("missing required key {k}")))
        };

        let (l, v) = required("bind_address", take("bind_address"))?;
        let bind_address = value(l, "bind_address", &v)?;
        let (_, v) = required("tftp_root", take("tftp_root"))?;
        let tftp_root = PathBuf::from(v);
        let (l, v) = required("mode", take("mode"))?;
        let mode = match v.as_str() {
            "full-dhcp" => Mode::FullDhcp,
            "proxy" => Mode::Proxy,
            _ => return Err(parse_err(l, format!("mode must be full-dhcp or proxy, got {v:?}"))),
        };
        let pool_first = take("pool_first")
            .map(|(l, v)| value(l, "pool_first", &v))
            .transpose()?;
        let pool_mask = take("pool_mask")
            .map(|(l, v)| value(l, "pool_mask", &v))
            .transpose()?;
        let pool_size = take("pool_size")
            .map(|(l, v)| value(l, "pool_size", &v))
            .transpose()?;
        let num = |entry: Option<(usize, String)>, key: &str, default: u64| -> Result<u64, ConfigError> {
            entry.map(|(l, v)| value(l, key, &v)).transpose().map(|o| o.unwrap_or(default))
        };
        let lease_ttl = num(take("lease_ttl"), "lease_ttl", DEFAULT_LEASE_TTL.as_secs())?;
        let mac_allow_list = take("mac_allow_list")
            .map(|(l, v)| {
                v.split(',')
                    .map(|m| value::<MacAddr>(l, "mac_allow_list", m.trim()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let log_path = take("log_path").map(|(_, v)| PathBuf::from(v));
        let status_path = take("status_path").map(|(_, v)| PathBuf::from(v));
        let port = |entry: Option<(usize, String)>, key: &str, default: u16| -> Result<u16, ConfigError> {
            entry.map(|(l, v)| value(l, key, &v)).transpose().map(|o| o.unwrap_or(default))
        };
        let dhcp_port = port(take("dhcp_port"), "dhcp_port", DHCP_SERVER_PORT)?;
        let boot_port = port(take("boot_port"), "boot_port", BOOT_SERVICE_PORT)?;
        let tftp_port = port(take("tftp_port"), "tftp_port", TFTP_PORT)?;
        let tftp_timeout_ms = num(take("tftp_timeout_ms"), "tftp_timeout_ms", 1000)?;
        let tftp_retries = num(take("tftp_retries"), "tftp_retries", 5)?;

        let config = ServerConfig {
            bind_address,
            tftp_root,
            mode,
            pool_first,
            pool_mask,
            pool_size,
            lease_ttl,
            mac_allow_list,
            log_path,
            dhcp_port,
            boot_port,
            tftp_port,
            status_path,
            tftp_timeout_ms,
            tftp_retries: u32::try_from(tftp_retries)
                .map_err(|_| parse_err(0, "tftp_retries out of range"))?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pool_fields = [
            ("pool_first", self.pool_first.is_some()),
            ("pool_mask", self.pool_mask.is_some()),
            ("pool_size", self.pool_size.is_some()),
        ];
        match self.mode {
            Mode::Proxy => {
                if let Some((k, _)) = pool_fields.iter().find(|(_, set)| *set) {
                    return Err(ConfigError::Constraint(format!("mode=proxy forbids {k}")));
                }
            }
            Mode::FullDhcp => {
                if let Some((k, _)) = pool_fields.iter().find(|(_, set)| !*set) {
                    return Err(ConfigError::Constraint(format!("mode=full-dhcp requires {k}")));
                }
                self.lease_pool()?;
            }
        }
        if self.tftp_timeout_ms == 0 {
            return Err(ConfigError::Constraint("tftp_timeout_ms must be positive".into()));
        }
        if self.tftp_retries == 0 {
            return Err(ConfigError::Constraint("tftp_retries must be positive".into()));
        }
        if self.lease_ttl == 0 {
            return Err(ConfigError::Constraint("lease_ttl must be positive".into()));
        }
        Ok(())
    }

    fn lease_pool(&self) -> Result<LeasePool, ConfigError> {
        let (Some(first), Some(mask), Some(size)) = (self.pool_first, self.pool_mask, self.pool_size)
        else {
            return Err(ConfigError::Constraint("pool fields incomplete".into()));
        };
        LeasePool::new(first, mask, size, Duration::from_secs(self.lease_ttl))
            .map_err(|e| ConfigError::Constraint(format!("address pool: {e}")))
    }

    /// Builds the DHCP engine described by this configuration.
    pub fn engine(&self) -> Result<DhcpEngine, ConfigError> {
        let mode = match self.mode {
            Mode::FullDhcp => ServiceMode::FullDhcp(self.lease_pool()?),
            Mode::Proxy => ServiceMode::ProxyDhcp,
        };
        let engine = DhcpEngine::new(mode, BootInfo::with_defaults(self.bind_address));
        Ok(match &self.mac_allow_list {
            Some(list) => engine.with_allow_list(list.iter().copied()),
            None => engine,
        })
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            timeout: Duration::from_millis(self.tftp_timeout_ms),
            retries: self.tftp_retries,
            ..SessionConfig::default()
        }
    }

    /// Renders every field; parsing the output yields an equal config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k}={v}");
        };
        put("bind_address", &self.bind_address);
        put("tftp_root", &self.tftp_root.display());
        put("mode", &self.mode.as_str());
        if let Some(v) = self.pool_first {
            put("pool_first", &v);
        }
        if let Some(v) = self.pool_mask {
            put("pool_mask", &v);
        }
        if let Some(v) = self.pool_size {
            put("pool_size", &v);
        }
        put("lease_ttl", &self.lease_ttl);
        if let Some(list) = &self.mac_allow_list {
            let joined = list.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
            put("mac_allow_list", &joined);
        }
        if let Some(p) = &self.log_path {
            put("log_path", &p.display());
        }
        put("dhcp_port", &self.dhcp_port);
        put("boot_port", &self.boot_port);
        put("tftp_port", &self.tftp_port);
        if let Some(p) = &self.status_path {
            put("status_path", &p.display());
        }
        put("tftp_timeout_ms", &self.tftp_timeout_ms);
        put("tftp_retries", &self.tftp_retries);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "bind_address=192.168.0.1\ntftp_root=/srv/tftp\nmode=full-dhcp\n\
        pool_first=192.168.0.100\npool_mask=255.255.255.0\npool_size=50\n";

    #[test]
    fn minimal_full_dhcp_defaults() {
        let c = ServerConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.lease_ttl, 3600);
        assert_eq!(c.mode, Mode::FullDhcp);
        assert_eq!((c.dhcp_port, c.boot_port, c.tftp_port), (67, 4011, 69));
        assert_eq!(ServerConfig::parse(&c.render()).unwrap(), c);
    }

    #[test]
    fn proxy_with_pool_is_constraint_error() {
        let text = "bind_address=10.0.0.1\ntftp_root=/x\nmode=proxy\npool_first=10.0.0.50\n";
        assert!(matches!(ServerConfig::parse(text), Err(ConfigError::Constraint(m)) if m.contains("pool_first")));
    }

    #[test]
    fn full_dhcp_without_pool_is_constraint_error() {
        let text = "bind_address=10.0.0.1\ntftp_root=/x\nmode=full-dhcp\npool_first=10.0.0.50\n";
        assert!(matches!(ServerConfig::parse(text), Err(ConfigError::Constraint(m)) if m.contains("pool_mask")));
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "# comment\nbind_address=10.0.0.1\nbogus=1\n";
        assert_eq!(
            ServerConfig::parse(text),
            Err(ConfigError::Parse {
                line: 3,
                message: "unknown key \"bogus\"".into()
            })
        );
    }

    #[test]
    fn bad_value_reports_line() {
        let text = "bind_address=10.0.0\n";
        assert!(matches!(ServerConfig::parse(text), Err(ConfigError::Parse { line: 1, .. })));
    }

    #[test]
    fn missing_file_is_parse_error() {
        assert!(matches!(
            ServerConfig::load(Path::new("/definitely/not/here.conf")),
            Err(ConfigError::Parse { line: 0, .. })
        ));
    }

    #[test]
    fn overrides_win() {
        let c = ServerConfig::parse_with(MINIMAL, &["pool_size=10".into(), "tftp_port=6969".into()]).unwrap();
        assert_eq!(c.pool_size, Some(10));
        assert_eq!(c.tftp_port, 6969);
        let proxy = ServerConfig::parse_with(
            MINIMAL,
            &["mode=proxy".into(), "pool_first=".into(), "pool_mask=".into(), "pool_size=".into()],
        )
        .unwrap();
        assert_eq!(proxy.mode, Mode::Proxy);
    }

    #[test]
    fn allow_list_round_trip() {
        let text = format!("{MINIMAL}mac_allow_list=02:4e:46:00:00:01, 02-4E-46-00-00-02\n");
        let c = ServerConfig::parse(&text).unwrap();
        assert_eq!(c.mac_allow_list.as_ref().unwrap().len(), 2);
        assert_eq!(ServerConfig::parse(&c.render()).unwrap(), c);
    }
}
