#![allow(dead_code)]

pub mod stub_dhcp;

use std::fs;
use std::net::Ipv4Addr;
use std::path::Path;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{RngCore, SeedableRng};

use netforge::{BoundPorts, ClientConfig, Mode, ServerConfig};

pub const MIB: usize = 1024 * 1024;

pub fn seeded_bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    StdRng::seed_from_u64(seed).fill_bytes(&mut out);
    out
}

/// Writes `<root>/WIA_WDS/<id>/{install,image.meta}`.
pub fn add_image(root: &Path, id: &str, name: &str, payload: &[u8]) {
    let dir = root.join("WIA_WDS").join(id);
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("install"), payload).unwrap();
    fs::write(dir.join("image.meta"), format!("name={name}\narch=uefi64\n")).unwrap();
}

/// Server config on loopback with ephemeral ports.
pub fn server_config(root: &Path, mode: Mode) -> ServerConfig {
    let mut text = format!(
        "bind_address=127.0.0.1\ntftp_root={}\nmode={}\ndhcp_port=0\nboot_port=0\ntftp_port=0\n",
        root.display(),
        mode.as_str()
    );
    if mode == Mode::FullDhcp {
        text.push_str("pool_first=192.168.0.100\npool_mask=255.255.255.0\npool_size=50\n");
    }
    ServerConfig::parse(&text).unwrap()
}

/// Client config aimed at a server started with [`server_config`].
pub fn client_config(ports: BoundPorts) -> ClientConfig {
    let mut cfg = ClientConfig::new(Ipv4Addr::LOCALHOST);
    cfg.dhcp_servers = ports
        .dhcp
        .map(|p| (Ipv4Addr::LOCALHOST, p).into())
        .into_iter()
        .collect();
    cfg.boot_port = ports.boot;
    cfg.tftp_port = ports.tftp;
    cfg
}

/// Same as [`client_config`] with a short offer window for quick tests.
pub fn quick_client_config(ports: BoundPorts) -> ClientConfig {
    let mut cfg = client_config(ports);
    cfg.offer_window = Duration::from_millis(300);
    cfg
}
