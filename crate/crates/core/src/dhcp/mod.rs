//! DHCP / proxyDHCP decision logic and the port-4011 boot-service answer.
//!
//! [`DhcpEngine`] is a deterministic state machine: every call takes the
//! request frame and an explicit `now`, and returns the reply to send (if
//! any). Network listeners serialize their events into one engine.

mod lease;

use std::collections::BTreeSet;
use std::net::Ipv4Addr;
use std::path::{Component, Path};

pub use lease::{Lease, LeasePool, PoolError, DEFAULT_LEASE_TTL};

use crate::clock::Timestamp;
use crate::digest::Digest;
use crate::mac::MacAddr;
use crate::wire::dhcp::{code, DhcpFrame, DhcpOption, MessageType, OP_REQUEST, PXE_VENDOR_CLASS};

pub const DHCP_SERVER_PORT: u16 = 67;
pub const DHCP_CLIENT_PORT: u16 = 68;
pub const BOOT_SERVICE_PORT: u16 = 4011;

pub const DEFAULT_NBP_PATH: &str = "WIA_WDS/nbp.bin";
pub const DEFAULT_MENU_PATH: &str = "WIA_WDS/menu.txt";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DhcpError {
    #[error("address pool exhausted")]
    PoolExhausted,
    #[error("request carries no PXEClient vendor class")]
    NotPxe,
    #[error("client {0} is not on the allow list")]
    NotAllowed(MacAddr),
    #[error("malformed request: {0}")]
    Malformed(&'static str),
    #[error("invalid boot path {0:?}: must be relative and stay inside the TFTP root")]
    BadBootPath(String),
}

/// Where booting clients find the server, the bootstrap program and the menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootInfo {
    pub server_address: Ipv4Addr,
    pub nbp_path: String,
    pub menu_path: String,
}

impl BootInfo {
    pub fn new(
        server_address: Ipv4Addr,
        nbp_path: impl Into<String>,
        menu_path: impl Into<String>,
    ) -> Result<Self, DhcpError> {
        let nbp_path = nbp_path.into();
        let menu_path = menu_path.into();
        for p in [&nbp_path, &menu_path] {
            if !is_confined(p) {
                return Err(DhcpError::BadBootPath(p.clone()));
            }
        }
        Ok(BootInfo {
            server_address,
            nbp_path,
            menu_path,
        })
    }

    pub fn with_defaults(server_address: Ipv4Addr) -> Self {
        BootInfo {
            server_address,
            nbp_path: DEFAULT_NBP_PATH.into(),
            menu_path: DEFAULT_MENU_PATH.into(),
        }
    }
}

fn is_confined(path: &str) -> bool {
    !path.is_empty()
        && !path.contains('\\')
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

#[derive(Debug, Clone)]
pub enum ServiceMode {
    FullDhcp(LeasePool),
    ProxyDhcp,
}

impl ServiceMode {
    pub fn name(&self) -> &'static str {
        match self {
            ServiceMode::FullDhcp(_) => "full-dhcp",
            ServiceMode::ProxyDhcp => "proxy",
        }
    }
}

/// Value of the menu vendor option: `menu_path;hex-digest`.
pub fn menu_option_value(menu_path: &str, catalog_digest: &Digest) -> String {
    format!("{menu_path};{}", catalog_digest.to_hex())
}

pub fn parse_menu_option(payload: &[u8]) -> Option<(String, Digest)> {
    let text = std::str::from_utf8(payload).ok()?;
    let (path, digest) = text.rsplit_once(';')?;
    Some((path.to_string(), digest.parse().ok()?))
}

#[derive(Debug, Clone)]
pub struct DhcpEngine {
    mode: ServiceMode,
    boot: BootInfo,
    allow_list: Option<BTreeSet<MacAddr>>,
}

impl DhcpEngine {
    pub fn new(mode: ServiceMode, boot: BootInfo) -> Self {
        DhcpEngine {
            mode,
            boot,
            allow_list: None,
        }
    }

    pub fn with_allow_list(mut self, macs: impl IntoIterator<Item = MacAddr>) -> Self {
        self.allow_list = Some(macs.into_iter().collect());
        self
    }

    pub fn mode(&self) -> &ServiceMode {
        &self.mode
    }

    pub fn boot(&self) -> &BootInfo {
        &self.boot
    }

    pub fn pool(&self) -> Option<&LeasePool> {
        match &self.mode {
            ServiceMode::FullDhcp(pool) => Some(pool),
            ServiceMode::ProxyDhcp => None,
        }
    }

    fn check_allowed(&self, frame: &DhcpFrame) -> Result<(), DhcpError> {
        match (&self.allow_list, frame.mac()) {
            (None, _) => Ok(()),
            (Some(list), Some(mac)) if list.contains(&mac) => Ok(()),
            (Some(_), Some(mac)) => Err(DhcpError::NotAllowed(mac)),
            (Some(_), None) => Err(DhcpError::Malformed("no Ethernet hardware address")),
        }
    }

    /// Routes a frame received on the DHCP port by its message type.
    /// Types other than DISCOVER and REQUEST are ignored.
    pub fn handle(&mut self, frame: &DhcpFrame, now: Timestamp) -> Result<Option<DhcpFrame>, DhcpError> {
        if frame.op != OP_REQUEST {
            return Ok(None);
        }
        match frame.message_type() {
            Some(MessageType::Discover) => self.handle_discover(frame, now),
            Some(MessageType::Request) => self.handle_request(frame, now),
            _ => Ok(None),
        }
    }

    fn base_reply(&self, request: &DhcpFrame, kind: MessageType) -> DhcpFrame {
        let mut reply = DhcpFrame::reply_to(request);
        reply.options.push(DhcpOption::message_type(kind));
        reply
            .options
            .push(DhcpOption::address(code::SERVER_ID, self.boot.server_address));
        reply
    }

    fn add_boot_fields(&self, reply: &mut DhcpFrame) {
        reply.siaddr = self.boot.server_address;
        // BootInfo paths are validated ASCII well below 128 bytes in practice;
        // an oversized path leaves the field empty rather than truncating.
        let _ = reply.set_file_name(&self.boot.nbp_path);
        reply
            .options
            .push(DhcpOption::new(code::VENDOR_CLASS, PXE_VENDOR_CLASS));
    }

    fn add_lease_fields(&self, reply: &mut DhcpFrame, pool: &LeasePool) {
        reply
            .options
            .push(DhcpOption::address(code::SUBNET_MASK, pool.subnet_mask()));
        let ttl = pool.lease_ttl().as_secs().min(u32::MAX as u64) as u32;
        reply
            .options
            .push(DhcpOption::new(code::LEASE_TIME, ttl.to_be_bytes()));
    }

    pub fn handle_discover(&mut self, frame: &DhcpFrame, now: Timestamp) -> Result<Option<DhcpFrame>, DhcpError> {
        if frame.op != OP_REQUEST || frame.message_type() != Some(MessageType::Discover) {
            return Err(DhcpError::Malformed("not a DISCOVER"));
        }
        self.check_allowed(frame)?;
        let pxe = frame.is_pxe();
        match &mut self.mode {
            ServiceMode::FullDhcp(pool) => {
                let mac = frame
                    .mac()
                    .ok_or(DhcpError::Malformed("no Ethernet hardware address"))?;
                let address = pool.allocate(mac, now).map_err(|_| DhcpError::PoolExhausted)?;
                let pool = pool.clone();
                let mut offer = self.base_reply(frame, MessageType::Offer);
                offer.yiaddr = address;
                self.add_lease_fields(&mut offer, &pool);
                if pxe {
                    self.add_boot_fields(&mut offer);
                }
                Ok(Some(offer))
            }
            ServiceMode::ProxyDhcp => {
                if !pxe {
                    return Ok(None);
                }
                let mut offer = self.base_reply(frame, MessageType::Offer);
                self.add_boot_fields(&mut offer);
                Ok(Some(offer))
            }
        }
    }

    pub fn handle_request(&mut self, frame: &DhcpFrame, now: Timestamp) -> Result<Option<DhcpFrame>, DhcpError> {
        if frame.op != OP_REQUEST || frame.message_type() != Some(MessageType::Request) {
            return Err(DhcpError::Malformed("not a REQUEST"));
        }
        let ServiceMode::FullDhcp(pool) = &mut self.mode else {
            return Ok(None);
        };
        // The client picked a different server's offer.
        if let Some(server) = frame.address_option(code::SERVER_ID) {
            if server != self.boot.server_address {
                return Ok(None);
            }
        }
        if let Some(list) = &self.allow_list {
            match frame.mac() {
                Some(mac) if list.contains(&mac) => {}
                Some(mac) => return Err(DhcpError::NotAllowed(mac)),
                None => return Err(DhcpError::Malformed("no Ethernet hardware address")),
            }
        }
        let mac = frame
            .mac()
            .ok_or(DhcpError::Malformed("no Ethernet hardware address"))?;
        let requested = frame
            .address_option(code::REQUESTED_ADDRESS)
            .unwrap_or(frame.ciaddr);
        if !pool.confirm(mac, requested, now) {
            return Ok(Some(self.base_reply(frame, MessageType::Nak)));
        }
        let pool = pool.clone();
        let mut ack = self.base_reply(frame, MessageType::Ack);
        ack.yiaddr = requested;
        ack.ciaddr = frame.ciaddr;
        self.add_lease_fields(&mut ack, &pool);
        if frame.is_pxe() {
            self.add_boot_fields(&mut ack);
        }
        Ok(Some(ack))
    }

    /// Answers a PXE REQUEST on the boot-service port with the bootstrap
    /// location plus the menu path and catalog digest.
    pub fn handle_boot_service(&self, frame: &DhcpFrame, catalog_digest: &Digest) -> Result<DhcpFrame, DhcpError> {
        if !frame.is_pxe() {
            return Err(DhcpError::NotPxe);
        }
        if frame.op != OP_REQUEST || frame.message_type() != Some(MessageType::Request) {
            return Err(DhcpError::Malformed("boot service expects a REQUEST"));
        }
        self.check_allowed(frame)?;
        let mut ack = self.base_reply(frame, MessageType::Ack);
        ack.ciaddr = frame.ciaddr;
        self.add_boot_fields(&mut ack);
        ack.options.push(DhcpOption::new(
            code::MENU_INFO,
            menu_option_value(&self.boot.menu_path, catalog_digest).into_bytes(),
        ));
        Ok(ack)
    }

    /// Sweeps expired bindings; always 0 in proxy mode.
    pub fn expire_leases(&mut self, now: Timestamp) -> usize {
        match &mut self.mode {
            ServiceMode::FullDhcp(pool) => pool.expire(now),
            ServiceMode::ProxyDhcp => 0,
        }
    }
}

#[cfg(test)]
mod tests;
