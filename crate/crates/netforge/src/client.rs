//! Scripted PXE client: DISCOVER, OFFER collection, REQUEST, boot-service
//! query, then TFTP downloads of the bootstrap, the menu and one image,
//! finishing with a digest check of the image.

use std::collections::HashSet;
use std::fmt;
use std::io;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::str::FromStr;
use std::time::{Duration, Instant};

use netforge_core::catalog::MenuManifest;
use netforge_core::dhcp::{parse_menu_option, BootInfo, BOOT_SERVICE_PORT, DHCP_SERVER_PORT};
use netforge_core::netsim::{FaultPlan, FaultRecord, FaultStats};
use netforge_core::tftp::{ReceiverStep, TftpReceiver, TFTP_PORT};
use netforge_core::wire::dhcp::{
    code, decode_dhcp, encode_dhcp, DhcpFrame, DhcpOption, MessageType, OP_REPLY, PXE_VENDOR_CLASS,
};
use netforge_core::wire::tftp::{decode_tftp, encode_tftp, error_code, TftpPacket, DEFAULT_BLOCK_SIZE};
use netforge_core::{nbp, Digest, MacAddr};

use crate::log::{Component, Logger};
use crate::transport::FaultySocket;

/// Vendor class a PXE ROM sends: `PXEClient:Arch:00000:UNDI:002001`.
const VENDOR_CLASS: &[u8] = b"PXEClient:Arch:00000:UNDI:002001";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientConfig {
    /// Every DHCP responder the DISCOVER is sent to.
    pub dhcp_servers: Vec<SocketAddr>,
    pub boot_port: u16,
    pub tftp_port: u16,
    pub bind_address: Ipv4Addr,
    pub offer_window: Duration,
    pub discover_attempts: u32,
    /// Wait per attempt for an ACK to REQUEST or to the boot-service query.
    pub reply_timeout: Duration,
    pub request_attempts: u32,
    /// Block size asked for in read requests.
    pub block_size: usize,
    /// Silence after which the client repeats its last TFTP packet.
    pub tftp_timeout: Duration,
    pub tftp_retries: u32,
}

impl ClientConfig {
    pub fn new(server: Ipv4Addr) -> Self {
        ClientConfig {
            dhcp_servers: vec![SocketAddr::V4(SocketAddrV4::new(server, DHCP_SERVER_PORT))],
            boot_port: BOOT_SERVICE_PORT,
            tftp_port: TFTP_PORT,
            bind_address: Ipv4Addr::LOCALHOST,
            offer_window: Duration::from_secs(2),
            discover_attempts: 8,
            reply_timeout: Duration::from_millis(500),
            request_attempts: 8,
            block_size: 1428,
            tftp_timeout: Duration::from_millis(500),
            tftp_retries: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    First,
    Id(String),
}

impl FromStr for Selection {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(if s == "first" {
            Selection::First
        } else {
            Selection::Id(s.to_string())
        })
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::First => f.write_str("first"),
            Selection::Id(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientPhase {
    Init,
    Discovering,
    /// `deadline` is the end of the first offer window, relative to start.
    AwaitingOffers { deadline: Duration },
    Requesting,
    Bound { address: Ipv4Addr },
    BootInfoAcquired { boot: BootInfo },
    DownloadingNbp,
    MenuLoaded { manifest: MenuManifest },
    DownloadingImage { id: String },
    Verified { digest: Digest },
    Failed { reason: String },
}

impl ClientPhase {
    /// Position in the boot sequence; `Failed` sorts last.
    pub fn rank(&self) -> u8 {
        match self {
            ClientPhase::Init => 0,
            ClientPhase::Discovering => 1,
            ClientPhase::AwaitingOffers { .. } => 2,
            ClientPhase::Requesting => 3,
            ClientPhase::Bound { .. } => 4,
            ClientPhase::BootInfoAcquired { .. } => 5,
            ClientPhase::DownloadingNbp => 6,
            ClientPhase::MenuLoaded { .. } => 7,
            ClientPhase::DownloadingImage { .. } => 8,
            ClientPhase::Verified { .. } => 9,
            ClientPhase::Failed { .. } => 10,
        }
    }
}

impl fmt::Display for ClientPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClientPhase::Init => f.write_str("Init"),
            ClientPhase::Discovering => f.write_str("Discovering"),
            ClientPhase::AwaitingOffers { deadline } => write!(f, "AwaitingOffers until +{}ms", deadline.as_millis()),
            ClientPhase::Requesting => f.write_str("Requesting"),
            ClientPhase::Bound { address } => write!(f, "Bound {address}"),
            ClientPhase::BootInfoAcquired { boot } => write!(
                f,
                "BootInfoAcquired server {} nbp {} menu {}",
                boot.server_address, boot.nbp_path, boot.menu_path
            ),
            ClientPhase::DownloadingNbp => f.write_str("DownloadingNbp"),
            ClientPhase::MenuLoaded { manifest } => {
                write!(f, "MenuLoaded v{} with {} image(s)", manifest.version, manifest.entries.len())
            }
            ClientPhase::DownloadingImage { id } => write!(f, "DownloadingImage {id}"),
            ClientPhase::Verified { digest } => write!(f, "Verified {digest}"),
            ClientPhase::Failed { reason } => write!(f, "Failed: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("no usable DHCP offer")]
    NoOffer,
    #[error("no offer carried boot information")]
    NoBootInfo,
    #[error("server refused address {0}")]
    Nak(Ipv4Addr),
    #[error("menu unavailable: {0}")]
    MenuMissing(String),
    #[error("image {0:?} is not in the menu")]
    UnknownSelection(String),
    #[error("digest mismatch: expected {expected}, got {actual}")]
    DigestMismatch { expected: Digest, actual: Digest },
    #[error("bootstrap program rejected: {0}")]
    NbpRejected(String),
    #[error("transfer timed out: {0}")]
    TransferTimeout(String),
    #[error("TFTP error {code} for {file}: {message}")]
    Tftp { file: String, code: u16, message: String },
    #[error("socket error: {0}")]
    Io(String),
}

impl From<io::Error> for ClientError {
    fn from(e: io::Error) -> Self {
        ClientError::Io(e.to_string())
    }
}

/// One OFFER as received, kept for post-run assertions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OfferRecord {
    pub from: SocketAddr,
    pub yiaddr: Ipv4Addr,
    pub siaddr: Ipv4Addr,
    pub server_id: Option<Ipv4Addr>,
    pub file: String,
    pub pxe: bool,
}

impl OfferRecord {
    pub fn has_boot_fields(&self) -> bool {
        self.pxe && !self.siaddr.is_unspecified() && !self.file.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ClientReport {
    pub mac: MacAddr,
    pub selection: Selection,
    /// Phase log with times relative to the client's start. `Failed` is not
    /// logged here; see [`ClientReport::final_phase`].
    pub phases: Vec<(Duration, ClientPhase)>,
    pub bytes_downloaded: u64,
    pub final_digest: Option<Digest>,
    pub outcome: Result<(), ClientError>,
    pub lease: Option<Ipv4Addr>,
    pub image: Option<String>,
    pub offers: Vec<OfferRecord>,
    /// Requests and acknowledgements the client had to repeat.
    pub retransmissions: u64,
    pub faults: FaultStats,
    pub fault_log: Vec<FaultRecord>,
    pub elapsed: Duration,
}

impl ClientReport {
    pub fn is_success(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn final_phase(&self) -> ClientPhase {
        match &self.outcome {
            Err(e) => ClientPhase::Failed { reason: e.to_string() },
            Ok(()) => self.phases.last().map(|(_, p)| p.clone()).unwrap_or(ClientPhase::Init),
        }
    }

    /// True when the phase log is strictly increasing in sequence order.
    pub fn phases_monotonic(&self) -> bool {
        self.phases.windows(2).all(|w| w[0].1.rank() < w[1].1.rank())
    }

    /// One-line summary used by the CLI.
    pub fn summary(&self) -> String {
        match &self.outcome {
            Ok(()) => format!(
                "OK   {} lease={} image={} bytes={} digest={}",
                self.mac,
                self.lease.map_or("-".into(), |a| a.to_string()),
                self.image.as_deref().unwrap_or("-"),
                self.bytes_downloaded,
                self.final_digest.map_or("-".into(), |d| d.to_hex()),
            ),
            Err(e) => format!("FAIL {} phase={} error={e}", self.mac, self.final_phase_name()),
        }
    }

    fn final_phase_name(&self) -> String {
        self.phases.last().map_or("Init".into(), |(_, p)| {
            p.to_string().split_whitespace().next().unwrap_or("Init").to_string()
        })
    }
}

enum Fetch {
    Done(TftpReceiver),
    Failed(ClientError),
}

struct Client<'a> {
    mac: MacAddr,
    cfg: &'a ClientConfig,
    log: &'a Logger,
    sock: FaultySocket,
    started: Instant,
    deadline: Instant,
    xid: u32,
    phases: Vec<(Duration, ClientPhase)>,
    offers: Vec<OfferRecord>,
    retransmissions: u64,
    bytes: u64,
    lease: Option<Ipv4Addr>,
    image: Option<String>,
    final_digest: Option<Digest>,
    retired_tids: HashSet<SocketAddr>,
}

fn stream_of(mac: MacAddr) -> u64 {
    mac.0.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b))
}

fn xid_of(mac: MacAddr) -> u32 {
    let m = mac.0;
    u32::from_be_bytes([m[2] ^ 0x5a, m[3], m[4], m[5]]).wrapping_mul(0x0100_0193) ^ 0x4e46_0000
}

/// Runs the full boot sequence for one machine and reports what happened.
/// Never panics on protocol trouble; failures land in `outcome`.
pub fn run_client(
    mac: MacAddr,
    selection: &Selection,
    plan: FaultPlan,
    deadline: Duration,
    cfg: &ClientConfig,
    log: &Logger,
) -> ClientReport {
    let started = Instant::now();
    let socket = match UdpSocket::bind((cfg.bind_address, 0)) {
        Ok(s) => s,
        Err(e) => {
            log.error(Component::Sim, format!("{mac} cannot open a socket: {e}"));
            return ClientReport {
                mac,
                selection: selection.clone(),
                phases: vec![(Duration::ZERO, ClientPhase::Init)],
                bytes_downloaded: 0,
                final_digest: None,
                outcome: Err(e.into()),
                lease: None,
                image: None,
                offers: Vec::new(),
                retransmissions: 0,
                faults: FaultStats::default(),
                fault_log: Vec::new(),
                elapsed: started.elapsed(),
            };
        }
    };
    let mut client = Client {
        mac,
        cfg,
        log,
        sock: FaultySocket::new(socket, plan, stream_of(mac)),
        started,
        deadline: started + deadline,
        xid: xid_of(mac),
        phases: Vec::new(),
        offers: Vec::new(),
        retransmissions: 0,
        bytes: 0,
        lease: None,
        image: None,
        final_digest: None,
        retired_tids: HashSet::new(),
    };
    let outcome = client.run(selection);
    match &outcome {
        Ok(()) => log.info(
            Component::Sim,
            format!(
                "{mac} boot sequence complete in {} ms, {} retransmission(s)",
                started.elapsed().as_millis(),
                client.retransmissions
            ),
        ),
        Err(e) => log.error(Component::Sim, format!("{mac} failed: {e}")),
    }
    ClientReport {
        mac,
        selection: selection.clone(),
        phases: client.phases,
        bytes_downloaded: client.bytes,
        final_digest: client.final_digest,
        outcome,
        lease: client.lease,
        image: client.image,
        offers: client.offers,
        retransmissions: client.retransmissions,
        faults: client.sock.stats(),
        fault_log: client.sock.fault_log().to_vec(),
        elapsed: started.elapsed(),
    }
}

impl Client<'_> {
    fn enter(&mut self, phase: ClientPhase) {
        self.log.info(Component::Sim, format!("{} {phase}", self.mac));
        self.phases.push((self.started.elapsed(), phase));
    }

    fn remaining(&self) -> Duration {
        self.deadline.saturating_duration_since(Instant::now())
    }

    fn run(&mut self, selection: &Selection) -> Result<(), ClientError> {
        self.enter(ClientPhase::Init);
        let (address_offer, boot_offer) = self.discover()?;

        self.enter(ClientPhase::Requesting);
        let address = self.request(&address_offer)?;
        self.lease = Some(address);
        self.enter(ClientPhase::Bound { address });

        let (boot, catalog_digest) = self.query_boot_service(&boot_offer, address)?;
        self.enter(ClientPhase::BootInfoAcquired { boot: boot.clone() });
        let tftp = SocketAddr::V4(SocketAddrV4::new(boot.server_address, self.cfg.tftp_port));

        self.enter(ClientPhase::DownloadingNbp);
        let rx = match self.fetch(tftp, &boot.nbp_path, true) {
            Fetch::Done(rx) => rx,
            Fetch::Failed(e) => return Err(e),
        };
        let program = rx.into_data().unwrap_or_default();
        if !nbp::verify(&program) {
            return Err(ClientError::NbpRejected(format!("{} failed its integrity check", boot.nbp_path)));
        }

        let manifest = match self.fetch(tftp, &boot.menu_path, true) {
            Fetch::Done(rx) => {
                let text = String::from_utf8(rx.into_data().unwrap_or_default())
                    .map_err(|_| ClientError::MenuMissing("menu is not UTF-8".into()))?;
                MenuManifest::parse(&text).map_err(|e| ClientError::MenuMissing(e.to_string()))?
            }
            Fetch::Failed(ClientError::Tftp { code, message, .. }) if code == error_code::FILE_NOT_FOUND => {
                return Err(ClientError::MenuMissing(message))
            }
            Fetch::Failed(e) => return Err(e),
        };
        if manifest.catalog_digest != catalog_digest {
            return Err(ClientError::MenuMissing(format!(
                "served menu digest {} differs from boot-service digest {catalog_digest}",
                manifest.catalog_digest
            )));
        }
        self.enter(ClientPhase::MenuLoaded {
            manifest: manifest.clone(),
        });

        let entry = match selection {
            Selection::First => manifest.entries.first(),
            Selection::Id(id) => manifest.entry(id),
        }
        .cloned()
        .ok_or_else(|| ClientError::UnknownSelection(selection.to_string()))?;
        self.image = Some(entry.id.clone());
        self.enter(ClientPhase::DownloadingImage { id: entry.id.clone() });
        let rx = match self.fetch(tftp, &entry.payload_path, false) {
            Fetch::Done(rx) => rx,
            Fetch::Failed(e) => return Err(e),
        };
        let actual = rx.digest();
        if actual != entry.digest || rx.received_bytes() != entry.payload_size {
            return Err(ClientError::DigestMismatch {
                expected: entry.digest,
                actual,
            });
        }
        self.final_digest = Some(actual);
        self.enter(ClientPhase::Verified { digest: actual });
        Ok(())
    }

    fn frame(&self, kind: MessageType) -> DhcpFrame {
        let mut f = DhcpFrame::request(self.mac, self.xid, kind);
        f.set_option(DhcpOption::new(code::VENDOR_CLASS, VENDOR_CLASS));
        f.set_option(DhcpOption::new(code::CLIENT_ARCH, [0u8, 0]));
        f
    }

    fn send_frame(&mut self, frame: &DhcpFrame, to: SocketAddr) -> Result<(), ClientError> {
        let bytes = encode_dhcp(frame).map_err(|e| ClientError::Io(e.to_string()))?;
        self.sock.send_to(&bytes, to)?;
        Ok(())
    }

    /// Replies for this client's transaction, ignoring everything else.
    fn recv_reply(&mut self, wait: Duration) -> Result<Option<(DhcpFrame, SocketAddr)>, ClientError> {
        let until = Instant::now() + wait;
        loop {
            let left = until.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Ok(None);
            }
            let Some((bytes, from)) = self.sock.recv_from(left)? else {
                return Ok(None);
            };
            if let Ok(frame) = decode_dhcp(&bytes) {
                if frame.op == OP_REPLY && frame.xid == self.xid && frame.mac() == Some(self.mac) {
                    return Ok(Some((frame, from)));
                }
            }
        }
    }

    fn discover(&mut self) -> Result<(OfferRecord, OfferRecord), ClientError> {
        self.enter(ClientPhase::Discovering);
        let discover = self.frame(MessageType::Discover);
        let servers = self.cfg.dhcp_servers.clone();
        for attempt in 0..self.cfg.discover_attempts.max(1) {
            if self.remaining().is_zero() {
                break;
            }
            if attempt > 0 {
                self.retransmissions += 1;
                self.log.warn(Component::Sim, format!("{} repeating DISCOVER (attempt {})", self.mac, attempt + 1));
            }
            for server in &servers {
                self.send_frame(&discover, *server)?;
            }
            let window = self.cfg.offer_window.min(self.remaining());
            if attempt == 0 {
                let deadline = self.started.elapsed() + window;
                self.enter(ClientPhase::AwaitingOffers { deadline });
            }
            let until = Instant::now() + window;
            loop {
                let left = until.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    break;
                }
                let Some((frame, from)) = self.recv_reply(left)? else {
                    break;
                };
                if frame.message_type() != Some(MessageType::Offer) {
                    continue;
                }
                let record = OfferRecord {
                    from,
                    yiaddr: frame.yiaddr,
                    siaddr: frame.siaddr,
                    server_id: frame.address_option(code::SERVER_ID),
                    file: frame.file_name(),
                    pxe: frame
                        .option(code::VENDOR_CLASS)
                        .is_some_and(|v| v.starts_with(PXE_VENDOR_CLASS)),
                };
                if !self.offers.contains(&record) {
                    self.log.info(
                        Component::Sim,
                        format!(
                            "{} OFFER from {from}: address {} boot server {} file {:?}",
                            self.mac, record.yiaddr, record.siaddr, record.file
                        ),
                    );
                    self.offers.push(record);
                }
            }
            if let Some(pair) = self.choose_offers() {
                return Ok(pair);
            }
        }
        let has_address = self.offers.iter().any(|o| !o.yiaddr.is_unspecified());
        if has_address && !self.offers.iter().any(OfferRecord::has_boot_fields) {
            Err(ClientError::NoBootInfo)
        } else {
            Err(ClientError::NoOffer)
        }
    }

    /// Picks the address offer and the boot offer; they are the same offer
    /// when a full DHCP server answered with boot fields.
    fn choose_offers(&self) -> Option<(OfferRecord, OfferRecord)> {
        let addressed = || self.offers.iter().filter(|o| !o.yiaddr.is_unspecified());
        let address = addressed()
            .find(|o| o.has_boot_fields())
            .or_else(|| addressed().next())?;
        let boot = if address.has_boot_fields() {
            address
        } else {
            self.offers.iter().find(|o| o.has_boot_fields())?
        };
        Some((address.clone(), boot.clone()))
    }

    fn request(&mut self, offer: &OfferRecord) -> Result<Ipv4Addr, ClientError> {
        let mut request = self.frame(MessageType::Request);
        request.set_option(DhcpOption::address(code::REQUESTED_ADDRESS, offer.yiaddr));
        if let Some(id) = offer.server_id {
            request.set_option(DhcpOption::address(code::SERVER_ID, id));
        }
        for attempt in 0..self.cfg.request_attempts.max(1) {
            if self.remaining().is_zero() {
                break;
            }
            if attempt > 0 {
                self.retransmissions += 1;
            }
            self.send_frame(&request, offer.from)?;
            let until = Instant::now() + self.cfg.reply_timeout.min(self.remaining());
            loop {
                let left = until.saturating_duration_since(Instant::now());
                let Some((frame, _)) = self.recv_reply(left)? else {
                    break;
                };
                match frame.message_type() {
                    Some(MessageType::Ack) if frame.yiaddr == offer.yiaddr => return Ok(frame.yiaddr),
                    Some(MessageType::Nak) => return Err(ClientError::Nak(offer.yiaddr)),
                    _ => {}
                }
            }
        }
        Err(ClientError::TransferTimeout("no acknowledgement for REQUEST".into()))
    }

    fn query_boot_service(
        &mut self,
        offer: &OfferRecord,
        address: Ipv4Addr,
    ) -> Result<(BootInfo, Digest), ClientError> {
        let target = SocketAddr::V4(SocketAddrV4::new(offer.siaddr, self.cfg.boot_port));
        let mut query = self.frame(MessageType::Request);
        query.ciaddr = address;
        for attempt in 0..self.cfg.request_attempts.max(1) {
            if self.remaining().is_zero() {
                break;
            }
            if attempt > 0 {
                self.retransmissions += 1;
            }
            self.send_frame(&query, target)?;
            let until = Instant::now() + self.cfg.reply_timeout.min(self.remaining());
            loop {
                let left = until.saturating_duration_since(Instant::now());
                let Some((frame, _)) = self.recv_reply(left)? else {
                    break;
                };
                if frame.message_type() != Some(MessageType::Ack) {
                    continue;
                }
                let Some((menu_path, digest)) = frame.option(code::MENU_INFO).and_then(parse_menu_option) else {
                    continue;
                };
                let boot = BootInfo::new(frame.siaddr, frame.file_name(), menu_path)
                    .map_err(|_| ClientError::NoBootInfo)?;
                return Ok((boot, digest));
            }
        }
        Err(ClientError::NoBootInfo)
    }

    fn fetch(&mut self, server: SocketAddr, file: &str, keep: bool) -> Fetch {
        match self.try_fetch(server, file, keep) {
            Ok(f) => f,
            Err(e) => Fetch::Failed(e),
        }
    }

    fn try_fetch(&mut self, server: SocketAddr, file: &str, keep: bool) -> Result<Fetch, ClientError> {
        let block_size = self.cfg.block_size;
        let mut options = Vec::new();
        if block_size != DEFAULT_BLOCK_SIZE {
            options.push(("blksize".to_string(), block_size.to_string()));
        }
        options.push(("tsize".to_string(), "0".to_string()));
        let rrq = encode_tftp(&TftpPacket::ReadRequest {
            filename: file.to_string(),
            mode: "octet".into(),
            options,
        })
        .map_err(|e| ClientError::Io(e.to_string()))?;
        let mut rx = TftpReceiver::new(block_size, keep);
        let mut tid: Option<SocketAddr> = None;
        let mut retries_left = self.cfg.tftp_retries;
        self.sock.send_to(&rrq, server)?;
        loop {
            let wait = self.cfg.tftp_timeout.min(self.remaining());
            if wait.is_zero() {
                return Ok(Fetch::Failed(ClientError::TransferTimeout(format!("{file}: deadline reached"))));
            }
            let Some((bytes, from)) = self.sock.recv_from(wait)? else {
                if retries_left == 0 {
                    return Ok(Fetch::Failed(ClientError::TransferTimeout(format!(
                        "{file}: server silent after {} retries",
                        self.cfg.tftp_retries
                    ))));
                }
                retries_left -= 1;
                self.retransmissions += 1;
                match (tid, rx.last_reply()) {
                    (Some(t), Some(reply)) => {
                        let reply = reply.to_vec();
                        self.sock.send_to(&reply, t)?;
                    }
                    _ => self.sock.send_to(&rrq, server)?,
                }
                continue;
            };
            let Ok(packet) = decode_tftp(&bytes) else {
                continue;
            };
            let is_transfer = matches!(packet, TftpPacket::Data { .. } | TftpPacket::OptionAck { .. });
            if self.retired_tids.contains(&from) {
                if is_transfer {
                    self.reject_tid(from)?;
                }
                continue;
            }
            match tid {
                Some(t) if t != from => {
                    if is_transfer {
                        self.reject_tid(from)?;
                    }
                    continue;
                }
                Some(_) => {}
                None => {
                    let opening = matches!(
                        packet,
                        TftpPacket::OptionAck { .. } | TftpPacket::Data { block: 1, .. } | TftpPacket::Error { .. }
                    );
                    if from.ip() != server.ip() || !opening {
                        continue;
                    }
                    tid = Some(from);
                }
            }
            let peer = tid.expect("set above");
            match rx.on_packet(&packet) {
                ReceiverStep::Reply(ack) => {
                    retries_left = self.cfg.tftp_retries;
                    self.sock.send_to(&ack, peer)?;
                }
                ReceiverStep::Finished(ack) => {
                    self.sock.send_to(&ack, peer)?;
                    self.retired_tids.insert(peer);
                    self.bytes += rx.received_bytes();
                    return Ok(Fetch::Done(rx));
                }
                ReceiverStep::Ignore => {}
                ReceiverStep::Failed { code, message } => {
                    if !matches!(packet, TftpPacket::Error { .. }) {
                        if let Ok(err) = encode_tftp(&TftpPacket::error(code, &message)) {
                            self.sock.send_to(&err, peer)?;
                        }
                    }
                    self.retired_tids.insert(peer);
                    return Ok(Fetch::Failed(ClientError::Tftp {
                        file: file.to_string(),
                        code,
                        message,
                    }));
                }
            }
        }
    }

    fn reject_tid(&mut self, from: SocketAddr) -> Result<(), ClientError> {
        let err = encode_tftp(&TftpPacket::error(error_code::UNKNOWN_TID, "Unknown transfer ID"))
            .map_err(|e| ClientError::Io(e.to_string()))?;
        self.sock.send_to(&err, from)?;
        Ok(())
    }
}
