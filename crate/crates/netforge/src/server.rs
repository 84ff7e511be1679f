//! The daemon: DHCP (or proxyDHCP), boot service and TFTP listeners.
//!
//! Each port has one listener thread. DHCP and boot-service frames are
//! handed to a single [`DhcpEngine`] behind a mutex. Every accepted TFTP
//! read request gets its own thread and ephemeral socket.

use std::collections::HashSet;
use std::io;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use socket2::{Domain, Protocol, Socket, Type};

use netforge_core::catalog::{CatalogError, MenuManifest};
use netforge_core::dhcp::{DhcpEngine, DhcpError, DHCP_CLIENT_PORT};
use netforge_core::tftp::{open_session, AckOutcome, SessionConfig, TftpSession};
use netforge_core::wire::dhcp::{decode_dhcp, encode_dhcp, DhcpFrame, MessageType, OP_REQUEST};
use netforge_core::wire::tftp::{decode_tftp, encode_tftp, error_code, TftpPacket, OP_DATA};
use netforge_core::{MacAddr, Timestamp};

use crate::config::{ConfigError, Mode, ServerConfig};
use crate::log::{Component, Logger};
use crate::prepare::{prepare, PrepareReport};
use crate::status;

/// Listener sockets wake up this often to notice shutdown.
const POLL: Duration = Duration::from_millis(100);
/// How long `stop` waits for running transfers before aborting them.
pub const DRAIN_WINDOW: Duration = Duration::from_secs(10);

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("TFTP root {0} does not exist or is not a directory")]
    RootMissing(PathBuf),
    #[error("UDP port {port} is already in use")]
    PortInUse { port: u16 },
    #[error("cannot bind UDP port {port}: {source}")]
    Bind { port: u16, source: io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("preparation failed: {0}")]
    Prepare(#[from] CatalogError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl ServeError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ServeError::PortInUse { .. } | ServeError::Bind { .. } => 2,
            ServeError::RootMissing(_) => 3,
            ServeError::Config(_) => 4,
            ServeError::Prepare(_) | ServeError::Io(_) => 1,
        }
    }
}

/// Ports actually bound (differs from the config when it asked for port 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundPorts {
    /// `None` when a proxy could not share the DHCP port.
    pub dhcp: Option<u16>,
    pub boot: u16,
    pub tftp: u16,
}

struct Shared {
    config: ServerConfig,
    session_config: SessionConfig,
    log: Logger,
    engine: Mutex<DhcpEngine>,
    manifest: Arc<MenuManifest>,
    ports: Mutex<Option<BoundPorts>>,
    started: Instant,
    stopping: AtomicBool,
    abort: AtomicBool,
    active: AtomicUsize,
    sessions_total: AtomicU64,
    in_flight: Mutex<HashSet<(SocketAddr, String)>>,
    session_threads: Mutex<Vec<JoinHandle<()>>>,
}

impl Shared {
    fn now(&self) -> Timestamp {
        Timestamp::from_millis(self.started.elapsed().as_millis() as u64)
    }

    fn status_text(&self) -> String {
        let ports = self.ports.lock().unwrap().expect("ports set before threads start");
        let now = self.now();
        let leases = self
            .engine
            .lock()
            .unwrap()
            .pool()
            .map(|p| p.live_count(now))
            .unwrap_or(0);
        status::render(&[
            ("pid", std::process::id().to_string()),
            ("state", if self.stopping.load(Ordering::SeqCst) { "draining" } else { "running" }.into()),
            ("mode", self.config.mode.as_str().into()),
            ("bind_address", self.config.bind_address.to_string()),
            ("dhcp_port", ports.dhcp.map_or("disabled".into(), |p| p.to_string())),
            ("boot_port", ports.boot.to_string()),
            ("tftp_port", ports.tftp.to_string()),
            ("tftp_root", self.config.tftp_root.display().to_string()),
            ("active_sessions", self.active.load(Ordering::SeqCst).to_string()),
            ("sessions_total", self.sessions_total.load(Ordering::SeqCst).to_string()),
            ("leases", leases.to_string()),
            ("images", self.manifest.entries.len().to_string()),
            ("menu_version", self.manifest.version.to_string()),
            ("catalog_digest", self.manifest.catalog_digest.to_hex()),
            ("uptime_secs", self.started.elapsed().as_secs().to_string()),
            ("updated_unix", status::unix_now().to_string()),
        ])
    }
}

pub struct ServerHandle {
    shared: Arc<Shared>,
    listeners: Vec<JoinHandle<()>>,
    ports: BoundPorts,
    prepare: PrepareReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopReport {
    /// True when every transfer finished inside the drain window.
    pub drained: bool,
    pub aborted: usize,
}

fn bind_udp(address: Ipv4Addr, port: u16, shared_port: bool) -> Result<UdpSocket, ServeError> {
    let bind_err = |source: io::Error| {
        if source.kind() == io::ErrorKind::AddrInUse {
            ServeError::PortInUse { port }
        } else {
            ServeError::Bind { port, source }
        }
    };
    let socket = Socket::new(Domain::IPV4, Type::DGRAM, Some(Protocol::UDP)).map_err(bind_err)?;
    if shared_port {
        socket.set_reuse_address(true).map_err(bind_err)?;
        #[cfg(unix)]
        socket.set_reuse_port(true).map_err(bind_err)?;
    }
    socket.set_broadcast(true).map_err(bind_err)?;
    socket
        .bind(&SocketAddrV4::new(address, port).into())
        .map_err(bind_err)?;
    Ok(socket.into())
}

fn local_port(socket: &UdpSocket) -> u16 {
    socket.local_addr().map(|a| a.port()).unwrap_or(0)
}

impl ServerHandle {
    /// Runs the preparation pass, binds every port and starts the listeners.
    pub fn start(config: ServerConfig, log: Logger) -> Result<ServerHandle, ServeError> {
        config.validate()?;
        if !config.tftp_root.is_dir() {
            return Err(ServeError::RootMissing(config.tftp_root.clone()));
        }
        let root = config.tftp_root.canonicalize()?;
        let config = ServerConfig {
            tftp_root: root,
            ..config
        };
        let engine = config.engine()?;

        // Bind before doing any work so port conflicts fail fast.
        let tftp = bind_udp(config.bind_address, config.tftp_port, false)?;
        let boot = bind_udp(config.bind_address, config.boot_port, false)?;
        // Broadcast DISCOVERs only reach a wildcard-bound socket.
        let dhcp_address = if config.bind_address.is_loopback() {
            config.bind_address
        } else {
            Ipv4Addr::UNSPECIFIED
        };
        let dhcp = match config.mode {
            Mode::FullDhcp => Some(bind_udp(dhcp_address, config.dhcp_port, false)?),
            Mode::Proxy => match bind_udp(dhcp_address, config.dhcp_port, true) {
                Ok(s) => Some(s),
                Err(e) => {
                    log.warn(
                        Component::Dhcp,
                        format!("proxyDHCP cannot share port {}: {e}; answering on the boot-service port only", config.dhcp_port),
                    );
                    None
                }
            },
        };
        let ports = BoundPorts {
            dhcp: dhcp.as_ref().map(local_port),
            boot: local_port(&boot),
            tftp: local_port(&tftp),
        };

        let report = prepare(&config.tftp_root, &log)?;
        let shared = Arc::new(Shared {
            session_config: config.session_config(),
            engine: Mutex::new(engine),
            manifest: Arc::new(report.manifest.clone()),
            ports: Mutex::new(Some(ports)),
            started: Instant::now(),
            stopping: AtomicBool::new(false),
            abort: AtomicBool::new(false),
            active: AtomicUsize::new(0),
            sessions_total: AtomicU64::new(0),
            in_flight: Mutex::new(HashSet::new()),
            session_threads: Mutex::new(Vec::new()),
            log: log.clone(),
            config,
        });

        let mut listeners = Vec::new();
        if let Some(sock) = dhcp {
            let s = shared.clone();
            listeners.push(spawn("dhcp", move || dhcp_loop(s, sock))?);
        }
        let s = shared.clone();
        listeners.push(spawn("boot", move || boot_loop(s, boot))?);
        let s = shared.clone();
        listeners.push(spawn("tftp", move || tftp_loop(s, tftp))?);
        if let Some(path) = shared.config.status_path.clone() {
            let s = shared.clone();
            listeners.push(spawn("status", move || status_loop(s, path))?);
        }

        log.info(
            Component::Bnl,
            format!(
                "Serving {} on {} (DHCP {}, boot {}, TFTP {}), {} image(s)",
                shared.config.mode.as_str(),
                shared.config.bind_address,
                ports.dhcp.map_or("disabled".into(), |p| p.to_string()),
                ports.boot,
                ports.tftp,
                shared.manifest.entries.len()
            ),
        );
        Ok(ServerHandle {
            shared,
            listeners,
            ports,
            prepare: report,
        })
    }

    pub fn ports(&self) -> BoundPorts {
        self.ports
    }

    pub fn config(&self) -> &ServerConfig {
        &self.shared.config
    }

    pub fn prepare_report(&self) -> &PrepareReport {
        &self.prepare
    }

    pub fn manifest(&self) -> &MenuManifest {
        &self.shared.manifest
    }

    pub fn status_text(&self) -> String {
        self.shared.status_text()
    }

    pub fn active_sessions(&self) -> usize {
        self.shared.active.load(Ordering::SeqCst)
    }

    /// Live lease bindings (empty in proxy mode).
    pub fn leases(&self) -> Vec<(MacAddr, Ipv4Addr)> {
        let now = self.shared.now();
        let engine = self.shared.engine.lock().unwrap();
        engine
            .pool()
            .map(|p| {
                p.bindings()
                    .filter(|(_, l)| l.expiry > now)
                    .map(|(m, l)| (m, l.address))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn stop(self) -> StopReport {
        self.stop_with(DRAIN_WINDOW)
    }

    /// Stops accepting work, waits up to `drain` for running transfers, then
    /// aborts whatever is left.
    pub fn stop_with(self, drain: Duration) -> StopReport {
        let shared = &self.shared;
        shared.stopping.store(true, Ordering::SeqCst);
        for t in self.listeners {
            let _ = t.join();
        }
        let deadline = Instant::now() + drain;
        while shared.active.load(Ordering::SeqCst) > 0 && Instant::now() < deadline {
            thread::sleep(Duration::from_millis(20));
        }
        let aborted = shared.active.load(Ordering::SeqCst);
        if aborted > 0 {
            shared.abort.store(true, Ordering::SeqCst);
        }
        let threads = std::mem::take(&mut *shared.session_threads.lock().unwrap());
        for t in threads {
            let _ = t.join();
        }
        if aborted > 0 {
            shared
                .log
                .warn(Component::Bnl, format!("Shutdown aborted {aborted} transfer(s) after the drain window"));
        }
        shared.log.info(Component::Bnl, "Shutdown complete");
        StopReport {
            drained: aborted == 0,
            aborted,
        }
    }
}

fn spawn(name: &str, f: impl FnOnce() + Send + 'static) -> io::Result<JoinHandle<()>> {
    thread::Builder::new().name(format!("netforge-{name}")).spawn(f)
}

fn recv(socket: &UdpSocket, buf: &mut [u8]) -> io::Result<Option<(usize, SocketAddr)>> {
    match socket.recv_from(buf) {
        Ok(r) => Ok(Some(r)),
        Err(e)
            if matches!(
                e.kind(),
                io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut | io::ErrorKind::ConnectionRefused
            ) =>
        {
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn describe(frame: &DhcpFrame) -> String {
    let mac = frame.mac().map_or("?".into(), |m| m.to_string());
    let kind = frame
        .message_type()
        .map_or("BOOTP".into(), |t| format!("{t:?}").to_uppercase());
    format!("{kind} from {mac} xid {:08x}", frame.xid)
}

fn reply_target(source: SocketAddr, request: &DhcpFrame) -> SocketAddr {
    match source {
        SocketAddr::V4(a) if !a.ip().is_unspecified() && !request.is_broadcast() => source,
        _ => SocketAddr::V4(SocketAddrV4::new(Ipv4Addr::BROADCAST, DHCP_CLIENT_PORT)),
    }
}

fn send_reply(shared: &Shared, comp: Component, socket: &UdpSocket, to: SocketAddr, reply: &DhcpFrame, what: &str) {
    let bytes = match encode_dhcp(reply) {
        Ok(b) => b,
        Err(e) => {
            shared.log.error(comp, format!("{what}: cannot encode reply: {e}"));
            return;
        }
    };
    let kind = reply
        .message_type()
        .map_or("REPLY".into(), |t| format!("{t:?}").to_uppercase());
    match socket.send_to(&bytes, to) {
        Ok(_) => {
            let addr = if reply.yiaddr.is_unspecified() {
                String::new()
            } else {
                format!(" {}", reply.yiaddr)
            };
            shared.log.info(comp, format!("{what}: sent {kind}{addr} to {to}"));
        }
        Err(e) => shared.log.warn(comp, format!("{what}: send {kind} to {to} failed: {e}")),
    }
}

fn dhcp_loop(shared: Arc<Shared>, socket: UdpSocket) {
    const C: Component = Component::Dhcp;
    let _ = socket.set_read_timeout(Some(POLL));
    let mut buf = vec![0u8; 4096];
    let mut last_sweep = Instant::now();
    while !shared.stopping.load(Ordering::SeqCst) {
        if last_sweep.elapsed() >= Duration::from_secs(1) {
            last_sweep = Instant::now();
            let expired = shared.engine.lock().unwrap().expire_leases(shared.now());
            if expired > 0 {
                shared.log.info(C, format!("Expired {expired} lease(s)"));
            }
        }
        let (n, source) = match recv(&socket, &mut buf) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(e) => {
                shared.log.error(C, format!("receive failed: {e}"));
                thread::sleep(POLL);
                continue;
            }
        };
        let frame = match decode_dhcp(&buf[..n]) {
            Ok(f) => f,
            Err(e) => {
                shared.log.warn(C, format!("Malformed frame from {source}: {e}"));
                continue;
            }
        };
        // Replies from other servers on a shared port are not ours to answer.
        if frame.op != OP_REQUEST {
            continue;
        }
        let what = describe(&frame);
        let result = shared.engine.lock().unwrap().handle(&frame, shared.now());
        match result {
            Ok(Some(reply)) => send_reply(&shared, C, &socket, reply_target(source, &frame), &reply, &what),
            Ok(None) => {
                if matches!(frame.message_type(), Some(MessageType::Discover | MessageType::Request)) {
                    shared.log.info(C, format!("{what}: not for this server, ignored"));
                }
            }
            Err(DhcpError::PoolExhausted) => shared.log.warn(C, format!("{what}: address pool exhausted, no offer")),
            Err(e) => shared.log.warn(C, format!("{what}: {e}")),
        }
    }
}

fn boot_loop(shared: Arc<Shared>, socket: UdpSocket) {
    const C: Component = Component::Bnl;
    let _ = socket.set_read_timeout(Some(POLL));
    let mut buf = vec![0u8; 4096];
    while !shared.stopping.load(Ordering::SeqCst) {
        let (n, source) = match recv(&socket, &mut buf) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(e) => {
                shared.log.error(C, format!("receive failed: {e}"));
                thread::sleep(POLL);
                continue;
            }
        };
        let frame = match decode_dhcp(&buf[..n]) {
            Ok(f) => f,
            Err(e) => {
                shared.log.warn(C, format!("Malformed boot-service frame from {source}: {e}"));
                continue;
            }
        };
        let what = describe(&frame);
        let result = shared
            .engine
            .lock()
            .unwrap()
            .handle_boot_service(&frame, &shared.manifest.catalog_digest);
        match result {
            Ok(reply) => send_reply(&shared, C, &socket, source, &reply, &what),
            Err(e) => shared.log.warn(C, format!("{what}: {e}")),
        }
    }
}

fn send_error(socket: &UdpSocket, to: SocketAddr, code: u16, message: &str) {
    if let Ok(bytes) = encode_tftp(&TftpPacket::error(code, message)) {
        let _ = socket.send_to(&bytes, to);
    }
}

fn tftp_loop(shared: Arc<Shared>, socket: UdpSocket) {
    const C: Component = Component::Tftp;
    let _ = socket.set_read_timeout(Some(POLL));
    let mut buf = vec![0u8; 4096];
    while !shared.stopping.load(Ordering::SeqCst) {
        let (n, peer) = match recv(&socket, &mut buf) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(e) => {
                shared.log.error(C, format!("receive failed: {e}"));
                thread::sleep(POLL);
                continue;
            }
        };
        match decode_tftp(&buf[..n]) {
            Ok(request @ TftpPacket::ReadRequest { .. }) => start_session(&shared, &socket, request, peer),
            Ok(TftpPacket::WriteRequest { filename, .. }) => {
                shared.log.warn(C, format!("WRQ {filename} from {peer} refused: server is read-only"));
                send_error(&socket, peer, error_code::ILLEGAL_OPERATION, "Write requests are not accepted");
            }
            Ok(TftpPacket::Error { .. }) => {}
            Ok(other) => {
                shared
                    .log
                    .warn(C, format!("Unexpected opcode {} from {peer} on the request port", other.opcode()));
                send_error(&socket, peer, error_code::ILLEGAL_OPERATION, "Illegal TFTP operation");
            }
            Err(e) => shared.log.warn(C, format!("Malformed packet from {peer}: {e}")),
        }
    }
}

fn start_session(shared: &Arc<Shared>, intake: &UdpSocket, request: TftpPacket, peer: SocketAddr) {
    const C: Component = Component::Tftp;
    let TftpPacket::ReadRequest { filename, .. } = &request else {
        return;
    };
    let filename = filename.clone();
    let key = (peer, filename.clone());
    if !shared.in_flight.lock().unwrap().insert(key.clone()) {
        shared
            .log
            .info(C, format!("RRQ {filename} from {peer}: duplicate of a running transfer, ignored"));
        return;
    }
    let release = |shared: &Shared| {
        shared.in_flight.lock().unwrap().remove(&key);
    };
    let (session, first) =
        match open_session(&request, &shared.config.tftp_root, peer, &shared.session_config, shared.now()) {
            Ok(s) => s,
            Err(e) => {
                shared.log.warn(C, format!("RRQ {filename} from {peer}: {e}"));
                if let Ok(bytes) = encode_tftp(&e.to_packet()) {
                    let _ = intake.send_to(&bytes, peer);
                }
                release(shared);
                return;
            }
        };
    let socket = match UdpSocket::bind((shared.config.bind_address, 0)) {
        Ok(s) => s,
        Err(e) => {
            shared.log.error(C, format!("RRQ {filename} from {peer}: no transfer socket: {e}"));
            send_error(intake, peer, error_code::NOT_DEFINED, "Server out of sockets");
            release(shared);
            return;
        }
    };
    shared.log.info(
        C,
        format!(
            "RRQ {filename} from {peer}: {} bytes, blksize {}",
            session.file_size(),
            session.block_size()
        ),
    );
    shared.active.fetch_add(1, Ordering::SeqCst);
    shared.sessions_total.fetch_add(1, Ordering::SeqCst);
    let s = shared.clone();
    let spawned = spawn("session", move || {
        run_session(&s, socket, session, first, &filename);
        s.in_flight.lock().unwrap().remove(&key);
        s.active.fetch_sub(1, Ordering::SeqCst);
    });
    match spawned {
        Ok(handle) => {
            let mut threads = shared.session_threads.lock().unwrap();
            threads.retain(|t| !t.is_finished());
            threads.push(handle);
        }
        Err(e) => {
            shared.log.error(C, format!("cannot start transfer thread: {e}"));
            shared.active.fetch_sub(1, Ordering::SeqCst);
        }
    }
}

/// True when the outstanding packet is the short DATA block that ends the file.
fn final_block_outstanding(session: &TftpSession) -> bool {
    let out = session.outstanding();
    out.len() >= 4
        && u16::from_be_bytes([out[0], out[1]]) == OP_DATA
        && out.len() - 4 < session.block_size()
}

fn run_session(shared: &Shared, socket: UdpSocket, mut session: TftpSession, first: TftpPacket, filename: &str) {
    const C: Component = Component::Tftp;
    let peer = session.peer();
    let send = |bytes: &[u8]| {
        if let Err(e) = socket.send_to(bytes, peer) {
            shared.log.warn(C, format!("send to {peer} failed: {e}"));
        }
    };
    let first = encode_tftp(&first).expect("session packets encode");
    send(&first);
    session.mark_sent(shared.now());
    let mut buf = vec![0u8; 4096];
    loop {
        if shared.abort.load(Ordering::SeqCst) {
            session.abort();
            send_error(&socket, peer, error_code::NOT_DEFINED, "Server shutting down");
            shared.log.warn(C, format!("Transfer of {filename} to {peer} aborted at shutdown"));
            return;
        }
        let wait = session
            .deadline()
            .saturating_sub(shared.now())
            .clamp(Duration::from_millis(1), POLL);
        let _ = socket.set_read_timeout(Some(wait));
        match recv(&socket, &mut buf) {
            Ok(Some((_, from))) if from != peer => {
                shared.log.warn(C, format!("Packet from unknown TID {from} during transfer to {peer}"));
                send_error(&socket, from, error_code::UNKNOWN_TID, "Unknown transfer ID");
                continue;
            }
            Ok(Some((n, _))) => match decode_tftp(&buf[..n]) {
                Ok(TftpPacket::Ack { block }) => match session.handle_ack(block, shared.now()) {
                    Ok(AckOutcome::Send(bytes)) => send(&bytes),
                    Ok(AckOutcome::Complete) => {
                        shared.log.info(
                            C,
                            format!(
                                "Transfer of {filename} to {peer} complete: {} bytes, {} retransmission(s)",
                                session.file_size(),
                                session.retransmissions()
                            ),
                        );
                        return;
                    }
                    Ok(AckOutcome::Ignored) => {}
                    Err(e) => {
                        shared.log.error(C, format!("Reading {filename} for {peer} failed: {e}"));
                        send_error(&socket, peer, error_code::NOT_DEFINED, "Read error");
                        return;
                    }
                },
                Ok(TftpPacket::Error { code, message }) => {
                    session.abort();
                    shared
                        .log
                        .warn(C, format!("Transfer of {filename} to {peer} aborted by client: error {code} {message:?}"));
                    return;
                }
                Ok(_) => {}
                Err(e) => shared.log.warn(C, format!("Malformed packet from {peer}: {e}")),
            },
            Ok(None) => {}
            Err(e) => {
                shared.log.error(C, format!("Transfer of {filename} to {peer}: receive failed: {e}"));
                return;
            }
        }
        let closing = final_block_outstanding(&session);
        match session.handle_timeout(shared.now()) {
            Ok(Some(bytes)) => {
                send(&bytes);
                shared.log.warn(
                    C,
                    format!("Retransmit block {} of {filename} to {peer}", session.next_block()),
                );
            }
            Ok(None) => {}
            Err(dead) => {
                send(&dead.final_packet);
                if closing {
                    shared.log.warn(
                        C,
                        format!("Transfer of {filename} to {peer}: final acknowledgement never arrived"),
                    );
                } else {
                    shared
                        .log
                        .error(C, format!("Transfer of {filename} to {peer} timed out after {} retries", shared.session_config.retries));
                }
                return;
            }
        }
    }
}

fn status_loop(shared: Arc<Shared>, path: PathBuf) {
    let mut last_write: Option<Instant> = None;
    while !shared.stopping.load(Ordering::SeqCst) {
        if last_write.is_none_or(|t| t.elapsed() >= Duration::from_secs(1)) {
            last_write = Some(Instant::now());
            if let Err(e) = status::write(&path, &shared.status_text()) {
                shared
                    .log
                    .warn(Component::Bnl, format!("cannot write status file {}: {e}", path.display()));
            }
        }
        thread::sleep(POLL);
    }
    let _ = std::fs::remove_file(&path);
}
