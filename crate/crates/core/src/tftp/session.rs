use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use super::{resolve, wire_block, OpenError};
use crate::clock::Timestamp;
use crate::wire::tftp::{
    encode_tftp, error_code, TftpPacket, DEFAULT_BLOCK_SIZE, MAX_BLOCK_SIZE, MIN_BLOCK_SIZE,
};

/// Random-access byte source behind a transfer.
pub trait BlockSource: Send {
    fn len(&self) -> u64;

    /// Reads up to `buf.len()` bytes at `offset`, short only at end of data.
    fn read_at(&mut self, offset: u64, buf: &mut [u8]) -> io::Result<usize>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct MemorySource(Arc<[u8]>);

impl MemorySource {
    pub fn new(bytes: impl Into<Arc<[u8]>>) -> Self {
        MemorySource(bytes.into())
    }
}

impl BlockSource for MemorySource {
    fn len(&self) -> u64 {
        self.0.len() as u64
    }

    fn read_at(&mut self, offset: u64, buf: &mut [u8]) -> io::Result<usize> {
        let start = (offset as usize).min(self.0.len());
        let n = buf.len().min(self.0.len() - start);
        buf[..n].copy_from_slice(&self.0[start..start + n]);
        Ok(n)
    }
}

#[derive(Debug)]
pub struct FileSource {
    file: File,
    len: u64,
}

impl FileSource {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        Ok(FileSource { file, len })
    }
}

impl BlockSource for FileSource {
    fn len(&self) -> u64 {
        self.len
    }

    fn read_at(&mut self, offset: u64, buf: &mut [u8]) -> io::Result<usize> {
        self.file.seek(SeekFrom::Start(offset))?;
        let mut filled = 0;
        while filled < buf.len() {
            match self.file.read(&mut buf[filled..])? {
                0 => break,
                n => filled += n,
            }
        }
        Ok(filled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub block_size: usize,
    pub timeout: Duration,
    pub retries: u32,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            block_size: DEFAULT_BLOCK_SIZE,
            timeout: Duration::from_secs(1),
            retries: 5,
        }
    }
}

/// Outcome of option negotiation for one read request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Negotiated {
    pub block_size: usize,
    pub timeout: Duration,
    /// Options to acknowledge; `None` when nothing was accepted and the
    /// transfer starts directly with DATA block 1.
    pub oack: Option<Vec<(String, String)>>,
}

/// Validates mode and negotiates blksize / tsize / timeout for a request.
pub fn negotiate(
    request: &TftpPacket,
    file_size: u64,
    cfg: &SessionConfig,
) -> Result<Negotiated, OpenError> {
    let (mode, options) = match request {
        TftpPacket::ReadRequest { mode, options, .. } => (mode, options),
        TftpPacket::WriteRequest { .. } => {
            return Err(OpenError::IllegalOperation("write requests are not accepted".into()))
        }
        _ => return Err(OpenError::IllegalOperation("expected a read request".into())),
    };
    if !mode.eq_ignore_ascii_case("octet") {
        return Err(OpenError::IllegalOperation(format!("unsupported mode {mode:?}")));
    }
    let mut out = Negotiated {
        block_size: cfg.block_size,
        timeout: cfg.timeout,
        oack: None,
    };
    let mut accepted = Vec::new();
    for (name, value) in options {
        let name = name.to_ascii_lowercase();
        match name.as_str() {
            "blksize" => {
                if let Ok(requested) = value.parse::<u64>() {
                    if requested >= MIN_BLOCK_SIZE as u64 {
                        let size = requested.min(MAX_BLOCK_SIZE as u64) as usize;
                        out.block_size = size;
                        accepted.push((name, size.to_string()));
                    }
                }
            }
            "tsize" => {
                if value.parse::<u64>().is_ok() {
                    accepted.push((name, file_size.to_string()));
                }
            }
            "timeout" => {
                if let Ok(secs) = value.parse::<u64>() {
                    if (1..=255).contains(&secs) {
                        out.timeout = Duration::from_secs(secs);
                        accepted.push((name, secs.to_string()));
                    }
                }
            }
            _ => {}
        }
    }
    if !accepted.is_empty() {
        out.oack = Some(accepted);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Transferring,
    Complete,
    Dead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AckOutcome {
    /// Send these bytes (the next DATA packet).
    Send(Vec<u8>),
    /// The final block was acknowledged.
    Complete,
    /// Duplicate, stale, or post-completion ACK; nothing to send.
    Ignored,
}

/// Retry budget exhausted. `final_packet` is the ERROR to send the peer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("session dead: retries exhausted")]
pub struct SessionDead {
    pub final_packet: Vec<u8>,
}

/// Server side of one read transfer.
///
/// Exactly one packet is outstanding at any time. Block numbers are tracked
/// as an unbounded absolute index; the wire counter is its low 16 bits, so
/// transfers past block 65535 wrap to 0.
pub struct TftpSession {
    peer: SocketAddr,
    file_path: PathBuf,
    file_size: u64,
    block_size: usize,
    timeout: Duration,
    max_retries: u32,
    retries_left: u32,
    /// Absolute index of the outstanding DATA block; 0 while an OACK is outstanding.
    current: u64,
    current_len: Option<usize>,
    outstanding: Vec<u8>,
    sent_at: Timestamp,
    state: SessionState,
    source: Box<dyn BlockSource>,
    retransmissions: u64,
}

impl std::fmt::Debug for TftpSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TftpSession")
            .field("peer", &self.peer)
            .field("file_path", &self.file_path)
            .field("file_size", &self.file_size)
            .field("block_size", &self.block_size)
            .field("current", &self.current)
            .field("retries_left", &self.retries_left)
            .field("state", &self.state)
            .finish()
    }
}

/// Resolves and opens `request`'s file under `root`, returning the session
/// and the first packet to send (OACK or DATA 1).
pub fn open_session(
    request: &TftpPacket,
    root: &Path,
    peer: SocketAddr,
    cfg: &SessionConfig,
    now: Timestamp,
) -> Result<(TftpSession, TftpPacket), OpenError> {
    let filename = match request {
        TftpPacket::ReadRequest { filename, .. } => filename,
        TftpPacket::WriteRequest { .. } => {
            return Err(OpenError::IllegalOperation("write requests are not accepted".into()))
        }
        _ => return Err(OpenError::IllegalOperation("expected a read request".into())),
    };
    // Mode is checked before touching the filesystem.
    negotiate(request, 0, cfg)?;
    let path = resolve(root, filename)?;
    let source =
        FileSource::open(&path).map_err(|_| OpenError::AccessViolation(filename.clone()))?;
    let negotiated = negotiate(request, source.len(), cfg)?;
    TftpSession::start(peer, path, Box::new(source), negotiated, cfg.retries, now)
}

impl TftpSession {
    pub fn start(
        peer: SocketAddr,
        file_path: PathBuf,
        source: Box<dyn BlockSource>,
        negotiated: Negotiated,
        retries: u32,
        now: Timestamp,
    ) -> Result<(TftpSession, TftpPacket), OpenError> {
        let mut session = TftpSession {
            peer,
            file_path,
            file_size: source.len(),
            block_size: negotiated.block_size,
            timeout: negotiated.timeout,
            max_retries: retries,
            retries_left: retries,
            current: 0,
            current_len: None,
            outstanding: Vec::new(),
            sent_at: now,
            state: SessionState::Transferring,
            source,
            retransmissions: 0,
        };
        let first = match negotiated.oack {
            Some(options) => TftpPacket::OptionAck { options },
            None => session
                .load_block(1)
                .map_err(|e| OpenError::AccessViolation(e.to_string()))?,
        };
        session.outstanding =
            encode_tftp(&first).map_err(|e| OpenError::IllegalOperation(e.to_string()))?;
        Ok((session, first))
    }

    fn load_block(&mut self, absolute: u64) -> io::Result<TftpPacket> {
        let offset = (absolute - 1) * self.block_size as u64;
        let mut payload = vec![0u8; self.block_size];
        let n = if offset >= self.file_size {
            0
        } else {
            self.source.read_at(offset, &mut payload)?
        };
        payload.truncate(n);
        self.current = absolute;
        self.current_len = Some(n);
        Ok(TftpPacket::Data {
            block: wire_block(absolute),
            payload,
        })
    }

    pub fn peer(&self) -> SocketAddr {
        self.peer
    }

    pub fn file_path(&self) -> &Path {
        &self.file_path
    }

    pub fn file_size(&self) -> u64 {
        self.file_size
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn retries_left(&self) -> u32 {
        self.retries_left
    }

    pub fn retransmissions(&self) -> u64 {
        self.retransmissions
    }

    /// Wire number of the next block to be sent after the outstanding one.
    pub fn next_block(&self) -> u16 {
        wire_block(self.current + 1)
    }

    /// Bytes of the single outstanding packet.
    pub fn outstanding(&self) -> &[u8] {
        &self.outstanding
    }

    pub fn deadline(&self) -> Timestamp {
        self.sent_at + self.timeout
    }

    /// Records that `outstanding()` went out on the wire at `now`.
    pub fn mark_sent(&mut self, now: Timestamp) {
        self.sent_at = now;
    }

    pub fn handle_ack(&mut self, block: u16, now: Timestamp) -> io::Result<AckOutcome> {
        if self.state != SessionState::Transferring {
            return Ok(AckOutcome::Ignored);
        }
        // Any packet from the peer proves it is alive, even a stale one.
        self.retries_left = self.max_retries;
        if block != wire_block(self.current) {
            return Ok(AckOutcome::Ignored);
        }
        if let Some(len) = self.current_len {
            if len < self.block_size {
                self.state = SessionState::Complete;
                self.outstanding.clear();
                return Ok(AckOutcome::Complete);
            }
        }
        let next = self.load_block(self.current + 1)?;
        self.outstanding = encode_tftp(&next).expect("block-sized data always encodes");
        self.sent_at = now;
        Ok(AckOutcome::Send(self.outstanding.clone()))
    }

    /// Called when the peer sends an ERROR; the transfer stops silently.
    pub fn abort(&mut self) {
        self.state = SessionState::Dead;
        self.outstanding.clear();
    }

    /// Retransmits the outstanding packet once its deadline has passed.
    ///
    /// Each call past the deadline spends one retry; the call that spends
    /// the last one kills the session instead of retransmitting.
    pub fn handle_timeout(&mut self, now: Timestamp) -> Result<Option<Vec<u8>>, SessionDead> {
        if self.state != SessionState::Transferring || now < self.deadline() {
            return Ok(None);
        }
        self.retries_left = self.retries_left.saturating_sub(1);
        if self.retries_left == 0 {
            self.state = SessionState::Dead;
            self.outstanding.clear();
            let packet = TftpPacket::error(error_code::NOT_DEFINED, "timeout");
            return Err(SessionDead {
                final_packet: encode_tftp(&packet).expect("static error encodes"),
            });
        }
        self.sent_at = now;
        self.retransmissions += 1;
        Ok(Some(self.outstanding.clone()))
    }
}
