//! Read-only TFTP transfer engine.
//!
//! [`TftpSession`] is the server side of one lock-step transfer and
//! [`TftpReceiver`] the matching client side. Neither touches a socket or a
//! clock: drivers feed them packets and timestamps and send whatever bytes
//! they hand back.

mod path;
mod receiver;
mod session;

pub use path::resolve;
pub use receiver::{ReceiverStep, TftpReceiver};
pub use session::{
    negotiate, open_session, AckOutcome, BlockSource, FileSource, MemorySource, Negotiated,
    SessionConfig, SessionDead, SessionState, TftpSession,
};

use crate::wire::tftp::{error_code, TftpPacket};

pub const TFTP_PORT: u16 = 69;

/// Reasons a read request is refused before a transfer starts.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpenError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("access violation: {0}")]
    AccessViolation(String),
    #[error("illegal operation: {0}")]
    IllegalOperation(String),
}

impl OpenError {
    pub fn code(&self) -> u16 {
        match self {
            OpenError::FileNotFound(_) => error_code::FILE_NOT_FOUND,
            OpenError::AccessViolation(_) => error_code::ACCESS_VIOLATION,
            OpenError::IllegalOperation(_) => error_code::ILLEGAL_OPERATION,
        }
    }

    pub fn to_packet(&self) -> TftpPacket {
        let message = match self {
            OpenError::FileNotFound(_) => "File not found",
            OpenError::AccessViolation(_) => "Access violation",
            OpenError::IllegalOperation(_) => "Illegal TFTP operation",
        };
        TftpPacket::error(self.code(), message)
    }
}

/// Wire block number for an absolute (1-based, unbounded) block index.
pub fn wire_block(absolute: u64) -> u16 {
    (absolute & 0xFFFF) as u16
}
