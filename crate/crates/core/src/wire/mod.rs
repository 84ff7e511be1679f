//! Bit-exact codecs for BOOTP/DHCP messages and TFTP packets.
//!
//! All multi-byte integers are big-endian. Decoders are total: any input
//! either decodes or yields a [`WireError`].

pub mod dhcp;
pub mod tftp;

pub use dhcp::{decode_dhcp, encode_dhcp, DhcpFrame, DhcpOption, MessageType};
pub use tftp::{decode_tftp, encode_tftp, TftpPacket};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("truncated input")]
    Truncated,
    #[error("bad magic cookie")]
    BadCookie,
    #[error("unsupported option {0}")]
    Unsupported(u8),
    #[error("invalid packet: {0}")]
    InvalidPacket(String),
    #[error("unknown opcode {0}")]
    UnknownOpcode(u16),
}
