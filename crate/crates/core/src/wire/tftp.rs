use super::WireError;

pub const OP_RRQ: u16 = 1;
pub const OP_WRQ: u16 = 2;
pub const OP_DATA: u16 = 3;
pub const OP_ACK: u16 = 4;
pub const OP_ERROR: u16 = 5;
pub const OP_OACK: u16 = 6;

pub const DEFAULT_BLOCK_SIZE: usize = 512;
pub const MIN_BLOCK_SIZE: usize = 8;
pub const MAX_BLOCK_SIZE: usize = 65464;

/// Standard TFTP error codes.
pub mod error_code {
    pub const NOT_DEFINED: u16 = 0;
    pub const FILE_NOT_FOUND: u16 = 1;
    pub const ACCESS_VIOLATION: u16 = 2;
    pub const DISK_FULL: u16 = 3;
    pub const ILLEGAL_OPERATION: u16 = 4;
    pub const UNKNOWN_TID: u16 = 5;
    pub const FILE_EXISTS: u16 = 6;
    pub const NO_SUCH_USER: u16 = 7;
    pub const OPTION_REFUSED: u16 = 8;
}

pub type TftpOptions = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TftpPacket {
    ReadRequest {
        filename: String,
        mode: String,
        options: TftpOptions,
    },
    /// Decoded only so the server can refuse it politely.
    WriteRequest {
        filename: String,
        mode: String,
        options: TftpOptions,
    },
    Data {
        block: u16,
        payload: Vec<u8>,
    },
    Ack {
        block: u16,
    },
    Error {
        code: u16,
        message: String,
    },
    OptionAck {
        options: TftpOptions,
    },
}

impl TftpPacket {
    pub fn error(code: u16, message: impl Into<String>) -> Self {
        TftpPacket::Error {
            code,
            message: message.into(),
        }
    }

    pub fn opcode(&self) -> u16 {
        match self {
            TftpPacket::ReadRequest { .. } => OP_RRQ,
            TftpPacket::WriteRequest { .. } => OP_WRQ,
            TftpPacket::Data { .. } => OP_DATA,
            TftpPacket::Ack { .. } => OP_ACK,
            TftpPacket::Error { .. } => OP_ERROR,
            TftpPacket::OptionAck { .. } => OP_OACK,
        }
    }
}

fn is_text(s: &str) -> bool {
    s.bytes().all(|b| (0x20..=0x7e).contains(&b))
}

fn put_text(out: &mut Vec<u8>, s: &str) -> Result<(), WireError> {
    if !is_text(s) {
        return Err(WireError::InvalidPacket(format!(
            "text field {s:?} is not printable ASCII"
        )));
    }
    out.extend_from_slice(s.as_bytes());
    out.push(0);
    Ok(())
}

pub fn encode_tftp(packet: &TftpPacket) -> Result<Vec<u8>, WireError> {
    let mut out = packet.opcode().to_be_bytes().to_vec();
    match packet {
        TftpPacket::ReadRequest {
            filename,
            mode,
            options,
        }
        | TftpPacket::WriteRequest {
            filename,
            mode,
            options,
        } => {
            put_text(&mut out, filename)?;
            put_text(&mut out, mode)?;
            for (name, value) in options {
                put_text(&mut out, name)?;
                put_text(&mut out, value)?;
            }
        }
        TftpPacket::Data { block, payload } => {
            if payload.len() > MAX_BLOCK_SIZE {
                return Err(WireError::InvalidPacket(format!(
                    "data payload of {} bytes exceeds {MAX_BLOCK_SIZE}",
                    payload.len()
                )));
            }
            out.extend_from_slice(&block.to_be_bytes());
            out.extend_from_slice(payload);
        }
        TftpPacket::Ack { block } => out.extend_from_slice(&block.to_be_bytes()),
        TftpPacket::Error { code, message } => {
            out.extend_from_slice(&code.to_be_bytes());
            put_text(&mut out, message)?;
        }
        TftpPacket::OptionAck { options } => {
            for (name, value) in options {
                put_text(&mut out, name)?;
                put_text(&mut out, value)?;
            }
        }
    }
    Ok(out)
}

/// Splits a run of NUL-terminated printable strings.
fn take_strings(mut rest: &[u8]) -> Result<Vec<String>, WireError> {
    let mut out = Vec::new();
    while !rest.is_empty() {
        let end = rest
            .iter()
            .position(|&b| b == 0)
            .ok_or(WireError::Truncated)?;
        let text = std::str::from_utf8(&rest[..end]).map_err(|_| WireError::Truncated)?;
        if !is_text(text) {
            return Err(WireError::Truncated);
        }
        out.push(text.to_string());
        rest = &rest[end + 1..];
    }
    Ok(out)
}

fn pairs(strings: Vec<String>) -> Result<TftpOptions, WireError> {
    if !strings.len().is_multiple_of(2) {
        return Err(WireError::Truncated);
    }
    let mut it = strings.into_iter();
    let mut out = Vec::new();
    while let (Some(name), Some(value)) = (it.next(), it.next()) {
        out.push((name, value));
    }
    Ok(out)
}

pub fn decode_tftp(bytes: &[u8]) -> Result<TftpPacket, WireError> {
    if bytes.len() < 2 {
        return Err(WireError::Truncated);
    }
    let opcode = u16::from_be_bytes([bytes[0], bytes[1]]);
    let body = &bytes[2..];
    let block = || -> Result<u16, WireError> {
        match body {
            [hi, lo, ..] => Ok(u16::from_be_bytes([*hi, *lo])),
            _ => Err(WireError::Truncated),
        }
    };
    match opcode {
        OP_RRQ | OP_WRQ => {
            let mut strings = take_strings(body)?.into_iter();
            let filename = strings.next().ok_or(WireError::Truncated)?;
            let mode = strings.next().ok_or(WireError::Truncated)?;
            let options = pairs(strings.collect())?;
            Ok(if opcode == OP_RRQ {
                TftpPacket::ReadRequest {
                    filename,
                    mode,
                    options,
                }
            } else {
                TftpPacket::WriteRequest {
                    filename,
                    mode,
                    options,
                }
            })
        }
        OP_DATA => {
            let block = block()?;
            let payload = &body[2..];
            if payload.len() > MAX_BLOCK_SIZE {
                return Err(WireError::InvalidPacket("oversized data payload".into()));
            }
            Ok(TftpPacket::Data {
                block,
                payload: payload.to_vec(),
            })
        }
        OP_ACK => Ok(TftpPacket::Ack { block: block()? }),
        OP_ERROR => {
            let code = block()?;
            let mut strings = take_strings(&body[2..])?;
            if strings.len() != 1 {
                return Err(WireError::Truncated);
            }
            Ok(TftpPacket::Error {
                code,
                message: strings.pop().unwrap_or_default(),
            })
        }
        OP_OACK => Ok(TftpPacket::OptionAck {
            options: pairs(take_strings(body)?)?,
        }),
        other => Err(WireError::UnknownOpcode(other)),
    }
}
