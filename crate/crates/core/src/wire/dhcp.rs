use std::net::Ipv4Addr;

use super::WireError;
use crate::mac::MacAddr;

pub const MAGIC_COOKIE: [u8; 4] = [0x63, 0x82, 0x53, 0x63];
pub const HEADER_LEN: usize = 236;
pub const MIN_FRAME_LEN: usize = HEADER_LEN + 4;
/// Classic BOOTP minimum message size; encoded frames are zero-padded to it.
pub const BOOTP_MIN_LEN: usize = 300;

pub const OP_REQUEST: u8 = 1;
pub const OP_REPLY: u8 = 2;
pub const HTYPE_ETHERNET: u8 = 1;
pub const FLAG_BROADCAST: u16 = 0x8000;

pub mod code {
    pub const PAD: u8 = 0;
    pub const SUBNET_MASK: u8 = 1;
    pub const REQUESTED_ADDRESS: u8 = 50;
    pub const LEASE_TIME: u8 = 51;
    pub const OVERLOAD: u8 = 52;
    pub const MESSAGE_TYPE: u8 = 53;
    pub const SERVER_ID: u8 = 54;
    pub const PARAMETER_LIST: u8 = 55;
    pub const VENDOR_CLASS: u8 = 60;
    pub const TFTP_SERVER: u8 = 66;
    pub const BOOTFILE: u8 = 67;
    pub const CLIENT_ARCH: u8 = 93;
    /// Site-specific option carrying `menu_path;hex-digest` in boot-service ACKs.
    pub const MENU_INFO: u8 = 224;
    pub const END: u8 = 255;
}

pub const PXE_VENDOR_CLASS: &[u8] = b"PXEClient";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageType {
    Discover = 1,
    Offer = 2,
    Request = 3,
    Decline = 4,
    Ack = 5,
    Nak = 6,
    Release = 7,
    Inform = 8,
}

impl MessageType {
    pub fn from_u8(v: u8) -> Option<Self> {
        use MessageType::*;
        Some(match v {
            1 => Discover,
            2 => Offer,
            3 => Request,
            4 => Decline,
            5 => Ack,
            6 => Nak,
            7 => Release,
            8 => Inform,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhcpOption {
    pub code: u8,
    pub payload: Vec<u8>,
}

impl DhcpOption {
    pub fn new(code: u8, payload: impl Into<Vec<u8>>) -> Self {
        DhcpOption {
            code,
            payload: payload.into(),
        }
    }

    pub fn message_type(t: MessageType) -> Self {
        Self::new(code::MESSAGE_TYPE, [t as u8])
    }

    pub fn address(code: u8, addr: Ipv4Addr) -> Self {
        Self::new(code, addr.octets())
    }
}

/// A decoded BOOTP/DHCP message. Pad options never appear in `options`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhcpFrame {
    pub op: u8,
    pub htype: u8,
    pub hlen: u8,
    pub hops: u8,
    pub xid: u32,
    pub secs: u16,
    pub flags: u16,
    pub ciaddr: Ipv4Addr,
    pub yiaddr: Ipv4Addr,
    pub siaddr: Ipv4Addr,
    pub giaddr: Ipv4Addr,
    pub chaddr: [u8; 16],
    pub sname: [u8; 64],
    pub file: [u8; 128],
    pub options: Vec<DhcpOption>,
}

impl Default for DhcpFrame {
    fn default() -> Self {
        DhcpFrame {
            op: OP_REQUEST,
            htype: HTYPE_ETHERNET,
            hlen: 6,
            hops: 0,
            xid: 0,
            secs: 0,
            flags: 0,
            ciaddr: Ipv4Addr::UNSPECIFIED,
            yiaddr: Ipv4Addr::UNSPECIFIED,
            siaddr: Ipv4Addr::UNSPECIFIED,
            giaddr: Ipv4Addr::UNSPECIFIED,
            chaddr: [0; 16],
            sname: [0; 64],
            file: [0; 128],
            options: Vec::new(),
        }
    }
}

impl DhcpFrame {
    /// A client request from `mac` carrying the given message type.
    pub fn request(mac: MacAddr, xid: u32, kind: MessageType) -> Self {
        let mut frame = DhcpFrame {
            xid,
            ..Default::default()
        };
        frame.chaddr[..6].copy_from_slice(&mac.0);
        frame.options.push(DhcpOption::message_type(kind));
        frame
    }

    /// Empty reply skeleton echoing the request's identity fields.
    pub fn reply_to(request: &DhcpFrame) -> Self {
        DhcpFrame {
            op: OP_REPLY,
            htype: request.htype,
            hlen: request.hlen,
            xid: request.xid,
            flags: request.flags,
            giaddr: request.giaddr,
            chaddr: request.chaddr,
            ..Default::default()
        }
    }

    pub fn option(&self, code: u8) -> Option<&[u8]> {
        self.options
            .iter()
            .find(|o| o.code == code)
            .map(|o| o.payload.as_slice())
    }

    pub fn set_option(&mut self, opt: DhcpOption) {
        match self.options.iter_mut().find(|o| o.code == opt.code) {
            Some(slot) => *slot = opt,
            None => self.options.push(opt),
        }
    }

    pub fn message_type(&self) -> Option<MessageType> {
        match self.option(code::MESSAGE_TYPE) {
            Some([v]) => MessageType::from_u8(*v),
            _ => None,
        }
    }

    pub fn address_option(&self, code: u8) -> Option<Ipv4Addr> {
        match self.option(code) {
            Some(&[a, b, c, d]) => Some(Ipv4Addr::new(a, b, c, d)),
            _ => None,
        }
    }

    pub fn is_pxe(&self) -> bool {
        self.option(code::VENDOR_CLASS)
            .is_some_and(|v| v.starts_with(PXE_VENDOR_CLASS))
    }

    /// Hardware address, when the frame carries an Ethernet-sized one.
    pub fn mac(&self) -> Option<MacAddr> {
        if self.hlen != 6 {
            return None;
        }
        let mut mac = [0u8; 6];
        mac.copy_from_slice(&self.chaddr[..6]);
        Some(MacAddr(mac))
    }

    pub fn is_broadcast(&self) -> bool {
        self.flags & FLAG_BROADCAST != 0
    }

    /// Boot file name up to the first NUL.
    pub fn file_name(&self) -> String {
        c_string(&self.file)
    }

    pub fn set_file_name(&mut self, name: &str) -> Result<(), WireError> {
        self.file = fixed_field(name)?;
        Ok(())
    }

    pub fn server_name(&self) -> String {
        c_string(&self.sname)
    }

    pub fn set_server_name(&mut self, name: &str) -> Result<(), WireError> {
        self.sname = fixed_field(name)?;
        Ok(())
    }
}

fn c_string(field: &[u8]) -> String {
    let end = field.iter().position(|&b| b == 0).unwrap_or(field.len());
    String::from_utf8_lossy(&field[..end]).into_owned()
}

fn fixed_field<const N: usize>(value: &str) -> Result<[u8; N], WireError> {
    // Leave room for the terminating NUL.
    if value.len() >= N || value.bytes().any(|b| b == 0) {
        return Err(WireError::InvalidFrame(format!(
            "field value {value:?} does not fit {N} bytes"
        )));
    }
    let mut out = [0u8; N];
    out[..value.len()].copy_from_slice(value.as_bytes());
    Ok(out)
}

pub fn encode_dhcp(frame: &DhcpFrame) -> Result<Vec<u8>, WireError> {
    if frame.hlen as usize > 16 {
        return Err(WireError::InvalidFrame(format!("hlen {} > 16", frame.hlen)));
    }
    for opt in &frame.options {
        match opt.code {
            code::PAD | code::END => {
                return Err(WireError::InvalidFrame(format!(
                    "option {} cannot appear in the option list",
                    opt.code
                )))
            }
            code::OVERLOAD => return Err(WireError::Unsupported(code::OVERLOAD)),
            _ => {}
        }
        if opt.payload.len() > 255 {
            return Err(WireError::InvalidFrame(format!(
                "option {} payload is {} bytes",
                opt.code,
                opt.payload.len()
            )));
        }
    }

    let mut out = Vec::with_capacity(BOOTP_MIN_LEN);
    out.extend_from_slice(&[frame.op, frame.htype, frame.hlen, frame.hops]);
    out.extend_from_slice(&frame.xid.to_be_bytes());
    out.extend_from_slice(&frame.secs.to_be_bytes());
    out.extend_from_slice(&frame.flags.to_be_bytes());
    for addr in [frame.ciaddr, frame.yiaddr, frame.siaddr, frame.giaddr] {
        out.extend_from_slice(&addr.octets());
    }
    let mut chaddr = [0u8; 16];
    let hlen = frame.hlen as usize;
    chaddr[..hlen].copy_from_slice(&frame.chaddr[..hlen]);
    out.extend_from_slice(&chaddr);
    out.extend_from_slice(&frame.sname);
    out.extend_from_slice(&frame.file);
    debug_assert_eq!(out.len(), HEADER_LEN);

    out.extend_from_slice(&MAGIC_COOKIE);
    for opt in &frame.options {
        out.push(opt.code);
        out.push(opt.payload.len() as u8);
        out.extend_from_slice(&opt.payload);
    }
    out.push(code::END);
    if out.len() < BOOTP_MIN_LEN {
        out.resize(BOOTP_MIN_LEN, 0);
    }
    Ok(out)
}

pub fn decode_dhcp(bytes: &[u8]) -> Result<DhcpFrame, WireError> {
    if bytes.len() < MIN_FRAME_LEN {
        return Err(WireError::Truncated);
    }
    if bytes[HEADER_LEN..MIN_FRAME_LEN] != MAGIC_COOKIE {
        return Err(WireError::BadCookie);
    }
    let be16 = |at: usize| u16::from_be_bytes([bytes[at], bytes[at + 1]]);
    let addr = |at: usize| Ipv4Addr::new(bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]);

    let hlen = bytes[2];
    if hlen as usize > 16 {
        return Err(WireError::InvalidFrame(format!("hlen {hlen} > 16")));
    }
    let mut frame = DhcpFrame {
        op: bytes[0],
        htype: bytes[1],
        hlen,
        hops: bytes[3],
        xid: u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]),
        secs: be16(8),
        flags: be16(10),
        ciaddr: addr(12),
        yiaddr: addr(16),
        siaddr: addr(20),
        giaddr: addr(24),
        ..Default::default()
    };
    frame.chaddr.copy_from_slice(&bytes[28..44]);
    frame.sname.copy_from_slice(&bytes[44..108]);
    frame.file.copy_from_slice(&bytes[108..236]);

    let mut at = MIN_FRAME_LEN;
    while at < bytes.len() {
        let code = bytes[at];
        at += 1;
        match code {
            code::PAD => continue,
            code::END => break,
            _ => {}
        }
        let len = *bytes.get(at).ok_or(WireError::Truncated)? as usize;
        at += 1;
        let payload = bytes.get(at..at + len).ok_or(WireError::Truncated)?;
        at += len;
        if code == code::OVERLOAD {
            return Err(WireError::Unsupported(code::OVERLOAD));
        }
        frame.options.push(DhcpOption::new(code, payload));
    }
    Ok(frame)
}
