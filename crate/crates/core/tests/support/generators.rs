//! Proptest strategies for canonical wire values.

use std::net::Ipv4Addr;

use netforge_core::wire::dhcp::{DhcpFrame, DhcpOption};
use netforge_core::wire::tftp::TftpPacket;
use proptest::collection::vec;
use proptest::prelude::*;

fn ipv4() -> impl Strategy<Value = Ipv4Addr> {
    any::<u32>().prop_map(Ipv4Addr::from)
}

fn option() -> impl Strategy<Value = DhcpOption> {
    (1u8..=254)
        .prop_filter("overload is unsupported", |c| *c != 52)
        .prop_flat_map(|code| vec(any::<u8>(), 0..=255).prop_map(move |p| DhcpOption::new(code, p)))
}

pub fn dhcp_frame() -> impl Strategy<Value = DhcpFrame> {
    (
        (any::<u8>(), any::<u8>(), 0u8..=16, any::<u8>()),
        (any::<u32>(), any::<u16>(), any::<u16>()),
        (ipv4(), ipv4(), ipv4(), ipv4()),
        vec(any::<u8>(), 16),
        vec(any::<u8>(), 64),
        vec(any::<u8>(), 128),
        vec(option(), 0..12),
    )
        .prop_map(
            |((op, htype, hlen, hops), (xid, secs, flags), (ci, yi, si, gi), ch, sname, file, options)| {
                let mut chaddr = [0u8; 16];
                chaddr[..hlen as usize].copy_from_slice(&ch[..hlen as usize]);
                DhcpFrame {
                    op,
                    htype,
                    hlen,
                    hops,
                    xid,
                    secs,
                    flags,
                    ciaddr: ci,
                    yiaddr: yi,
                    siaddr: si,
                    giaddr: gi,
                    chaddr,
                    sname: sname.try_into().unwrap(),
                    file: file.try_into().unwrap(),
                    options,
                }
            },
        )
}

pub fn text() -> impl Strategy<Value = String> {
    "[ -~]{0,24}"
}

fn options() -> impl Strategy<Value = Vec<(String, String)>> {
    vec((text(), text()), 0..5)
}

pub fn tftp_packet() -> impl Strategy<Value = TftpPacket> {
    prop_oneof![
        (text(), text(), options()).prop_map(|(filename, mode, options)| TftpPacket::ReadRequest {
            filename,
            mode,
            options
        }),
        (text(), text(), options()).prop_map(|(filename, mode, options)| TftpPacket::WriteRequest {
            filename,
            mode,
            options
        }),
        (any::<u16>(), vec(any::<u8>(), 0..=1500))
            .prop_map(|(block, payload)| TftpPacket::Data { block, payload }),
        any::<u16>().prop_map(|block| TftpPacket::Ack { block }),
        (any::<u16>(), text()).prop_map(|(code, message)| TftpPacket::Error { code, message }),
        options().prop_map(|options| TftpPacket::OptionAck { options }),
    ]
}
