use std::time::Duration;

use super::*;
use crate::wire::dhcp::{encode_dhcp, OP_REPLY};

const SERVER: Ipv4Addr = Ipv4Addr::new(192, 168, 0, 2);

fn boot() -> BootInfo {
    BootInfo::with_defaults(SERVER)
}

fn lab_pool() -> LeasePool {
    LeasePool::new(
        Ipv4Addr::new(192, 168, 0, 100),
        Ipv4Addr::new(255, 255, 255, 0),
        50,
        DEFAULT_LEASE_TTL,
    )
    .unwrap()
}

fn full() -> DhcpEngine {
    DhcpEngine::new(ServiceMode::FullDhcp(lab_pool()), boot())
}

fn proxy() -> DhcpEngine {
    DhcpEngine::new(ServiceMode::ProxyDhcp, boot())
}

fn discover(mac: MacAddr, pxe: bool) -> DhcpFrame {
    let mut f = DhcpFrame::request(mac, 0xCAFE_0000 | mac.0[5] as u32, MessageType::Discover);
    if pxe {
        f.options.push(DhcpOption::new(
            code::VENDOR_CLASS,
            &b"PXEClient:Arch:00000:UNDI:002001"[..],
        ));
    }
    f
}

fn request(mac: MacAddr, addr: Ipv4Addr, pxe: bool) -> DhcpFrame {
    let mut f = discover(mac, pxe);
    f.set_option(DhcpOption::message_type(MessageType::Request));
    f.set_option(DhcpOption::address(code::REQUESTED_ADDRESS, addr));
    f
}

#[test]
fn pxe_discover_full_mode_offers_first_address_and_boot_fields() {
    let mut e = full();
    let req = discover(MacAddr::fleet(1), true);
    let offer = e.handle_discover(&req, Timestamp::ZERO).unwrap().unwrap();
    assert_eq!(offer.op, OP_REPLY);
    assert_eq!(offer.xid, req.xid);
    assert_eq!(offer.message_type(), Some(MessageType::Offer));
    assert_eq!(offer.yiaddr, Ipv4Addr::new(192, 168, 0, 100));
    assert_eq!(offer.siaddr, SERVER);
    assert_eq!(offer.file_name(), DEFAULT_NBP_PATH);
    assert_eq!(offer.address_option(code::SUBNET_MASK), Some(Ipv4Addr::new(255, 255, 255, 0)));
    assert_eq!(offer.address_option(code::SERVER_ID), Some(SERVER));
    assert!(offer.is_pxe());
}

#[test]
fn pxe_discover_proxy_mode_offers_no_address() {
    let mut e = proxy();
    let offer = e
        .handle_discover(&discover(MacAddr::fleet(1), true), Timestamp::ZERO)
        .unwrap()
        .unwrap();
    assert_eq!(offer.yiaddr, Ipv4Addr::UNSPECIFIED);
    assert_eq!(offer.siaddr, SERVER);
    assert_eq!(offer.file_name(), DEFAULT_NBP_PATH);
    let codes: Vec<u8> = offer.options.iter().map(|o| o.code).collect();
    assert_eq!(codes, vec![code::MESSAGE_TYPE, code::SERVER_ID, code::VENDOR_CLASS]);
}

#[test]
fn plain_discover() {
    assert!(proxy()
        .handle_discover(&discover(MacAddr::fleet(1), false), Timestamp::ZERO)
        .unwrap()
        .is_none());
    let offer = full()
        .handle_discover(&discover(MacAddr::fleet(1), false), Timestamp::ZERO)
        .unwrap()
        .unwrap();
    assert_eq!(offer.yiaddr, Ipv4Addr::new(192, 168, 0, 100));
    assert_eq!(offer.siaddr, Ipv4Addr::UNSPECIFIED);
    assert_eq!(offer.file_name(), "");
    assert!(!offer.is_pxe());
}

#[test]
fn fifty_first_mac_exhausts_pool() {
    let mut e = full();
    for i in 0..50 {
        e.handle_discover(&discover(MacAddr::fleet(i), true), Timestamp::ZERO)
            .unwrap()
            .unwrap();
    }
    assert_eq!(
        e.handle_discover(&discover(MacAddr::fleet(50), true), Timestamp::ZERO),
        Err(DhcpError::PoolExhausted)
    );
}

#[test]
fn repeated_discover_is_idempotent() {
    let mut e = full();
    let mac = MacAddr::fleet(4);
    e.handle_discover(&discover(MacAddr::fleet(9), true), Timestamp::ZERO).unwrap();
    let a = e.handle_discover(&discover(mac, true), Timestamp::ZERO).unwrap().unwrap();
    let b = e
        .handle_discover(&discover(mac, true), Timestamp::from_secs(5))
        .unwrap()
        .unwrap();
    assert_eq!(a.yiaddr, b.yiaddr);
}

#[test]
fn request_ack_and_nak() {
    let mut e = full();
    let mac = MacAddr::fleet(1);
    let offer = e.handle_discover(&discover(mac, true), Timestamp::ZERO).unwrap().unwrap();
    let ack = e
        .handle_request(&request(mac, offer.yiaddr, true), Timestamp::from_secs(1))
        .unwrap()
        .unwrap();
    assert_eq!(ack.message_type(), Some(MessageType::Ack));
    assert_eq!(ack.yiaddr, offer.yiaddr);
    assert_eq!(ack.file_name(), DEFAULT_NBP_PATH);
    assert_eq!(
        e.pool().unwrap().lease_of(mac, Timestamp::from_secs(1)).unwrap().expiry,
        Timestamp::from_secs(1) + DEFAULT_LEASE_TTL
    );

    let nak = e
        .handle_request(&request(mac, Ipv4Addr::new(192, 168, 0, 140), true), Timestamp::from_secs(1))
        .unwrap()
        .unwrap();
    assert_eq!(nak.message_type(), Some(MessageType::Nak));
    assert_eq!(nak.yiaddr, Ipv4Addr::UNSPECIFIED);

    let stranger = e
        .handle_request(&request(MacAddr::fleet(2), offer.yiaddr, true), Timestamp::from_secs(1))
        .unwrap()
        .unwrap();
    assert_eq!(stranger.message_type(), Some(MessageType::Nak));
}

#[test]
fn request_for_other_server_is_ignored() {
    let mut e = full();
    let mac = MacAddr::fleet(1);
    let offer = e.handle_discover(&discover(mac, true), Timestamp::ZERO).unwrap().unwrap();
    let mut req = request(mac, offer.yiaddr, true);
    req.set_option(DhcpOption::address(code::SERVER_ID, Ipv4Addr::new(10, 9, 9, 9)));
    assert!(e.handle_request(&req, Timestamp::ZERO).unwrap().is_none());
}

#[test]
fn proxy_never_acks_requests() {
    let mut e = proxy();
    let req = request(MacAddr::fleet(1), Ipv4Addr::new(192, 168, 0, 100), true);
    assert!(e.handle_request(&req, Timestamp::ZERO).unwrap().is_none());
    assert!(e.handle(&req, Timestamp::ZERO).unwrap().is_none());
}

#[test]
fn boot_service_answer() {
    let e = proxy();
    let req = request(MacAddr::fleet(3), Ipv4Addr::UNSPECIFIED, true);
    let digest = Digest::of(b"catalog");
    let ack = e.handle_boot_service(&req, &digest).unwrap();
    assert_eq!(ack.file_name(), "WIA_WDS/nbp.bin");
    assert_eq!(ack.siaddr, SERVER);
    assert_eq!(ack.xid, req.xid);
    let (path, d) = parse_menu_option(ack.option(code::MENU_INFO).unwrap()).unwrap();
    assert_eq!(path, DEFAULT_MENU_PATH);
    assert_eq!(d, digest);

    let again = e.handle_boot_service(&req, &digest).unwrap();
    assert_eq!(encode_dhcp(&ack).unwrap(), encode_dhcp(&again).unwrap());

    let plain = request(MacAddr::fleet(3), Ipv4Addr::UNSPECIFIED, false);
    assert_eq!(e.handle_boot_service(&plain, &digest), Err(DhcpError::NotPxe));
}

#[test]
fn allow_list_withholds_replies() {
    let mut e = full().with_allow_list([MacAddr::fleet(1)]);
    assert!(e.handle_discover(&discover(MacAddr::fleet(1), true), Timestamp::ZERO).is_ok());
    assert_eq!(
        e.handle_discover(&discover(MacAddr::fleet(2), true), Timestamp::ZERO),
        Err(DhcpError::NotAllowed(MacAddr::fleet(2)))
    );
    let req = request(MacAddr::fleet(2), Ipv4Addr::UNSPECIFIED, true);
    assert_eq!(
        e.handle_boot_service(&req, &Digest::default()),
        Err(DhcpError::NotAllowed(MacAddr::fleet(2)))
    );
}

#[test]
fn expire_then_reuse_lowest() {
    let mut e = full();
    let t0 = Timestamp::ZERO;
    for i in 0..3 {
        e.handle_discover(&discover(MacAddr::fleet(i), true), t0).unwrap();
    }
    assert_eq!(e.expire_leases(t0 + Duration::from_secs(3599)), 0);
    assert_eq!(e.expire_leases(t0 + DEFAULT_LEASE_TTL), 3);
    assert_eq!(e.expire_leases(t0 + DEFAULT_LEASE_TTL), 0);
    let offer = e
        .handle_discover(&discover(MacAddr::fleet(77), true), t0 + DEFAULT_LEASE_TTL)
        .unwrap()
        .unwrap();
    assert_eq!(offer.yiaddr, Ipv4Addr::new(192, 168, 0, 100));
    assert_eq!(proxy().expire_leases(t0), 0);
}

#[test]
fn boot_paths_must_stay_inside_root() {
    assert!(BootInfo::new(SERVER, "WIA_WDS/nbp.bin", "WIA_WDS/menu.txt").is_ok());
    for bad in ["../nbp.bin", "/abs/nbp.bin", "a/../../b", "", "a\\b"] {
        assert!(matches!(
            BootInfo::new(SERVER, bad, "WIA_WDS/menu.txt"),
            Err(DhcpError::BadBootPath(_))
        ));
    }
}
