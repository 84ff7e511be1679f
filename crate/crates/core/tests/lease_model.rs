mod support;

use std::net::Ipv4Addr;

use netforge_core::dhcp::{BootInfo, DhcpEngine, ServiceMode};
use netforge_core::wire::dhcp::MessageType;
use netforge_core::{MacAddr, Timestamp};
use support::lease_replay::{frame, run_sequence, FIRST};

#[test]
fn engine_matches_reference_allocator() {
    for seed in 0..60 {
        run_sequence(seed, 500);
    }
}

#[test]
fn proxy_mode_never_assigns() {
    let mut engine = DhcpEngine::new(ServiceMode::ProxyDhcp, BootInfo::with_defaults(FIRST));
    for i in 0..100 {
        let offer = engine
            .handle_discover(&frame(MacAddr::fleet(i), MessageType::Discover, None), Timestamp::ZERO)
            .unwrap()
            .unwrap();
        assert_eq!(offer.yiaddr, Ipv4Addr::UNSPECIFIED);
        assert_eq!(offer.siaddr, FIRST);
        assert_eq!(offer.xid, 7);
    }
    assert!(engine.pool().is_none());
}
