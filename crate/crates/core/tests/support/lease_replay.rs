//! Randomized lease-event replay comparing the engine with [`ReferencePool`].

use std::collections::BTreeSet;
use std::net::Ipv4Addr;
use std::time::Duration;

use netforge_core::dhcp::{BootInfo, DhcpEngine, DhcpError, LeasePool, ServiceMode};
use netforge_core::wire::dhcp::{code, DhcpFrame, DhcpOption, MessageType};
use netforge_core::{MacAddr, Timestamp};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::reference_pool::ReferencePool;

pub const FIRST: Ipv4Addr = Ipv4Addr::new(10, 1, 0, 10);
const TTL: Duration = Duration::from_secs(30);

fn engine_state(e: &DhcpEngine) -> BTreeSet<(MacAddr, Ipv4Addr, Timestamp)> {
    e.pool()
        .unwrap()
        .bindings()
        .map(|(m, l)| (m, l.address, l.expiry))
        .collect()
}

pub fn frame(mac: MacAddr, kind: MessageType, requested: Option<Ipv4Addr>) -> DhcpFrame {
    let mut f = DhcpFrame::request(mac, 7, kind);
    f.options
        .push(DhcpOption::new(code::VENDOR_CLASS, &b"PXEClient"[..]));
    if let Some(a) = requested {
        f.options.push(DhcpOption::address(code::REQUESTED_ADDRESS, a));
    }
    f
}

/// Replays `events` random discover/request/expire events from `seed`
/// against the engine and the reference, asserting equal state after each.
pub fn run_sequence(seed: u64, events: usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    let size = rng.gen_range(1..12u32);
    let macs = rng.gen_range(1..20u32);
    let pool = LeasePool::new(FIRST, Ipv4Addr::new(255, 255, 0, 0), size, TTL).unwrap();
    let mut engine = DhcpEngine::new(ServiceMode::FullDhcp(pool), BootInfo::with_defaults(FIRST));
    let mut reference = ReferencePool::new(FIRST, size, TTL);
    let mut now = Timestamp::ZERO;

    for step in 0..events {
        now = now + Duration::from_millis(rng.gen_range(0..4000));
        let mac = MacAddr::fleet(rng.gen_range(0..macs));
        match rng.gen_range(0..10) {
            0..=4 => {
                let got = engine.handle_discover(&frame(mac, MessageType::Discover, None), now);
                let want = reference.allocate(mac, now);
                match (got, want) {
                    (Ok(Some(offer)), Some(addr)) => assert_eq!(offer.yiaddr, addr, "seed {seed} step {step}"),
                    (Err(DhcpError::PoolExhausted), None) => {}
                    (g, w) => panic!("seed {seed} step {step}: engine {g:?} vs reference {w:?}"),
                }
            }
            5..=7 => {
                let requested = if rng.gen_bool(0.7) {
                    reference
                        .state()
                        .iter()
                        .find(|(m, ..)| *m == mac)
                        .map(|(_, a, _)| *a)
                        .unwrap_or(FIRST)
                } else {
                    Ipv4Addr::from(u32::from(FIRST) + rng.gen_range(0..size + 2))
                };
                let reply = engine
                    .handle_request(&frame(mac, MessageType::Request, Some(requested)), now)
                    .unwrap()
                    .unwrap();
                let ok = reference.confirm(mac, requested, now);
                let expected = if ok { MessageType::Ack } else { MessageType::Nak };
                assert_eq!(reply.message_type(), Some(expected), "seed {seed} step {step}");
            }
            _ => {
                assert_eq!(engine.expire_leases(now), reference.expire(now), "seed {seed} step {step}");
            }
        }
        assert_eq!(engine_state(&engine), reference.state(), "seed {seed} step {step}");
        let live: Vec<Ipv4Addr> = reference
            .state()
            .iter()
            .filter(|(_, _, e)| *e > now)
            .map(|(_, a, _)| *a)
            .collect();
        let distinct: BTreeSet<_> = live.iter().collect();
        assert_eq!(distinct.len(), live.len());
    }
}
