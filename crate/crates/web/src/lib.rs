//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function returning
//! `Result<String, String>`, so the logic is testable natively.

use std::fmt::Write as _;
use std::net::Ipv4Addr;
use std::time::Duration;

use netforge_core::dhcp::LeasePool;
use netforge_core::netsim::FaultPlan;
use netforge_core::sim::{simulate_transfer, TransferParams};
use netforge_core::tftp::SessionConfig;
use netforge_core::wire::{decode_dhcp, decode_tftp, DhcpFrame, TftpPacket};
use netforge_core::{MacAddr, Timestamp};
use wasm_bindgen::prelude::*;

/// Decodes a hex-encoded DHCP frame or TFTP packet into a readable dump.
#[wasm_bindgen]
pub fn decode_frame(hex_text: &str) -> Result<String, JsError> {
    describe_frame(hex_text).map_err(|e| JsError::new(&e))
}

/// Replays a lease script against a pool starting at `first`.
#[wasm_bindgen]
pub fn lease_timeline(first: &str, size: u32, ttl_secs: u32, script: &str) -> Result<String, JsError> {
    run_lease_script(first, size, ttl_secs, script).map_err(|e| JsError::new(&e))
}

/// Simulates one TFTP read of `size` bytes over a lossy link.
#[wasm_bindgen]
pub fn simulate_tftp(
    size: u32,
    block_size: u32,
    drop: f64,
    duplicate: f64,
    reorder: u32,
    seed: u64,
) -> Result<String, JsError> {
    run_transfer(size, block_size, drop, duplicate, reorder, seed).map_err(|e| JsError::new(&e))
}

pub fn describe_frame(hex_text: &str) -> Result<String, String> {
    let cleaned: String = hex_text.chars().filter(|c| !c.is_whitespace() && *c != ':').collect();
    let bytes = hex::decode(&cleaned).map_err(|e| format!("not hex: {e}"))?;
    match decode_dhcp(&bytes) {
        Ok(frame) => Ok(describe_dhcp(&frame)),
        Err(dhcp_err) => match decode_tftp(&bytes) {
            Ok(packet) => Ok(describe_tftp(&packet)),
            Err(tftp_err) => Err(format!("not DHCP ({dhcp_err}) and not TFTP ({tftp_err})")),
        },
    }
}

fn describe_dhcp(f: &DhcpFrame) -> String {
    let mut out = String::new();
    let kind = f.message_type().map(|t| format!("{t:?}")).unwrap_or_else(|| "BOOTP".into());
    let _ = writeln!(out, "DHCP {kind} op={} xid={:#010x} flags={:#06x}", f.op, f.xid, f.flags);
    if let Some(mac) = f.mac() {
        let _ = writeln!(out, "chaddr  {mac}");
    }
    for (name, addr) in [("ciaddr", f.ciaddr), ("yiaddr", f.yiaddr), ("siaddr", f.siaddr), ("giaddr", f.giaddr)] {
        let _ = writeln!(out, "{name}  {addr}");
    }
    if !f.server_name().is_empty() {
        let _ = writeln!(out, "sname   {}", f.server_name());
    }
    if !f.file_name().is_empty() {
        let _ = writeln!(out, "file    {}", f.file_name());
    }
    let _ = writeln!(out, "pxe     {}", f.is_pxe());
    for opt in &f.options {
        let text = if opt.payload.iter().all(|b| b.is_ascii_graphic() || *b == b' ') && !opt.payload.is_empty() {
            format!("{:?}", String::from_utf8_lossy(&opt.payload))
        } else {
            hex::encode(&opt.payload)
        };
        let _ = writeln!(out, "option {:>3} ({} bytes) {text}", opt.code, opt.payload.len());
    }
    out
}

fn describe_tftp(p: &TftpPacket) -> String {
    match p {
        TftpPacket::ReadRequest { filename, mode, options } => {
            format!("TFTP RRQ {filename:?} mode={mode} options={options:?}")
        }
        TftpPacket::WriteRequest { filename, mode, options } => {
            format!("TFTP WRQ {filename:?} mode={mode} options={options:?}")
        }
        TftpPacket::Data { block, payload } => format!("TFTP DATA block={block} ({} bytes)", payload.len()),
        TftpPacket::Ack { block } => format!("TFTP ACK block={block}"),
        TftpPacket::Error { code, message } => format!("TFTP ERROR code={code} {message:?}"),
        TftpPacket::OptionAck { options } => format!("TFTP OACK {options:?}"),
    }
}

/// Script lines: `<secs> alloc <mac>`, `<secs> renew <mac> <addr>`, `<secs> expire`.
pub fn run_lease_script(first: &str, size: u32, ttl_secs: u32, script: &str) -> Result<String, String> {
    let first: Ipv4Addr = first.parse().map_err(|_| format!("bad pool start {first:?}"))?;
    let mask = Ipv4Addr::new(255, 255, 0, 0);
    let mut pool = LeasePool::new(first, mask, size, Duration::from_secs(ttl_secs.into()))
        .map_err(|e| e.to_string())?;
    let mut out = String::new();
    for (n, raw) in script.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let bad = || format!("line {}: cannot parse {line:?}", n + 1);
        let secs: u64 = words.first().and_then(|w| w.parse().ok()).ok_or_else(bad)?;
        let now = Timestamp::from_secs(secs);
        let mac = |i: usize| -> Result<MacAddr, String> {
            words.get(i).ok_or_else(bad)?.parse().map_err(|e| format!("line {}: {e}", n + 1))
        };
        let result = match words.get(1).copied() {
            Some("alloc") => {
                let m = mac(2)?;
                match pool.allocate(m, now) {
                    Ok(a) => format!("{m} -> {a}"),
                    Err(e) => format!("{m}: {e}"),
                }
            }
            Some("renew") => {
                let m = mac(2)?;
                let addr: Ipv4Addr = words.get(3).and_then(|w| w.parse().ok()).ok_or_else(bad)?;
                if pool.confirm(m, addr, now) {
                    format!("{m} renewed {addr}")
                } else {
                    format!("{m} NAK {addr}")
                }
            }
            Some("expire") => format!("expired {}", pool.expire(now)),
            _ => return Err(bad()),
        };
        let _ = writeln!(out, "t={secs:>6}s  {result:<40} live={}", pool.live_count(now));
    }
    Ok(out)
}

pub fn run_transfer(
    size: u32,
    block_size: u32,
    drop: f64,
    duplicate: f64,
    reorder: u32,
    seed: u64,
) -> Result<String, String> {
    if !(8..=65464).contains(&block_size) {
        return Err(format!("block size {block_size} outside 8..=65464"));
    }
    let plan = FaultPlan::new(drop, duplicate, reorder, seed).map_err(|e| e.to_string())?;
    let data: Vec<u8> = (0..size).map(|i| (i.wrapping_mul(2_654_435_761) >> 13) as u8).collect();
    let params = TransferParams {
        block_size: block_size as usize,
        session: SessionConfig {
            block_size: block_size as usize,
            timeout: Duration::from_millis(200),
            retries: 5,
        },
        client_timeout: Duration::from_millis(100),
        client_retries: 40,
        latency: Duration::from_millis(5),
        plan,
        stream: seed,
    };
    let r = simulate_transfer(&data, &params);
    let mut out = String::new();
    let verdict = if r.completed { "completed" } else { "FAILED" };
    let _ = writeln!(out, "transfer {verdict} in {} ms (virtual)", r.elapsed.as_millis());
    if let Some(why) = &r.failure {
        let _ = writeln!(out, "failure: {why}");
    }
    let _ = writeln!(out, "data packets accepted   {}", r.data_packets);
    let _ = writeln!(out, "server sends            {}", r.server_sends);
    let _ = writeln!(out, "server retransmissions  {}", r.server_retransmissions);
    let _ = writeln!(out, "client retransmissions  {}", r.client_retransmissions);
    let _ = writeln!(out, "max outstanding         {}", r.max_outstanding);
    let _ = writeln!(
        out,
        "link: {} packets, {} dropped, {} duplicated, {} delayed",
        r.faults.packets, r.faults.dropped, r.faults.duplicated, r.faults.delayed
    );
    let _ = writeln!(out, "received {} of {size} bytes", r.received_bytes);
    let expected = netforge_core::Digest::of(&data);
    let _ = writeln!(
        out,
        "sha256 {} ({})",
        r.digest,
        if r.digest == expected { "matches" } else { "MISMATCH" }
    );
    Ok(out)
}
