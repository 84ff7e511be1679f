//! Discrete-event simulation of one TFTP read over a faulty link.
//!
//! Both ends run the real engine code ([`TftpSession`], [`TftpReceiver`])
//! on a virtual millisecond clock, with every packet passing through a
//! [`FaultInjector`]. Used by the test suites and the browser demo.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4};
use std::time::Duration;

use crate::clock::Timestamp;
use crate::digest::Digest;
use crate::netsim::{Direction, FaultInjector, FaultPlan, FaultStats};
use crate::tftp::{
    negotiate, AckOutcome, MemorySource, ReceiverStep, SessionConfig, SessionState, TftpReceiver,
    TftpSession,
};
use crate::wire::tftp::{decode_tftp, encode_tftp, TftpPacket, DEFAULT_BLOCK_SIZE};

#[derive(Debug, Clone, Copy)]
pub struct TransferParams {
    /// Block size the client asks for; 512 sends no option.
    pub block_size: usize,
    pub session: SessionConfig,
    pub client_timeout: Duration,
    pub client_retries: u32,
    pub latency: Duration,
    pub plan: FaultPlan,
    pub stream: u64,
}

impl Default for TransferParams {
    fn default() -> Self {
        TransferParams {
            block_size: DEFAULT_BLOCK_SIZE,
            session: SessionConfig::default(),
            client_timeout: Duration::from_millis(500),
            client_retries: 10,
            latency: Duration::from_millis(1),
            plan: FaultPlan::IDENTITY,
            stream: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub completed: bool,
    pub server_state: Option<SessionState>,
    pub failure: Option<String>,
    pub data_packets: u64,
    pub server_sends: u64,
    pub server_retransmissions: u64,
    pub client_retransmissions: u64,
    pub max_outstanding: usize,
    pub received_bytes: u64,
    pub digest: Digest,
    pub faults: FaultStats,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Hop {
    ToServer,
    ToClient,
}

/// (deliver_at, sequence, hop, bytes)
type InFlight = Reverse<(u64, u64, Hop, Vec<u8>)>;

struct Link {
    queue: BinaryHeap<InFlight>,
    seq: u64,
    injector: FaultInjector,
    latency: u64,
}

impl Link {
    fn send(&mut self, now: u64, hop: Hop, bytes: Vec<u8>) {
        let direction = match hop {
            Hop::ToServer => Direction::Outbound,
            Hop::ToClient => Direction::Inbound,
        };
        let verdict = self.injector.decide(direction, &bytes);
        let mut at = now + self.latency;
        if verdict.delayed {
            at += 2 * self.latency.max(1);
        }
        for copy in 0..verdict.copies {
            self.seq += 1;
            self.queue
                .push(Reverse((at + copy as u64, self.seq, hop, bytes.clone())));
        }
    }
}

/// Transfers `data` from a simulated server to a simulated client.
pub fn simulate_transfer(data: &[u8], params: &TransferParams) -> TransferReport {
    let peer = SocketAddr::V4(SocketAddrV4::new(Ipv4Addr::LOCALHOST, 1069));
    let mut link = Link {
        queue: BinaryHeap::new(),
        seq: 0,
        injector: FaultInjector::new(params.plan, params.stream),
        latency: params.latency.as_millis() as u64,
    };
    let options = if params.block_size != DEFAULT_BLOCK_SIZE {
        vec![
            ("blksize".to_string(), params.block_size.to_string()),
            ("tsize".to_string(), "0".to_string()),
        ]
    } else {
        Vec::new()
    };
    let rrq = TftpPacket::ReadRequest {
        filename: "payload".into(),
        mode: "octet".into(),
        options,
    };
    let rrq_bytes = encode_tftp(&rrq).expect("rrq encodes");

    let mut receiver = TftpReceiver::new(params.block_size, false);
    let mut session: Option<TftpSession> = None;
    let mut failure = None;
    let mut server_sends = 0u64;
    let mut client_retransmissions = 0u64;
    let mut unacked: BTreeSet<u16> = BTreeSet::new();
    let mut max_outstanding = 0usize;

    let client_timeout = params.client_timeout.as_millis() as u64;
    let mut client_last = 0u64;
    let mut client_retries_left = params.client_retries;
    let mut client_failed = false;
    let hard_stop = 24 * 3600 * 1000u64;

    let mut now = 0u64;
    link.send(now, Hop::ToServer, rrq_bytes.clone());

    let track_send = |bytes: &[u8], unacked: &mut BTreeSet<u16>, max: &mut usize| {
        if let Ok(TftpPacket::Data { block, .. }) = decode_tftp(bytes) {
            unacked.insert(block);
            *max = (*max).max(unacked.len());
        }
    };

    loop {
        let server_active = session
            .as_ref()
            .is_some_and(|s| s.state() == SessionState::Transferring);
        if client_failed || (receiver.is_done() && !server_active) || now > hard_stop {
            break;
        }
        let next_packet = link.queue.peek().map(|Reverse((t, ..))| *t);
        let server_deadline = session
            .as_ref()
            .filter(|s| s.state() == SessionState::Transferring)
            .map(|s| s.deadline().as_millis());
        let client_deadline = (!receiver.is_done()).then_some(client_last + client_timeout);
        let Some(next) = [next_packet, server_deadline, client_deadline]
            .into_iter()
            .flatten()
            .min()
        else {
            break;
        };
        now = now.max(next);
        let ts = Timestamp::from_millis(now);

        if next_packet == Some(next) {
            let Reverse((_, _, hop, bytes)) = link.queue.pop().expect("peeked");
            let Ok(packet) = decode_tftp(&bytes) else { continue };
            match hop {
                Hop::ToServer => match (&mut session, &packet) {
                    (None, TftpPacket::ReadRequest { .. }) => {
                        match negotiate(&packet, data.len() as u64, &params.session) {
                            Ok(n) => {
                                let (mut s, _first) = TftpSession::start(
                                    peer,
                                    "payload".into(),
                                    Box::new(MemorySource::new(data.to_vec())),
                                    n,
                                    params.session.retries,
                                    ts,
                                )
                                .expect("memory source opens");
                                let out = s.outstanding().to_vec();
                                s.mark_sent(ts);
                                track_send(&out, &mut unacked, &mut max_outstanding);
                                server_sends += 1;
                                link.send(now, Hop::ToClient, out);
                                session = Some(s);
                            }
                            Err(e) => {
                                failure = Some(e.to_string());
                                break;
                            }
                        }
                    }
                    (Some(s), TftpPacket::Ack { block }) => {
                        match s.handle_ack(*block, ts).expect("memory source reads") {
                            AckOutcome::Send(out) => {
                                unacked.remove(block);
                                track_send(&out, &mut unacked, &mut max_outstanding);
                                server_sends += 1;
                                link.send(now, Hop::ToClient, out);
                            }
                            AckOutcome::Complete => {
                                unacked.remove(block);
                            }
                            AckOutcome::Ignored => {}
                        }
                    }
                    (Some(s), TftpPacket::Error { .. }) => s.abort(),
                    _ => {}
                },
                Hop::ToClient => {
                    client_last = now;
                    client_retries_left = params.client_retries;
                    match receiver.on_packet(&packet) {
                        ReceiverStep::Reply(ack) | ReceiverStep::Finished(ack) => {
                            link.send(now, Hop::ToServer, ack)
                        }
                        ReceiverStep::Ignore => {}
                        ReceiverStep::Failed { code, message } => {
                            failure = Some(format!("error {code}: {message}"));
                            client_failed = true;
                        }
                    }
                }
            }
            continue;
        }

        if server_deadline == Some(next) {
            if let Some(s) = &mut session {
                match s.handle_timeout(ts) {
                    Ok(Some(out)) => {
                        server_sends += 1;
                        link.send(now, Hop::ToClient, out);
                    }
                    Ok(None) => {}
                    Err(dead) => {
                        link.send(now, Hop::ToClient, dead.final_packet);
                        if !receiver.is_done() {
                            failure = Some("server retries exhausted".into());
                        }
                    }
                }
            }
            continue;
        }

        if client_deadline == Some(next) {
            client_last = now;
            if client_retries_left == 0 {
                failure = Some("client gave up waiting".into());
                client_failed = true;
                continue;
            }
            client_retries_left -= 1;
            client_retransmissions += 1;
            let again = receiver
                .last_reply()
                .map(<[u8]>::to_vec)
                .unwrap_or_else(|| rrq_bytes.clone());
            link.send(now, Hop::ToServer, again);
        }
    }

    TransferReport {
        completed: receiver.is_done() && !client_failed,
        server_state: session.as_ref().map(|s| s.state()),
        failure: if receiver.is_done() { None } else { failure.or(Some("incomplete".into())) },
        data_packets: receiver.data_packets(),
        server_sends,
        server_retransmissions: session.as_ref().map_or(0, |s| s.retransmissions()),
        client_retransmissions,
        max_outstanding,
        received_bytes: receiver.received_bytes(),
        digest: receiver.digest(),
        faults: link.injector.stats(),
        elapsed: Duration::from_millis(now),
    }
}
