//! UDP socket wrapper that runs every datagram through a [`FaultInjector`].
//!
//! Outbound faults apply on send, inbound faults on receive, so a single
//! wrapper on the client side models a lossy link in both directions.

use std::collections::VecDeque;
use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use netforge_core::netsim::{Direction, FaultInjector, FaultPlan, FaultRecord, FaultStats};

const MAX_DATAGRAM: usize = 65536;

pub struct FaultySocket {
    socket: UdpSocket,
    injector: FaultInjector,
    inbound: VecDeque<(Vec<u8>, SocketAddr)>,
    held_in: Option<(Vec<u8>, SocketAddr)>,
    held_out: Option<(Vec<u8>, SocketAddr)>,
}

impl FaultySocket {
    pub fn new(socket: UdpSocket, plan: FaultPlan, stream: u64) -> Self {
        FaultySocket {
            socket,
            injector: FaultInjector::new(plan, stream),
            inbound: VecDeque::new(),
            held_in: None,
            held_out: None,
        }
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn stats(&self) -> FaultStats {
        self.injector.stats()
    }

    pub fn fault_log(&self) -> &[FaultRecord] {
        self.injector.log()
    }

    pub fn send_to(&mut self, bytes: &[u8], to: SocketAddr) -> io::Result<()> {
        let verdict = self.injector.decide(Direction::Outbound, bytes);
        if verdict.dropped() {
            return Ok(());
        }
        if verdict.delayed && self.held_out.is_none() {
            self.held_out = Some((bytes.to_vec(), to));
            return Ok(());
        }
        for _ in 0..verdict.copies {
            self.socket.send_to(bytes, to)?;
        }
        if let Some((held, addr)) = self.held_out.take() {
            self.socket.send_to(&held, addr)?;
        }
        Ok(())
    }

    /// Waits up to `timeout` for a datagram that survives the inbound faults.
    pub fn recv_from(&mut self, timeout: Duration) -> io::Result<Option<(Vec<u8>, SocketAddr)>> {
        let deadline = Instant::now() + timeout;
        let mut buf = vec![0u8; MAX_DATAGRAM];
        loop {
            if let Some(p) = self.inbound.pop_front() {
                return Ok(Some(p));
            }
            let now = Instant::now();
            if now >= deadline {
                // A held packet is released once the link goes quiet.
                if let Some(p) = self.held_in.take() {
                    return Ok(Some(p));
                }
                if let Some((held, addr)) = self.held_out.take() {
                    self.socket.send_to(&held, addr)?;
                }
                return Ok(None);
            }
            self.socket.set_read_timeout(Some((deadline - now).max(Duration::from_millis(1))))?;
            let (n, from) = match self.socket.recv_from(&mut buf) {
                Ok(r) => r,
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
                // ICMP port-unreachable from an earlier send surfaces here on Linux.
                Err(e) if e.kind() == io::ErrorKind::ConnectionRefused => continue,
                Err(e) => return Err(e),
            };
            let packet = buf[..n].to_vec();
            let verdict = self.injector.decide(Direction::Inbound, &packet);
            if verdict.dropped() {
                continue;
            }
            if verdict.delayed && self.held_in.is_none() {
                self.held_in = Some((packet, from));
                continue;
            }
            for _ in 0..verdict.copies {
                self.inbound.push_back((packet.clone(), from));
            }
            if let Some(p) = self.held_in.take() {
                self.inbound.push_back(p);
            }
        }
    }
}
