//! A plain DHCP server that hands out addresses and nothing else, standing
//! in for the site's primary DHCP server next to a proxyDHCP.

use std::collections::HashMap;
use std::net::{Ipv4Addr, SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use netforge_core::wire::dhcp::{code, decode_dhcp, encode_dhcp, DhcpFrame, DhcpOption, MessageType, OP_REQUEST};
use netforge_core::MacAddr;

pub const STUB_SERVER_ID: Ipv4Addr = Ipv4Addr::new(10, 9, 0, 1);
pub const STUB_FIRST: Ipv4Addr = Ipv4Addr::new(10, 9, 0, 10);

pub struct StubDhcp {
    pub addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
    bindings: Arc<Mutex<HashMap<MacAddr, Ipv4Addr>>>,
}

impl StubDhcp {
    pub fn start() -> StubDhcp {
        let socket = UdpSocket::bind((Ipv4Addr::LOCALHOST, 0)).unwrap();
        socket.set_read_timeout(Some(Duration::from_millis(50))).unwrap();
        let addr = socket.local_addr().unwrap();
        let stop = Arc::new(AtomicBool::new(false));
        let bindings = Arc::new(Mutex::new(HashMap::new()));
        let (s, b) = (stop.clone(), bindings.clone());
        let thread = thread::spawn(move || serve(socket, s, b));
        StubDhcp {
            addr,
            stop,
            thread: Some(thread),
            bindings,
        }
    }

    pub fn bindings(&self) -> HashMap<MacAddr, Ipv4Addr> {
        self.bindings.lock().unwrap().clone()
    }
}

impl Drop for StubDhcp {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn serve(socket: UdpSocket, stop: Arc<AtomicBool>, bindings: Arc<Mutex<HashMap<MacAddr, Ipv4Addr>>>) {
    let mut buf = [0u8; 2048];
    while !stop.load(Ordering::SeqCst) {
        let Ok((n, from)) = socket.recv_from(&mut buf) else {
            continue;
        };
        let Ok(frame) = decode_dhcp(&buf[..n]) else {
            continue;
        };
        let Some(mac) = frame.mac() else { continue };
        if frame.op != OP_REQUEST {
            continue;
        }
        let reply_type = match frame.message_type() {
            Some(MessageType::Discover) => MessageType::Offer,
            Some(MessageType::Request)
                if frame.address_option(code::SERVER_ID) == Some(STUB_SERVER_ID) =>
            {
                MessageType::Ack
            }
            _ => continue,
        };
        let address = {
            let mut b = bindings.lock().unwrap();
            let next = u32::from(STUB_FIRST) + b.len() as u32;
            *b.entry(mac).or_insert(Ipv4Addr::from(next))
        };
        let mut reply = DhcpFrame::reply_to(&frame);
        reply.yiaddr = address;
        reply.options.push(DhcpOption::message_type(reply_type));
        reply.options.push(DhcpOption::address(code::SERVER_ID, STUB_SERVER_ID));
        reply
            .options
            .push(DhcpOption::address(code::SUBNET_MASK, Ipv4Addr::new(255, 255, 255, 0)));
        reply.options.push(DhcpOption::new(code::LEASE_TIME, 600u32.to_be_bytes()));
        let _ = socket.send_to(&encode_dhcp(&reply).unwrap(), from);
    }
}
