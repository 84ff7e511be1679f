use super::wire_block;
use crate::digest::{Digest, DigestWriter};
use crate::wire::tftp::{encode_tftp, TftpPacket, DEFAULT_BLOCK_SIZE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReceiverStep {
    /// Send these bytes (an ACK) to the server.
    Reply(Vec<u8>),
    /// Final block received; send the closing ACK.
    Finished(Vec<u8>),
    Ignore,
    Failed { code: u16, message: String },
}

/// Client side of a read transfer: reassembles DATA in order and produces
/// the ACKs. Duplicates of the last accepted block are re-acknowledged.
#[derive(Debug)]
pub struct TftpReceiver {
    block_size: usize,
    requested_block_size: usize,
    /// Absolute index of the next block expected.
    expected: u64,
    oack_seen: bool,
    tsize: Option<u64>,
    received: u64,
    data_packets: u64,
    digest: DigestWriter,
    keep: Option<Vec<u8>>,
    last_reply: Option<Vec<u8>>,
    done: bool,
}

impl TftpReceiver {
    /// `requested_block_size` is what the RRQ asked for; it only takes
    /// effect if the server acknowledges it.
    pub fn new(requested_block_size: usize, keep_data: bool) -> Self {
        TftpReceiver {
            block_size: DEFAULT_BLOCK_SIZE,
            requested_block_size,
            expected: 1,
            oack_seen: false,
            tsize: None,
            received: 0,
            data_packets: 0,
            digest: DigestWriter::new(),
            keep: keep_data.then(Vec::new),
            last_reply: None,
            done: false,
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn tsize(&self) -> Option<u64> {
        self.tsize
    }

    pub fn received_bytes(&self) -> u64 {
        self.received
    }

    pub fn data_packets(&self) -> u64 {
        self.data_packets
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// The last reply sent, for retransmission after a client timeout.
    pub fn last_reply(&self) -> Option<&[u8]> {
        self.last_reply.as_deref()
    }

    fn ack(&mut self, block: u16) -> Vec<u8> {
        let bytes = encode_tftp(&TftpPacket::Ack { block }).expect("ack encodes");
        self.last_reply = Some(bytes.clone());
        bytes
    }

    pub fn on_packet(&mut self, packet: &TftpPacket) -> ReceiverStep {
        match packet {
            TftpPacket::OptionAck { options } => {
                if self.expected != 1 {
                    return ReceiverStep::Ignore;
                }
                if !self.oack_seen {
                    self.oack_seen = true;
                    for (name, value) in options {
                        match name.to_ascii_lowercase().as_str() {
                            "blksize" => match value.parse::<usize>() {
                                Ok(v) if v >= 8 && v <= self.requested_block_size => {
                                    self.block_size = v
                                }
                                _ => {
                                    return ReceiverStep::Failed {
                                        code: 8,
                                        message: format!("bad blksize {value:?}"),
                                    }
                                }
                            },
                            "tsize" => self.tsize = value.parse().ok(),
                            _ => {}
                        }
                    }
                }
                ReceiverStep::Reply(self.ack(0))
            }
            TftpPacket::Data { block, payload } => {
                if *block == wire_block(self.expected) && !self.done {
                    if payload.len() > self.block_size {
                        return ReceiverStep::Failed {
                            code: 4,
                            message: "oversized data block".into(),
                        };
                    }
                    self.digest.update(payload);
                    if let Some(buf) = &mut self.keep {
                        buf.extend_from_slice(payload);
                    }
                    self.received += payload.len() as u64;
                    self.data_packets += 1;
                    self.expected += 1;
                    let ack = self.ack(*block);
                    if payload.len() < self.block_size {
                        self.done = true;
                        return ReceiverStep::Finished(ack);
                    }
                    ReceiverStep::Reply(ack)
                } else if self.expected > 1 && *block == wire_block(self.expected - 1) {
                    ReceiverStep::Reply(self.ack(*block))
                } else {
                    ReceiverStep::Ignore
                }
            }
            TftpPacket::Error { code, message } => ReceiverStep::Failed {
                code: *code,
                message: message.clone(),
            },
            _ => ReceiverStep::Ignore,
        }
    }

    /// Digest of everything received so far.
    pub fn digest(&self) -> Digest {
        self.digest.clone().finish()
    }

    pub fn into_data(self) -> Option<Vec<u8>> {
        self.keep
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(block: u16, len: usize) -> TftpPacket {
        TftpPacket::Data {
            block,
            payload: vec![block as u8; len],
        }
    }

    #[test]
    fn in_order_with_duplicates() {
        let mut r = TftpReceiver::new(512, true);
        assert!(matches!(r.on_packet(&data(1, 512)), ReceiverStep::Reply(_)));
        // duplicate of block 1 gets re-acked and not appended
        assert_eq!(
            r.on_packet(&data(1, 512)),
            ReceiverStep::Reply(vec![0, 4, 0, 1])
        );
        assert_eq!(r.on_packet(&data(5, 512)), ReceiverStep::Ignore);
        assert!(matches!(r.on_packet(&data(2, 10)), ReceiverStep::Finished(_)));
        assert!(r.is_done());
        assert_eq!(r.received_bytes(), 522);
        assert_eq!(r.data_packets(), 2);
        // final block repeated after completion is re-acked
        assert_eq!(r.on_packet(&data(2, 10)), ReceiverStep::Reply(vec![0, 4, 0, 2]));
        assert_eq!(r.into_data().unwrap().len(), 522);
    }

    #[test]
    fn option_ack_sets_block_size() {
        let mut r = TftpReceiver::new(1428, false);
        let oack = TftpPacket::OptionAck {
            options: vec![("blksize".into(), "1428".into()), ("tsize".into(), "3000".into())],
        };
        assert_eq!(r.on_packet(&oack), ReceiverStep::Reply(vec![0, 4, 0, 0]));
        assert_eq!(r.block_size(), 1428);
        assert_eq!(r.tsize(), Some(3000));
        assert!(matches!(r.on_packet(&data(1, 1428)), ReceiverStep::Reply(_)));
        assert_eq!(r.on_packet(&oack), ReceiverStep::Ignore);
    }

    #[test]
    fn larger_block_than_requested_fails() {
        let mut r = TftpReceiver::new(512, false);
        let oack = TftpPacket::OptionAck {
            options: vec![("blksize".into(), "1024".into())],
        };
        assert!(matches!(r.on_packet(&oack), ReceiverStep::Failed { code: 8, .. }));
    }

    #[test]
    fn error_packet_fails() {
        let mut r = TftpReceiver::new(512, false);
        assert_eq!(
            r.on_packet(&TftpPacket::error(1, "File not found")),
            ReceiverStep::Failed {
                code: 1,
                message: "File not found".into()
            }
        );
    }
}
