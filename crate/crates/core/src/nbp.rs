//! The network bootstrap program served to clients.
//!
//! No real boot environment exists here, so the NBP is a small
//! self-verifying blob: magic, a text banner, then the SHA-256 of the
//! preceding bytes. Clients download it and check the seal.

use crate::digest::Digest;

pub const NBP_MAGIC: &[u8; 8] = b"NFNBP001";

pub fn build_stub() -> Vec<u8> {
    let mut out = NBP_MAGIC.to_vec();
    out.extend_from_slice(b"netforge network bootstrap stub\n");
    let seal = Digest::of(&out);
    out.extend_from_slice(seal.as_bytes());
    out
}

pub fn verify(bytes: &[u8]) -> bool {
    if bytes.len() < NBP_MAGIC.len() + 32 || !bytes.starts_with(NBP_MAGIC) {
        return false;
    }
    let (body, seal) = bytes.split_at(bytes.len() - 32);
    Digest::of(body).as_bytes() == seal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stub_verifies_and_detects_flips() {
        let stub = build_stub();
        assert!(verify(&stub));
        for i in 0..stub.len() {
            let mut bad = stub.clone();
            bad[i] ^= 0x01;
            assert!(!verify(&bad), "flip at {i} undetected");
        }
        assert!(!verify(b"short"));
    }
}
