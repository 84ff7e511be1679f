mod support;

use netforge_core::wire::{decode_dhcp, decode_tftp, encode_dhcp, encode_tftp};
use proptest::prelude::*;
use support::generators::{dhcp_frame, tftp_packet};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dhcp_round_trip(frame in dhcp_frame()) {
        let bytes = encode_dhcp(&frame).unwrap();
        prop_assert!(bytes.len() >= 300);
        prop_assert_eq!(&bytes[236..240], &[0x63, 0x82, 0x53, 0x63]);
        prop_assert_eq!(encode_dhcp(&frame).unwrap(), bytes.clone());
        prop_assert_eq!(decode_dhcp(&bytes).unwrap(), frame);
    }

    #[test]
    fn tftp_round_trip(packet in tftp_packet()) {
        let bytes = encode_tftp(&packet).unwrap();
        prop_assert_eq!(u16::from_be_bytes([bytes[0], bytes[1]]), packet.opcode());
        prop_assert_eq!(encode_tftp(&packet).unwrap(), bytes.clone());
        prop_assert_eq!(decode_tftp(&bytes).unwrap(), packet);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4000))]

    #[test]
    fn decoders_total_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..700)) {
        let _ = decode_dhcp(&bytes);
        let _ = decode_tftp(&bytes);
    }

    #[test]
    fn decoders_total_on_mutated_frames(
        frame in dhcp_frame(),
        flips in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..8),
        cut in any::<usize>(),
    ) {
        let mut bytes = encode_dhcp(&frame).unwrap();
        for (at, v) in flips {
            let i = at % bytes.len();
            bytes[i] = v;
        }
        let _ = decode_dhcp(&bytes);
        bytes.truncate(cut % (bytes.len() + 1));
        let _ = decode_dhcp(&bytes);
    }
}
