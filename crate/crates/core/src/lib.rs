//! Core building blocks of the netforge network-boot server.
//!
//! Everything in this crate is free of sockets and wall clocks: codecs are
//! pure functions, the DHCP and TFTP engines are state machines driven by
//! explicit events and an explicit `now`, and the catalog works on plain
//! directories. The `netforge` crate wires these into UDP listeners.

pub mod catalog;
pub mod clock;
pub mod dhcp;
pub mod digest;
pub mod mac;
pub mod nbp;
pub mod netsim;
pub mod sim;
pub mod tftp;
pub mod wire;

pub use clock::Timestamp;
pub use digest::Digest;
pub use mac::MacAddr;
