#![allow(dead_code)]

pub mod generators;
pub mod lease_replay;
pub mod reference_pool;
pub mod trees;
