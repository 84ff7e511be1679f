//! Brute-force lease allocator used as an oracle for `LeasePool`.
//!
//! One slot per pool address, scanned linearly; no indexes, no maps.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;
use std::time::Duration;

use netforge_core::{MacAddr, Timestamp};

#[derive(Debug, Clone)]
pub struct ReferencePool {
    pub first: u32,
    pub ttl: Duration,
    pub slots: Vec<Option<(MacAddr, Timestamp)>>,
}

impl ReferencePool {
    pub fn new(first: Ipv4Addr, size: u32, ttl: Duration) -> Self {
        ReferencePool {
            first: u32::from(first),
            ttl,
            slots: vec![None; size as usize],
        }
    }

    fn addr(&self, i: usize) -> Ipv4Addr {
        Ipv4Addr::from(self.first + i as u32)
    }

    pub fn allocate(&mut self, mac: MacAddr, now: Timestamp) -> Option<Ipv4Addr> {
        for i in 0..self.slots.len() {
            if let Some((m, exp)) = self.slots[i] {
                if m == mac && exp > now {
                    return Some(self.addr(i));
                }
            }
        }
        for slot in self.slots.iter_mut() {
            if matches!(slot, Some((m, _)) if *m == mac) {
                *slot = None;
            }
        }
        for i in 0..self.slots.len() {
            let free = match self.slots[i] {
                None => true,
                Some((_, exp)) => exp <= now,
            };
            if free {
                self.slots[i] = Some((mac, now + self.ttl));
                return Some(self.addr(i));
            }
        }
        None
    }

    pub fn confirm(&mut self, mac: MacAddr, addr: Ipv4Addr, now: Timestamp) -> bool {
        let a = u32::from(addr);
        if a < self.first || (a - self.first) as usize >= self.slots.len() {
            return false;
        }
        let i = (a - self.first) as usize;
        match self.slots[i] {
            Some((m, exp)) if m == mac && exp > now => {
                self.slots[i] = Some((mac, now + self.ttl));
                true
            }
            _ => false,
        }
    }

    pub fn expire(&mut self, now: Timestamp) -> usize {
        let mut n = 0;
        for slot in self.slots.iter_mut() {
            if matches!(slot, Some((_, exp)) if *exp <= now) {
                *slot = None;
                n += 1;
            }
        }
        n
    }

    pub fn state(&self) -> BTreeSet<(MacAddr, Ipv4Addr, Timestamp)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|(m, e)| (m, self.addr(i), e)))
            .collect()
    }
}
