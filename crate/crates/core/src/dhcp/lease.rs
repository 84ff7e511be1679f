use std::collections::BTreeMap;
use std::net::Ipv4Addr;
use std::time::Duration;

use crate::clock::Timestamp;
use crate::mac::MacAddr;

pub const DEFAULT_LEASE_TTL: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PoolError {
    #[error("pool size must be at least 1")]
    Empty,
    #[error("pool starting at {first} with {size} addresses overflows the IPv4 space")]
    Overflow { first: Ipv4Addr, size: u32 },
    #[error("pool {first}+{size} leaves subnet {first}/{mask}")]
    OutsideSubnet {
        first: Ipv4Addr,
        mask: Ipv4Addr,
        size: u32,
    },
    #[error("no free address in pool")]
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lease {
    pub address: Ipv4Addr,
    pub expiry: Timestamp,
}

/// The allocatable address range and its MAC bindings.
///
/// A binding is live while `expiry > now`. Live bindings never share an
/// address and a MAC holds at most one binding.
#[derive(Debug, Clone)]
pub struct LeasePool {
    first: Ipv4Addr,
    mask: Ipv4Addr,
    size: u32,
    ttl: Duration,
    bindings: BTreeMap<MacAddr, Lease>,
    holders: BTreeMap<Ipv4Addr, MacAddr>,
}

impl LeasePool {
    pub fn new(first: Ipv4Addr, mask: Ipv4Addr, size: u32, ttl: Duration) -> Result<Self, PoolError> {
        if size == 0 {
            return Err(PoolError::Empty);
        }
        let start = u32::from(first);
        let last = start
            .checked_add(size - 1)
            .ok_or(PoolError::Overflow { first, size })?;
        let m = u32::from(mask);
        if start & m != last & m {
            return Err(PoolError::OutsideSubnet { first, mask, size });
        }
        Ok(LeasePool {
            first,
            mask,
            size,
            ttl,
            bindings: BTreeMap::new(),
            holders: BTreeMap::new(),
        })
    }

    pub fn first_address(&self) -> Ipv4Addr {
        self.first
    }

    pub fn subnet_mask(&self) -> Ipv4Addr {
        self.mask
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn lease_ttl(&self) -> Duration {
        self.ttl
    }

    pub fn contains(&self, addr: Ipv4Addr) -> bool {
        let a = u32::from(addr);
        let start = u32::from(self.first);
        a >= start && a - start < self.size
    }

    /// All bindings, including ones that have expired but not yet been swept.
    pub fn bindings(&self) -> impl Iterator<Item = (MacAddr, Lease)> + '_ {
        self.bindings.iter().map(|(m, l)| (*m, *l))
    }

    pub fn live_count(&self, now: Timestamp) -> usize {
        self.bindings.values().filter(|l| l.expiry > now).count()
    }

    pub fn lease_of(&self, mac: MacAddr, now: Timestamp) -> Option<Lease> {
        self.bindings.get(&mac).copied().filter(|l| l.expiry > now)
    }

    fn remove(&mut self, mac: MacAddr) {
        if let Some(lease) = self.bindings.remove(&mac) {
            self.holders.remove(&lease.address);
        }
    }

    /// Returns the MAC's live address, or binds the lowest free one.
    ///
    /// Addresses held only by expired bindings count as free; such stale
    /// bindings are evicted when their address is handed out.
    pub fn allocate(&mut self, mac: MacAddr, now: Timestamp) -> Result<Ipv4Addr, PoolError> {
        if let Some(lease) = self.lease_of(mac, now) {
            return Ok(lease.address);
        }
        self.remove(mac);
        let start = u32::from(self.first);
        let free = (0..self.size).map(|i| Ipv4Addr::from(start + i)).find(|a| {
            match self.holders.get(a) {
                None => true,
                Some(holder) => self.bindings[holder].expiry <= now,
            }
        });
        let address = free.ok_or(PoolError::Exhausted)?;
        if let Some(stale) = self.holders.get(&address).copied() {
            self.remove(stale);
        }
        self.bindings.insert(
            mac,
            Lease {
                address,
                expiry: now + self.ttl,
            },
        );
        self.holders.insert(address, mac);
        Ok(address)
    }

    /// Confirms a REQUEST: true and refreshed if `address` is the MAC's live binding.
    pub fn confirm(&mut self, mac: MacAddr, address: Ipv4Addr, now: Timestamp) -> bool {
        match self.bindings.get_mut(&mac) {
            Some(lease) if lease.expiry > now && lease.address == address => {
                lease.expiry = now + self.ttl;
                true
            }
            _ => false,
        }
    }

    /// Drops every binding with `expiry <= now`; returns how many went.
    pub fn expire(&mut self, now: Timestamp) -> usize {
        let dead: Vec<MacAddr> = self
            .bindings
            .iter()
            .filter(|(_, l)| l.expiry <= now)
            .map(|(m, _)| *m)
            .collect();
        for mac in &dead {
            self.remove(*mac);
        }
        dead.len()
    }
}
