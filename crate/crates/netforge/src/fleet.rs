//! Runs many simulated clients against one server.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use netforge_core::netsim::FaultPlan;
use netforge_core::MacAddr;

use crate::client::{run_client, ClientConfig, ClientReport, Selection};
use crate::log::Logger;

pub const DEFAULT_CONCURRENCY: usize = 16;

#[derive(Debug, Clone)]
pub struct FleetReport {
    /// In client index order.
    pub reports: Vec<ClientReport>,
}

impl FleetReport {
    pub fn successes(&self) -> usize {
        self.reports.iter().filter(|r| r.is_success()).count()
    }

    pub fn all_succeeded(&self) -> bool {
        self.successes() == self.reports.len()
    }

    /// Addresses bound by more than one client.
    pub fn duplicate_leases(&self) -> Vec<Ipv4Addr> {
        let mut seen: BTreeMap<Ipv4Addr, usize> = BTreeMap::new();
        for lease in self.reports.iter().filter_map(|r| r.lease) {
            *seen.entry(lease).or_default() += 1;
        }
        seen.into_iter().filter(|(_, n)| *n > 1).map(|(a, _)| a).collect()
    }

    pub fn leases_distinct(&self) -> bool {
        self.duplicate_leases().is_empty()
    }
}

/// MAC of fleet member `index` (0-based).
pub fn fleet_mac(index: usize) -> MacAddr {
    MacAddr::fleet(index as u32 + 1)
}

/// Runs `count` clients, at most `concurrency` at a time. Client failures
/// are recorded in their reports; the fleet always runs to completion.
pub fn run_fleet(
    count: usize,
    select: impl Fn(usize) -> Selection + Sync,
    plan: FaultPlan,
    deadline: Duration,
    cfg: &ClientConfig,
    log: &Logger,
    concurrency: usize,
) -> FleetReport {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<ClientReport>>> = Mutex::new(vec![None; count]);
    let workers = concurrency.clamp(1, count.max(1));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= count {
                    break;
                }
                let report = run_client(fleet_mac(i), &select(i), plan, deadline, cfg, log);
                results.lock().unwrap()[i] = Some(report);
            });
        }
    });
    let reports = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every index is run exactly once"))
        .collect();
    FleetReport { reports }
}
