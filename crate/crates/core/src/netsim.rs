//! Seeded fault injection for the simulated network path.
//!
//! Verdicts are a pure function of (seed, stream, direction, packet bytes,
//! occurrence number), so the same seed drops the same packets on every run
//! regardless of thread scheduling or wall-clock timing. Retransmissions of
//! identical bytes get fresh verdicts through the occurrence counter.

use std::collections::HashMap;

use sha2::{Digest as _, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid fault plan: {0}")]
pub struct InvalidPlan(pub String);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultPlan {
    pub drop: f64,
    pub duplicate: f64,
    /// When non-zero, every `reorder_window`-th packet in a direction is
    /// held back and delivered after the packet that follows it.
    pub reorder_window: u32,
    pub seed: u64,
}

impl Default for FaultPlan {
    fn default() -> Self {
        FaultPlan::IDENTITY
    }
}

impl FaultPlan {
    pub const IDENTITY: FaultPlan = FaultPlan {
        drop: 0.0,
        duplicate: 0.0,
        reorder_window: 0,
        seed: 0,
    };

    pub fn new(drop: f64, duplicate: f64, reorder_window: u32, seed: u64) -> Result<Self, InvalidPlan> {
        let plan = FaultPlan {
            drop,
            duplicate,
            reorder_window,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), InvalidPlan> {
        for (name, p) in [("drop", self.drop), ("duplicate", self.duplicate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(InvalidPlan(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.drop == 0.0 && self.duplicate == 0.0 && self.reorder_window == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Client to server.
    Outbound,
    /// Server to client.
    Inbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    /// 0 = dropped, 1 = delivered, 2 = delivered twice.
    pub copies: u8,
    /// Deliver after the next packet in the same direction.
    pub delayed: bool,
}

impl Verdict {
    pub const PASS: Verdict = Verdict {
        copies: 1,
        delayed: false,
    };

    pub fn dropped(&self) -> bool {
        self.copies == 0
    }
}

/// One recorded decision, identifying the packet by content.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaultRecord {
    pub direction: Direction,
    pub packet: [u8; 32],
    pub occurrence: u32,
    pub copies: u8,
    pub delayed: bool,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FaultStats {
    pub packets: u64,
    pub dropped: u64,
    pub duplicated: u64,
    pub delayed: u64,
}

#[derive(Debug)]
pub struct FaultInjector {
    plan: FaultPlan,
    stream: u64,
    seen: HashMap<(Direction, [u8; 32]), u32>,
    counters: HashMap<Direction, u64>,
    log: Vec<FaultRecord>,
    stats: FaultStats,
}

impl FaultInjector {
    /// `stream` separates independent paths (e.g. one per simulated client)
    /// sharing a plan.
    pub fn new(plan: FaultPlan, stream: u64) -> Self {
        FaultInjector {
            plan,
            stream,
            seen: HashMap::new(),
            counters: HashMap::new(),
            log: Vec::new(),
            stats: FaultStats::default(),
        }
    }

    pub fn plan(&self) -> &FaultPlan {
        &self.plan
    }

    pub fn stats(&self) -> FaultStats {
        self.stats
    }

    pub fn log(&self) -> &[FaultRecord] {
        &self.log
    }

    fn unit(&self, direction: Direction, packet: &[u8; 32], occurrence: u32, salt: u8) -> f64 {
        let mut h = Sha256::new();
        h.update(self.plan.seed.to_le_bytes());
        h.update(self.stream.to_le_bytes());
        h.update([direction as u8, salt]);
        h.update(occurrence.to_le_bytes());
        h.update(packet);
        let out = h.finalize();
        let mut word = [0u8; 8];
        word.copy_from_slice(&out[..8]);
        // 53 significant bits map exactly onto [0, 1).
        (u64::from_le_bytes(word) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn decide(&mut self, direction: Direction, bytes: &[u8]) -> Verdict {
        self.stats.packets += 1;
        if self.plan.is_identity() {
            return Verdict::PASS;
        }
        let packet: [u8; 32] = Sha256::digest(bytes).into();
        let occurrence = {
            let n = self.seen.entry((direction, packet)).or_insert(0);
            let cur = *n;
            *n += 1;
            cur
        };
        let ordinal = {
            let n = self.counters.entry(direction).or_insert(0);
            *n += 1;
            *n
        };
        let dropped = self.unit(direction, &packet, occurrence, 0) < self.plan.drop;
        let duplicated = !dropped && self.unit(direction, &packet, occurrence, 1) < self.plan.duplicate;
        let delayed = !dropped
            && self.plan.reorder_window > 0
            && ordinal % self.plan.reorder_window as u64 == 0;
        let verdict = Verdict {
            copies: if dropped { 0 } else if duplicated { 2 } else { 1 },
            delayed,
        };
        self.stats.dropped += dropped as u64;
        self.stats.duplicated += duplicated as u64;
        self.stats.delayed += delayed as u64;
        self.log.push(FaultRecord {
            direction,
            packet,
            occurrence,
            copies: verdict.copies,
            delayed,
        });
        verdict
    }
}
