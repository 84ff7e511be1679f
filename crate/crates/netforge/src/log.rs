//! Operator log in the Serva-style line format:
//!
//! ```text
//! [07/21 14:54:38.717] BNL Inf: Preparation/Maintenance procedures "Start" ***
//! ```
//!
//! All writers share one sink behind a mutex, so lines never interleave.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

/// Matches every line the logger emits.
pub const LINE_PATTERN: &str =
    r"^\[\d{2}/\d{2} \d{2}:\d{2}:\d{2}\.\d{3}\] (BNL|DHCP|TFTP|CAT|SIM) (Inf|Wrn|Err): .*$";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Boot-service and preparation events.
    Bnl,
    Dhcp,
    Tftp,
    Cat,
    Sim,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Bnl => "BNL",
            Component::Dhcp => "DHCP",
            Component::Tftp => "TFTP",
            Component::Cat => "CAT",
            Component::Sim => "SIM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Inf,
    Wrn,
    Err,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Inf => "Inf",
            Level::Wrn => "Wrn",
            Level::Err => "Err",
        })
    }
}

#[derive(Default)]
struct Sinks {
    stderr: bool,
    file: Option<File>,
    memory: Option<Vec<String>>,
}

#[derive(Clone, Default)]
pub struct Logger {
    sinks: Arc<Mutex<Sinks>>,
}

impl fmt::Debug for Logger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Logger")
    }
}

impl Logger {
    /// A logger that discards everything.
    pub fn null() -> Self {
        Logger::default()
    }

    pub fn stderr() -> Self {
        Logger::null().with_stderr()
    }

    /// Keeps every line in memory; see [`Logger::lines`].
    pub fn memory() -> Self {
        Logger::null().with_memory()
    }

    pub fn with_stderr(self) -> Self {
        self.sinks.lock().unwrap().stderr = true;
        self
    }

    pub fn with_memory(self) -> Self {
        self.sinks.lock().unwrap().memory = Some(Vec::new());
        self
    }

    pub fn with_file(self, path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.sinks.lock().unwrap().file = Some(file);
        Ok(self)
    }

    pub fn lines(&self) -> Vec<String> {
        self.sinks
            .lock()
            .unwrap()
            .memory
            .clone()
            .unwrap_or_default()
    }

    pub fn log(&self, component: Component, level: Level, message: impl AsRef<str>) {
        let message = message.as_ref().replace(['\n', '\r'], " ");
        let stamp = chrono::Local::now().format("%m/%d %H:%M:%S%.3f");
        let line = format!("[{stamp}] {component} {level}: {message}");
        let mut sinks = self.sinks.lock().unwrap();
        if sinks.stderr {
            let _ = writeln!(io::stderr().lock(), "{line}");
        }
        if let Some(file) = &mut sinks.file {
            let _ = writeln!(file, "{line}");
        }
        if let Some(mem) = &mut sinks.memory {
            mem.push(line);
        }
    }

    pub fn info(&self, component: Component, message: impl AsRef<str>) {
        self.log(component, Level::Inf, message)
    }

    pub fn warn(&self, component: Component, message: impl AsRef<str>) {
        self.log(component, Level::Wrn, message)
    }

    pub fn error(&self, component: Component, message: impl AsRef<str>) {
        self.log(component, Level::Err, message)
    }
}
