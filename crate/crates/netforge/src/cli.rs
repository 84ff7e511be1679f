//! `netforge` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use netforge_core::catalog::{self, verify_image, MenuManifest, CATALOG_DIR, MENU_NAME};
use netforge_core::netsim::FaultPlan;

use crate::client::{ClientConfig, Selection};
use crate::config::ServerConfig;
use crate::fleet::{run_fleet, DEFAULT_CONCURRENCY};
use crate::log::{Component, Logger};
use crate::server::ServerHandle;
use crate::status;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "netforge", version, about = "PXE network-boot provisioning server and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pack a directory tree into an image archive.
    Capture { src: PathBuf, out: PathBuf },
    /// Unpack an image archive into an empty directory.
    Extract { archive: PathBuf, dest: PathBuf },
    /// Rebuild the boot menu from <root>/WIA_WDS and print its entries.
    Scan { root: PathBuf },
    /// Check every menu entry's payload against its recorded digest.
    Verify { root: PathBuf },
    /// Run the DHCP, boot-service and TFTP listeners until interrupted.
    Serve(ServeArgs),
    /// Boot a fleet of simulated PXE clients against a running server.
    Simulate(SimulateArgs),
    /// Show the running daemon's status file.
    Status {
        #[arg(long)]
        status_file: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key (repeatable), e.g. --set tftp_port=6969.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    clients: usize,
    /// Image id, "first", or a comma list assigned to clients round-robin.
    #[arg(long, default_value = "first")]
    select: String,
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    #[arg(long, default_value_t = 0.0)]
    dup: f64,
    /// Hold back every N-th packet behind its successor (0 = off).
    #[arg(long, default_value_t = 0)]
    reorder: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Server address used for the DHCP port of a running daemon.
    #[arg(long, default_value = "127.0.0.1")]
    server: Ipv4Addr,
    #[arg(long, default_value_t = 67)]
    dhcp_port: u16,
    #[arg(long, default_value_t = 4011)]
    boot_port: u16,
    #[arg(long, default_value_t = 69)]
    tftp_port: u16,
    /// Read server address and ports from a daemon's status file.
    #[arg(long)]
    status_file: Option<PathBuf>,
    /// Additional DHCP responder to send DISCOVER to (repeatable).
    #[arg(long = "dhcp-server", value_name = "ADDR:PORT")]
    dhcp_servers: Vec<SocketAddr>,
    #[arg(long, default_value_t = 120)]
    deadline_secs: u64,
    #[arg(long, default_value_t = 2000)]
    offer_window_ms: u64,
    #[arg(long, default_value_t = 1428)]
    blksize: usize,
    #[arg(long, default_value_t = 500)]
    tftp_timeout_ms: u64,
    #[arg(long, default_value_t = 20)]
    tftp_retries: u32,
    #[arg(long, default_value_t = DEFAULT_CONCURRENCY)]
    concurrency: usize,
    /// Do not write protocol log lines to standard error.
    #[arg(long)]
    quiet: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Capture { src, out } => capture(&src, &out),
        Command::Extract { archive, dest } => extract(&archive, &dest),
        Command::Scan { root } => scan(&root),
        Command::Verify { root } => verify(&root),
        Command::Serve(args) => serve(args),
        Command::Simulate(args) => simulate(args),
        Command::Status { status_file } => show_status(&status_file.unwrap_or_else(status::default_path)),
    }
}

fn capture(src: &Path, out: &Path) -> i32 {
    let log = Logger::stderr();
    match catalog::capture(src, out) {
        Ok(summary) => {
            for (path, why) in &summary.skipped {
                log.warn(Component::Cat, format!("Skipped {}: {why}", path.display()));
            }
            if summary.empty {
                log.warn(Component::Cat, format!("{} holds no regular files", src.display()));
            }
            log.info(
                Component::Cat,
                format!(
                    "Captured {} file(s), {} bytes into {} ({} bytes)",
                    summary.file_count,
                    summary.total_bytes,
                    out.display(),
                    summary.archive_bytes
                ),
            );
            println!("{} files {} bytes trailer {}", summary.file_count, summary.total_bytes, summary.trailer);
            EXIT_OK
        }
        Err(e) => {
            log.error(Component::Cat, format!("capture failed: {e}"));
            EXIT_FAILURE
        }
    }
}

fn extract(archive: &Path, dest: &Path) -> i32 {
    let log = Logger::stderr();
    match catalog::extract(archive, dest) {
        Ok(n) => {
            log.info(Component::Cat, format!("Extracted {n} file(s) into {}", dest.display()));
            println!("{n} files");
            EXIT_OK
        }
        Err(e) => {
            log.error(Component::Cat, format!("extract failed: {e}"));
            EXIT_FAILURE
        }
    }
}

fn scan(root: &Path) -> i32 {
    let log = Logger::stderr();
    if !root.is_dir() {
        log.error(Component::Cat, format!("{} is not a directory", root.display()));
        return EXIT_FAILURE;
    }
    match catalog::scan_catalog(root) {
        Ok(outcome) => {
            for d in &outcome.diagnostics {
                log.warn(Component::Cat, format!("Skipped {CATALOG_DIR}/{}: {}", d.dir, d.message));
            }
            for line in outcome.manifest.entry_lines() {
                println!("{line}");
            }
            EXIT_OK
        }
        Err(e) => {
            log.error(Component::Cat, format!("scan failed: {e}"));
            EXIT_FAILURE
        }
    }
}

fn verify(root: &Path) -> i32 {
    let log = Logger::stderr();
    let menu_path = root.join(CATALOG_DIR).join(MENU_NAME);
    let manifest = match fs::read_to_string(&menu_path)
        .map_err(|e| e.to_string())
        .and_then(|t| MenuManifest::parse(&t).map_err(|e| e.to_string()))
    {
        Ok(m) => m,
        Err(e) => {
            log.error(Component::Cat, format!("cannot load {}: {e}", menu_path.display()));
            return EXIT_FAILURE;
        }
    };
    let mut bad = 0;
    for entry in &manifest.entries {
        match verify_image(entry, root) {
            Ok(true) => println!("OK   {}", entry.id),
            Ok(false) => {
                bad += 1;
                println!("BAD  {} digest mismatch", entry.id);
            }
            Err(e) => {
                bad += 1;
                println!("BAD  {} {e}", entry.id);
            }
        }
    }
    if bad == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn serve(args: ServeArgs) -> i32 {
    let mut config = match ServerConfig::load_with(&args.config, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("netforge: {e}");
            return crate::server::ServeError::Config(e).exit_code();
        }
    };
    if config.status_path.is_none() {
        config.status_path = Some(status::default_path());
    }
    let mut log = Logger::stderr();
    if let Some(path) = &config.log_path {
        log = match log.with_file(path) {
            Ok(l) => l,
            Err(e) => {
                eprintln!("netforge: cannot open log file {}: {e}", path.display());
                return EXIT_FAILURE;
            }
        };
    }
    let handle = match ServerHandle::start(config, log.clone()) {
        Ok(h) => h,
        Err(e) => {
            log.error(Component::Bnl, format!("startup failed: {e}"));
            return e.exit_code();
        }
    };
    let term = Arc::new(AtomicBool::new(false));
    for sig in [signal_hook::consts::SIGINT, signal_hook::consts::SIGTERM] {
        if let Err(e) = signal_hook::flag::register(sig, term.clone()) {
            log.error(Component::Bnl, format!("cannot install signal handler: {e}"));
            handle.stop();
            return EXIT_FAILURE;
        }
    }
    while !term.load(Ordering::SeqCst) {
        thread::sleep(Duration::from_millis(100));
    }
    log.info(Component::Bnl, "Termination signal received, draining transfers");
    handle.stop();
    EXIT_OK
}

fn client_config(args: &SimulateArgs) -> Result<ClientConfig, String> {
    let mut cfg = ClientConfig::new(args.server);
    cfg.dhcp_servers = vec![SocketAddr::V4(SocketAddrV4::new(args.server, args.dhcp_port))];
    cfg.boot_port = args.boot_port;
    cfg.tftp_port = args.tftp_port;
    if let Some(path) = &args.status_file {
        let fields = status::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let get = |k: &str| fields.get(k).ok_or_else(|| format!("status file lacks {k}"));
        let address: Ipv4Addr = get("bind_address")?.parse().map_err(|_| "bad bind_address in status file")?;
        cfg.dhcp_servers = match get("dhcp_port")?.parse::<u16>() {
            Ok(p) => vec![SocketAddr::V4(SocketAddrV4::new(address, p))],
            Err(_) => Vec::new(),
        };
        cfg.boot_port = get("boot_port")?.parse().map_err(|_| "bad boot_port in status file")?;
        cfg.tftp_port = get("tftp_port")?.parse().map_err(|_| "bad tftp_port in status file")?;
    }
    cfg.dhcp_servers.extend(args.dhcp_servers.iter().copied());
    if cfg.dhcp_servers.is_empty() {
        return Err("no DHCP responder to send DISCOVER to".into());
    }
    cfg.offer_window = Duration::from_millis(args.offer_window_ms);
    cfg.block_size = args.blksize;
    cfg.tftp_timeout = Duration::from_millis(args.tftp_timeout_ms.max(1));
    cfg.tftp_retries = args.tftp_retries;
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> i32 {
    if args.clients == 0 {
        eprintln!("netforge: --clients must be at least 1");
        return EXIT_USAGE;
    }
    let plan = match FaultPlan::new(args.drop, args.dup, args.reorder, args.seed) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("netforge: {e}");
            return EXIT_USAGE;
        }
    };
    let cfg = match client_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("netforge: {e}");
            return EXIT_USAGE;
        }
    };
    let selections: Vec<Selection> = args
        .select
        .split(',')
        .map(|s| s.trim().parse().expect("infallible"))
        .collect();
    let log = if args.quiet { Logger::null() } else { Logger::stderr() };
    let fleet = run_fleet(
        args.clients,
        |i| selections[i % selections.len()].clone(),
        plan,
        Duration::from_secs(args.deadline_secs),
        &cfg,
        &log,
        args.concurrency,
    );
    for report in &fleet.reports {
        println!("{}", report.summary());
    }
    let duplicates = fleet.duplicate_leases();
    for d in &duplicates {
        println!("CONFLICT lease {d} bound by more than one client");
    }
    println!("{}/{} clients succeeded", fleet.successes(), fleet.reports.len());
    if fleet.all_succeeded() && duplicates.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn show_status(path: &Path) -> i32 {
    let fields = match status::read(path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("netforge: no running daemon ({}: {e})", path.display());
            return EXIT_FAILURE;
        }
    };
    for (k, v) in &fields {
        println!("{k}={v}");
    }
    if status::is_fresh(&fields) {
        EXIT_OK
    } else {
        println!("stale=true");
        EXIT_FAILURE
    }
}
