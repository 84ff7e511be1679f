mod common;

use std::fs;
use std::net::{Ipv4Addr, SocketAddr, UdpSocket};
use std::time::Duration;

use common::*;
use netforge::{prepare, Logger, Mode, ServeError, ServerHandle};
use netforge_core::wire::tftp::{decode_tftp, encode_tftp, TftpPacket};

#[test]
fn prepare_counts_and_log_pair() {
    let dir = tempfile::tempdir().unwrap();
    add_image(dir.path(), "A", "Image A", b"alpha");
    add_image(dir.path(), "B", "Image B", b"beta");
    let log = Logger::memory();
    let report = prepare(dir.path(), &log).unwrap();
    assert_eq!((report.ok, report.skipped), (2, 0));
    let lines = log.lines();
    assert!(lines[0].ends_with("BNL Inf: Preparation/Maintenance procedures \"Start\" ***"));
    assert!(lines.last().unwrap().ends_with("BNL Inf: Preparation/Maintenance procedures \"End\" ***"));
}

#[test]
fn prepare_skips_malformed_image() {
    let dir = tempfile::tempdir().unwrap();
    add_image(dir.path(), "GOOD", "Good", b"payload");
    fs::create_dir_all(dir.path().join("WIA_WDS/BROKEN")).unwrap();
    let log = Logger::memory();
    let report = prepare(dir.path(), &log).unwrap();
    assert_eq!((report.ok, report.skipped), (1, 1));
    assert_eq!(report.diagnostics.len(), 1);
    assert!(log.lines().iter().any(|l| l.contains("Wrn: Skipped WIA_WDS/BROKEN")));
}

#[test]
fn prepare_empty_root_then_restart_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let first = prepare(dir.path(), &Logger::null()).unwrap();
    assert_eq!((first.ok, first.skipped), (0, 0));
    assert!(first.changes() > 0);
    add_image(dir.path(), "A", "Image A", b"alpha");
    let second = prepare(dir.path(), &Logger::null()).unwrap();
    assert_eq!(second.repaired, 1);
    let menu = fs::read(dir.path().join("WIA_WDS/menu.txt")).unwrap();
    let third = prepare(dir.path(), &Logger::null()).unwrap();
    assert_eq!(third.changes(), 0);
    assert_eq!(fs::read(dir.path().join("WIA_WDS/menu.txt")).unwrap(), menu);
}

#[test]
fn prepare_repairs_damaged_bootstrap() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path(), &Logger::null()).unwrap();
    fs::write(dir.path().join("WIA_WDS/nbp.bin"), b"garbage").unwrap();
    let report = prepare(dir.path(), &Logger::null()).unwrap();
    assert_eq!(report.created, 1);
    assert!(netforge_core::nbp::verify(&fs::read(dir.path().join("WIA_WDS/nbp.bin")).unwrap()));
}

#[test]
fn occupied_tftp_port_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let squatter = UdpSocket::bind((Ipv4Addr::LOCALHOST, 0)).unwrap();
    let port = squatter.local_addr().unwrap().port();
    let mut config = server_config(dir.path(), Mode::FullDhcp);
    config.tftp_port = port;
    let err = ServerHandle::start(config, Logger::null()).err().unwrap();
    assert!(matches!(err, ServeError::PortInUse { port: p } if p == port));
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains(&port.to_string()));
}

#[test]
fn missing_root_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = server_config(&dir.path().join("absent"), Mode::Proxy);
    let err = ServerHandle::start(config, Logger::null()).err().unwrap();
    assert!(matches!(err, ServeError::RootMissing(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn proxy_status_file_reports_mode() {
    let dir = tempfile::tempdir().unwrap();
    let status_path = dir.path().join("netforge.status");
    let mut config = server_config(dir.path(), Mode::Proxy);
    config.status_path = Some(status_path.clone());
    let server = ServerHandle::start(config, Logger::null()).unwrap();
    let mut waited = 0;
    while !status_path.exists() && waited < 50 {
        std::thread::sleep(Duration::from_millis(50));
        waited += 1;
    }
    let fields = netforge::status::read(&status_path).unwrap();
    assert_eq!(fields["mode"], "proxy");
    assert_eq!(fields["tftp_port"], server.ports().tftp.to_string());
    assert!(server.status_text().contains("mode=proxy"));
    server.stop();
    assert!(!status_path.exists());
}

fn tftp_roundtrip(server: SocketAddr, packet: &TftpPacket) -> (TftpPacket, SocketAddr, UdpSocket) {
    let sock = UdpSocket::bind((Ipv4Addr::LOCALHOST, 0)).unwrap();
    sock.set_read_timeout(Some(Duration::from_secs(3))).unwrap();
    sock.send_to(&encode_tftp(packet).unwrap(), server).unwrap();
    let mut buf = [0u8; 2048];
    let (n, from) = sock.recv_from(&mut buf).unwrap();
    (decode_tftp(&buf[..n]).unwrap(), from, sock)
}

#[test]
fn tftp_errors_on_the_wire() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("hello.txt"), vec![7u8; 700]).unwrap();
    let server = ServerHandle::start(server_config(dir.path(), Mode::Proxy), Logger::null()).unwrap();
    let tftp: SocketAddr = (Ipv4Addr::LOCALHOST, server.ports().tftp).into();

    let wrq = TftpPacket::WriteRequest {
        filename: "x".into(),
        mode: "octet".into(),
        options: vec![],
    };
    assert!(matches!(tftp_roundtrip(tftp, &wrq).0, TftpPacket::Error { code: 4, .. }));

    let rrq = |name: &str| TftpPacket::ReadRequest {
        filename: name.into(),
        mode: "octet".into(),
        options: vec![],
    };
    assert!(matches!(tftp_roundtrip(tftp, &rrq("missing.bin")).0, TftpPacket::Error { code: 1, .. }));
    assert!(matches!(tftp_roundtrip(tftp, &rrq("../etc/passwd")).0, TftpPacket::Error { code: 2, .. }));

    // A stranger writing to a transfer's port gets "unknown transfer ID".
    let (first, tid, owner) = tftp_roundtrip(tftp, &rrq("hello.txt"));
    assert!(matches!(first, TftpPacket::Data { block: 1, .. }));
    let (reply, _, _) = tftp_roundtrip(tid, &TftpPacket::Ack { block: 1 });
    assert!(matches!(reply, TftpPacket::Error { code: 5, .. }));
    // The rightful owner can still finish.
    owner.send_to(&encode_tftp(&TftpPacket::Ack { block: 1 }).unwrap(), tid).unwrap();
    let mut buf = [0u8; 2048];
    let (n, _) = owner.recv_from(&mut buf).unwrap();
    assert!(matches!(decode_tftp(&buf[..n]).unwrap(), TftpPacket::Data { block: 2, ref payload } if payload.len() == 188));
    owner.send_to(&encode_tftp(&TftpPacket::Ack { block: 2 }).unwrap(), tid).unwrap();
    server.stop();
}

#[test]
fn stop_aborts_stuck_transfers_after_drain_window() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("big.bin"), vec![1u8; 4096]).unwrap();
    let mut config = server_config(dir.path(), Mode::Proxy);
    config.tftp_timeout_ms = 5000;
    let server = ServerHandle::start(config, Logger::null()).unwrap();
    let tftp: SocketAddr = (Ipv4Addr::LOCALHOST, server.ports().tftp).into();
    let (_, _, _sock) = tftp_roundtrip(
        tftp,
        &TftpPacket::ReadRequest {
            filename: "big.bin".into(),
            mode: "octet".into(),
            options: vec![],
        },
    );
    assert_eq!(server.active_sessions(), 1);
    let report = server.stop_with(Duration::from_millis(300));
    assert!(!report.drained);
    assert_eq!(report.aborted, 1);
}
