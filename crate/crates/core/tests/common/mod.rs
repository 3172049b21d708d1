#![allow(dead_code)]

pub mod oracle;
pub mod schema;

use std::net::SocketAddr;
use std::time::Duration;

use odd_core::service::{parse_server, start, Course, ServerMessage, ServiceConfig, ServiceHandle, StateMessage};
use odd_core::sim::SimConfig;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;

pub async fn start_ideal(rate: f64) -> ServiceHandle {
    let sim = SimConfig::ideal();
    let course = Course::open(sim.initial_d);
    start(ServiceConfig::new(sim, course, 0, rate)).await.expect("service starts")
}

/// Headless line-protocol client.
pub struct LineClient {
    lines: Lines<BufReader<OwnedReadHalf>>,
    writer: OwnedWriteHalf,
}

impl LineClient {
    pub async fn connect(addr: SocketAddr) -> Self {
        let s = TcpStream::connect(addr).await.expect("connect");
        let (r, w) = s.into_split();
        LineClient {
            lines: BufReader::new(r).lines(),
            writer: w,
        }
    }

    pub async fn send_raw(&mut self, text: &str) {
        self.writer.write_all(format!("{text}\n").as_bytes()).await.expect("send");
    }

    pub async fn send_cmd(&mut self, seq: u64, vx: f64, vy: f64, wz: f64, ddot: f64) {
        let msg = serde_json::json!({"type": "cmd", "vx": vx, "vy": vy, "wz": wz, "ddot": ddot, "seq": seq});
        self.send_raw(&msg.to_string()).await;
    }

    pub async fn next(&mut self, timeout: Duration) -> Option<ServerMessage> {
        let line = tokio::time::timeout(timeout, self.lines.next_line()).await.ok()?.ok()??;
        Some(parse_server(&line).expect("server line parses"))
    }

    pub async fn next_state(&mut self) -> StateMessage {
        loop {
            match self.next(Duration::from_secs(2)).await.expect("stream alive") {
                ServerMessage::State(s) => return s,
                _ => continue,
            }
        }
    }

    /// Collects everything received for `span`.
    pub async fn drain(&mut self, span: Duration) -> Vec<ServerMessage> {
        let end = tokio::time::Instant::now() + span;
        let mut out = Vec::new();
        loop {
            let left = end.saturating_duration_since(tokio::time::Instant::now());
            if left.is_zero() {
                return out;
            }
            match self.next(left).await {
                Some(m) => out.push(m),
                None => return out,
            }
        }
    }
}

pub fn states(msgs: &[ServerMessage]) -> Vec<StateMessage> {
    msgs.iter()
        .filter_map(|m| match m {
            ServerMessage::State(s) => Some(s.clone()),
            _ => None,
        })
        .collect()
}

pub fn errors(msgs: &[ServerMessage]) -> Vec<String> {
    msgs.iter()
        .filter_map(|m| match m {
            ServerMessage::Error { code, .. } => Some(code.clone()),
            _ => None,
        })
        .collect()
}

/// Sends a steady command for `span`, then stops. Returns the sim time of
/// the last state seen before going silent.
pub async fn drive_then_stop(c: &mut LineClient, vx: f64, span: Duration) -> f64 {
    let mut seq = 0;
    let mut last_t = 0.0;
    let end = tokio::time::Instant::now() + span;
    while tokio::time::Instant::now() < end {
        seq += 1;
        c.send_cmd(seq, vx, 0.0, 0.0, 0.0).await;
        for m in c.drain(Duration::from_millis(50)).await {
            if let ServerMessage::State(s) = m {
                last_t = s.t;
            }
        }
    }
    last_t
}
