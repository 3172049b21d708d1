//! Real-time service: one stepping task, one driver, any number of viewers.
//!
//! A connection whose first bytes are `GET ` is upgraded to WebSocket; any
//! other connection speaks newline-delimited JSON over raw TCP.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc, watch};
use tokio::task::JoinHandle;
use tokio::time::Instant;
use tokio_tungstenite::tungstenite::Message;

use crate::drive::Spacing;
use crate::error::{OddError, Result};
use crate::experiments::ClosedLoop;
use crate::sim::{RobotState, SimConfig};

use super::course::Course;
use super::gate::CommandGate;
use super::messages::{parse_client, ClientMessage, CommandMessage, ServerMessage, StateMessage};

pub const BROADCAST_HZ: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub sim: SimConfig,
    pub course: Course,
    pub host: String,
    pub port: u16,
    /// Simulation steps per wall-clock second; overrides `sim.dt`.
    pub rate_hz: f64,
    pub broadcast_hz: f64,
}

impl ServiceConfig {
    pub fn new(sim: SimConfig, course: Course, port: u16, rate_hz: f64) -> Self {
        ServiceConfig {
            sim,
            course,
            host: "127.0.0.1".into(),
            port,
            rate_hz,
            broadcast_hz: BROADCAST_HZ,
        }
    }
}

struct Inbound {
    conn: u64,
    cmd: CommandMessage,
}

struct Shared {
    driver: Mutex<Option<u64>>,
    states: broadcast::Sender<Arc<str>>,
    commands: mpsc::UnboundedSender<Inbound>,
    course_json: Arc<str>,
}

/// Handle to a running service. Dropping it does not stop the service;
/// call [`ServiceHandle::shutdown`].
pub struct ServiceHandle {
    pub local_addr: SocketAddr,
    latest: watch::Receiver<StateMessage>,
    stop: watch::Sender<bool>,
    tasks: Vec<JoinHandle<()>>,
}

impl ServiceHandle {
    /// Most recent broadcast state.
    pub fn latest_state(&self) -> StateMessage {
        self.latest.borrow().clone()
    }

    pub async fn shutdown(self) {
        let _ = self.stop.send(true);
        for t in self.tasks {
            let _ = t.await;
        }
    }
}

/// Binds the listener and starts stepping. Port 0 picks a free port.
pub async fn start(cfg: ServiceConfig) -> Result<ServiceHandle> {
    if !(cfg.rate_hz.is_finite() && cfg.rate_hz > 0.0) {
        return Err(OddError::Config(format!("rate must be positive, got {}", cfg.rate_hz)));
    }
    if !(cfg.broadcast_hz.is_finite() && cfg.broadcast_hz > 0.0) {
        return Err(OddError::Config("broadcast rate must be positive".into()));
    }
    cfg.course.validate()?;
    let mut sim = cfg.sim.clone();
    sim.dt = 1.0 / cfg.rate_hz;
    let spawn = cfg.course.spawn;
    sim.geometry.check_spacing(Spacing::new(spawn.d)?)?;
    let state = RobotState {
        x: spawn.x,
        y: spawn.y,
        phi: spawn.phi,
        ..RobotState::at_rest(spawn.d)
    };
    let lp = ClosedLoop::with_state(sim.clone(), state)?;

    let listener = TcpListener::bind((cfg.host.as_str(), cfg.port))
        .await
        .map_err(|e| OddError::PortUnavailable {
            port: cfg.port,
            reason: e.to_string(),
        })?;
    let local_addr = listener.local_addr()?;

    let course_id = cfg.course.id.clone();
    let first = StateMessage::from_state(lp.state(), &course_id);
    let (latest_tx, latest_rx) = watch::channel(first);
    let (states, _) = broadcast::channel(64);
    let (cmd_tx, cmd_rx) = mpsc::unbounded_channel();
    let (stop_tx, stop_rx) = watch::channel(false);
    let shared = Arc::new(Shared {
        driver: Mutex::new(None),
        states: states.clone(),
        commands: cmd_tx,
        course_json: ServerMessage::Course {
            course: cfg.course.clone(),
        }
        .to_json()
        .into(),
    });

    let stepper = StepLoop {
        lp,
        gate: CommandGate::new(sim.limits),
        commands: cmd_rx,
        states,
        latest: latest_tx,
        course_id,
        broadcast_every: ((cfg.rate_hz / cfg.broadcast_hz).round() as u64).max(1),
    };
    let tasks = vec![
        tokio::spawn(stepper.run(stop_rx.clone())),
        tokio::spawn(accept_loop(listener, shared, stop_rx)),
    ];
    Ok(ServiceHandle {
        local_addr,
        latest: latest_rx,
        stop: stop_tx,
        tasks,
    })
}

/// Runs until the process is interrupted.
pub async fn serve(cfg: ServiceConfig) -> Result<()> {
    let handle = start(cfg).await?;
    log::info!("listening on {}", handle.local_addr);
    let _ = tokio::signal::ctrl_c().await;
    handle.shutdown().await;
    Ok(())
}

struct StepLoop {
    lp: ClosedLoop,
    gate: CommandGate,
    commands: mpsc::UnboundedReceiver<Inbound>,
    states: broadcast::Sender<Arc<str>>,
    latest: watch::Sender<StateMessage>,
    course_id: String,
    broadcast_every: u64,
}

impl StepLoop {
    async fn run(mut self, mut stop: watch::Receiver<bool>) {
        let dt = self.lp.config().dt;
        let start = Instant::now();
        let mut steps: u64 = 0;
        self.publish();
        loop {
            if *stop.borrow() {
                break;
            }
            let now = self.lp.state().t;
            while let Ok(m) = self.commands.try_recv() {
                if !self.gate.offer(m.conn, m.cmd, now) {
                    log::debug!("discarded stale seq {} from {}", m.cmd.seq, m.conn);
                }
            }
            let reference = self.gate.reference(now);
            if let Err(e) = self.lp.tick(&reference) {
                log::error!("step failed: {e}");
                break;
            }
            steps += 1;
            if steps % self.broadcast_every == 0 {
                self.publish();
            }
            // Deadlines come from the step count so sim time cannot drift from
            // the wall clock; when late, steps run back to back to catch up.
            let deadline = start + Duration::from_secs_f64(steps as f64 * dt);
            if deadline > Instant::now() {
                tokio::select! {
                    _ = tokio::time::sleep_until(deadline) => {}
                    _ = stop.changed() => break,
                }
            } else if steps % 256 == 0 {
                tokio::task::yield_now().await;
            }
        }
    }

    fn publish(&self) {
        let msg = StateMessage::from_state(self.lp.state(), &self.course_id);
        let text: Arc<str> = ServerMessage::State(msg.clone()).to_json().into();
        let _ = self.states.send(text);
        let _ = self.latest.send(msg);
    }
}

async fn accept_loop(listener: TcpListener, shared: Arc<Shared>, mut stop: watch::Receiver<bool>) {
    let mut next_id: u64 = 0;
    loop {
        tokio::select! {
            acc = listener.accept() => match acc {
                Ok((stream, peer)) => {
                    next_id += 1;
                    let id = next_id;
                    let shared = shared.clone();
                    let stop = stop.clone();
                    tokio::spawn(async move {
                        if let Err(e) = handle_connection(stream, id, shared.clone(), stop).await {
                            log::debug!("connection {peer} closed: {e}");
                        }
                        release_driver(&shared, id);
                    });
                }
                Err(e) => log::warn!("accept failed: {e}"),
            },
            _ = stop.changed() => break,
        }
    }
}

fn release_driver(shared: &Shared, id: u64) {
    let mut slot = shared.driver.lock().expect("driver lock");
    if *slot == Some(id) {
        *slot = None;
    }
}

/// Routes one incoming frame; returns an error reply if there is one.
fn route(shared: &Shared, id: u64, text: &str) -> Option<String> {
    if text.trim().is_empty() {
        return None;
    }
    let cmd = match parse_client(text) {
        Ok(ClientMessage::Cmd(c)) => c,
        Err(e) => return Some(ServerMessage::error(&e).to_json()),
    };
    {
        let mut slot = shared.driver.lock().expect("driver lock");
        match *slot {
            None => *slot = Some(id),
            Some(d) if d == id => {}
            Some(_) => return Some(ServerMessage::error(&OddError::DriverSlotBusy).to_json()),
        }
    }
    let _ = shared.commands.send(Inbound { conn: id, cmd });
    None
}

async fn handle_connection(
    stream: TcpStream,
    id: u64,
    shared: Arc<Shared>,
    stop: watch::Receiver<bool>,
) -> std::io::Result<()> {
    stream.set_nodelay(true)?;
    let mut head = [0u8; 4];
    let n = peek_prefix(&stream, &mut head).await?;
    if &head[..n] == b"GET " {
        serve_ws(stream, id, shared, stop).await
    } else {
        serve_lines(stream, id, shared, stop).await
    }
}

/// Peeks up to four bytes. A client that stays silent past a short grace
/// period is treated as a line client.
async fn peek_prefix(stream: &TcpStream, buf: &mut [u8; 4]) -> std::io::Result<usize> {
    let deadline = Instant::now() + Duration::from_millis(200);
    let mut n = 0;
    while n < 4 {
        match tokio::time::timeout_at(deadline, stream.peek(buf)).await {
            Ok(r) => {
                let got = r?;
                if got == 0 || got == n {
                    tokio::time::sleep(Duration::from_millis(5)).await;
                }
                if got == 0 {
                    return Ok(0);
                }
                n = got;
            }
            Err(_) => break,
        }
    }
    Ok(n)
}

async fn serve_lines(
    stream: TcpStream,
    id: u64,
    shared: Arc<Shared>,
    mut stop: watch::Receiver<bool>,
) -> std::io::Result<()> {
    let (rd, mut wr) = stream.into_split();
    let mut lines = BufReader::new(rd).lines();
    let mut states = shared.states.subscribe();
    wr.write_all(format!("{}\n", shared.course_json).as_bytes()).await?;
    loop {
        tokio::select! {
            line = lines.next_line() => match line? {
                Some(l) => {
                    if let Some(reply) = route(&shared, id, &l) {
                        wr.write_all(format!("{reply}\n").as_bytes()).await?;
                    }
                }
                None => return Ok(()),
            },
            s = states.recv() => match s {
                Ok(text) => wr.write_all(format!("{text}\n").as_bytes()).await?,
                Err(broadcast::error::RecvError::Lagged(_)) => {}
                Err(broadcast::error::RecvError::Closed) => return Ok(()),
            },
            _ = stop.changed() => return Ok(()),
        }
    }
}

async fn serve_ws(
    stream: TcpStream,
    id: u64,
    shared: Arc<Shared>,
    mut stop: watch::Receiver<bool>,
) -> std::io::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await.map_err(std::io::Error::other)?;
    let (mut sink, mut source) = ws.split();
    let mut states = shared.states.subscribe();
    sink.send(Message::Text(shared.course_json.to_string()))
        .await
        .map_err(std::io::Error::other)?;
    loop {
        tokio::select! {
            frame = source.next() => match frame {
                Some(Ok(Message::Text(t))) => {
                    if let Some(reply) = route(&shared, id, &t) {
                        sink.send(Message::Text(reply)).await.map_err(std::io::Error::other)?;
                    }
                }
                Some(Ok(Message::Binary(b))) => {
                    let reply = match std::str::from_utf8(&b) {
                        Ok(t) => route(&shared, id, t),
                        Err(_) => Some(ServerMessage::error(&OddError::MalformedMessage("binary frame is not UTF-8".into())).to_json()),
                    };
                    if let Some(reply) = reply {
                        sink.send(Message::Text(reply)).await.map_err(std::io::Error::other)?;
                    }
                }
                Some(Ok(Message::Close(_))) | None => return Ok(()),
                Some(Ok(_)) => {}
                Some(Err(e)) => return Err(std::io::Error::other(e)),
            },
            s = states.recv() => match s {
                Ok(text) => sink.send(Message::Text(text.to_string())).await.map_err(std::io::Error::other)?,
                Err(broadcast::error::RecvError::Lagged(_)) => {}
                Err(broadcast::error::RecvError::Closed) => return Ok(()),
            },
            _ = stop.changed() => {
                let _ = sink.send(Message::Close(None)).await;
                return Ok(());
            }
        }
    }
}
