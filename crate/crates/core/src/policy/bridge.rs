//! Line-delimited JSON bridge to an external agent process.

use std::fmt;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, TcpStream};
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ActionResult, Observation, Policy, PolicyContext, PolicyError};
use crate::Action;

pub const HANDSHAKE: &str = r#"{"gleam_bridge":1}"#;
pub const DEFAULT_BRIDGE_TIMEOUT: Duration = Duration::from_secs(5);

/// Where the agent lives: `tcp://host:port` or `exec:<program> [args...]`
/// (spoken to over the child's stdin/stdout).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BridgeEndpoint {
    Tcp(String),
    Exec(Vec<String>),
}

impl fmt::Display for BridgeEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BridgeEndpoint::Tcp(addr) => write!(f, "tcp://{addr}"),
            BridgeEndpoint::Exec(argv) => write!(f, "exec:{}", argv.join(" ")),
        }
    }
}

impl FromStr for BridgeEndpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(addr) = s.strip_prefix("tcp://") {
            if addr.is_empty() {
                return Err("empty tcp address".into());
            }
            return Ok(BridgeEndpoint::Tcp(addr.to_string()));
        }
        if let Some(cmd) = s.strip_prefix("exec:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if argv.is_empty() {
                return Err("empty exec command".into());
            }
            return Ok(BridgeEndpoint::Exec(argv));
        }
        Err(format!("bad bridge endpoint {s:?} (expected tcp://host:port or exec:<command>)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMessage {
    pub step: usize,
    pub pose: [f64; 3],
    pub history: Vec<[f64; 3]>,
    pub ego: String,
    pub last: String,
}

impl StepMessage {
    pub fn from_observation(obs: &Observation) -> Self {
        let p = obs.pose();
        Self {
            step: obs.step_index,
            pose: [p.x, p.y, p.theta],
            history: obs.pose_history.iter().map(|p| [p.x, p.y, p.theta]).collect(),
            ego: obs.ego_map.to_rle(),
            last: obs.last_action_result.as_str().to_string(),
        }
    }

    pub fn last_result(&self) -> Option<ActionResult> {
        ActionResult::parse(&self.last)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentReply {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl From<Action> for AgentReply {
    fn from(a: Action) -> Self {
        Self { dx: a.dx, dy: a.dy, dtheta: a.dtheta }
    }
}

fn is_handshake(line: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(line.trim()).ok() == serde_json::from_str(HANDSHAKE).ok()
}

/// Environment side of a bridge session.
pub struct BridgeConnection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    timeout: Duration,
    tcp: Option<TcpStream>,
    child: Option<Child>,
}

impl BridgeConnection {
    pub fn connect(endpoint: &BridgeEndpoint, timeout: Duration) -> Result<Self, PolicyError> {
        let io_err = |e: io::Error| PolicyError::BridgeProtocol(format!("cannot reach {endpoint}: {e}"));
        match endpoint {
            BridgeEndpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr).map_err(io_err)?;
                let reader = stream.try_clone().map_err(io_err)?;
                let handle = stream.try_clone().map_err(io_err)?;
                let mut conn = Self::from_streams(reader, stream, timeout)?;
                conn.tcp = Some(handle);
                Ok(conn)
            }
            BridgeEndpoint::Exec(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()
                    .map_err(io_err)?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                let mut conn = Self::from_streams(stdout, stdin, timeout).inspect_err(|_| {
                    let _ = child.kill();
                    let _ = child.wait();
                });
                if let Ok(conn) = conn.as_mut() {
                    conn.child = Some(child);
                }
                conn
            }
        }
    }

    /// Wraps an already open byte stream pair and performs the handshake.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Result<Self, PolicyError>
    where
        R: io::Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(reader);
            loop {
                let mut line = String::new();
                let item = match reader.read_line(&mut line) {
                    Ok(0) => Err(io::Error::new(io::ErrorKind::UnexpectedEof, "connection closed")),
                    Ok(_) => Ok(line),
                    Err(e) => Err(e),
                };
                let done = item.is_err();
                if tx.send(item).is_err() || done {
                    break;
                }
            }
        });
        let mut conn = Self {
            writer: Box::new(writer),
            lines: rx,
            timeout,
            tcp: None,
            child: None,
        };
        conn.send_line(HANDSHAKE)?;
        let reply = conn.recv_line()?;
        if !is_handshake(&reply) {
            return Err(PolicyError::BridgeProtocol(format!("bad handshake {:?}", reply.trim())));
        }
        Ok(conn)
    }

    fn send_line(&mut self, line: &str) -> Result<(), PolicyError> {
        let result = self.writer.write_all(line.as_bytes()).and_then(|_| self.writer.write_all(b"\n")).and_then(|_| self.writer.flush());
        result.map_err(|e| PolicyError::BridgeProtocol(format!("write failed: {e}")))
    }

    fn recv_line(&mut self) -> Result<String, PolicyError> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(PolicyError::BridgeProtocol(e.to_string())),
            Err(RecvTimeoutError::Timeout) => Err(PolicyError::BridgeTimeout),
            Err(RecvTimeoutError::Disconnected) => Err(PolicyError::BridgeProtocol("connection closed".into())),
        }
    }

    /// Sends one step and waits for the agent's action. Bounds are not
    /// enforced here; the episode clamps and flags.
    pub fn request(&mut self, msg: &StepMessage) -> Result<Action, PolicyError> {
        let line = serde_json::to_string(msg).expect("step message serializes");
        self.send_line(&line)?;
        let reply = self.recv_line()?;
        let parsed: AgentReply = serde_json::from_str(reply.trim())
            .map_err(|e| PolicyError::BridgeProtocol(format!("malformed action {:?}: {e}", reply.trim())))?;
        Ok(Action::new(parsed.dx, parsed.dy, parsed.dtheta))
    }
}

impl Drop for BridgeConnection {
    fn drop(&mut self) {
        if let Some(tcp) = self.tcp.take() {
            let _ = tcp.shutdown(Shutdown::Both);
        }
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

pub struct BridgePolicy {
    conn: BridgeConnection,
}

impl BridgePolicy {
    pub fn new(conn: BridgeConnection) -> Self {
        Self { conn }
    }
}

impl Policy for BridgePolicy {
    fn name(&self) -> &str {
        "bridge"
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        self.conn.request(&StepMessage::from_observation(ctx.obs))
    }
}

/// Agent side of the protocol: answers the handshake, then calls `agent` for
/// every step until the environment hangs up.
pub fn serve_agent<R, W, F>(reader: R, mut writer: W, mut agent: F) -> io::Result<()>
where
    R: BufRead,
    W: Write,
    F: FnMut(&StepMessage) -> AgentReply,
{
    let mut lines = reader.lines();
    let first = lines.next().transpose()?;
    if !first.is_some_and(|l| is_handshake(&l)) {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "expected handshake"));
    }
    writeln!(writer, "{HANDSHAKE}")?;
    writer.flush()?;
    for line in lines {
        let line = line?;
        let msg: StepMessage =
            serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let reply = agent(&msg);
        writeln!(writer, "{}", serde_json::to_string(&reply).map_err(io::Error::other)?)?;
        writer.flush()?;
    }
    Ok(())
}
