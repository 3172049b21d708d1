use crate::drive::OddRate;
use crate::experiments::Reference;
use crate::sim::CommandLimits;

use super::messages::CommandMessage;

/// Silence after which the applied twist starts to decay, s.
pub const TIMEOUT_HOLD: f64 = 0.25;
/// Silence after which the applied twist is zero, s.
pub const TIMEOUT_ZERO: f64 = 0.45;

/// Latest-command mailbox state: per-driver sequence filtering, clamping
/// and the silence timeout.
#[derive(Debug, Clone)]
pub struct CommandGate {
    limits: CommandLimits,
    driver: Option<u64>,
    last_seq: Option<u64>,
    latest: Option<CommandMessage>,
    received_at: f64,
}

impl CommandGate {
    pub fn new(limits: CommandLimits) -> Self {
        CommandGate {
            limits,
            driver: None,
            last_seq: None,
            latest: None,
            received_at: f64::NEG_INFINITY,
        }
    }

    /// Offers a command from connection `conn` received at sim time `now`.
    /// Returns false when discarded as stale.
    pub fn offer(&mut self, conn: u64, msg: CommandMessage, now: f64) -> bool {
        if self.driver != Some(conn) {
            self.driver = Some(conn);
            self.last_seq = None;
        }
        if self.last_seq.is_some_and(|s| msg.seq <= s) {
            return false;
        }
        let l = &self.limits;
        self.last_seq = Some(msg.seq);
        self.latest = Some(CommandMessage {
            vx: msg.vx.clamp(-l.vx, l.vx),
            vy: msg.vy.clamp(-l.vy, l.vy),
            wz: msg.wz.clamp(-l.wz, l.wz),
            ddot: msg.ddot.clamp(-l.ddot, l.ddot),
            ..msg
        });
        self.received_at = now;
        true
    }

    pub fn latest(&self) -> Option<&CommandMessage> {
        self.latest.as_ref()
    }

    /// Scale applied to the latest twist after `age` seconds of silence.
    pub fn decay(age: f64) -> f64 {
        if age <= TIMEOUT_HOLD {
            1.0
        } else if age >= TIMEOUT_ZERO {
            0.0
        } else {
            (TIMEOUT_ZERO - age) / (TIMEOUT_ZERO - TIMEOUT_HOLD)
        }
    }

    pub fn reference(&self, now: f64) -> Reference {
        let Some(c) = self.latest else {
            return Reference::default();
        };
        let k = Self::decay(now - self.received_at);
        let rate = if k == 1.0 {
            OddRate::new(c.vx, c.vy, c.wz, c.ddot)
        } else {
            OddRate::new(c.vx * k, c.vy * k, c.wz * k, c.ddot * k)
        };
        Reference {
            rate,
            yaw: None,
            d: c.d_setpoint,
        }
    }
}
