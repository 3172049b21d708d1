//! Wire schema: one JSON object per text frame or per line.

use serde::{Deserialize, Serialize};

use super::course::Course;
use crate::error::{OddError, Result};
use crate::sim::RobotState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandMessage {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub ddot: f64,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_setpoint: Option<f64>,
}

impl CommandMessage {
    pub fn zero(seq: u64) -> Self {
        CommandMessage {
            vx: 0.0,
            vy: 0.0,
            wz: 0.0,
            ddot: 0.0,
            seq,
            d_setpoint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub d: f64,
    pub pitch: f64,
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
    pub ddot: f64,
    pub course_id: String,
}

impl StateMessage {
    pub fn from_state(s: &RobotState, course_id: &str) -> Self {
        StateMessage {
            t: s.t,
            x: s.x,
            y: s.y,
            phi: s.phi,
            d: s.d,
            pitch: s.pitch,
            vx: s.rate.x_dot,
            vy: s.rate.y_dot,
            wz: s.rate.phi_dot,
            ddot: s.rate.d_dot,
            course_id: course_id.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Cmd(CommandMessage),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    State(StateMessage),
    Course { course: Course },
    Error { code: String, message: String },
}

impl ServerMessage {
    pub fn error(e: &OddError) -> Self {
        ServerMessage::Error {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// Parses one client frame. Unknown fields are ignored; missing or
/// non-numeric fields and non-finite values are rejected.
pub fn parse_client(text: &str) -> Result<ClientMessage> {
    let msg: ClientMessage =
        serde_json::from_str(text.trim()).map_err(|e| OddError::MalformedMessage(e.to_string()))?;
    let ClientMessage::Cmd(c) = &msg;
    let finite = [c.vx, c.vy, c.wz, c.ddot].iter().all(|v| v.is_finite())
        && c.d_setpoint.is_none_or(f64::is_finite);
    if !finite {
        return Err(OddError::MalformedMessage("non-finite command value".into()));
    }
    Ok(msg)
}

pub fn parse_server(text: &str) -> Result<ServerMessage> {
    serde_json::from_str(text.trim()).map_err(|e| OddError::MalformedMessage(e.to_string()))
}
