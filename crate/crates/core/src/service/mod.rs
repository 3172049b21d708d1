//! Real-time teleoperation service and its wire schema.

mod course;
mod gate;
mod messages;
mod server;

pub use course::{Course, Obstacle, Spawn};
pub use gate::{CommandGate, TIMEOUT_HOLD, TIMEOUT_ZERO};
pub use messages::{parse_client, parse_server, ClientMessage, CommandMessage, ServerMessage, StateMessage};
pub use server::{serve, start, ServiceConfig, ServiceHandle, BROADCAST_HZ};
