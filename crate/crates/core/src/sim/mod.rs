//! Deterministic time stepping of the robot with sensors and disturbances.

mod config;
mod disturbance;
mod plant;
mod sensors;

pub use config::{CommandLimits, ConfigFile, Mode, Plant, SensorNoise, SimConfig};
pub use disturbance::{
    active_loads, group_forces, slip_rate, wheel_forces, ActiveLoads, Disturbance, DisturbanceKind,
    GRAVITY,
};
pub use plant::{apply_pitch_dynamics, step, RobotState, SimEvent, StepOutcome};
pub use sensors::sense;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::control::SensorFrame;
use crate::error::Result;
use crate::mecanum::WheelSpeeds;

/// Owns the mutable robot state and the sensor noise stream.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    state: RobotState,
    rng: ChaCha8Rng,
    events: Vec<SimEvent>,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let state = RobotState::initial(&config);
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Simulator {
            config,
            state,
            rng,
            events: Vec::new(),
        })
    }

    pub fn with_state(config: SimConfig, state: RobotState) -> Result<Self> {
        let mut sim = Simulator::new(config)?;
        sim.state = state;
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    pub fn sense(&mut self) -> SensorFrame {
        sense(&self.state, &self.config, &mut self.rng)
    }

    pub fn step(&mut self, setpoints: &WheelSpeeds) -> Result<Option<SimEvent>> {
        let out = step(&self.state, setpoints, &self.config)?;
        self.state = out.state;
        if let Some(e) = out.event {
            self.events.push(e);
        }
        Ok(out.event)
    }
}
