use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{OddError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spawn {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub d: f64,
}

/// Rectangle centered at `(x, y)`, rotated by `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub phi: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub id: String,
    pub spawn: Spawn,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

impl Course {
    /// Empty floor with the robot at the origin.
    pub fn open(d: f64) -> Self {
        Course {
            id: "open".into(),
            spawn: Spawn {
                x: 0.0,
                y: 0.0,
                phi: 0.0,
                d,
            },
            obstacles: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let c: Course = serde_json::from_str(&text).map_err(|e| OddError::Config(format!("course: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.spawn;
        if ![s.x, s.y, s.phi, s.d].iter().all(|v| v.is_finite()) {
            return Err(OddError::Config("course spawn must be finite".into()));
        }
        for o in &self.obstacles {
            let ok = [o.x, o.y, o.phi].iter().all(|v| v.is_finite()) && o.width > 0.0 && o.height > 0.0;
            if !ok {
                return Err(OddError::Config(format!("invalid obstacle {o:?}")));
            }
        }
        Ok(())
    }
}
