use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const LOG_HEADER: [&str; 18] = [
    "t", "x", "y", "phi", "d", "pitch", "vx", "vy", "wz", "ddot", "th1", "th2", "th3", "th4",
    "cmd_vx", "cmd_vy", "cmd_wz", "cmd_ddot",
];

/// One simulator step: state at `t` and the command applied over the step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LogRow {
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
    pub th1: f64,
    pub th2: f64,
    pub th3: f64,
    pub th4: f64,
    pub cmd_vx: f64,
    pub cmd_vy: f64,
    pub cmd_wz: f64,
    pub cmd_ddot: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(LOG_HEADER)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<Vec<LogRow>, _>>()?;
        Ok(TrajectoryLog { rows })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub fn export_log(log: &TrajectoryLog, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    log.write_csv(std::io::BufWriter::new(f))
}

pub fn import_log(path: &Path) -> Result<TrajectoryLog> {
    let f = std::fs::File::open(path)?;
    TrajectoryLog::read_csv(std::io::BufReader::new(f))
}
