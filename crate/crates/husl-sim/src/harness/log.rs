//! Trajectory log: CSV with one metadata comment line and a fixed header.
//! Floats are written with the shortest round-trip representation, so a
//! write/read/write cycle is byte-identical.

use std::io::Write as _;
use std::path::Path;

use super::HarnessError;
use crate::metrics::Trajectory;

const MAGIC: &str = "# husl-sim v1";
const HEADER: &str = "t,com_x,com_y,com_z,cos_x,cos_y,fzL,txL,tyL,fzR,txR,tyR,phase,qp_l,qr_l,qp_r,qr_r";

/// One logged sample. `phase` is 0 double support, 1 single-left,
/// 2 single-right. `arm_q` follows the joint order left pitch, left roll,
/// right pitch, right roll.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub com: [f64; 3],
    pub cos: [f64; 2],
    pub fz_l: f64,
    pub tx_l: f64,
    pub ty_l: f64,
    pub fz_r: f64,
    pub tx_r: f64,
    pub ty_r: f64,
    pub phase: u8,
    pub arm_q: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub config_hash: String,
    pub seed: u64,
    pub dt: f64,
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{MAGIC} config_hash={} seed={} dt={}", self.config_hash, self.seed, self.dt)?;
        writeln!(out, "{HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.com[0],
                r.com[1],
                r.com[2],
                r.cos[0],
                r.cos[1],
                r.fz_l,
                r.tx_l,
                r.ty_l,
                r.fz_r,
                r.tx_r,
                r.ty_r,
                r.phase,
                r.arm_q[0],
                r.arm_q[1],
                r.arm_q[2],
                r.arm_q[3],
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let meta = lines.next().ok_or_else(|| bad("empty file"))?;
        let rest = meta.strip_prefix(MAGIC).ok_or_else(|| bad("missing magic line"))?;
        let mut config_hash = None;
        let mut seed = None;
        let mut dt = None;
        for token in rest.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| bad("malformed metadata"))?;
            match key {
                "config_hash" => config_hash = Some(value.to_string()),
                "seed" => seed = Some(value.parse().map_err(|_| bad("bad seed"))?),
                "dt" => dt = Some(value.parse().map_err(|_| bad("bad dt"))?),
                other => return Err(bad(&format!("unknown metadata key {other}"))),
            }
        }
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        if header != HEADER {
            return Err(bad("unexpected column header"));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 17 {
                return Err(bad(&format!("row {i}: expected 17 fields, got {}", fields.len())));
            }
            let f = |k: usize| -> Result<f64, HarnessError> {
                fields[k].parse().map_err(|_| bad(&format!("row {i}: bad float in column {k}")))
            };
            rows.push(LogRow {
                t: f(0)?,
                com: [f(1)?, f(2)?, f(3)?],
                cos: [f(4)?, f(5)?],
                fz_l: f(6)?,
                tx_l: f(7)?,
                ty_l: f(8)?,
                fz_r: f(9)?,
                tx_r: f(10)?,
                ty_r: f(11)?,
                phase: fields[12].parse().map_err(|_| bad(&format!("row {i}: bad phase")))?,
                arm_q: [f(13)?, f(14)?, f(15)?, f(16)?],
            });
        }
        Ok(Self {
            config_hash: config_hash.ok_or_else(|| bad("missing config_hash"))?,
            seed: seed.ok_or_else(|| bad("missing seed"))?,
            dt: dt.ok_or_else(|| bad("missing dt"))?,
            rows,
        })
    }

    /// Channels consumed by the metrics layer.
    pub fn to_trajectory(&self) -> Trajectory {
        Trajectory {
            dt: self.dt,
            com: self.rows.iter().map(|r| r.com).collect(),
            cos: self.rows.iter().map(|r| r.cos).collect(),
            grf_fz: self.rows.iter().map(|r| [r.fz_l, r.fz_r]).collect(),
        }
    }
}

fn bad(msg: &str) -> HarnessError {
    HarnessError::LogFormat(msg.to_string())
}
