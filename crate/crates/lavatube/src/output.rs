//! CSV and JSONL file formats.
//!
//! | file                | columns                                                        |
//! |---------------------|----------------------------------------------------------------|
//! | `coverage.csv`      | `timestep,coverage`                                            |
//! | `hops.csv`          | `timestep,robot,from_x,from_y,to_x,to_y,distance,delta_v,returning` |
//! | `hop_sweep.csv`     | `body,hop_distance_m,n_hops,total_distance_m`                  |
//! | `comms_time.csv`    | `hops,total_time_s`                                            |
//! | `monte_carlo.csv`   | `robot_count,timestep,mean_coverage,std_coverage`              |
//!
//! `snapshots.jsonl` holds one [`SnapshotRecord`] per line.

use std::io::{BufRead, Write};

use lavatube_core::engine::{CoverageStats, HopEvent, Phase, Snapshot, BASE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub timestep: u32,
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopRow {
    pub timestep: u32,
    pub robot: usize,
    pub from_x: f64,
    pub from_y: f64,
    pub to_x: f64,
    pub to_y: f64,
    pub distance: f64,
    pub delta_v: f64,
    pub returning: bool,
}

impl From<&HopEvent> for HopRow {
    fn from(h: &HopEvent) -> Self {
        Self {
            timestep: h.timestep,
            robot: h.robot,
            from_x: h.from.x,
            from_y: h.from.y,
            to_x: h.to.x,
            to_y: h.to.y,
            distance: h.distance,
            delta_v: h.delta_v,
            returning: h.returning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub body: String,
    pub hop_distance_m: f64,
    pub n_hops: u64,
    pub total_distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommsTimeRow {
    pub hops: usize,
    pub total_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRow {
    pub robot_count: usize,
    pub timestep: u32,
    pub mean_coverage: f64,
    pub std_coverage: f64,
}

pub fn monte_carlo_rows(stats: &[CoverageStats]) -> Vec<MonteCarloRow> {
    stats
        .iter()
        .flat_map(|s| {
            s.mean.iter().zip(&s.std).enumerate().map(|(t, (m, sd))| MonteCarloRow {
                robot_count: s.robot_count,
                timestep: t as u32,
                mean_coverage: *m,
                std_coverage: *sd,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseName {
    Exploring,
    Returning,
    Home,
}

impl From<Phase> for PhaseName {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Exploring => PhaseName::Exploring,
            Phase::Returning => PhaseName::Returning,
            Phase::Home => PhaseName::Home,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleName {
    Base,
    Explorer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub id: usize,
    pub role: RoleName,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub timestep: u32,
    pub phase: PhaseName,
    pub robots: Vec<RobotRecord>,
    pub newly_explored: usize,
    pub coverage: f64,
    pub base_connected: bool,
    pub swarm_connected: bool,
}

impl From<&Snapshot> for SnapshotRecord {
    fn from(s: &Snapshot) -> Self {
        Self {
            timestep: s.timestep,
            phase: s.phase.into(),
            robots: s
                .poses
                .iter()
                .enumerate()
                .map(|(id, p)| RobotRecord {
                    id,
                    role: if id == BASE { RoleName::Base } else { RoleName::Explorer },
                    x: p.x,
                    y: p.y,
                    phi: p.phi,
                })
                .collect(),
            newly_explored: s.newly_explored,
            coverage: s.coverage,
            base_connected: s.base_connected,
            swarm_connected: s.swarm_connected,
        }
    }
}

pub fn write_csv<W: Write, R: Serialize>(writer: W, rows: &[R]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read, T: for<'de> Deserialize<'de>>(reader: R) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub fn write_jsonl<W: Write>(mut writer: W, records: &[SnapshotRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<SnapshotRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_csv_header_and_rows() {
        let rows = [
            CoverageRow { timestep: 0, coverage: 0.25 },
            CoverageRow { timestep: 1, coverage: 0.5 },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "timestep,coverage\n0,0.25\n1,0.5\n");
        let back: Vec<CoverageRow> = read_csv(&buf[..]).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn jsonl_round_trip() {
        let rec = SnapshotRecord {
            timestep: 3,
            phase: PhaseName::Returning,
            robots: vec![RobotRecord { id: 0, role: RoleName::Base, x: 0.0, y: 4.0, phi: 0.0 }],
            newly_explored: 12,
            coverage: 0.125,
            base_connected: false,
            swarm_connected: true,
        };
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[rec.clone(), rec.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"phase\":\"returning\""));
        assert_eq!(read_jsonl(&buf[..]).unwrap(), vec![rec.clone(), rec]);
    }
}
