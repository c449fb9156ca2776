//! Trajectory dumps: long-format CSV and per-frame binary profiles with a
//! JSON manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SkewState;
use crate::error::Result;
use crate::profile::{from_bytes, to_bytes, Profile};

/// Writes `time,node,value` rows for every sample.
pub fn write_trajectory_csv<W: Write>(samples: &[SkewState], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "node", "value"])?;
    for s in samples {
        for (i, v) in s.profile.values().iter().enumerate() {
            w.serialize((s.time, i, v))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub time: f64,
    pub phase: Vec<f64>,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub frames: Vec<FrameEntry>,
}

/// Writes `frame_NNNNN.bin` files and `manifest.json` into `dir`.
pub fn write_trajectory_binary(samples: &[SkewState], dir: &Path) -> Result<TrajectoryManifest> {
    fs::create_dir_all(dir)?;
    let mut frames = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        let file = format!("frame_{k:05}.bin");
        fs::write(dir.join(&file), to_bytes(&s.profile))?;
        frames.push(FrameEntry {
            time: s.time,
            phase: s.phase.theta().to_vec(),
            file,
        });
    }
    let manifest = TrajectoryManifest { frames };
    fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Reads a manifest and its frames back.
pub fn read_manifest(dir: &Path) -> Result<Vec<(f64, Profile)>> {
    let manifest: TrajectoryManifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
    manifest
        .frames
        .iter()
        .map(|f| Ok((f.time, from_bytes(&fs::read(dir.join(&f.file))?)?)))
        .collect()
}
