//! Observed jump data and its on-disk format.
//!
//! A trajectory of size n holds the records (Z_i, S_{i+1}, boundary flag)
//! for i = 0..n-1 together with the final post-jump location Z_n, so that it
//! carries exactly n transition triples (Z_i, Z_{i+1}, S_{i+1}). Only the
//! post-jump skeleton and the inter-jump times are kept; the continuous path
//! between jumps can be reconstructed from the flow when needed.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One observed jump: the state occupied, the waiting time until the next
/// jump, and whether that jump was forced from the boundary (in which case
/// `s_next` equals the exit time and the waiting time is censored).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub z: f64,
    pub s_next: f64,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    seed: u64,
    records: Vec<JumpRecord>,
    final_state: f64,
}

impl Trajectory {
    pub fn new(seed: u64, records: Vec<JumpRecord>, final_state: f64) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if !r.z.is_finite() || !r.s_next.is_finite() || r.s_next <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "record {i} has z={} s_next={}",
                    r.z, r.s_next
                )));
            }
        }
        if !final_state.is_finite() {
            return Err(Error::InvalidArgument("final state must be finite".into()));
        }
        Ok(Trajectory { seed, records, final_state })
    }

    /// Number of observed transitions.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn records(&self) -> &[JumpRecord] {
        &self.records
    }

    /// Post-jump location following the last record.
    pub fn final_state(&self) -> f64 {
        self.final_state
    }

    /// The n transition triples (z_from, z_to, s, boundary).
    pub fn transitions(&self) -> impl Iterator<Item = (f64, f64, f64, bool)> + '_ {
        self.records.iter().enumerate().map(move |(i, r)| {
            let to = if i + 1 < self.records.len() {
                self.records[i + 1].z
            } else {
                self.final_state
            };
            (r.z, to, r.s_next, r.boundary)
        })
    }

    /// Writes the `pdmp-trajectory v1` format: a header comment carrying the
    /// seed, a comment carrying the final post-jump location, then one
    /// `index,z,s_next,boundary` record per line. Numbers use 17 significant
    /// digits so that parsing them back is exact.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# pdmp-trajectory v1, seed={}", self.seed)?;
        writeln!(w, "# final={}", fmt17(self.final_state))?;
        for (i, r) in self.records.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                i,
                fmt17(r.z),
                fmt17(r.s_next),
                u8::from(r.boundary)
            )?;
        }
        Ok(())
    }

    pub fn write_to_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        buf.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut seed: Option<u64> = None;
        let mut final_state: Option<f64> = None;
        let mut records = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.into() };
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("pdmp-trajectory v1, seed=") {
                    seed = Some(v.trim().parse().map_err(|_| bad("unreadable seed"))?);
                } else if let Some(v) = rest.strip_prefix("final=") {
                    final_state = Some(v.trim().parse().map_err(|_| bad("unreadable final state"))?);
                }
                continue;
            }
            if seed.is_none() {
                return Err(bad("missing `# pdmp-trajectory v1` header"));
            }
            let mut parts = line.split(',');
            let mut next = |what: &str| {
                parts
                    .next()
                    .ok_or_else(|| bad(&format!("missing field `{what}`")))
            };
            let index: usize = next("index")?
                .trim()
                .parse()
                .map_err(|_| bad("unreadable index"))?;
            if index != records.len() {
                return Err(bad(&format!("index {index}, expected {}", records.len())));
            }
            let z: f64 = next("z")?.trim().parse().map_err(|_| bad("unreadable z"))?;
            let s_next: f64 = next("s_next")?
                .trim()
                .parse()
                .map_err(|_| bad("unreadable s_next"))?;
            let boundary = match next("boundary")?.trim() {
                "0" => false,
                "1" => true,
                other => return Err(bad(&format!("boundary flag `{other}` not 0/1"))),
            };
            if parts.next().is_some() {
                return Err(bad("trailing fields"));
            }
            records.push(JumpRecord { z, s_next, boundary });
        }
        let seed = seed.ok_or(Error::Parse { line: 1, msg: "empty trajectory file".into() })?;
        let final_state = final_state.ok_or(Error::Parse {
            line: 1,
            msg: "missing `# final=` comment".into(),
        })?;
        Trajectory::new(seed, records, final_state)
    }

    pub fn read_from_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// 17 significant digits: enough for f64 round-trips.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
