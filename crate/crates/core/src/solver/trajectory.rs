//! Time-sampled solutions, space-time norms and checkpoint containers.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{lp_norm, Field, Grid};

/// Snapshots of a solution at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    times: Vec<f64>,
    snapshots: Vec<Vec<Complex64>>,
}

impl Trajectory {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            times: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn from_parts(grid: Grid, times: Vec<f64>, snapshots: Vec<Vec<Complex64>>) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(LabError::InvalidParameter(format!(
                "{} times for {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        let mut t = Self::new(grid);
        for (time, s) in times.into_iter().zip(snapshots) {
            t.push(time, s)?;
        }
        Ok(t)
    }

    pub fn push(&mut self, time: f64, values: Vec<Complex64>) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(LabError::GridMismatch(format!(
                "snapshot of length {} on a grid of {} points",
                values.len(),
                self.grid.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(time > last) {
                return Err(LabError::InvalidParameter(format!(
                    "snapshot time {time} does not exceed the previous time {last}"
                )));
            }
        }
        self.times.push(time);
        self.snapshots.push(values);
        Ok(())
    }

    /// Appends another trajectory whose first time equals this one's last
    /// time; the duplicate snapshot is dropped.
    pub fn extend_from(&mut self, other: Trajectory) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        let skip = match (self.times.last(), other.times.first()) {
            (Some(&a), Some(&b)) if (a - b).abs() <= 1e-12 * a.abs().max(1.0) => 1,
            _ => 0,
        };
        for (t, s) in other.times.into_iter().zip(other.snapshots).skip(skip) {
            self.push(t, s)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshot(&self, i: usize) -> &[Complex64] {
        &self.snapshots[i]
    }

    pub fn snapshots(&self) -> &[Vec<Complex64>] {
        &self.snapshots
    }

    pub fn field(&self, i: usize) -> Field {
        Field::new(self.grid, self.snapshots[i].clone(), self.times[i])
            .expect("snapshot length checked on push")
    }

    pub fn last_field(&self) -> Option<Field> {
        (!self.is_empty()).then(|| self.field(self.len() - 1))
    }

    /// `||u(t_i)||_{L^r}` for every snapshot.
    pub fn lr_norms(&self, r: f64) -> Vec<f64> {
        let cell = self.grid.cell_volume();
        self.snapshots.iter().map(|s| lp_norm(s, r, cell)).collect()
    }

    /// `||u(t_i)||^2_{L^2}` for every snapshot.
    pub fn masses(&self) -> Vec<f64> {
        self.lr_norms(2.0).into_iter().map(|x| x * x).collect()
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m = self.masses();
        match m.first() {
            Some(&m0) if m0 > 0.0 => m.iter().map(|x| (x - m0).abs() / m0).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// `sup_t ||u(t)||_{L^2}`.
    pub fn sup_l2(&self) -> f64 {
        self.lr_norms(2.0).into_iter().fold(0.0, f64::max)
    }

    /// Pointwise difference of two trajectories on the same mesh.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        self.grid.ensure_same(&other.grid)?;
        if self.times.len() != other.times.len() {
            return Err(LabError::InvalidParameter(
                "trajectories on different meshes".into(),
            ));
        }
        let snaps = self
            .snapshots
            .iter()
            .zip(&other.snapshots)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Trajectory::from_parts(self.grid, self.times.clone(), snaps)
    }
}

/// Space-time norm together with a quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacetimeNorm {
    pub value: f64,
    /// Richardson-type estimate `|I_h - I_{2h}| / 3` pushed through `x -> x^{1/q}`;
    /// zero for `q = inf`, `NaN` when the snapshot count does not allow it.
    pub quadrature_error: f64,
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `(int_0^T ||u(t)||^q_{L^r} dt)^{1/q}` by the composite trapezoid rule over
/// the snapshots lying in `[t_0, t_0 + T]`; `q = inf` is the maximum.
pub fn spacetime_norm(traj: &Trajectory, q: f64, r: f64, t: f64) -> Result<SpacetimeNorm> {
    if traj.is_empty() {
        return Err(LabError::Insufficient("empty trajectory".into()));
    }
    let t0 = traj.times()[0];
    let end = t0 + t * (1.0 + 1e-12);
    let count = traj.times().iter().take_while(|&&s| s <= end).count();
    if count < 3 {
        return Err(LabError::Insufficient(format!(
            "{count} snapshots in [0, {t}]; at least 3 are required"
        )));
    }
    let norms: Vec<f64> = traj.lr_norms(r).into_iter().take(count).collect();
    if q.is_infinite() {
        return Ok(SpacetimeNorm {
            value: norms.iter().cloned().fold(0.0, f64::max),
            quadrature_error: 0.0,
        });
    }
    let times = &traj.times()[..count];
    let powered: Vec<f64> = norms.iter().map(|x| x.powf(q)).collect();
    let fine = trapezoid(times, &powered);
    let value = fine.powf(1.0 / q);
    let quadrature_error = if count % 2 == 1 {
        let ct: Vec<f64> = times.iter().step_by(2).cloned().collect();
        let cv: Vec<f64> = powered.iter().step_by(2).cloned().collect();
        let err = (fine - trapezoid(&ct, &cv)).abs() / 3.0;
        if fine > 0.0 {
            value * err / (q * fine)
        } else {
            0.0
        }
    } else {
        f64::NAN
    };
    Ok(SpacetimeNorm {
        value,
        quadrature_error,
    })
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"FNLSCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Writes the binary checkpoint container (all numbers little-endian):
///
/// | field        | type                                   |
/// |--------------|----------------------------------------|
/// | magic        | 8 bytes `FNLSCKPT`                     |
/// | version      | u32                                    |
/// | dims         | u32                                    |
/// | points       | u32                                    |
/// | half_extent  | f64                                    |
/// | count        | u64                                    |
/// | snapshots    | `count` x (time f64, `M^n` x (re f64, im f64)) |
pub fn write_checkpoint(traj: &Trajectory, mut out: impl Write) -> Result<()> {
    let g = traj.grid();
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    out.write_all(&(g.dims() as u32).to_le_bytes())?;
    out.write_all(&(g.points() as u32).to_le_bytes())?;
    out.write_all(&g.half_extent().to_le_bytes())?;
    out.write_all(&(traj.len() as u64).to_le_bytes())?;
    for (t, s) in traj.times().iter().zip(traj.snapshots()) {
        out.write_all(&t.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * s.len());
        for z in s {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_checkpoint(mut input: impl Read) -> Result<Trajectory> {
    let magic: [u8; 8] = read_array(&mut input)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(LabError::Io("not a checkpoint file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != CHECKPOINT_VERSION {
        return Err(LabError::Io(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let dims = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let points = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let half_extent = f64::from_le_bytes(read_array(&mut input)?);
    let grid = Grid::new(dims, half_extent, points)?;
    let count = u64::from_le_bytes(read_array(&mut input)?) as usize;
    let mut traj = Trajectory::new(grid);
    let mut buf = vec![0u8; 16 * grid.len()];
    for _ in 0..count {
        let t = f64::from_le_bytes(read_array(&mut input)?);
        input.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        traj.push(t, values)?;
    }
    Ok(traj)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSnapshot {
    time: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonCheckpoint {
    format: String,
    version: u32,
    grid: Grid,
    snapshots: Vec<JsonSnapshot>,
}

/// JSON twin of the binary container.
pub fn checkpoint_to_json(traj: &Trajectory) -> Result<String> {
    let doc = JsonCheckpoint {
        format: "fnls-lab-checkpoint".into(),
        version: CHECKPOINT_VERSION,
        grid: *traj.grid(),
        snapshots: traj
            .times()
            .iter()
            .zip(traj.snapshots())
            .map(|(&time, s)| JsonSnapshot {
                time,
                re: s.iter().map(|z| z.re).collect(),
                im: s.iter().map(|z| z.im).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).map_err(|e| LabError::Io(e.to_string()))
}

pub fn checkpoint_from_json(text: &str) -> Result<Trajectory> {
    let doc: JsonCheckpoint =
        serde_json::from_str(text).map_err(|e| LabError::Io(e.to_string()))?;
    if doc.version != CHECKPOINT_VERSION {
        return Err(LabError::Io(format!(
            "unsupported checkpoint version {}",
            doc.version
        )));
    }
    let grid = Grid::new(doc.grid.dims(), doc.grid.half_extent(), doc.grid.points())?;
    let mut traj = Trajectory::new(grid);
    for s in doc.snapshots {
        if s.re.len() != s.im.len() {
            return Err(LabError::Io(
                "real and imaginary parts differ in length".into(),
            ));
        }
        traj.push(
            s.time,
            s.re.into_iter()
                .zip(s.im)
                .map(|(a, b)| Complex64::new(a, b))
                .collect(),
        )?;
    }
    Ok(traj)
}
