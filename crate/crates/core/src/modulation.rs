//! Frequency-uniform decomposition and unweighted modulation-space norms.
//!
//! `rho` is a bump in `|xi|_inf`: one on `[0, 1/2]`, zero beyond `1`, with a
//! smoothstep transition in between. The pieces are
//! `sigma_k = rho(. - k) / sum_l rho(. - l)` and `box_k = F^{-1} sigma_k F`.
//! Each `sigma_k` is stored sparsely over its support `|xi - k|_inf < 1`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fft;
use crate::grid::{lp_norm, Field, Grid};

/// Shape of the transition of `rho` between `|xi|_inf = 1/2` and `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransitionProfile {
    /// Polynomial smoothstep `S_N`, of class `C^N` (`N = 2` is the quintic).
    Smoothstep { order: u32 },
    /// `e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})`, of class `C^inf`.
    Exponential,
}

impl Default for TransitionProfile {
    fn default() -> Self {
        TransitionProfile::Smoothstep { order: 2 }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl TransitionProfile {
    /// Increasing step on `[0, 1]` from 0 to 1.
    fn step(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match *self {
            TransitionProfile::Smoothstep { order } => {
                let n = order;
                let poly: f64 = (0..=n)
                    .map(|k| binomial(n + k, k) * binomial(2 * n + 1, n - k) * (-x).powi(k as i32))
                    .sum();
                x.powi(n as i32 + 1) * poly
            }
            TransitionProfile::Exponential => {
                let a = (-1.0 / x).exp();
                let b = (-1.0 / (1.0 - x)).exp();
                a / (a + b)
            }
        }
    }

    /// `rho` as a function of `r = |xi|_inf`.
    pub fn bump(&self, r: f64) -> f64 {
        if r <= 0.5 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            1.0 - self.step(2.0 * (r - 0.5))
        }
    }
}

/// Exponents `(p, q)` of an unweighted modulation norm `M^{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModNormSpec {
    pub p: f64,
    pub q: f64,
}

impl ModNormSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= 1.0) {
            return Err(LabError::InvalidParameter(format!(
                "modulation exponents must satisfy p, q >= 1 (got p = {p}, q = {q})"
            )));
        }
        Ok(Self { p, q })
    }

    /// `M^{p, p'}`.
    pub fn dual_pair(p: f64) -> Result<Self> {
        Self::new(p, conjugate_exponent(p))
    }
}

/// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Discrete `l^q` norm in a fixed summation order.
pub fn lq_norm(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().cloned().fold(0.0, f64::max)
    } else {
        values.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

#[derive(Debug, Clone)]
struct Piece {
    index: [i64; 3],
    support: Vec<(u32, f64)>,
}

/// Precomputed `sigma_k` for `|k|_inf <= K_max`.
#[derive(Debug, Clone)]
pub struct ModulationPartition {
    grid: Grid,
    transition: TransitionProfile,
    k_max: i64,
    pieces: Vec<Piece>,
}

impl ModulationPartition {
    pub fn build(grid: Grid, transition: TransitionProfile) -> Result<Self> {
        let samples_per_unit = 1.0 / grid.dxi();
        if samples_per_unit < 4.0 {
            return Err(LabError::InvalidGrid(format!(
                "only {samples_per_unit} frequency samples per unit interval; need >= 4 (L >= 2)"
            )));
        }
        let k_max = (grid.points() as f64 / (4.0 * grid.half_extent())).floor() as i64 + 1;
        if k_max < 4 {
            return Err(LabError::InvalidGrid(format!(
                "frequency band too narrow: K_max = {k_max} < 4 (need M >= 12 L)"
            )));
        }
        let n = grid.dims();
        let side = (2 * k_max + 1) as usize;
        let count = side.pow(n as u32);
        let mut pieces: Vec<Piece> = (0..count)
            .map(|c| {
                let mut index = [0i64; 3];
                let mut rem = c;
                for d in (0..n).rev() {
                    index[d] = (rem % side) as i64 - k_max;
                    rem /= side;
                }
                Piece {
                    index,
                    support: Vec::new(),
                }
            })
            .collect();

        let offsets = neighbour_offsets(n);
        let mut weights: Vec<([i64; 3], f64)> = Vec::with_capacity(offsets.len());
        for idx in 0..grid.len() {
            let xi = grid.frequency(idx);
            let mut centre = [0i64; 3];
            for d in 0..n {
                centre[d] = xi[d].round() as i64;
            }
            weights.clear();
            let mut total = 0.0;
            for off in &offsets {
                let mut l = [0i64; 3];
                let mut dist = 0.0f64;
                for d in 0..n {
                    l[d] = centre[d] + off[d];
                    dist = dist.max((xi[d] - l[d] as f64).abs());
                }
                let r = transition.bump(dist);
                if r > 0.0 {
                    weights.push((l, r));
                    total += r;
                }
            }
            for &(l, r) in &weights {
                let mut pos = 0usize;
                for d in 0..n {
                    // every represented frequency lies within the truncated set
                    debug_assert!(l[d].abs() <= k_max);
                    pos = pos * side + (l[d] + k_max) as usize;
                }
                pieces[pos].support.push((idx as u32, r / total));
            }
        }
        Ok(Self {
            grid,
            transition,
            k_max,
            pieces,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn transition(&self) -> TransitionProfile {
        self.transition
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Indices `k` in the fixed enumeration order used by every reduction.
    pub fn indices(&self) -> Vec<Vec<i64>> {
        let n = self.grid.dims();
        self.pieces.iter().map(|p| p.index[..n].to_vec()).collect()
    }

    fn position(&self, k: &[i64]) -> Result<usize> {
        let n = self.grid.dims();
        if k.len() != n || k.iter().any(|c| c.abs() > self.k_max) {
            return Err(LabError::IndexOutOfRange(k.to_vec()));
        }
        let side = (2 * self.k_max + 1) as usize;
        Ok(k.iter()
            .fold(0usize, |acc, &c| acc * side + (c + self.k_max) as usize))
    }

    /// `sigma_k` evaluated on the whole frequency lattice (FFT order).
    pub fn sigma(&self, k: &[i64]) -> Result<Vec<f64>> {
        let piece = &self.pieces[self.position(k)?];
        let mut out = vec![0.0; self.grid.len()];
        for &(i, s) in &piece.support {
            out[i as usize] = s;
        }
        Ok(out)
    }

    /// `sum_k sigma_k` on the lattice.
    pub fn partition_sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for piece in &self.pieces {
            for &(i, s) in &piece.support {
                out[i as usize] += s;
            }
        }
        out
    }

    fn piece_from_raw(&self, raw: &[Complex64], piece: &Piece) -> Option<Vec<Complex64>> {
        if piece
            .support
            .iter()
            .all(|&(i, _)| raw[i as usize] == Complex64::new(0.0, 0.0))
        {
            return None;
        }
        let mut data = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for &(i, s) in &piece.support {
            data[i as usize] = raw[i as usize] * s;
        }
        fft::inverse_raw(&mut data, self.grid.points(), self.grid.dims());
        Some(data)
    }

    /// `box_k f = F^{-1}[sigma_k F f]`.
    pub fn box_piece(&self, f: &Field, k: &[i64]) -> Result<Field> {
        self.grid.ensure_same(f.grid())?;
        let piece = &self.pieces[self.position(k)?];
        let raw = f.raw_spectrum();
        let values = self
            .piece_from_raw(&raw, piece)
            .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.grid.len()]);
        Field::new(self.grid, values, f.time())
    }

    /// `||box_k f||_{L^p}` for every index, in enumeration order.
    pub fn piece_norms(&self, f: &Field, p: f64) -> Result<Vec<f64>> {
        self.grid.ensure_same(f.grid())?;
        let raw = f.raw_spectrum();
        let cell = self.grid.cell_volume();
        Ok(self
            .pieces
            .par_iter()
            .map(|piece| {
                self.piece_from_raw(&raw, piece)
                    .map(|data| lp_norm(&data, p, cell))
                    .unwrap_or(0.0)
            })
            .collect())
    }

    /// `|| ||box_k f||_{L^p} ||_{l^q_k}`.
    pub fn mod_norm(&self, f: &Field, spec: ModNormSpec) -> Result<f64> {
        Ok(lq_norm(&self.piece_norms(f, spec.p)?, spec.q))
    }
}

fn neighbour_offsets(n: usize) -> Vec<[i64; 3]> {
    let mut out = vec![[0i64; 3]];
    for d in 0..n {
        out = out
            .into_iter()
            .flat_map(|o| {
                [-1i64, 0, 1].into_iter().map(move |s| {
                    let mut c = o;
                    c[d] = s;
                    c
                })
            })
            .collect();
    }
    out
}

/// A norm participating in an embedding check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Lebesgue(f64),
    Modulation(ModNormSpec),
}

impl NormKind {
    pub fn eval(&self, f: &Field, part: &ModulationPartition) -> Result<f64> {
        match self {
            NormKind::Lebesgue(p) => Ok(f.lp_norm(*p)),
            NormKind::Modulation(spec) => part.mod_norm(f, *spec),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub worst_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Checks the exponent hypotheses of the embeddings
/// `M^{p,q1} -> L^p` (`q1 <= min(p, p')`), `L^p -> M^{p,q2}` (`q2 >= max(p, p')`)
/// and `M^{p1,q1} -> M^{p2,q2}` (`p1 <= p2`, `q1 <= q2`).
pub fn embedding_hypothesis(source: NormKind, target: NormKind) -> Result<()> {
    let bad = |msg: String| Err(LabError::HypothesisViolation(msg));
    match (source, target) {
        (NormKind::Modulation(s), NormKind::Lebesgue(p)) => {
            let lim = s.p.min(conjugate_exponent(s.p));
            if s.p != p {
                bad(format!("M^{{{},{}}} -> L^{p} needs equal p", s.p, s.q))
            } else if s.q > lim + 1e-15 {
                bad(format!(
                    "M^{{p,q1}} -> L^p needs q1 <= min(p, p') = {lim}, got {}",
                    s.q
                ))
            } else {
                Ok(())
            }
        }
        (NormKind::Lebesgue(p), NormKind::Modulation(t)) => {
            let lim = t.p.max(conjugate_exponent(t.p));
            if t.p != p {
                bad(format!("L^{p} -> M^{{{},{}}} needs equal p", t.p, t.q))
            } else if t.q < lim - 1e-15 {
                bad(format!(
                    "L^p -> M^{{p,q2}} needs q2 >= max(p, p') = {lim}, got {}",
                    t.q
                ))
            } else {
                Ok(())
            }
        }
        (NormKind::Modulation(s), NormKind::Modulation(t)) => {
            if s.p <= t.p && s.q <= t.q {
                Ok(())
            } else {
                bad(format!(
                    "M^{{{},{}}} -> M^{{{},{}}} needs p1 <= p2 and q1 <= q2",
                    s.p, s.q, t.p, t.q
                ))
            }
        }
        (NormKind::Lebesgue(a), NormKind::Lebesgue(b)) => {
            bad(format!("L^{a} -> L^{b} is not a modulation embedding"))
        }
    }
}

/// Worst `||f||_target / ||f||_source` over a sample family.
pub fn embedding_check(
    part: &ModulationPartition,
    source: NormKind,
    target: NormKind,
    family: &[Field],
) -> Result<EmbeddingReport> {
    embedding_hypothesis(source, target)?;
    let ratios = family
        .iter()
        .map(|f| {
            let s = source.eval(f, part)?;
            if s == 0.0 {
                return Err(LabError::ZeroNorm("source norm of a sample".into()));
            }
            Ok(target.eval(f, part)? / s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(EmbeddingReport {
        worst_ratio,
        ratios,
    })
}
