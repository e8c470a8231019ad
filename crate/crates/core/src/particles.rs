//! Particle ensemble state and the Euler-Maruyama step.

use crate::error::{KsError, Result};
use crate::rng;
use std::io::{Read, Write};

/// P equally weighted particles in the periodic box [-L/2, L/2)^d.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    /// Row-major P x d coordinates.
    positions: Vec<f64>,
    pub dim: usize,
    pub total_mass: f64,
    pub box_len: f64,
    pub step_index: usize,
}

impl ParticleEnsemble {
    pub fn from_positions(positions: Vec<f64>, dim: usize, total_mass: f64, box_len: f64) -> Self {
        assert!(dim == 2 || dim == 3);
        assert_eq!(positions.len() % dim, 0);
        ParticleEnsemble {
            positions,
            dim,
            total_mass,
            box_len,
            step_index: 0,
        }
    }

    /// Number of particles P.
    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Mass carried by each particle, M0 / P.
    pub fn particle_weight(&self) -> f64 {
        self.total_mass / self.len() as f64
    }

    pub fn position(&self, p: usize) -> &[f64] {
        &self.positions[p * self.dim..(p + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    /// Direct mutable access for test harnesses (e.g. node snapping); callers
    /// must keep every coordinate inside the half-open box.
    pub fn positions_flat_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }

    /// Advance every particle by chi * tau * drift plus a Gaussian increment
    /// with variance 2 * mu * tau per axis, then wrap into the box.
    ///
    /// `drift` is row-major P x d, the gathered concentration gradient at the
    /// pre-step positions. Noise is drawn from the counter-based stream keyed
    /// by (seed, step, particle), so the result is independent of evaluation
    /// order. Aborts on any non-finite drift entry.
    pub fn em_step(&mut self, drift: &[f64], chi: f64, mu: f64, dt: f64, seed: u64) -> Result<()> {
        let d = self.dim;
        assert_eq!(drift.len(), self.positions.len());
        let step = self.step_index as u32 + 1;
        let sigma = (2.0 * mu * dt).sqrt();
        let advect = chi * dt;
        let l = self.box_len;
        let mut noise = [0.0f64; 3];
        for p in 0..self.len() {
            let row = &drift[p * d..(p + 1) * d];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(KsError::NonFiniteDrift { particle: p });
            }
            rng::normal_increment(seed, step, p as u32, &mut noise[..d]);
            let x = &mut self.positions[p * d..(p + 1) * d];
            for s in 0..d {
                x[s] = wrap_coord(x[s] + advect * row[s] + sigma * noise[s], l);
            }
        }
        self.step_index += 1;
        Ok(())
    }

    /// Write a CSV snapshot with header `x1[,x2[,x3]]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|s| format!("x{s}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for x in self.iter() {
            let row: Vec<String> = x.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Packed binary snapshot: 16-byte header (magic "SIPFPART", u32 P, u32 d,
    /// little-endian) followed by row-major little-endian f64 coordinates.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"SIPFPART")?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        for &c in &self.positions {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read back a packed binary snapshot (mass and box must be supplied; the
    /// format stores only geometry).
    pub fn read_binary<R: Read>(mut r: R, total_mass: f64, box_len: f64) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != b"SIPFPART" {
            return Err(KsError::Config("bad particle snapshot magic".into()));
        }
        let p = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        if dim != 2 && dim != 3 {
            return Err(KsError::Config(format!("bad snapshot dimension {dim}")));
        }
        let mut buf = vec![0u8; p * dim * 8];
        r.read_exact(&mut buf)?;
        let positions = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(ParticleEnsemble::from_positions(positions, dim, total_mass, box_len))
    }
}

/// Map one coordinate into [-L/2, L/2); x = L/2 wraps to -L/2.
#[inline]
pub fn wrap_coord(x: f64, box_len: f64) -> f64 {
    let t = (x + 0.5 * box_len).rem_euclid(box_len);
    // rem_euclid can return exactly box_len when x + L/2 is a tiny negative
    let t = if t >= box_len { t - box_len } else { t };
    t - 0.5 * box_len
}

/// Map a point into the periodic box component-wise.
pub fn wrap_periodic(x: &[f64], box_len: f64) -> Vec<f64> {
    x.iter().map(|&c| wrap_coord(c, box_len)).collect()
}
