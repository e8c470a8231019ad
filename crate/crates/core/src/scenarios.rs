//! Samplers for the initial densities: uniform ball/disk, four-ball
//! tetrahedral configuration, toroidal shell.

use crate::config::SimParams;
use crate::error::{KsError, Result};
use crate::particles::ParticleEnsemble;
use crate::rng::{CounterStream, StreamDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Uniform ball (d = 3) or disk (d = 2).
    Ball,
    /// Alias of Ball for d = 2 configs that want to be explicit.
    Disk,
    /// Four uniform balls of radius 1/2 at the vertices of a regular
    /// tetrahedron, mass M0/4 each.
    Tetra,
    /// Uniform solid torus (R - sqrt(x1^2 + x2^2))^2 + x3^2 <= r^2.
    Torus,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(ScenarioKind::Ball),
            "disk" => Ok(ScenarioKind::Disk),
            "tetra" => Ok(ScenarioKind::Tetra),
            "torus" => Ok(ScenarioKind::Torus),
            other => Err(KsError::Config(format!(
                "unknown scenario kind `{other}` (expected ball|disk|tetra|torus)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Ball => "ball",
            ScenarioKind::Disk => "disk",
            ScenarioKind::Tetra => "tetra",
            ScenarioKind::Torus => "torus",
        }
    }
}

/// Geometry of the initial density; mass and particle count come from
/// `SimParams`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub center: [f64; 3],
    pub radius: f64,
    pub major_radius: f64,
    pub minor_radius: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Ball,
            center: [0.0; 3],
            radius: 1.0,
            major_radius: 1.0,
            minor_radius: 0.4,
        }
    }
}

/// Vertices of the tetrahedral four-ball configuration (edge length sqrt(3)).
pub const TETRA_VERTICES: [[f64; 3]; 4] = [
    [1.0, 0.0, 0.0],
    [-0.5, 0.866_025_403_784_438_6, 0.0], // (-1/2, sqrt(3)/2, 0)
    [-0.5, -0.866_025_403_784_438_6, 0.0],
    [0.0, 0.0, 1.414_213_562_373_095_1], // (0, 0, sqrt(2))
];

pub const TETRA_BALL_RADIUS: f64 = 0.5;

impl ScenarioSpec {
    /// Geometry must fit inside the box with margin at least one grid cell.
    pub fn validate(&self, params: &SimParams) -> Result<()> {
        let half = 0.5 * params.box_len;
        let cell = params.spacing();
        let fits = |extent: f64| extent <= half - cell;
        match self.kind {
            ScenarioKind::Ball | ScenarioKind::Disk => {
                if !(self.radius > 0.0) {
                    return Err(KsError::Config("scenario.radius must be positive".into()));
                }
                let reach = self.center[..params.dim]
                    .iter()
                    .fold(0.0f64, |m, c| m.max(c.abs()))
                    + self.radius;
                if !fits(reach) {
                    return Err(KsError::Config(format!(
                        "ball exits box: |center| + radius = {reach} > L/2 - h"
                    )));
                }
            }
            ScenarioKind::Tetra => {
                if params.dim != 3 {
                    return Err(KsError::Config("tetra scenario requires dim = 3".into()));
                }
                let reach = TETRA_VERTICES
                    .iter()
                    .flat_map(|v| v.iter())
                    .fold(0.0f64, |m, c| m.max(c.abs()))
                    + TETRA_BALL_RADIUS;
                if !fits(reach) {
                    return Err(KsError::Config("tetra configuration exits box".into()));
                }
            }
            ScenarioKind::Torus => {
                if params.dim != 3 {
                    return Err(KsError::Config("torus scenario requires dim = 3".into()));
                }
                if !(self.minor_radius > 0.0 && self.major_radius > 0.0) {
                    return Err(KsError::Config("torus radii must be positive".into()));
                }
                if !fits(self.major_radius + self.minor_radius) {
                    return Err(KsError::Config("torus exits box".into()));
                }
            }
        }
        Ok(())
    }

    /// Draw the initial ensemble from the counter-based stream, one key per
    /// particle, so sampling is order-independent and reproducible.
    pub fn sample(&self, params: &SimParams) -> Result<ParticleEnsemble> {
        self.validate(params)?;
        let p = params.n_particles;
        let dim = params.dim;
        let mut positions = vec![0.0f64; p * dim];
        match self.kind {
            ScenarioKind::Ball | ScenarioKind::Disk => {
                for i in 0..p {
                    let mut stream =
                        CounterStream::new(params.rng_seed, StreamDomain::Init, 0, i as u32);
                    let x = sample_ball_point(&mut stream, &self.center[..dim], self.radius);
                    positions[i * dim..(i + 1) * dim].copy_from_slice(&x[..dim]);
                }
            }
            ScenarioKind::Tetra => {
                // split P as evenly as possible, remainder to the first balls
                let base = p / 4;
                let rem = p % 4;
                let mut bounds = [0usize; 5];
                for b in 0..4 {
                    bounds[b + 1] = bounds[b] + base + usize::from(b < rem);
                }
                for i in 0..p {
                    let ball = bounds[1..].iter().position(|&b| i < b).unwrap();
                    let mut stream =
                        CounterStream::new(params.rng_seed, StreamDomain::Init, 0, i as u32);
                    let x = sample_ball_point(
                        &mut stream,
                        &TETRA_VERTICES[ball],
                        TETRA_BALL_RADIUS,
                    );
                    positions[i * 3..(i + 1) * 3].copy_from_slice(&x);
                }
            }
            ScenarioKind::Torus => {
                for i in 0..p {
                    let mut stream =
                        CounterStream::new(params.rng_seed, StreamDomain::Init, 0, i as u32);
                    let x = sample_torus_point(&mut stream, self.major_radius, self.minor_radius);
                    positions[i * 3..(i + 1) * 3].copy_from_slice(&x);
                }
            }
        }
        Ok(ParticleEnsemble::from_positions(
            positions,
            dim,
            params.total_mass,
            params.box_len,
        ))
    }
}

/// Rejection sampling of a uniform point in the ball (or disk) from its
/// bounding cube; acceptance is pi/6 ~ 0.524 in 3D, pi/4 in 2D.
fn sample_ball_point(stream: &mut CounterStream, center: &[f64], radius: f64) -> [f64; 3] {
    let dim = center.len();
    loop {
        let mut v = [0.0f64; 3];
        let mut norm2 = 0.0;
        for slot in v.iter_mut().take(dim) {
            *slot = (2.0 * stream.uniform() - 1.0) * radius;
            norm2 += *slot * *slot;
        }
        if norm2 <= radius * radius {
            let mut out = [0.0f64; 3];
            for s in 0..dim {
                out[s] = center[s] + v[s];
            }
            return out;
        }
    }
}

/// Rejection sampling of a uniform point in the solid torus from its bounding
/// box [-(R+r), R+r]^2 x [-r, r].
fn sample_torus_point(stream: &mut CounterStream, major: f64, minor: f64) -> [f64; 3] {
    let reach = major + minor;
    loop {
        let x1 = (2.0 * stream.uniform() - 1.0) * reach;
        let x2 = (2.0 * stream.uniform() - 1.0) * reach;
        let x3 = (2.0 * stream.uniform() - 1.0) * minor;
        let rho = (x1 * x1 + x2 * x2).sqrt();
        if (major - rho).powi(2) + x3 * x3 <= minor * minor {
            return [x1, x2, x3];
        }
    }
}
