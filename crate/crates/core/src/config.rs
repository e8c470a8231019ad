//! Run parameters: parsing, validation, and serialization.
//!
//! The single source of truth for physical and numerical constants. Config
//! files are flat `key = value` text; every key can also be supplied as a CLI
//! flag of the same name. Unknown keys are an error so typos cannot silently
//! change a run.

use crate::error::{KsError, Result};
use crate::scenarios::{ScenarioKind, ScenarioSpec};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// All physical and numerical constants of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Chemotactic sensitivity chi (positive in production runs; 0 decouples
    /// the field for diffusion-only checks).
    pub chi: f64,
    /// Diffusivity mu (positive in production runs).
    pub mu: f64,
    /// Relaxation epsilon >= 0; 0 selects the elliptic concentration update.
    pub eps: f64,
    /// Degradation rate k >= 0.
    pub kappa: f64,
    /// Period L of the box [-L/2, L/2)^d.
    pub box_len: f64,
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Fourier modes / grid nodes per dimension (even, >= 4).
    pub grid_h: usize,
    /// Spectral cutoff H0 <= grid_h used in gradient reconstruction.
    pub cutoff_h0: usize,
    /// Timestep tau.
    pub dt: f64,
    /// Number of steps N_T.
    pub n_steps: usize,
    /// Number of particles P.
    pub n_particles: usize,
    /// Total mass M0.
    pub total_mass: f64,
    /// Particle-to-grid interpolation order, 2 or 4.
    pub p2g_order: usize,
    /// Grid-to-particle interpolation order, 2 or 4.
    pub g2p_order: usize,
    /// Seed of the counter-based random stream.
    pub rng_seed: u64,
}

impl SimParams {
    /// Total simulated time T = n_steps * dt.
    pub fn total_time(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// Grid spacing h = L / H.
    pub fn spacing(&self) -> f64 {
        self.box_len / self.grid_h as f64
    }

    /// Whether the concentration update runs in the elliptic limit.
    pub fn is_elliptic(&self) -> bool {
        self.eps == 0.0
    }

    /// Check every invariant; returns the validated parameter set or a
    /// diagnostic naming the first violated invariant. Idempotent.
    pub fn validate(self) -> Result<SimParams> {
        if !(self.chi >= 0.0) || !self.chi.is_finite() {
            return Err(KsError::Config(format!("chi must be non-negative, got {}", self.chi)));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(KsError::Config(format!("mu must be non-negative, got {}", self.mu)));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(KsError::Config(format!("eps must be non-negative, got {}", self.eps)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(KsError::Config(format!("kappa must be non-negative, got {}", self.kappa)));
        }
        if !(self.box_len > 0.0) || !self.box_len.is_finite() {
            return Err(KsError::Config(format!("box_len must be positive, got {}", self.box_len)));
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(KsError::Config(format!("dim must be 2 or 3, got {}", self.dim)));
        }
        if self.grid_h % 2 != 0 {
            return Err(KsError::Config(format!("grid_h must be even, got {}", self.grid_h)));
        }
        if self.grid_h < 4 {
            return Err(KsError::Config(format!("grid_h must be >= 4, got {}", self.grid_h)));
        }
        if self.cutoff_h0 == 0 {
            return Err(KsError::Config("cutoff_h0 must be positive".into()));
        }
        if self.cutoff_h0 > self.grid_h {
            return Err(KsError::Config(format!(
                "cutoff exceeds grid: cutoff_h0 = {} > grid_h = {}",
                self.cutoff_h0, self.grid_h
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(KsError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(KsError::Config("n_steps must be positive".into()));
        }
        if self.n_particles == 0 {
            return Err(KsError::Config("n_particles must be positive".into()));
        }
        if self.n_particles as u64 > u32::MAX as u64 || self.n_steps as u64 > u32::MAX as u64 {
            return Err(KsError::Config(
                "n_particles and n_steps must fit in 32 bits (counter-based rng keys)".into(),
            ));
        }
        if !(self.total_mass > 0.0) || !self.total_mass.is_finite() {
            return Err(KsError::Config(format!(
                "total_mass must be positive, got {}",
                self.total_mass
            )));
        }
        if self.p2g_order != 2 && self.p2g_order != 4 {
            return Err(KsError::Config(format!("p2g_order must be 2 or 4, got {}", self.p2g_order)));
        }
        if self.g2p_order != 2 && self.g2p_order != 4 {
            return Err(KsError::Config(format!("g2p_order must be 2 or 4, got {}", self.g2p_order)));
        }
        Ok(self)
    }
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            chi: 1.0,
            mu: 1.0,
            eps: 1e-4,
            kappa: 0.1,
            box_len: 20.0,
            dim: 3,
            grid_h: 64,
            cutoff_h0: 64,
            dt: 1e-5,
            n_steps: 200,
            n_particles: 1 << 15,
            total_mass: 80.0,
            p2g_order: 4,
            g2p_order: 2,
            rng_seed: 1,
        }
    }
}

/// A fully resolved run configuration: parameters plus initial scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SimParams,
    pub scenario: ScenarioSpec,
}

impl RunConfig {
    pub fn validate(mut self) -> Result<RunConfig> {
        self.params = self.params.validate()?;
        self.scenario.validate(&self.params)?;
        Ok(self)
    }

    /// Serialize as flat `key = value` lines; parses back field-identical.
    pub fn to_key_values(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "chi = {}", p.chi);
        let _ = writeln!(s, "mu = {}", p.mu);
        let _ = writeln!(s, "eps = {}", p.eps);
        let _ = writeln!(s, "kappa = {}", p.kappa);
        let _ = writeln!(s, "box_len = {}", p.box_len);
        let _ = writeln!(s, "dim = {}", p.dim);
        let _ = writeln!(s, "grid_h = {}", p.grid_h);
        let _ = writeln!(s, "cutoff_h0 = {}", p.cutoff_h0);
        let _ = writeln!(s, "dt = {}", p.dt);
        let _ = writeln!(s, "n_steps = {}", p.n_steps);
        let _ = writeln!(s, "n_particles = {}", p.n_particles);
        let _ = writeln!(s, "total_mass = {}", p.total_mass);
        let _ = writeln!(s, "p2g_order = {}", p.p2g_order);
        let _ = writeln!(s, "g2p_order = {}", p.g2p_order);
        let _ = writeln!(s, "rng_seed = {}", p.rng_seed);
        let sc = &self.scenario;
        let _ = writeln!(s, "scenario.kind = {}", sc.kind.name());
        let _ = writeln!(
            s,
            "scenario.center = {}",
            sc.center.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "scenario.radius = {}", sc.radius);
        let _ = writeln!(s, "scenario.major_radius = {}", sc.major_radius);
        let _ = writeln!(s, "scenario.minor_radius = {}", sc.minor_radius);
        s
    }

    /// Parse `key = value` text. Later keys override earlier ones; unknown
    /// keys are an error.
    pub fn from_key_values(text: &str) -> Result<RunConfig> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                KsError::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_map(map)
    }

    /// Build from a key/value map (config file contents merged with CLI
    /// overrides).
    pub fn from_map(map: BTreeMap<String, String>) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            params: SimParams::default(),
            scenario: ScenarioSpec::default(),
        };
        for (key, value) in &map {
            cfg.apply_key(key, value)?;
        }
        cfg.validate()
    }

    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| KsError::Config(format!("invalid value `{v}` for key `{key}`")))
        }
        let p = &mut self.params;
        match key {
            "chi" => p.chi = num(key, value)?,
            "mu" => p.mu = num(key, value)?,
            "eps" => p.eps = num(key, value)?,
            "kappa" => p.kappa = num(key, value)?,
            "box_len" => p.box_len = num(key, value)?,
            "dim" => p.dim = num(key, value)?,
            "grid_h" => p.grid_h = num(key, value)?,
            "cutoff_h0" => p.cutoff_h0 = num(key, value)?,
            "dt" => p.dt = num(key, value)?,
            "n_steps" => p.n_steps = num(key, value)?,
            "n_particles" => p.n_particles = num(key, value)?,
            "total_mass" => p.total_mass = num(key, value)?,
            "p2g_order" => p.p2g_order = num(key, value)?,
            "g2p_order" => p.g2p_order = num(key, value)?,
            "rng_seed" => p.rng_seed = num(key, value)?,
            "scenario.kind" => self.scenario.kind = ScenarioKind::parse(value)?,
            "scenario.center" => {
                let comps: Vec<f64> = value
                    .split(',')
                    .map(|c| num("scenario.center", c.trim()))
                    .collect::<Result<_>>()?;
                if comps.is_empty() || comps.len() > 3 {
                    return Err(KsError::Config(format!(
                        "scenario.center needs 1..=3 comma-separated components, got `{value}`"
                    )));
                }
                let mut center = [0.0; 3];
                center[..comps.len()].copy_from_slice(&comps);
                self.scenario.center = center;
            }
            "scenario.radius" => self.scenario.radius = num(key, value)?,
            "scenario.major_radius" => self.scenario.major_radius = num(key, value)?,
            "scenario.minor_radius" => self.scenario.minor_radius = num(key, value)?,
            other => {
                return Err(KsError::Config(format!("unknown key `{other}`")));
            }
        }
        Ok(())
    }
}

/// Every settable config key, in file order. The CLI exposes one flag per key.
pub const CONFIG_KEYS: &[&str] = &[
    "chi",
    "mu",
    "eps",
    "kappa",
    "box_len",
    "dim",
    "grid_h",
    "cutoff_h0",
    "dt",
    "n_steps",
    "n_particles",
    "total_mass",
    "p2g_order",
    "g2p_order",
    "rng_seed",
    "scenario.kind",
    "scenario.center",
    "scenario.radius",
    "scenario.major_radius",
    "scenario.minor_radius",
];
