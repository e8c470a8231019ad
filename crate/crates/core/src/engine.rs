//! The accelerated particle-field engine.
//!
//! One step runs deposit -> forward transform -> implicit concentration
//! update -> cutoff gradient -> gather -> Euler-Maruyama move, entirely on
//! step n-1 state, so per-particle cost is O(1) and field cost is O(H^d log H).

use crate::config::{RunConfig, SimParams};
use crate::error::Result;
use crate::interp::{self, InterpOrder};
use crate::particles::ParticleEnsemble;
use crate::spectral::{update_alpha, Complex64, FieldRole, SpectralField, SpectralWorkspace};
use std::time::Instant;

/// Accumulated wall time per pipeline phase, in seconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub deposit: f64,
    pub forward: f64,
    pub alpha_update: f64,
    pub gradient: f64,
    pub gather: f64,
    pub em: f64,
    /// Total time spent inside `step`, timed independently of the phases.
    pub step_total: f64,
}

impl PhaseTimings {
    pub fn phase_sum(&self) -> f64 {
        self.deposit + self.forward + self.alpha_update + self.gradient + self.gather + self.em
    }
}

pub struct Engine {
    pub params: SimParams,
    p2g: InterpOrder,
    g2p: InterpOrder,
    ws: SpectralWorkspace,
    ens: ParticleEnsemble,
    alpha: SpectralField,
    last_beta0: Complex64,
    timings: PhaseTimings,
}

impl Engine {
    pub fn new(params: SimParams, ens: ParticleEnsemble) -> Result<Self> {
        let params = params.validate()?;
        let alpha = SpectralField::zeros(params.box_len, params.grid_h, params.dim, FieldRole::Alpha);
        Ok(Engine {
            p2g: InterpOrder::from_usize(params.p2g_order)?,
            g2p: InterpOrder::from_usize(params.g2p_order)?,
            ws: SpectralWorkspace::new(params.grid_h, params.dim),
            ens,
            alpha,
            last_beta0: Complex64::new(0.0, 0.0),
            timings: PhaseTimings::default(),
            params,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let ens = cfg.scenario.sample(&cfg.params)?;
        Engine::new(cfg.params.clone(), ens)
    }

    pub fn ensemble(&self) -> &ParticleEnsemble {
        &self.ens
    }

    /// Test harnesses (node-snapping coupling runs) may rewrite positions
    /// between steps.
    pub fn ensemble_mut(&mut self) -> &mut ParticleEnsemble {
        &mut self.ens
    }

    pub fn alpha(&self) -> &SpectralField {
        &self.alpha
    }

    pub fn step_index(&self) -> usize {
        self.ens.step_index
    }

    /// Density zero mode recorded at the latest step (equals M0 / L^d up to
    /// roundoff while mass is conserved).
    pub fn last_beta0(&self) -> Complex64 {
        self.last_beta0
    }

    pub fn timings(&self) -> &PhaseTimings {
        &self.timings
    }

    /// Sup-norm of the cutoff-restricted concentration field.
    pub fn sup_norm_c(&mut self, cutoff_h0: usize) -> f64 {
        self.ws.sup_norm_c(&self.alpha, cutoff_h0)
    }

    /// Advance one step.
    pub fn step(&mut self) -> Result<()> {
        let step_start = Instant::now();
        let p = &self.params;

        let t = Instant::now();
        let phi = interp::deposit(&self.ens, p.grid_h, self.p2g)?;
        self.timings.deposit += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let beta = self.ws.forward_density(&phi);
        self.last_beta0 = beta.zero_mode();
        self.timings.forward += t.elapsed().as_secs_f64();

        let t = Instant::now();
        self.alpha = update_alpha(&self.alpha, &beta, p);
        self.timings.alpha_update += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let grad = self.ws.gradient_grid(&self.alpha, p.cutoff_h0)?;
        self.timings.gradient += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let drift = interp::gather_vector(&grad, &self.ens, self.g2p)?;
        self.timings.gather += t.elapsed().as_secs_f64();

        let t = Instant::now();
        self.ens
            .em_step(&drift, p.chi, p.mu, p.dt, p.rng_seed)?;
        self.timings.em += t.elapsed().as_secs_f64();

        self.timings.step_total += step_start.elapsed().as_secs_f64();
        Ok(())
    }

    /// Run `n` steps, invoking `hook` after each (and once before the first
    /// with the initial state).
    pub fn run(&mut self, n: usize, mut hook: impl FnMut(&mut Engine) -> Result<()>) -> Result<()> {
        hook(self)?;
        for _ in 0..n {
            self.step()?;
            hook(self)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimParams;
    use crate::scenarios::ScenarioSpec;

    fn small_config() -> RunConfig {
        RunConfig {
            params: SimParams {
                dim: 3,
                grid_h: 16,
                cutoff_h0: 16,
                box_len: 8.0,
                n_particles: 2048,
                total_mass: 40.0,
                dt: 1e-4,
                n_steps: 20,
                ..SimParams::default()
            },
            scenario: ScenarioSpec::default(),
        }
    }

    #[test]
    fn mass_mode_and_containment_hold_over_a_run() {
        let cfg = small_config().validate().unwrap();
        let mut engine = Engine::from_config(&cfg).unwrap();
        let expect = cfg.params.total_mass / cfg.params.box_len.powi(3);
        for _ in 0..cfg.params.n_steps {
            engine.step().unwrap();
            let b0 = engine.last_beta0();
            assert!((b0.re - expect).abs() <= 1e-12 * expect);
            assert!(b0.im.abs() <= 1e-12 * expect);
            assert_eq!(engine.ensemble().len(), cfg.params.n_particles);
            for x in engine.ensemble().iter() {
                for &c in x {
                    assert!((-4.0..4.0).contains(&c));
                }
            }
        }
    }

    #[test]
    fn bitwise_deterministic_replay() {
        let cfg = small_config().validate().unwrap();
        let run = || {
            let mut engine = Engine::from_config(&cfg).unwrap();
            for _ in 0..10 {
                engine.step().unwrap();
            }
            engine.ensemble().positions_flat().to_vec()
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn chi_zero_reduces_to_pure_diffusion() {
        // with chi = 0 the field is decoupled: per-axis variance growth
        // matches 2 mu tau n from the initial spread
        let mut cfg = small_config();
        cfg.params.chi = 0.0;
        cfg.params.n_particles = 20_000;
        cfg.params.mu = 0.5;
        let cfg = cfg.validate().unwrap();
        let mut engine = Engine::from_config(&cfg).unwrap();
        let var0 = axis_variance(engine.ensemble(), 0);
        let steps = 20;
        for _ in 0..steps {
            engine.step().unwrap();
        }
        let var1 = axis_variance(engine.ensemble(), 0);
        let expect = 2.0 * cfg.params.mu * cfg.params.dt * steps as f64;
        let growth = var1 - var0;
        let se = (2.0 / cfg.params.n_particles as f64).sqrt() * (var0 + expect);
        assert!((growth - expect).abs() < 4.0 * se, "growth {growth} vs {expect} (se {se})");
    }

    fn axis_variance(ens: &ParticleEnsemble, s: usize) -> f64 {
        let n = ens.len() as f64;
        let mean: f64 = ens.iter().map(|x| x[s]).sum::<f64>() / n;
        ens.iter().map(|x| (x[s] - mean).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn phase_timings_cover_step_total() {
        let cfg = small_config().validate().unwrap();
        let mut engine = Engine::from_config(&cfg).unwrap();
        for _ in 0..10 {
            engine.step().unwrap();
        }
        let t = engine.timings();
        assert!(
            t.phase_sum() >= 0.95 * t.step_total,
            "phases {:.6}s vs total {:.6}s",
            t.phase_sum(),
            t.step_total
        );
    }
}
