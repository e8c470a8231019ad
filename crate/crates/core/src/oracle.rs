//! Direct-sum reference engine.
//!
//! Field evaluation by explicit trigonometric sums over every (particle, mode)
//! pair: O(P H^d) per step. It exists to be slow and correct, serving as the
//! coupling oracle and benchmark baseline for the accelerated engine. It
//! shares the counter-based noise stream with the accelerated path, so for a
//! fixed seed the only difference between the two engines is how the field is
//! evaluated.

use crate::config::SimParams;
use crate::error::{KsError, Result};
use crate::particles::ParticleEnsemble;
use crate::spectral::{for_each_mode, update_alpha, Complex64, FieldRole, SpectralField};

/// Default refusal threshold on P * H^d summation terms per step.
pub const DEFAULT_SCALE_GUARD: u128 = 1_000_000_000;

fn phase_table(h: usize, x: f64, box_len: f64, sign: f64) -> Vec<Complex64> {
    (0..h)
        .map(|i| {
            let q = SpectralField::signed_q(i, h) as f64;
            let theta = sign * 2.0 * std::f64::consts::PI * q * x / box_len;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Density coefficients by direct summation:
/// beta_q = M0 / (P L^d) sum_p e^(-2 pi i q . X_p / L) for every q in U.
pub fn direct_beta(ens: &ParticleEnsemble, grid_h: usize) -> SpectralField {
    let dim = ens.dim;
    let l = ens.box_len;
    let h = grid_h;
    let mut beta = SpectralField::zeros(l, h, dim, FieldRole::Beta);
    let scale = ens.total_mass / (ens.len() as f64 * l.powi(dim as i32));
    for x in ens.iter() {
        match dim {
            2 => {
                let t0 = phase_table(h, x[0], l, -1.0);
                let t1 = phase_table(h, x[1], l, -1.0);
                let mut flat = 0usize;
                for a in &t0 {
                    for b in &t1 {
                        beta.coeffs[flat] += a * b;
                        flat += 1;
                    }
                }
            }
            3 => {
                let t0 = phase_table(h, x[0], l, -1.0);
                let t1 = phase_table(h, x[1], l, -1.0);
                let t2 = phase_table(h, x[2], l, -1.0);
                let mut flat = 0usize;
                for a in &t0 {
                    for b in &t1 {
                        let ab = a * b;
                        for c in &t2 {
                            beta.coeffs[flat] += ab * c;
                            flat += 1;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    for c in &mut beta.coeffs {
        *c *= scale;
    }
    beta
}

/// Drift by direct summation over the cutoff box:
/// drift_p = Re sum_q (2 pi i / L) q alpha_q e^(+2 pi i q . X_p / L),
/// with Nyquist derivative modes zeroed to match the grid path.
pub fn direct_grad_c(
    alpha: &SpectralField,
    ens: &ParticleEnsemble,
    cutoff_h0: usize,
) -> Result<Vec<f64>> {
    let dim = ens.dim;
    let h = alpha.grid_h;
    let l = alpha.box_len;
    let nyquist = -(h as i64) / 2;
    let h0 = cutoff_h0 as i64;
    let two_pi_over_l = 2.0 * std::f64::consts::PI / l;
    let mut drift = vec![0.0f64; ens.len() * dim];
    for (p, x) in ens.iter().enumerate() {
        let tables: Vec<Vec<Complex64>> =
            (0..dim).map(|s| phase_table(h, x[s], l, 1.0)).collect();
        let mut re_acc = [0.0f64; 3];
        let mut im_acc = [0.0f64; 3];
        let mut abs_acc = 0.0f64;
        for_each_mode(h, dim, |flat, q| {
            let inside = (0..dim).all(|t| 2 * q[t].abs() <= h0);
            if !inside {
                return;
            }
            let a = alpha.coeffs[flat];
            if a.re == 0.0 && a.im == 0.0 {
                return;
            }
            let mut w = a;
            for (s, table) in tables.iter().enumerate() {
                w *= table[(q[s].rem_euclid(h as i64)) as usize];
            }
            for s in 0..dim {
                let qs = if q[s] == nyquist { 0.0 } else { q[s] as f64 };
                // Re[(2 pi i / L) q_s w] and its imaginary residue
                re_acc[s] += -two_pi_over_l * qs * w.im;
                im_acc[s] += two_pi_over_l * qs * w.re;
                abs_acc += two_pi_over_l * qs.abs() * w.norm();
            }
        });
        let tol = 1e-10 * abs_acc.max(1.0);
        for s in 0..dim {
            if im_acc[s].abs() > tol {
                return Err(KsError::NonHermitian {
                    residue: im_acc[s].abs(),
                    tol,
                });
            }
            drift[p * dim + s] = re_acc[s];
        }
    }
    Ok(drift)
}

/// The direct-sum engine: identical update sequence and noise stream as the
/// accelerated engine, with both field transfers done by explicit sums.
pub struct DirectEngine {
    pub params: SimParams,
    ens: ParticleEnsemble,
    alpha: SpectralField,
    last_beta0: Complex64,
}

impl DirectEngine {
    /// Refuses configurations above the scale guard unless `force` is set.
    pub fn new(params: SimParams, ens: ParticleEnsemble, force: bool) -> Result<Self> {
        let params = params.validate()?;
        let terms = params.n_particles as u128 * (params.grid_h as u128).pow(params.dim as u32);
        if terms > DEFAULT_SCALE_GUARD && !force {
            return Err(KsError::ScaleGuard {
                terms,
                guard: DEFAULT_SCALE_GUARD,
            });
        }
        let alpha = SpectralField::zeros(params.box_len, params.grid_h, params.dim, FieldRole::Alpha);
        Ok(DirectEngine {
            ens,
            alpha,
            last_beta0: Complex64::new(0.0, 0.0),
            params,
        })
    }

    pub fn ensemble(&self) -> &ParticleEnsemble {
        &self.ens
    }

    pub fn ensemble_mut(&mut self) -> &mut ParticleEnsemble {
        &mut self.ens
    }

    pub fn alpha(&self) -> &SpectralField {
        &self.alpha
    }

    pub fn last_beta0(&self) -> Complex64 {
        self.last_beta0
    }

    pub fn step(&mut self) -> Result<()> {
        let p = &self.params;
        let beta = direct_beta(&self.ens, p.grid_h);
        self.last_beta0 = beta.zero_mode();
        self.alpha = update_alpha(&self.alpha, &beta, p);
        let drift = direct_grad_c(&self.alpha, &self.ens, p.cutoff_h0)?;
        self.ens.em_step(&drift, p.chi, p.mu, p.dt, p.rng_seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridScalar;
    use crate::interp::{self, InterpOrder};
    use crate::rng::{CounterStream, StreamDomain};
    use crate::spectral::SpectralWorkspace;

    #[test]
    fn single_particle_at_origin_gives_flat_beta() {
        let l = 20.0;
        let ens = ParticleEnsemble::from_positions(vec![0.0, 0.0, 0.0], 3, 80.0, l);
        let beta = direct_beta(&ens, 8);
        let expect = 80.0 / l.powi(3);
        for c in &beta.coeffs {
            assert!((c.re - expect).abs() <= 1e-13 * expect);
            assert!(c.im.abs() <= 1e-13 * expect);
        }
    }

    #[test]
    fn beta_is_hermitian_for_any_cloud() {
        let l = 10.0;
        let mut stream = CounterStream::new(61, StreamDomain::Aux, 0, 0);
        let positions: Vec<f64> = (0..3 * 40).map(|_| (stream.uniform() - 0.5) * l).collect();
        let ens = ParticleEnsemble::from_positions(positions, 3, 5.0, l);
        let beta = direct_beta(&ens, 8);
        let scale = beta.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        assert!(beta.hermitian_residue() <= 1e-13 * scale);
    }

    #[test]
    fn deposited_beta_matches_direct_on_nodes_and_obeys_bound_off_nodes() {
        let l = 8.0;
        let h = 8usize;
        let m0 = 3.0;
        let spacing = l / h as f64;
        // node-snapped cloud: both paths compute identical sums
        let mut stream = CounterStream::new(62, StreamDomain::Aux, 0, 0);
        let snapped: Vec<f64> = (0..3 * 50)
            .map(|_| {
                let node = (stream.uniform() * h as f64).floor().min(h as f64 - 1.0);
                -0.5 * l + node * spacing
            })
            .collect();
        let ens = ParticleEnsemble::from_positions(snapped, 3, m0, l);
        let mut ws = SpectralWorkspace::new(h, 3);
        for order in [InterpOrder::Second, InterpOrder::Fourth] {
            let phi = interp::deposit(&ens, h, order).unwrap();
            let beta_pic = ws.forward_density(&phi);
            let beta_dir = direct_beta(&ens, h);
            let scale = m0 / l.powi(3);
            for (a, b) in beta_pic.coeffs.iter().zip(&beta_dir.coeffs) {
                assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");
            }
        }

        // off-node cloud: spectral error within the deposition bound
        let positions: Vec<f64> = (0..3 * 100).map(|_| (stream.uniform() - 0.5) * l).collect();
        let ens = ParticleEnsemble::from_positions(positions, 3, m0, l);
        let beta_dir = direct_beta(&ens, h);
        for (order, cbound, eta) in [
            (InterpOrder::Second, 4.5, 2i32),
            (InterpOrder::Fourth, 513.0 / 16.0, 4),
        ] {
            let phi = interp::deposit(&ens, h, order).unwrap();
            let beta_pic = ws.forward_density(&phi);
            let prefactor = cbound * m0 / l.powi(3);
            crate::spectral::for_each_mode(h, 3, |flat, q| {
                let y2: f64 = q
                    .iter()
                    .map(|&v| (2.0 * std::f64::consts::PI * v as f64 / l).powi(2))
                    .sum();
                let bound = prefactor * y2.sqrt().powi(eta) * spacing.powi(eta)
                    + 1e-13 * m0 / l.powi(3);
                let err = (beta_pic.coeffs[flat] - beta_dir.coeffs[flat]).norm();
                assert!(err <= bound, "mode {q:?}: err {err} > bound {bound}");
            });
        }
    }

    #[test]
    fn drift_of_single_cosine_is_analytic() {
        let l = 20.0;
        let h = 16usize;
        let mut alpha = SpectralField::zeros(l, h, 3, FieldRole::Alpha);
        let plus = alpha.flat_index(&[1, 0, 0]);
        let minus = alpha.flat_index(&[-1, 0, 0]);
        alpha.coeffs[plus] = Complex64::new(0.5, 0.0);
        alpha.coeffs[minus] = Complex64::new(0.5, 0.0);
        let mut stream = CounterStream::new(63, StreamDomain::Aux, 0, 0);
        let positions: Vec<f64> = (0..3 * 40).map(|_| (stream.uniform() - 0.5) * l).collect();
        let ens = ParticleEnsemble::from_positions(positions.clone(), 3, 1.0, l);
        let drift = direct_grad_c(&alpha, &ens, h).unwrap();
        for (p, x) in ens.iter().enumerate() {
            let expect = -(2.0 * std::f64::consts::PI / l)
                * (2.0 * std::f64::consts::PI * x[0] / l).sin();
            assert!((drift[p * 3] - expect).abs() <= 1e-12);
            assert!(drift[p * 3 + 1].abs() <= 1e-12);
            assert!(drift[p * 3 + 2].abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_alpha_gives_zero_drift() {
        let alpha = SpectralField::zeros(5.0, 8, 3, FieldRole::Alpha);
        let ens = ParticleEnsemble::from_positions(vec![0.3, -0.2, 1.0], 3, 1.0, 5.0);
        let drift = direct_grad_c(&alpha, &ens, 8).unwrap();
        assert!(drift.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn on_node_drift_matches_grid_gradient() {
        // a particle exactly on a grid node evaluates the same trigonometric
        // polynomial as the FFT grid path
        let l = 6.0;
        let h = 8usize;
        let phi = {
            let mut stream = CounterStream::new(64, StreamDomain::Aux, 0, 0);
            let mut g = GridScalar::zeros(l, h, 3);
            for v in &mut g.values {
                *v = stream.uniform();
            }
            g
        };
        let mut ws = SpectralWorkspace::new(h, 3);
        let alpha = {
            let beta = ws.forward_density(&phi);
            // use beta as a stand-in Hermitian alpha
            SpectralField { role: FieldRole::Alpha, ..beta }
        };
        for h0 in [h, 4] {
            let grad = ws.gradient_grid(&alpha, h0).unwrap();
            let spacing = l / h as f64;
            let node = [2usize, 7, 5];
            let pos = vec![
                -0.5 * l + node[0] as f64 * spacing,
                -0.5 * l + node[1] as f64 * spacing,
                -0.5 * l + node[2] as f64 * spacing,
            ];
            let ens = ParticleEnsemble::from_positions(pos, 3, 1.0, l);
            let drift = direct_grad_c(&alpha, &ens, h0).unwrap();
            for s in 0..3 {
                let grid_val = grad.components[s].values
                    [grad.components[s].flat_index(&node)];
                assert!(
                    (drift[s] - grid_val).abs() <= 1e-12 * grid_val.abs().max(1.0),
                    "h0 {h0} component {s}: {} vs {grid_val}",
                    drift[s]
                );
            }
        }
    }

    #[test]
    fn scale_guard_refuses_large_jobs() {
        let params = SimParams {
            n_particles: 1 << 20,
            grid_h: 256,
            cutoff_h0: 256,
            ..SimParams::default()
        };
        let ens = ParticleEnsemble::from_positions(vec![0.0; 3], 3, 1.0, params.box_len);
        match DirectEngine::new(params.clone(), ens, false) {
            Err(KsError::ScaleGuard { .. }) => {}
            other => panic!("expected ScaleGuard, got {:?}", other.map(|_| ())),
        }
        let ens = ParticleEnsemble::from_positions(vec![0.0; 3], 3, 1.0, params.box_len);
        assert!(DirectEngine::new(params, ens, true).is_ok());
    }
}
