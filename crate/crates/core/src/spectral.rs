//! FFT-based field state.
//!
//! Fourier coefficients live on the signed index set U = {-H/2, ..., H/2-1}^d
//! in standard DFT layout: storage index i maps to q = i for i < H/2 and
//! q = i - H otherwise. The forward transform is the unnormalized sum scaled
//! by L^-d; the inverse is the plain unnormalized sum. Grid node i sits at
//! -L/2 + i L/H, which shows up as a (-1)^(sum of indices) phase between the
//! raw FFT and the coefficients.

use crate::config::SimParams;
use crate::error::{KsError, Result};
use crate::grid::{GridScalar, GridVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

pub type Complex64 = Complex<f64>;

/// Which field a coefficient tensor represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    /// Chemoattractant concentration coefficients.
    Alpha,
    /// Density coefficients.
    Beta,
}

/// Complex Fourier coefficients over the signed index set U.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub coeffs: Vec<Complex64>,
    pub box_len: f64,
    pub grid_h: usize,
    pub dim: usize,
    pub role: FieldRole,
}

impl SpectralField {
    pub fn zeros(box_len: f64, grid_h: usize, dim: usize, role: FieldRole) -> Self {
        SpectralField {
            coeffs: vec![Complex64::new(0.0, 0.0); grid_h.pow(dim as u32)],
            box_len,
            grid_h,
            dim,
            role,
        }
    }

    /// Signed frequency for a storage index along one axis.
    #[inline]
    pub fn signed_q(i: usize, h: usize) -> i64 {
        if i < h / 2 {
            i as i64
        } else {
            i as i64 - h as i64
        }
    }

    /// Storage index of a signed frequency vector.
    pub fn flat_index(&self, q: &[i64]) -> usize {
        let h = self.grid_h as i64;
        let mut flat = 0usize;
        for &qs in q {
            debug_assert!(-h / 2 <= qs && qs < h / 2);
            flat = flat * self.grid_h + qs.rem_euclid(h) as usize;
        }
        flat
    }

    /// Coefficient at a signed frequency vector.
    pub fn at(&self, q: &[i64]) -> Complex64 {
        self.coeffs[self.flat_index(q)]
    }

    /// The q = 0 coefficient (mean / total mass over L^d for a beta field).
    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Max |coeffs[-q] - conj(coeffs[q])| over all modes, for tests. The
    /// Nyquist index -H/2 is its own partner, so this also enforces real
    /// Nyquist rows.
    pub fn hermitian_residue(&self) -> f64 {
        let h = self.grid_h;
        let mut worst = 0.0f64;
        for_each_mode(h, self.dim, |flat, q| {
            let mut neg = [0i64; 3];
            for s in 0..self.dim {
                neg[s] = if q[s] == -(h as i64) / 2 { q[s] } else { -q[s] };
            }
            let other = self.at(&neg[..self.dim]);
            worst = worst.max((other - self.coeffs[flat].conj()).norm());
        });
        worst
    }
}

/// Visit all modes with their signed frequency vectors, row-major.
pub fn for_each_mode(h: usize, dim: usize, mut f: impl FnMut(usize, [i64; 3])) {
    let mut flat = 0usize;
    match dim {
        2 => {
            for i0 in 0..h {
                let q0 = SpectralField::signed_q(i0, h);
                for i1 in 0..h {
                    f(flat, [q0, SpectralField::signed_q(i1, h), 0]);
                    flat += 1;
                }
            }
        }
        3 => {
            for i0 in 0..h {
                let q0 = SpectralField::signed_q(i0, h);
                for i1 in 0..h {
                    let q1 = SpectralField::signed_q(i1, h);
                    for i2 in 0..h {
                        f(flat, [q0, q1, SpectralField::signed_q(i2, h)]);
                        flat += 1;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Parity (-1)^(i0 + i1 + ...) of a storage index vector.
#[inline]
fn parity_sign(idx: [usize; 3], dim: usize) -> f64 {
    let s: usize = idx[..dim].iter().sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// FFT plans and scratch shared by the spectral operations.
pub struct SpectralWorkspace {
    pub grid_h: usize,
    pub dim: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
    buf: Vec<Complex64>,
}

impl SpectralWorkspace {
    pub fn new(grid_h: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft(grid_h, FftDirection::Forward);
        let inv = planner.plan_fft(grid_h, FftDirection::Inverse);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        SpectralWorkspace {
            grid_h,
            dim,
            fwd,
            inv,
            line: vec![Complex64::new(0.0, 0.0); grid_h],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            buf: vec![Complex64::new(0.0, 0.0); grid_h.pow(dim as u32)],
        }
    }

    /// In-place DFT along every axis of the row-major H^d tensor.
    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let h = self.grid_h;
        let fft = if inverse { self.inv.clone() } else { self.fwd.clone() };
        // contiguous axis: the buffer is a stack of lines
        fft.process_with_scratch(data, &mut self.scratch);
        // strided axes: gather each line, transform, scatter back
        match self.dim {
            2 => {
                // axis 0, stride h
                for col in 0..h {
                    for (k, slot) in self.line.iter_mut().enumerate() {
                        *slot = data[k * h + col];
                    }
                    fft.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (k, slot) in self.line.iter().enumerate() {
                        data[k * h + col] = *slot;
                    }
                }
            }
            3 => {
                // axis 1, stride h
                for i0 in 0..h {
                    let block = i0 * h * h;
                    for i2 in 0..h {
                        for (k, slot) in self.line.iter_mut().enumerate() {
                            *slot = data[block + k * h + i2];
                        }
                        fft.process_with_scratch(&mut self.line, &mut self.scratch);
                        for (k, slot) in self.line.iter().enumerate() {
                            data[block + k * h + i2] = *slot;
                        }
                    }
                }
                // axis 0, stride h*h
                let hh = h * h;
                for rest in 0..hh {
                    for (k, slot) in self.line.iter_mut().enumerate() {
                        *slot = data[k * hh + rest];
                    }
                    fft.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (k, slot) in self.line.iter().enumerate() {
                        data[k * hh + rest] = *slot;
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Forward transform of a deposited mass grid:
    /// beta_q = L^-d sum_nodes phi e^(-2 pi i q . x_node / L).
    pub fn forward_density(&mut self, phi: &GridScalar) -> SpectralField {
        assert_eq!(phi.grid_h, self.grid_h);
        assert_eq!(phi.dim, self.dim);
        let scale = phi.box_len.powi(-(self.dim as i32));
        for (slot, &v) in self.buf.iter_mut().zip(&phi.values) {
            *slot = Complex64::new(v, 0.0);
        }
        let mut data = std::mem::take(&mut self.buf);
        self.transform(&mut data, false);
        self.apply_parity_scale(&mut data, scale);
        let coeffs = data.clone();
        self.buf = data;
        SpectralField {
            coeffs,
            box_len: phi.box_len,
            grid_h: self.grid_h,
            dim: self.dim,
            role: FieldRole::Beta,
        }
    }

    fn apply_parity_scale(&self, data: &mut [Complex64], scale: f64) {
        let h = self.grid_h;
        let mut flat = 0usize;
        match self.dim {
            2 => {
                for i0 in 0..h {
                    for i1 in 0..h {
                        data[flat] *= scale * parity_sign([i0, i1, 0], 2);
                        flat += 1;
                    }
                }
            }
            3 => {
                for i0 in 0..h {
                    for i1 in 0..h {
                        for i2 in 0..h {
                            data[flat] *= scale * parity_sign([i0, i1, i2], 3);
                            flat += 1;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// Unnormalized inverse transform evaluated on the physical grid; returns
    /// (real part, max imaginary residue, sum of |coefficients|).
    fn inverse_real(&mut self, field: &SpectralField, premul: impl Fn(usize, [i64; 3]) -> Complex64) -> (GridScalar, f64, f64) {
        let h = self.grid_h;
        let mut data = std::mem::take(&mut self.buf);
        let mut coeff_scale = 0.0f64;
        {
            let coeffs = &field.coeffs;
            for_each_mode(h, self.dim, |flat, q| {
                let v = coeffs[flat] * premul(flat, q);
                coeff_scale += v.norm();
                data[flat] = v;
            });
        }
        // fold the node-offset phase into the coefficients
        self.apply_parity_scale(&mut data, 1.0);
        self.transform(&mut data, true);
        let mut out = GridScalar::zeros(field.box_len, h, self.dim);
        let mut max_im = 0.0f64;
        for (slot, v) in out.values.iter_mut().zip(&data) {
            *slot = v.re;
            max_im = max_im.max(v.im.abs());
        }
        self.buf = data;
        (out, max_im, coeff_scale)
    }

    /// Cutoff gradient on the grid: component s is the inverse transform of
    /// (2 pi i / L) q_s alpha_q restricted to the box |q_t| <= H0/2. Nyquist
    /// derivative modes are zeroed. Errors if the output is not real, which
    /// signals non-Hermitian input.
    pub fn gradient_grid(&mut self, alpha: &SpectralField, cutoff_h0: usize) -> Result<GridVector> {
        let h = self.grid_h;
        let dim = self.dim;
        let nyquist = -(h as i64) / 2;
        let two_pi_over_l = 2.0 * std::f64::consts::PI / alpha.box_len;
        let h0 = cutoff_h0 as i64;
        let mut components = Vec::with_capacity(dim);
        for s in 0..dim {
            let (grid, max_im, scale) = self.inverse_real(alpha, |_, q| {
                let inside = (0..dim).all(|t| 2 * q[t].abs() <= h0);
                if !inside || q[s] == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, two_pi_over_l * q[s] as f64)
                }
            });
            let tol = 1e-12 * scale;
            if max_im > tol && scale > 0.0 {
                return Err(KsError::NonHermitian { residue: max_im, tol });
            }
            components.push(grid);
        }
        Ok(GridVector { components })
    }

    /// Max over grid nodes of |c(x)| for the cutoff-restricted field.
    pub fn sup_norm_c(&mut self, alpha: &SpectralField, cutoff_h0: usize) -> f64 {
        let dim = self.dim;
        let h0 = cutoff_h0 as i64;
        let (grid, _, _) = self.inverse_real(alpha, |_, q| {
            let inside = (0..dim).all(|t| 2 * q[t].abs() <= h0);
            if inside {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Plain unnormalized inverse transform (sum over all modes), for tests
    /// and round trips.
    pub fn inverse_to_grid(&mut self, field: &SpectralField) -> GridScalar {
        self.inverse_real(field, |_, _| Complex64::new(1.0, 0.0)).0
    }
}

/// One implicit-Euler step of the concentration coefficients.
///
/// Parabolic (eps > 0):
///   alpha_q^new = alpha_q / (1 + (tau/eps)(4 pi^2 |q|^2 / L^2 + k^2))
///               + beta_q / (4 pi^2 |q|^2 / L^2 + k^2 + eps/tau).
/// Elliptic (eps = 0): alpha_q = beta_q / (4 pi^2 |q|^2 / L^2 + k^2), with the
/// zero-mean gauge alpha_0 = 0 when k = 0.
pub fn update_alpha(alpha_prev: &SpectralField, beta: &SpectralField, params: &SimParams) -> SpectralField {
    assert_eq!(alpha_prev.coeffs.len(), beta.coeffs.len());
    let h = alpha_prev.grid_h;
    let dim = alpha_prev.dim;
    let l = alpha_prev.box_len;
    let k2 = params.kappa * params.kappa;
    let lap = 4.0 * std::f64::consts::PI * std::f64::consts::PI / (l * l);
    let mut out = SpectralField::zeros(l, h, dim, FieldRole::Alpha);
    if params.is_elliptic() {
        let coeffs = &mut out.coeffs;
        for_each_mode(h, dim, |flat, q| {
            let q2: i64 = q[..dim].iter().map(|&v| v * v).sum();
            let denom = lap * q2 as f64 + k2;
            coeffs[flat] = if denom == 0.0 {
                Complex64::new(0.0, 0.0) // q = 0, k = 0: zero-mean gauge
            } else {
                beta.coeffs[flat] / denom
            };
        });
    } else {
        let tau_over_eps = params.dt / params.eps;
        let eps_over_tau = params.eps / params.dt;
        let coeffs = &mut out.coeffs;
        for_each_mode(h, dim, |flat, q| {
            let q2: i64 = q[..dim].iter().map(|&v| v * v).sum();
            let sym = lap * q2 as f64 + k2;
            let decay = 1.0 / (1.0 + tau_over_eps * sym);
            let gain = 1.0 / (sym + eps_over_tau);
            coeffs[flat] = alpha_prev.coeffs[flat] * decay + beta.coeffs[flat] * gain;
        });
    }
    out
}
