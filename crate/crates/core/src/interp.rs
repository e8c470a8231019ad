//! Particle-grid interpolation stencils at second and fourth order.
//!
//! Deposition spreads each particle's mass onto nearby nodes with weights
//! F_gamma; gathering evaluates a grid field at a particle with the same
//! weights, so the two operators are adjoint. Stencil indices wrap
//! periodically. The box origin -L/2 maps to grid index 0, and a particle at
//! exactly a node gets lambda = 0 with that node as base.

use crate::error::{KsError, Result};
use crate::grid::{GridScalar, GridVector};
use crate::particles::ParticleEnsemble;

/// Interpolation order: 2 (cell vertices) or 4 (vertices plus face extensions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpOrder {
    Second,
    Fourth,
}

impl InterpOrder {
    pub fn from_usize(order: usize) -> Result<Self> {
        match order {
            2 => Ok(InterpOrder::Second),
            4 => Ok(InterpOrder::Fourth),
            o => Err(KsError::Config(format!("interpolation order must be 2 or 4, got {o}"))),
        }
    }

    /// Stencil size: 2^d, or 2^d + 2d*2^(d-1) at fourth order.
    pub fn stencil_len(self, dim: usize) -> usize {
        let inner = 1usize << dim;
        match self {
            InterpOrder::Second => inner,
            InterpOrder::Fourth => inner + 2 * dim * (1 << (dim - 1)),
        }
    }
}

/// Maximum stencil size (fourth order, d = 3).
pub const MAX_STENCIL: usize = 32;

/// One particle's interpolation stencil: signed node offsets relative to the
/// base index, with matching weights.
#[derive(Debug, Clone)]
pub struct InterpStencil {
    pub order: InterpOrder,
    pub dim: usize,
    /// Storage-grid base index per axis (already within [0, H) when built
    /// through `stencil_for`).
    pub base_index: [i64; 3],
    /// Fractional cell coordinate lambda in [0, 1)^d.
    pub frac: [f64; 3],
    len: usize,
    offsets: [[i8; 3]; MAX_STENCIL],
    weights: [f64; MAX_STENCIL],
}

impl InterpStencil {
    pub fn offsets(&self) -> &[[i8; 3]] {
        &self.offsets[..self.len]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

fn check_frac(frac: &[f64]) -> Result<()> {
    for &l in frac {
        if !(0.0..1.0).contains(&l) {
            return Err(KsError::Config(format!("stencil fraction {l} outside [0, 1)")));
        }
    }
    Ok(())
}

/// Second-order weights over the cell vertices {0,1}^d:
/// F_j = prod_s (1 - j_s + (2 j_s - 1) lambda_s).
pub fn weights2(frac: &[f64]) -> Result<InterpStencil> {
    check_frac(frac)?;
    let dim = frac.len();
    let mut st = InterpStencil {
        order: InterpOrder::Second,
        dim,
        base_index: [0; 3],
        frac: pad3(frac),
        len: 0,
        offsets: [[0; 3]; MAX_STENCIL],
        weights: [0.0; MAX_STENCIL],
    };
    let mut inner = [[0.0f64; 2]; 3];
    for s in 0..dim {
        inner[s] = [1.0 - frac[s], frac[s]];
    }
    for_each_corner(dim, |j| {
        let mut w = 1.0;
        for s in 0..dim {
            w *= inner[s][j[s] as usize];
        }
        st.offsets[st.len] = *j;
        st.weights[st.len] = w;
        st.len += 1;
    });
    Ok(st)
}

/// 1D edge-extension factors of the fourth-order stencil.
#[inline]
fn edge_factors(l: f64) -> (f64, f64) {
    let minus1 = -(2.0 - l) * l * (1.0 - l) / 6.0;
    let plus2 = -(1.0 + l) * (1.0 - l) * l / 6.0;
    (minus1, plus2)
}

/// Fourth-order weights: the {0,1}^d vertex weights scaled by the correction
/// factor 1 + sum_k lambda_k (1 - lambda_k) / 2, plus face-extension points
/// with exactly one coordinate in {-1, 2}.
pub fn weights4(frac: &[f64]) -> Result<InterpStencil> {
    check_frac(frac)?;
    let dim = frac.len();
    let mut st = InterpStencil {
        order: InterpOrder::Fourth,
        dim,
        base_index: [0; 3],
        frac: pad3(frac),
        len: 0,
        offsets: [[0; 3]; MAX_STENCIL],
        weights: [0.0; MAX_STENCIL],
    };
    let mut inner = [[0.0f64; 2]; 3];
    let mut corr = 1.0;
    for s in 0..dim {
        inner[s] = [1.0 - frac[s], frac[s]];
        corr += frac[s] * (1.0 - frac[s]) / 2.0;
    }
    for_each_corner(dim, |j| {
        let mut w = corr;
        for s in 0..dim {
            w *= inner[s][j[s] as usize];
        }
        st.offsets[st.len] = *j;
        st.weights[st.len] = w;
        st.len += 1;
    });
    // extensions: one axis at -1 or 2, the others on the cell vertices
    for axis in 0..dim {
        let (e_minus, e_plus) = edge_factors(frac[axis]);
        for_each_corner(dim - 1, |j_rest| {
            let mut others = [0i8; 3];
            let mut r = 0;
            for s in 0..dim {
                if s != axis {
                    others[s] = j_rest[r];
                    r += 1;
                }
            }
            let mut wbase = 1.0;
            for s in 0..dim {
                if s != axis {
                    wbase *= inner[s][others[s] as usize];
                }
            }
            for (off, e) in [(-1i8, e_minus), (2i8, e_plus)] {
                let mut offs = others;
                offs[axis] = off;
                st.offsets[st.len] = offs;
                st.weights[st.len] = wbase * e;
                st.len += 1;
            }
        });
    }
    Ok(st)
}

fn pad3(frac: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..frac.len()].copy_from_slice(frac);
    out
}

/// Visit {0,1}^d corners in lexicographic order (fixed, documented order).
fn for_each_corner(dim: usize, mut f: impl FnMut(&[i8; 3])) {
    match dim {
        0 => f(&[0, 0, 0]),
        1 => {
            for a in 0..2i8 {
                f(&[a, 0, 0]);
            }
        }
        2 => {
            for a in 0..2i8 {
                for b in 0..2i8 {
                    f(&[a, b, 0]);
                }
            }
        }
        3 => {
            for a in 0..2i8 {
                for b in 0..2i8 {
                    for c in 0..2i8 {
                        f(&[a, b, c]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

pub fn weights(order: InterpOrder, frac: &[f64]) -> Result<InterpStencil> {
    match order {
        InterpOrder::Second => weights2(frac),
        InterpOrder::Fourth => weights4(frac),
    }
}

/// Build the stencil for a physical position: base index on the storage grid
/// (origin -L/2 at index 0) and weights for the given order.
pub fn stencil_for(position: &[f64], box_len: f64, grid_h: usize, order: InterpOrder) -> Result<InterpStencil> {
    let h = grid_h as f64;
    let mut frac = [0.0f64; 3];
    let mut base = [0i64; 3];
    let dim = position.len();
    for s in 0..dim {
        let u = (position[s] + 0.5 * box_len) / box_len * h;
        let mut j = u.floor();
        let mut l = u - j;
        // guard against x + L/2 rounding up to exactly L
        if j >= h {
            j -= h;
            l = 0.0;
        }
        if l >= 1.0 {
            // floating-point spill from the subtraction above
            j += 1.0;
            l = 0.0;
        }
        base[s] = j as i64;
        frac[s] = l;
    }
    let mut st = weights(order, &frac[..dim])?;
    st.base_index = base;
    Ok(st)
}

#[inline]
fn wrap(i: i64, h: i64) -> usize {
    i.rem_euclid(h) as usize
}

/// Particle-to-grid deposition: spreads each particle's weight M0/P over its
/// stencil nodes, indices wrapped modulo H. Particles are processed in index
/// order and offsets in the fixed stencil order, so the accumulation is
/// bitwise deterministic.
pub fn deposit(ens: &ParticleEnsemble, grid_h: usize, order: InterpOrder) -> Result<GridScalar> {
    let dim = ens.dim;
    let l = ens.box_len;
    let mut phi = GridScalar::zeros(l, grid_h, dim);
    let w_particle = ens.total_mass / ens.len() as f64;
    let h = grid_h as i64;
    let hu = grid_h;
    for (p, x) in ens.iter().enumerate() {
        for &c in x {
            if !(-0.5 * l..0.5 * l).contains(&c) {
                return Err(KsError::PositionOutOfBox { particle: p });
            }
        }
        let st = stencil_for(x, l, grid_h, order)?;
        match dim {
            2 => {
                for (off, w) in st.offsets().iter().zip(st.weights()) {
                    let i0 = wrap(st.base_index[0] + off[0] as i64, h);
                    let i1 = wrap(st.base_index[1] + off[1] as i64, h);
                    phi.values[i0 * hu + i1] += w_particle * w;
                }
            }
            3 => {
                for (off, w) in st.offsets().iter().zip(st.weights()) {
                    let i0 = wrap(st.base_index[0] + off[0] as i64, h);
                    let i1 = wrap(st.base_index[1] + off[1] as i64, h);
                    let i2 = wrap(st.base_index[2] + off[2] as i64, h);
                    phi.values[(i0 * hu + i1) * hu + i2] += w_particle * w;
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(phi)
}

/// Grid-to-particle interpolation of a scalar field at one position.
pub fn gather_at(field: &GridScalar, position: &[f64], order: InterpOrder) -> Result<f64> {
    let st = stencil_for(position, field.box_len, field.grid_h, order)?;
    let h = field.grid_h as i64;
    let hu = field.grid_h;
    let mut acc = 0.0;
    match field.dim {
        2 => {
            for (off, w) in st.offsets().iter().zip(st.weights()) {
                let i0 = wrap(st.base_index[0] + off[0] as i64, h);
                let i1 = wrap(st.base_index[1] + off[1] as i64, h);
                acc += w * field.values[i0 * hu + i1];
            }
        }
        3 => {
            for (off, w) in st.offsets().iter().zip(st.weights()) {
                let i0 = wrap(st.base_index[0] + off[0] as i64, h);
                let i1 = wrap(st.base_index[1] + off[1] as i64, h);
                let i2 = wrap(st.base_index[2] + off[2] as i64, h);
                acc += w * field.values[(i0 * hu + i1) * hu + i2];
            }
        }
        _ => unreachable!(),
    }
    Ok(acc)
}

/// Gather a scalar field at many positions.
pub fn gather(field: &GridScalar, positions: &ParticleEnsemble, order: InterpOrder) -> Result<Vec<f64>> {
    positions.iter().map(|x| gather_at(field, x, order)).collect()
}

/// Gather all components of a vector field at every particle; the stencil is
/// computed once per particle. Output is row-major P x d.
pub fn gather_vector(field: &GridVector, ens: &ParticleEnsemble, order: InterpOrder) -> Result<Vec<f64>> {
    let dim = ens.dim;
    let grid_h = field.grid_h();
    let h = grid_h as i64;
    let hu = grid_h;
    let mut out = vec![0.0; ens.len() * dim];
    for (p, x) in ens.iter().enumerate() {
        let st = stencil_for(x, field.box_len(), grid_h, order)?;
        match dim {
            2 => {
                for (off, w) in st.offsets().iter().zip(st.weights()) {
                    let i0 = wrap(st.base_index[0] + off[0] as i64, h);
                    let i1 = wrap(st.base_index[1] + off[1] as i64, h);
                    let flat = i0 * hu + i1;
                    out[p * 2] += w * field.components[0].values[flat];
                    out[p * 2 + 1] += w * field.components[1].values[flat];
                }
            }
            3 => {
                for (off, w) in st.offsets().iter().zip(st.weights()) {
                    let i0 = wrap(st.base_index[0] + off[0] as i64, h);
                    let i1 = wrap(st.base_index[1] + off[1] as i64, h);
                    let i2 = wrap(st.base_index[2] + off[2] as i64, h);
                    let flat = (i0 * hu + i1) * hu + i2;
                    out[p * 3] += w * field.components[0].values[flat];
                    out[p * 3 + 1] += w * field.components[1].values[flat];
                    out[p * 3 + 2] += w * field.components[2].values[flat];
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{CounterStream, StreamDomain};

    fn rand_frac(stream: &mut CounterStream, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| stream.uniform()).collect()
    }

    #[test]
    fn stencil_sizes() {
        assert_eq!(InterpOrder::Second.stencil_len(3), 8);
        assert_eq!(InterpOrder::Second.stencil_len(2), 4);
        assert_eq!(InterpOrder::Fourth.stencil_len(3), 32);
        assert_eq!(InterpOrder::Fourth.stencil_len(2), 12);
        let st = weights4(&[0.3, 0.4, 0.5]).unwrap();
        assert_eq!(st.len(), 32);
        let st = weights4(&[0.3, 0.4]).unwrap();
        assert_eq!(st.len(), 12);
    }

    #[test]
    fn particle_on_node_is_delta() {
        for order in [InterpOrder::Second, InterpOrder::Fourth] {
            let st = weights(order, &[0.0, 0.0, 0.0]).unwrap();
            for (off, w) in st.offsets().iter().zip(st.weights()) {
                if *off == [0, 0, 0] {
                    assert!((w - 1.0).abs() < 1e-15);
                } else {
                    assert!(w.abs() < 1e-15, "offset {off:?} weight {w}");
                }
            }
        }
    }

    #[test]
    fn cell_center_symmetry() {
        let st = weights2(&[0.5, 0.5, 0.5]).unwrap();
        for w in st.weights() {
            assert!((w - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn trilinear_product_formula() {
        let st = weights2(&[0.3, 0.7, 0.2]).unwrap();
        let idx = st.offsets().iter().position(|o| *o == [0, 0, 0]).unwrap();
        assert!((st.weights()[idx] - 0.168).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity_both_orders() {
        for dim in [2usize, 3] {
            let mut stream = CounterStream::new(11, StreamDomain::Aux, 0, dim as u32);
            for _ in 0..10_000 {
                let frac = rand_frac(&mut stream, dim);
                let s2: f64 = weights2(&frac).unwrap().weights().iter().sum();
                let s4: f64 = weights4(&frac).unwrap().weights().iter().sum();
                assert!((s2 - 1.0).abs() <= 1e-13, "order 2 sum {s2}");
                assert!((s4 - 1.0).abs() <= 1e-13, "order 4 sum {s4}");
            }
        }
    }

    #[test]
    fn fourth_order_weight_signs() {
        let mut stream = CounterStream::new(12, StreamDomain::Aux, 0, 0);
        for _ in 0..100 {
            let frac: Vec<f64> = (0..3).map(|_| 0.05 + 0.9 * stream.uniform()).collect();
            let st = weights4(&frac).unwrap();
            for (off, w) in st.offsets().iter().zip(st.weights()) {
                let is_ext = off.iter().any(|&o| o == -1 || o == 2);
                if is_ext {
                    assert!(*w <= 0.0, "extension weight {w} at {off:?}");
                }
            }
        }
        // second order: all weights within [0, 1]
        for _ in 0..100 {
            let frac: Vec<f64> = (0..3).map(|_| stream.uniform()).collect();
            let st = weights2(&frac).unwrap();
            for w in st.weights() {
                assert!((0.0..=1.0).contains(w));
            }
        }
    }

    /// Evaluate sum_gamma F_gamma f(X_gamma) for a monomial on the unit-spacing
    /// lattice with base at the origin; the interpolation point is lambda.
    fn stencil_apply(st: &InterpStencil, dim: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        for (off, w) in st.offsets().iter().zip(st.weights()) {
            let x: Vec<f64> = (0..dim).map(|s| off[s] as f64).collect();
            acc += w * f(&x);
        }
        acc
    }

    fn monomials(dim: usize, max_deg: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let top = max_deg + 1;
        if dim == 2 {
            for a in 0..top {
                for b in 0..top {
                    if a + b <= max_deg {
                        out.push(vec![a, b]);
                    }
                }
            }
        } else {
            for a in 0..top {
                for b in 0..top {
                    for c in 0..top {
                        if a + b + c <= max_deg {
                            out.push(vec![a, b, c]);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn polynomial_exactness() {
        for dim in [2usize, 3] {
            let mut stream = CounterStream::new(13, StreamDomain::Aux, 0, dim as u32);
            for (order, max_deg, tol) in
                [(InterpOrder::Second, 1u32, 1e-12), (InterpOrder::Fourth, 3, 1e-10)]
            {
                for exps in monomials(dim, max_deg) {
                    for _ in 0..100 {
                        let frac = rand_frac(&mut stream, dim);
                        let st = weights(order, &frac).unwrap();
                        let f = |x: &[f64]| -> f64 {
                            x.iter().zip(&exps).map(|(&xi, &e)| xi.powi(e as i32)).product()
                        };
                        let interp = stencil_apply(&st, dim, f);
                        let exact = f(&frac);
                        assert!(
                            (interp - exact).abs() <= tol,
                            "order {order:?} monomial {exps:?} lambda {frac:?}: {interp} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cubic_reproduction_example() {
        // f(x) = x1^3 at lambda = (0.5, 0.25, 0.75)
        let st = weights4(&[0.5, 0.25, 0.75]).unwrap();
        let interp = stencil_apply(&st, 3, |x| x[0].powi(3));
        let exact = 0.5f64.powi(3);
        assert!((interp - exact).abs() <= 1e-10 * exact.abs().max(1.0));
    }

    fn node_ensemble(positions: Vec<f64>, dim: usize, mass: f64, box_len: f64) -> ParticleEnsemble {
        ParticleEnsemble::from_positions(positions, dim, mass, box_len)
    }

    #[test]
    fn deposit_on_node_both_orders() {
        let l = 8.0;
        let h = 8usize;
        // node (2, 5, 7) => position -4 + (2,5,7) * 1
        let pos = vec![-2.0, 1.0, 3.0];
        for order in [InterpOrder::Second, InterpOrder::Fourth] {
            let ens = node_ensemble(pos.clone(), 3, 5.0, l);
            let phi = deposit(&ens, h, order).unwrap();
            let target = phi.flat_index(&[2, 5, 7]);
            for (i, v) in phi.values.iter().enumerate() {
                if i == target {
                    assert!((v - 5.0).abs() < 1e-12);
                } else {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn deposit_cell_center_order2() {
        let l = 8.0;
        let h = 8usize;
        let pos = vec![-1.5, 0.5, 2.5]; // center of cell with base (2, 4, 6)
        let ens = node_ensemble(pos, 3, 8.0, l);
        let phi = deposit(&ens, h, InterpOrder::Second).unwrap();
        let mut hit = 0;
        for v in &phi.values {
            if v.abs() > 1e-14 {
                assert!((v - 1.0).abs() < 1e-12);
                hit += 1;
            }
        }
        assert_eq!(hit, 8);
    }

    #[test]
    fn deposit_conserves_mass() {
        let l = 10.0;
        let m0 = 3.25;
        let mut stream = CounterStream::new(21, StreamDomain::Aux, 0, 0);
        let positions: Vec<f64> = (0..300).map(|_| (stream.uniform() - 0.5) * l).collect();
        let ens = node_ensemble(positions, 3, m0, l);
        for order in [InterpOrder::Second, InterpOrder::Fourth] {
            let phi = deposit(&ens, 16, order).unwrap();
            assert!((phi.sum() - m0).abs() <= 1e-12 * m0);
        }
    }

    #[test]
    fn deposit_rejects_out_of_box() {
        let ens = node_ensemble(vec![5.0, 0.0, 0.0], 3, 1.0, 10.0);
        // x = L/2 is outside the half-open box
        assert!(matches!(
            deposit(&ens, 8, InterpOrder::Second),
            Err(KsError::PositionOutOfBox { particle: 0 })
        ));
    }

    #[test]
    fn gather_constant_and_linear() {
        let l = 6.0;
        let h = 12usize;
        let constant = GridScalar::from_fn(l, h, 3, |_| 4.5);
        let linear = GridScalar::from_fn(l, h, 3, |x| 2.0 * x[0] - x[1]);
        let mut stream = CounterStream::new(31, StreamDomain::Aux, 0, 0);
        for _ in 0..200 {
            // interior positions so the linear field has no periodic seam
            let x: Vec<f64> = (0..3).map(|_| (stream.uniform() - 0.5) * 0.6 * l).collect();
            for order in [InterpOrder::Second, InterpOrder::Fourth] {
                let c = gather_at(&constant, &x, order).unwrap();
                assert!((c - 4.5).abs() <= 1e-12);
                let v = gather_at(&linear, &x, order).unwrap();
                let exact = 2.0 * x[0] - x[1];
                assert!((v - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{v} vs {exact}");
            }
        }
    }

    #[test]
    fn gather_sine_error_slopes() {
        // max gather error for f = sin(2 pi x1 / L) scales as O(h^2) / O(h^4),
        // within the explicit constants 9/2 |f''| h^2 and 513/16 |f''''| h^4.
        let l = 4.0;
        let hs = [8usize, 16, 32, 64];
        let mut stream = CounterStream::new(32, StreamDomain::Aux, 0, 0);
        let positions: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..3).map(|_| (stream.uniform() - 0.5) * l).collect())
            .collect();
        for (order, eta, slope_lo, slope_hi, cbound) in [
            (InterpOrder::Second, 2i32, -2.3, -1.7, 4.5),
            (InterpOrder::Fourth, 4, -4.4, -3.6, 513.0 / 16.0),
        ] {
            let mut logs = Vec::new();
            for &h in &hs {
                let field = GridScalar::from_fn(l, h, 3, |x| (2.0 * std::f64::consts::PI * x[0] / l).sin());
                let mut max_err = 0.0f64;
                for x in &positions {
                    let v = gather_at(&field, x, order).unwrap();
                    let exact = (2.0 * std::f64::consts::PI * x[0] / l).sin();
                    max_err = max_err.max((v - exact).abs());
                }
                let spacing = l / h as f64;
                let deriv = (2.0 * std::f64::consts::PI / l).powi(eta);
                assert!(
                    max_err <= cbound * deriv * spacing.powi(eta),
                    "order {eta} H {h}: err {max_err} above bound"
                );
                logs.push(((h as f64).ln(), max_err.ln()));
            }
            let slope = fit_slope(&logs);
            assert!(
                slope >= slope_lo && slope <= slope_hi,
                "order {eta}: slope {slope} outside [{slope_lo}, {slope_hi}]"
            );
        }
    }

    fn fit_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn deposit_gather_adjoint() {
        // <deposit(delta_X), f> = gather(f, X) for matching order
        let l = 5.0;
        let h = 10usize;
        let field = GridScalar::from_fn(l, h, 3, |x| (x[0] * 1.3).sin() + x[1] * x[2] * 0.1);
        let mut stream = CounterStream::new(33, StreamDomain::Aux, 0, 0);
        for order in [InterpOrder::Second, InterpOrder::Fourth] {
            for _ in 0..50 {
                let x: Vec<f64> = (0..3).map(|_| (stream.uniform() - 0.5) * l).collect();
                let ens = node_ensemble(x.clone(), 3, 1.0, l);
                let phi = deposit(&ens, h, order).unwrap();
                let lhs: f64 = phi.values.iter().zip(&field.values).map(|(a, b)| a * b).sum();
                let rhs = gather_at(&field, &x, order).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn deposit_deterministic_rerun() {
        let l = 10.0;
        let mut stream = CounterStream::new(34, StreamDomain::Aux, 0, 0);
        let positions: Vec<f64> = (0..900).map(|_| (stream.uniform() - 0.5) * l).collect();
        let ens = node_ensemble(positions, 3, 2.0, l);
        let a = deposit(&ens, 16, InterpOrder::Fourth).unwrap();
        let b = deposit(&ens, 16, InterpOrder::Fourth).unwrap();
        assert_eq!(a.values, b.values);
    }
}
