//! Real-valued fields sampled on the periodic H^d grid.
//!
//! Node (i_1, ..., i_d) with i_s in [0, H) sits at physical position
//! -L/2 + i_s * L/H per axis; storage is row-major.

use crate::error::Result;
use std::io::Write;

/// Real samples on the H^d physical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScalar {
    pub values: Vec<f64>,
    pub box_len: f64,
    pub grid_h: usize,
    pub dim: usize,
}

impl GridScalar {
    pub fn zeros(box_len: f64, grid_h: usize, dim: usize) -> Self {
        GridScalar {
            values: vec![0.0; grid_h.pow(dim as u32)],
            box_len,
            grid_h,
            dim,
        }
    }

    /// Total number of nodes H^d.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing h = L/H.
    pub fn spacing(&self) -> f64 {
        self.box_len / self.grid_h as f64
    }

    /// Physical coordinate of node index i along one axis.
    #[inline]
    pub fn node_coord(&self, i: usize) -> f64 {
        -0.5 * self.box_len + i as f64 * self.spacing()
    }

    /// Flat index of node (i_1, ..., i_d); indices already in [0, H).
    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let h = self.grid_h;
        match self.dim {
            2 => idx[0] * h + idx[1],
            3 => (idx[0] * h + idx[1]) * h + idx[2],
            _ => unreachable!("dim is 2 or 3"),
        }
    }

    /// Sample a function of physical position on every node.
    pub fn from_fn(box_len: f64, grid_h: usize, dim: usize, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut g = GridScalar::zeros(box_len, grid_h, dim);
        let h = grid_h;
        let mut flat = 0;
        match dim {
            2 => {
                for i0 in 0..h {
                    let x0 = g.node_coord(i0);
                    for i1 in 0..h {
                        let x1 = g.node_coord(i1);
                        g.values[flat] = f(&[x0, x1]);
                        flat += 1;
                    }
                }
            }
            3 => {
                for i0 in 0..h {
                    let x0 = g.node_coord(i0);
                    for i1 in 0..h {
                        let x1 = g.node_coord(i1);
                        for i2 in 0..h {
                            let x2 = g.node_coord(i2);
                            g.values[flat] = f(&[x0, x1, x2]);
                            flat += 1;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        g
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Dump as CSV, one row per node: i_1,...,i_d,value in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let h = self.grid_h;
        match self.dim {
            2 => {
                writeln!(w, "i1,i2,value")?;
                for i0 in 0..h {
                    for i1 in 0..h {
                        writeln!(w, "{},{},{}", i0, i1, self.values[i0 * h + i1])?;
                    }
                }
            }
            3 => {
                writeln!(w, "i1,i2,i3,value")?;
                for i0 in 0..h {
                    for i1 in 0..h {
                        for i2 in 0..h {
                            writeln!(w, "{},{},{},{}", i0, i1, i2, self.values[(i0 * h + i1) * h + i2])?;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        Ok(())
    }
}

/// d scalar components sharing one grid, e.g. the reconstructed gradient.
#[derive(Debug, Clone)]
pub struct GridVector {
    pub components: Vec<GridScalar>,
}

impl GridVector {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn grid_h(&self) -> usize {
        self.components[0].grid_h
    }

    pub fn box_len(&self) -> f64 {
        self.components[0].box_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_zero_is_box_corner() {
        let g = GridScalar::zeros(20.0, 8, 3);
        assert_eq!(g.node_coord(0), -10.0);
        assert_eq!(g.node_coord(4), 0.0);
        assert!((g.node_coord(7) - (10.0 - 2.5)).abs() < 1e-15);
    }

    #[test]
    fn from_fn_row_major() {
        let g = GridScalar::from_fn(4.0, 4, 2, |x| x[0] * 10.0 + x[1]);
        // node (1,2): x = (-2 + 1, -2 + 2) = (-1, 0)
        assert_eq!(g.values[g.flat_index(&[1, 2])], -10.0);
    }
}
