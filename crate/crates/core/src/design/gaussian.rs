use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::DesignOperator;
use crate::error::{check_len, invalid, Result};

/// Dense matrix with i.i.d. `N(0, 1/n)` entries, stored row-major.
#[derive(Debug, Clone)]
pub struct GaussianDesign {
    rows: usize,
    cols: usize,
    seed: u64,
    data: Vec<f64>,
}

impl GaussianDesign {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("design dimensions must be positive"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("design matrix too large"))?;
        let scale = 1.0 / (rows as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..len)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g * scale
            })
            .collect();
        Ok(GaussianDesign {
            rows,
            cols,
            seed,
            data,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

const COL_BLOCK: usize = 4096;

impl DesignOperator for GaussianDesign {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn forward_into(&self, beta: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols, beta.len())?;
        check_len(self.rows, out.len())?;
        out.par_iter_mut()
            .zip(self.data.par_chunks_exact(self.cols))
            .for_each(|(o, row)| {
                *o = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            });
        Ok(())
    }

    fn adjoint_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.rows, z.len())?;
        check_len(self.cols, out.len())?;
        // Column blocks are independent; within a block rows are summed in order.
        out.par_chunks_mut(COL_BLOCK)
            .enumerate()
            .for_each(|(blk, chunk)| {
                chunk.iter_mut().for_each(|o| *o = 0.0);
                let start = blk * COL_BLOCK;
                for (i, &zi) in z.iter().enumerate() {
                    if zi == 0.0 {
                        continue;
                    }
                    let row =
                        &self.data[i * self.cols + start..i * self.cols + start + chunk.len()];
                    for (o, a) in chunk.iter_mut().zip(row) {
                        *o += zi * a;
                    }
                }
            });
        Ok(())
    }
}
