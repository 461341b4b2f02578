use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{fwht_in_place, DesignOperator};
use crate::error::{check_len, invalid, Error, Result};

thread_local! {
    // reused length-N buffer for the forward transform
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// `n` distinct rows of the Sylvester–Hadamard matrix `H_m` (the all-ones
/// row 0 excluded), scaled by `1/√n` so every column has unit norm.
///
/// Products go through the fast transform in `O(N log N)`; the matrix is
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardDesign {
    cols: usize,
    rows: Vec<usize>,
    scale: f64,
    seed: Option<u64>,
}

impl HadamardDesign {
    /// Samples `n` rows uniformly without replacement from `1..N`.
    pub fn new(n: usize, cols: usize, seed: u64) -> Result<Self> {
        Self::check_dims(n, cols)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<usize> = rand::seq::index::sample(&mut rng, cols - 1, n)
            .into_iter()
            .map(|r| r + 1)
            .collect();
        rows.sort_unstable();
        Ok(HadamardDesign {
            cols,
            rows,
            scale: 1.0 / (n as f64).sqrt(),
            seed: Some(seed),
        })
    }

    /// Uses the given row indices of `H_m`.
    pub fn with_rows(mut rows: Vec<usize>, cols: usize) -> Result<Self> {
        Self::check_dims(rows.len(), cols)?;
        rows.sort_unstable();
        if rows.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("Hadamard rows must be distinct"));
        }
        if rows.iter().any(|&r| r == 0 || r >= cols) {
            return Err(invalid("Hadamard rows must lie in 1..N"));
        }
        let n = rows.len();
        Ok(HadamardDesign {
            cols,
            rows,
            scale: 1.0 / (n as f64).sqrt(),
            seed: None,
        })
    }

    fn check_dims(n: usize, cols: usize) -> Result<()> {
        if !cols.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(cols));
        }
        if n == 0 || n > cols - 1 {
            return Err(invalid(format!(
                "need 1 <= n <= N-1 rows, got n={n} for N={cols}"
            )));
        }
        Ok(())
    }

    /// Sorted row indices of `H_m` in use.
    pub fn row_indices(&self) -> &[usize] {
        &self.rows
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

impl DesignOperator for HadamardDesign {
    fn rows(&self) -> usize {
        self.rows.len()
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn forward_into(&self, beta: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols, beta.len())?;
        check_len(self.rows.len(), out.len())?;
        SCRATCH.with(|cell| {
            let mut work = cell.borrow_mut();
            work.clear();
            work.extend_from_slice(beta);
            fwht_in_place(&mut work)?;
            for (o, &r) in out.iter_mut().zip(&self.rows) {
                *o = work[r] * self.scale;
            }
            Ok(())
        })
    }

    fn adjoint_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.rows.len(), z.len())?;
        check_len(self.cols, out.len())?;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (&r, &v) in self.rows.iter().zip(z) {
            out[r] = v;
        }
        fwht_in_place(out)?;
        out.iter_mut().for_each(|o| *o *= self.scale);
        Ok(())
    }
}
