//! The `n × N` design matrix as a linear operator with forward (`A·β`) and
//! adjoint (`Aᵀ·z`) products.

mod fwht;
mod gaussian;
mod hadamard;

pub use fwht::fwht_in_place;
pub use gaussian::GaussianDesign;
pub use hadamard::HadamardDesign;

use crate::error::Result;

pub trait DesignOperator: Send + Sync {
    /// Number of rows, `n`.
    fn rows(&self) -> usize;

    /// Number of columns, `N`.
    fn cols(&self) -> usize;

    /// `out ← A·beta`.
    fn forward_into(&self, beta: &[f64], out: &mut [f64]) -> Result<()>;

    /// `out ← Aᵀ·z`.
    fn adjoint_into(&self, z: &[f64], out: &mut [f64]) -> Result<()>;

    fn forward(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows()];
        self.forward_into(beta, &mut out)?;
        Ok(out)
    }

    fn adjoint(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols()];
        self.adjoint_into(z, &mut out)?;
        Ok(out)
    }
}

impl<T: DesignOperator + ?Sized> DesignOperator for Box<T> {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn forward_into(&self, beta: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).forward_into(beta, out)
    }
    fn adjoint_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).adjoint_into(z, out)
    }
}
