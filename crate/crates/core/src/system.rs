//! A fully assembled random dynamical system: map, kernel, grid, boundary
//! mode, and the three discretized operators.

use crate::dynamics::{MapModel, NoiseKernel};
use crate::error::Result;
use crate::measures::Grid;
use crate::operator::{convolution_matrix, ulam_matrix, BoundaryMode, Provenance, TransferMatrix};

#[derive(Clone)]
pub struct System {
    map: MapModel,
    kernel: NoiseKernel,
    grid: Grid,
    mode: BoundaryMode,
    quadrature: usize,
    ulam: TransferMatrix,
    conv: TransferMatrix,
    annealed: TransferMatrix,
}

impl System {
    pub fn build(
        map: MapModel,
        kernel: NoiseKernel,
        grid: Grid,
        mode: BoundaryMode,
        quadrature: usize,
    ) -> Result<System> {
        let ulam = ulam_matrix(&map, grid, quadrature)?;
        let conv = convolution_matrix(&kernel, grid, mode);
        let annealed = conv.matmul(&ulam, Provenance::Annealed);
        Ok(System {
            map,
            kernel,
            grid,
            mode,
            quadrature,
            ulam,
            conv,
            annealed,
        })
    }

    /// Rebuild with a different deterministic part, reusing the convolution.
    pub fn with_map(&self, map: MapModel) -> Result<System> {
        let ulam = ulam_matrix(&map, self.grid, self.quadrature)?;
        let annealed = self.conv.matmul(&ulam, Provenance::Annealed);
        Ok(System {
            map,
            kernel: self.kernel.clone(),
            grid: self.grid,
            mode: self.mode,
            quadrature: self.quadrature,
            ulam,
            conv: self.conv.clone(),
            annealed,
        })
    }

    /// Rebuild with a different noise kernel, reusing the Ulam matrix.
    pub fn with_kernel(&self, kernel: NoiseKernel) -> System {
        let conv = convolution_matrix(&kernel, self.grid, self.mode);
        let annealed = conv.matmul(&self.ulam, Provenance::Annealed);
        System {
            map: self.map.clone(),
            kernel,
            grid: self.grid,
            mode: self.mode,
            quadrature: self.quadrature,
            ulam: self.ulam.clone(),
            conv,
            annealed,
        }
    }

    pub fn map(&self) -> &MapModel {
        &self.map
    }

    pub fn kernel(&self) -> &NoiseKernel {
        &self.kernel
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn quadrature(&self) -> usize {
        self.quadrature
    }

    pub fn ulam(&self) -> &TransferMatrix {
        &self.ulam
    }

    pub fn convolution(&self) -> &TransferMatrix {
        &self.conv
    }

    pub fn annealed(&self) -> &TransferMatrix {
        &self.annealed
    }
}

impl std::fmt::Debug for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("System")
            .field("map", &self.map.label())
            .field("kernel", &self.kernel.label())
            .field("n", &self.grid.n())
            .field("mode", &self.mode)
            .field("quadrature", &self.quadrature)
            .finish()
    }
}

// Assembled systems and matrices are shared across worker threads; all
// evaluators are immutable behind Arc.
#[allow(dead_code)]
fn assert_thread_safe() {
    fn check<T: Send + Sync>() {}
    check::<System>();
    check::<TransferMatrix>();
    check::<MapModel>();
    check::<NoiseKernel>();
}
