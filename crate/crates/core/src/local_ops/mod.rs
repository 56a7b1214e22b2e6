//! Finite-difference stencils on grids, their spectral symbols, and the
//! Gaussian-derivative kernels they approximate.

mod kernel;
mod spectral;
mod stencil;

pub use kernel::{
    continuum_conv, continuum_conv_many, gaussian_deriv_kernel, PolyGaussian, CONV_RADIUS, CONV_STEP,
    MAX_DERIVATIVE_ORDER,
};
pub use spectral::{
    dft2, discrete_kernel, fourier_symbol, frequency_grid, frequency_spacing, idft2, kernel_gap, kernel_gap_csv,
    kernel_norm_bound, min_kernel_half_width, truncation_bound, KernelGap, SymbolKind, TRUNCATION_TOL,
};
pub use stencil::{discrete_deriv_chain, smooth_chain, smoothing_steps, stencil_apply, StencilKind};
