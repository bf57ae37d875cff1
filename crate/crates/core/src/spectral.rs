//! Frequency-domain sufficient statistics: normalized DFT, anchor-frequency
//! grid and smoothed spectral density matrices.

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, CMatrix, C64};

/// Real `n x (m*p)` sample matrix. Channel `(j, u)` (node `j`, attribute `u`,
/// both zero-based) lives in column `j * m + u`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiAttributeSeries {
    data: DMatrix<f64>,
    nodes: usize,
    attributes: usize,
}

impl MultiAttributeSeries {
    pub fn new(data: DMatrix<f64>, nodes: usize, attributes: usize) -> Result<Self> {
        if nodes == 0 || attributes == 0 {
            return Err(Error::InvalidInput("p and m must be at least 1".into()));
        }
        if data.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 samples, got {}",
                data.nrows()
            )));
        }
        if data.ncols() != nodes * attributes {
            return Err(Error::InvalidInput(format!(
                "expected {} columns (m = {attributes}, p = {nodes}), got {}",
                nodes * attributes,
                data.ncols()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            let (row, col) = (pos % data.nrows(), pos / data.nrows());
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {row}, column {col}"
            )));
        }
        Ok(Self { data, nodes, attributes })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    /// Number of time samples `n`.
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    /// Node count `p`.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Attributes per node `m`.
    pub fn attributes(&self) -> usize {
        self.attributes
    }

    pub fn channels(&self) -> usize {
        self.data.ncols()
    }

    pub fn channel_index(&self, node: usize, attribute: usize) -> usize {
        node * self.attributes + attribute
    }
}

/// Anchor frequencies `f_k = ((k-1)K + m_t + 1)/n`, `k = 1..M`, each the centre
/// of a `K = 2 m_t + 1` point smoothing window of Fourier frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n: usize,
    pub half_window: usize,
    pub span: usize,
    pub anchors: usize,
}

impl FrequencyGrid {
    /// DFT index (in `0..n`) of frequency `f_{k,l}`; `k` is zero-based and
    /// `offset` ranges over `-m_t..=m_t`.
    pub fn dft_index(&self, k: usize, offset: isize) -> usize {
        let centre = (k * self.span + self.half_window + 1) as isize;
        (centre + offset) as usize
    }

    /// Anchor frequency in cycles per sample, `k` zero-based.
    pub fn anchor(&self, k: usize) -> f64 {
        self.dft_index(k, 0) as f64 / self.n as f64
    }

    pub fn spacing(&self) -> f64 {
        self.span as f64 / self.n as f64
    }

    /// Largest DFT index touched by any window.
    pub fn max_index(&self) -> usize {
        self.dft_index(self.anchors - 1, self.half_window as isize)
    }
}

/// Builds the grid for `n` samples and half-window `m_t`, deriving `M`.
pub fn frequency_grid(n: usize, half_window: usize) -> Result<FrequencyGrid> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::InvalidInput(format!("n must be even and >= 4, got {n}")));
    }
    if half_window == 0 {
        return Err(Error::InvalidInput("m_t must be at least 1".into()));
    }
    let span = 2 * half_window + 1;
    let usable = (n / 2).saturating_sub(half_window + 1);
    let anchors = usable / span;
    if anchors == 0 {
        return Err(Error::WindowTooLarge { n, half_window });
    }
    Ok(FrequencyGrid { n, half_window, span, anchors })
}

/// Largest half-window `m_t` for which the grid has exactly `anchors`
/// frequencies, if any.
pub fn half_window_for(n: usize, anchors: usize) -> Option<usize> {
    (1..n / 2)
        .rev()
        .find(|&mt| frequency_grid(n, mt).map(|g| g.anchors == anchors).unwrap_or(false))
}

/// Normalized DFT `d(f_l) = n^{-1/2} sum_t x(t) e^{-i 2 pi l t / n}` for
/// `l = 1 .. n/2 - 1`, one column per frequency. The series is not centred.
pub fn dft(series: &MultiAttributeSeries) -> Result<CMatrix> {
    let full = dft_full(series)?;
    let n = series.len();
    Ok(full.columns(1, n / 2 - 1).into_owned())
}

/// All `n` DFT columns `l = 0 .. n-1` (used for Parseval checks).
pub fn dft_full(series: &MultiAttributeSeries) -> Result<CMatrix> {
    let n = series.len();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("n must be even, got {n}")));
    }
    let channels = series.channels();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = CMatrix::zeros(channels, n);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for c in 0..channels {
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = C64::new(series.data()[(t, c)], 0.0);
        }
        fft.process(&mut buf);
        for (l, z) in buf.iter().enumerate() {
            out[(c, l)] = z * scale;
        }
    }
    Ok(out)
}

/// Smoothed spectral density estimates at the anchor frequencies.
#[derive(Debug, Clone)]
pub struct SpectralStatistics {
    pub grid: FrequencyGrid,
    pub s_hat: Vec<CMatrix>,
}

impl SpectralStatistics {
    /// Dimension `m*p` of each matrix.
    pub fn dim(&self) -> usize {
        self.s_hat.first().map_or(0, |s| s.nrows())
    }

    pub fn anchors(&self) -> usize {
        self.s_hat.len()
    }

    /// Smoothing span `K`.
    pub fn span(&self) -> usize {
        self.grid.span
    }
}

/// `S_k = (1/K) sum_{l=-m_t}^{m_t} d(f_{k,l}) d(f_{k,l})^H`, symmetrized.
///
/// `d` holds the columns `l = 1 .. n/2 - 1` as returned by [`dft`].
pub fn smoothed_psd(d: &CMatrix, grid: &FrequencyGrid) -> Result<SpectralStatistics> {
    if d.ncols() != grid.n / 2 - 1 {
        return Err(Error::InvalidInput(format!(
            "DFT has {} columns, grid with n = {} needs {}",
            d.ncols(),
            grid.n,
            grid.n / 2 - 1
        )));
    }
    if grid.max_index() > grid.n / 2 - 1 {
        return Err(Error::InvalidInput("grid exceeds the usable frequency band".into()));
    }
    let dim = d.nrows();
    let window = |k: usize| -> CMatrix {
        let mut acc = CMatrix::zeros(dim, dim);
        let h = grid.half_window as isize;
        for offset in -h..=h {
            // column 0 of `d` is DFT index 1
            let col = d.column(grid.dft_index(k, offset) - 1);
            acc.ger(C64::new(1.0, 0.0), &col, &col.conjugate(), C64::new(1.0, 0.0));
        }
        hermitian_part(&(acc / C64::new(grid.span as f64, 0.0)))
    };

    #[cfg(feature = "parallel")]
    let s_hat = {
        use rayon::prelude::*;
        (0..grid.anchors).into_par_iter().map(window).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let s_hat = (0..grid.anchors).map(window).collect();

    Ok(SpectralStatistics { grid: *grid, s_hat })
}

/// Convenience: DFT and smoothing in one step.
pub fn spectral_statistics(series: &MultiAttributeSeries, half_window: usize) -> Result<SpectralStatistics> {
    let grid = frequency_grid(series.len(), half_window)?;
    let d = dft(series)?;
    smoothed_psd(&d, &grid)
}
