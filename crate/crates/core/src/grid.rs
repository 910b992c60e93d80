//! Pixel grids over cartesian or log-polar windows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::logcomplex::LogComplex;
use crate::td::Td;

/// Region of the plane covered by a grid. Row 0 is the top edge: largest
/// imaginary part, or largest log-radius. In log-polar windows the column
/// index runs along the angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Window {
    Cartesian {
        center: Complex64,
        width: f64,
        height: f64,
    },
    #[serde(rename = "logpolar")]
    LogPolar {
        /// Lower edge of the log-radius range.
        log_r0: Td,
        log_r_span: f64,
        theta0: f64,
        theta_span: f64,
    },
}

impl Window {
    pub fn kind(&self) -> &'static str {
        match self {
            Window::Cartesian { .. } => "cartesian",
            Window::LogPolar { .. } => "logpolar",
        }
    }

    /// Full-turn log-polar window over `[log_lo, log_hi)`.
    pub fn annulus(log_lo: Td, log_hi: Td) -> Self {
        Window::LogPolar {
            log_r0: log_lo,
            log_r_span: (log_hi - log_lo).to_f64(),
            theta0: -std::f64::consts::PI,
            theta_span: std::f64::consts::TAU,
        }
    }

    /// Square cartesian window centred at the origin.
    pub fn square(half_width: f64) -> Self {
        Window::Cartesian {
            center: Complex64::new(0.0, 0.0),
            width: 2.0 * half_width,
            height: 2.0 * half_width,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Window::Cartesian { width, height, .. } => {
                width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()
            }
            Window::LogPolar {
                log_r_span,
                theta_span,
                log_r0,
                ..
            } => log_r_span > 0.0 && theta_span > 0.0 && log_r0.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("degenerate window {self:?}")))
        }
    }

    /// Centre of pixel `(ix, iy)` on an `nx × ny` raster.
    pub fn point(&self, ix: usize, iy: usize, nx: usize, ny: usize) -> LogComplex {
        let fx = (ix as f64 + 0.5) / nx as f64;
        let fy = (iy as f64 + 0.5) / ny as f64;
        match *self {
            Window::Cartesian {
                center,
                width,
                height,
            } => {
                let z = Complex64::new(
                    center.re - 0.5 * width + fx * width,
                    center.im + 0.5 * height - fy * height,
                );
                LogComplex::from_cartesian(z)
            }
            Window::LogPolar {
                log_r0,
                log_r_span,
                theta0,
                theta_span,
            } => LogComplex::from_polar(
                log_r0.add_f64(log_r_span * (1.0 - fy)),
                theta0 + theta_span * fx,
            ),
        }
    }

    /// Whether the column axis is periodic (a full turn in angle).
    pub fn wraps_horizontally(&self) -> bool {
        matches!(*self, Window::LogPolar { theta_span, .. }
            if (theta_span - std::f64::consts::TAU).abs() < 1e-12)
    }
}

/// Raster of small integer codes, row-major from the top row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<u8>,
}

impl PixelGrid {
    pub fn new(window: Window, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain(format!(
                "resolution {nx}x{ny} must be positive"
            )));
        }
        window.validate()?;
        Ok(PixelGrid {
            window,
            nx,
            ny,
            cells: vec![0; nx * ny],
        })
    }

    /// Grid whose cell `(ix, iy)` is `code(ix, iy, centre)`, computed row by
    /// row in parallel.
    pub fn from_fn<F>(window: Window, nx: usize, ny: usize, code: F) -> Result<Self>
    where
        F: Fn(usize, usize, LogComplex) -> u8 + Sync + Send,
    {
        let mut g = PixelGrid::new(window, nx, ny)?;
        exec::for_each_chunk_mut(&mut g.cells, nx, |iy, row| {
            for (ix, cell) in row.iter_mut().enumerate() {
                *cell = code(ix, iy, window.point(ix, iy, nx, ny));
            }
        });
        Ok(g)
    }

    /// Fallible variant of [`PixelGrid::from_fn`]; the first error in row
    /// order is returned.
    pub fn try_from_fn<F>(window: Window, nx: usize, ny: usize, code: F) -> Result<Self>
    where
        F: Fn(usize, usize, LogComplex) -> Result<u8> + Sync + Send,
    {
        let g = PixelGrid::new(window, nx, ny)?;
        let rows = exec::map_range(ny, |iy| {
            (0..nx)
                .map(|ix| code(ix, iy, window.point(ix, iy, nx, ny)))
                .collect::<Result<Vec<u8>>>()
        });
        let mut cells = Vec::with_capacity(nx * ny);
        for r in rows {
            cells.extend(r?);
        }
        Ok(PixelGrid { cells, ..g })
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> u8 {
        self.cells[iy * self.nx + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: u8) {
        self.cells[iy * self.nx + ix] = v;
    }

    pub fn count(&self, code: u8) -> usize {
        self.cells.iter().filter(|&&c| c == code).count()
    }

    pub fn count_nonzero(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }
}
