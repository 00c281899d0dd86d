//! Trajectory rendering: ASCII for terminals and binary PGM (P5) images.
//!
//! Cells in state 1 are drawn black (pixel 0), cells in state 0 white
//! (pixel 255), so images read like the usual space-time diagrams.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::Configuration;
use crate::error::{Error, Result};

const BLACK: u8 = 0;
const WHITE: u8 = 255;
const GUTTER: u8 = 160;

/// Grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    fn new(width: usize, height: usize, fill: u8) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    fn from_cells(rows: usize, cols: usize, cells: &[bool], cell_px: usize) -> Self {
        let px = cell_px.max(1);
        let mut img = GrayImage::new(cols * px, rows * px, WHITE);
        for r in 0..rows {
            for c in 0..cols {
                if cells[r * cols + c] {
                    img.fill_rect(c * px, r * px, px, px, BLACK);
                }
            }
        }
        img
    }

    fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize, v: u8) {
        for yy in y..y + h {
            self.pixels[yy * self.width + x..yy * self.width + x + w].fill(v);
        }
    }

    fn blit(&mut self, src: &GrayImage, x: usize, y: usize) {
        for row in 0..src.height {
            let dst = (y + row) * self.width + x;
            self.pixels[dst..dst + src.width].copy_from_slice(&src.pixels[row * src.width..(row + 1) * src.width]);
        }
    }

    /// Binary portable graymap with maxval 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// One text row per 1D step; 2D/3D frames are separated by `t=` headers and
/// 3D layers by blank lines.
pub fn ascii(trajectory: &[Configuration]) -> String {
    let mut s = String::new();
    for (t, conf) in trajectory.iter().enumerate() {
        let dims = conf.dims();
        let row = |bits: &[bool]| bits.iter().map(|&b| if b { '#' } else { '.' }).collect::<String>();
        match dims.len() {
            1 => {
                s.push_str(&row(conf.bits()));
                s.push('\n');
            }
            _ => {
                let _ = writeln!(s, "t={t}");
                let cols = *dims.last().unwrap();
                let layer = dims[dims.len() - 2] * cols;
                for (l, chunk) in conf.bits().chunks(layer).enumerate() {
                    if l > 0 {
                        s.push('\n');
                    }
                    for line in chunk.chunks(cols) {
                        s.push_str(&row(line));
                        s.push('\n');
                    }
                }
            }
        }
    }
    s
}

/// 1D space-time diagram: row `t` is the configuration at time `t`.
pub fn spacetime(trajectory: &[Configuration], cell_px: usize) -> Result<GrayImage> {
    let first = trajectory.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
    if first.dims().len() != 1 {
        return Err(Error::invalid("space-time diagrams need a 1D trajectory"));
    }
    let cells: Vec<bool> = trajectory.iter().flat_map(|c| c.bits().iter().copied()).collect();
    Ok(GrayImage::from_cells(trajectory.len(), first.len(), &cells, cell_px))
}

/// A 2D frame, or one layer (fixed first coordinate) of a 3D frame.
pub fn frame(conf: &Configuration, layer: usize, cell_px: usize) -> Result<GrayImage> {
    let dims = conf.dims();
    match dims.len() {
        2 => Ok(GrayImage::from_cells(dims[0], dims[1], conf.bits(), cell_px)),
        3 if layer < dims[0] => {
            let n = dims[1] * dims[2];
            Ok(GrayImage::from_cells(
                dims[1],
                dims[2],
                &conf.bits()[layer * n..(layer + 1) * n],
                cell_px,
            ))
        }
        _ => Err(Error::invalid(format!(
            "no layer {layer} in a configuration with dims {dims:?}"
        ))),
    }
}

/// 2D frames tiled left-to-right, top-to-bottom with one-pixel gutters.
pub fn contact_sheet(trajectory: &[Configuration], columns: usize, cell_px: usize) -> Result<GrayImage> {
    let frames = trajectory
        .iter()
        .map(|c| frame(c, 0, cell_px))
        .collect::<Result<Vec<_>>>()?;
    let first = frames.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
    let cols = columns.clamp(1, frames.len());
    let rows = frames.len().div_ceil(cols);
    let (fw, fh) = (first.width, first.height);
    let mut sheet = GrayImage::new(cols * (fw + 1) + 1, rows * (fh + 1) + 1, GUTTER);
    for (i, f) in frames.iter().enumerate() {
        sheet.blit(f, 1 + (i % cols) * (fw + 1), 1 + (i / cols) * (fh + 1));
    }
    Ok(sheet)
}

/// Writes the trajectory images for any dimensionality into `dir`:
/// `spacetime.pgm` (1D); `frame-TTTT.pgm` plus `sheet.pgm` (2D);
/// `frame-TTTT-layer-L.pgm` (3D). Returns the written paths.
pub fn write_trajectory_images(dir: &Path, trajectory: &[Configuration], cell_px: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let first = trajectory.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
    let mut written = Vec::new();
    let mut put = |name: String, img: GrayImage| -> Result<()> {
        let p = dir.join(name);
        img.write_pgm(&p)?;
        written.push(p);
        Ok(())
    };
    match first.dims().len() {
        1 => put("spacetime.pgm".into(), spacetime(trajectory, cell_px)?)?,
        2 => {
            for (t, c) in trajectory.iter().enumerate() {
                put(format!("frame-{t:04}.pgm"), frame(c, 0, cell_px)?)?;
            }
            let columns = (trajectory.len() as f64).sqrt().ceil() as usize;
            put("sheet.pgm".into(), contact_sheet(trajectory, columns, cell_px)?)?;
        }
        _ => {
            for (t, c) in trajectory.iter().enumerate() {
                for layer in 0..c.dims()[0] {
                    put(format!("frame-{t:04}-layer-{layer}.pgm"), frame(c, layer, cell_px)?)?;
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conf(dims: &[usize], s: &str) -> Configuration {
        Configuration::new(dims, s.chars().map(|c| c == '1').collect()).unwrap()
    }

    #[test]
    fn ascii_1d_and_2d() {
        let t = vec![conf(&[4], "1010"), conf(&[4], "0101")];
        assert_eq!(ascii(&t), "#.#.\n.#.#\n");
        let t = vec![conf(&[2, 3], "110001")];
        assert_eq!(ascii(&t), "t=0\n##.\n..#\n");
        let t = vec![conf(&[2, 1, 2], "1001")];
        assert_eq!(ascii(&t), "t=0\n#.\n\n.#\n");
    }

    #[test]
    fn pgm_header_and_colours() {
        let t = vec![conf(&[3], "100"), conf(&[3], "011")];
        let img = spacetime(&t, 1).unwrap();
        let bytes = img.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[11..], &[0, 255, 255, 255, 0, 0]);
        let big = spacetime(&t, 2).unwrap();
        assert_eq!((big.width, big.height), (6, 4));
    }

    #[test]
    fn contact_sheet_layout() {
        let t: Vec<_> = (0..5).map(|_| conf(&[2, 2], "1000")).collect();
        let sheet = contact_sheet(&t, 3, 1).unwrap();
        assert_eq!((sheet.width, sheet.height), (10, 7));
        assert_eq!(sheet.pixels[0], GUTTER);
        assert_eq!(sheet.pixels[sheet.width + 1], BLACK);
    }

    #[test]
    fn frame_rejects_1d() {
        assert!(frame(&conf(&[3], "101"), 0, 1).is_err());
        assert!(frame(&conf(&[2, 1, 2], "1001"), 2, 1).is_err());
    }
}
