//! Raster producers for the radial decomposition and orbit fates, plus
//! PGM/PPM output.
//!
//! Region codes are `16 · min(k, 15) + zone`, with zone 1 for the core,
//! 2–5 for `A_k` (plain, `U`, `V`, petal candidate) and 6 for `B_k`.
//!
//! Fate codes are 0 undecided, 1 trapdoor, 2 bounded in the core, 3 fast
//! escaping, and `128 + j` for orbits escaping through the bands, where
//! `j = level − step` is the index of the escaping Fatou component the
//! start point belongs to (clamped to `−120..=127`).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::construction::Schedule;
use crate::error::{Error, Result};
use crate::grid::{PixelGrid, Window};
use crate::partition::{
    classify, orbit, FateTag, Itinerary, OrbitOptions, RegionLabel, Subzone, Zone,
};

pub const FATE_UNDECIDED: u8 = 0;
pub const FATE_TRAPDOOR: u8 = 1;
pub const FATE_BOUNDED_CORE: u8 = 2;
pub const FATE_FAST_ESCAPING: u8 = 3;
/// Escaping codes are `ESCAPE_BASE + j`.
pub const ESCAPE_BASE: u8 = 128;
pub const BOUNDARY: u8 = 255;

pub fn region_code(label: &RegionLabel) -> u8 {
    let k = label.k.unwrap_or(0).min(15) as u8;
    let zone = match (label.zone, label.subzone) {
        (Zone::Core, _) => 1,
        (Zone::A, Subzone::None) => 2,
        (Zone::A, Subzone::U) => 3,
        (Zone::A, Subzone::V) => 4,
        (Zone::A, Subzone::PetalCandidate) => 5,
        (Zone::B, _) => 6,
    };
    16 * k + zone
}

/// Zone part of a region code: 1 core, 2–5 A band, 6 B band.
pub fn region_zone(code: u8) -> u8 {
    code % 16
}

/// Band index part of a region code.
pub fn region_level(code: u8) -> u8 {
    code / 16
}

pub fn render_regions(s: &Schedule, window: Window, nx: usize, ny: usize) -> Result<PixelGrid> {
    PixelGrid::try_from_fn(window, nx, ny, |_, _, z| Ok(region_code(&classify(s, z)?)))
}

pub fn fate_code(it: &Itinerary) -> u8 {
    match it.fate.tag {
        FateTag::Undecided => FATE_UNDECIDED,
        FateTag::Trapdoor => FATE_TRAPDOOR,
        FateTag::BoundedCore => FATE_BOUNDED_CORE,
        FateTag::FastEscaping => FATE_FAST_ESCAPING,
        FateTag::EscapesViaB => {
            let level = it.fate.level.unwrap_or(0) as i64;
            let step = it.fate.step.unwrap_or(0) as i64;
            (ESCAPE_BASE as i64 + (level - step).clamp(-120, 127)) as u8
        }
    }
}

/// Fate code of the orbit of every pixel centre.
pub fn render_fates(
    s: &Schedule,
    window: Window,
    nx: usize,
    ny: usize,
    max_iter: usize,
) -> Result<PixelGrid> {
    let opts = OrbitOptions {
        max_iter,
        ..OrbitOptions::default()
    };
    PixelGrid::try_from_fn(window, nx, ny, |_, _, z| {
        Ok(fate_code(&orbit(s, z, &opts)?))
    })
}

/// Marks with [`BOUNDARY`] every pixel whose 4-neighbourhood holds a
/// different code. Columns wrap around for full-turn log-polar windows.
pub fn boundary_mask(grid: &PixelGrid) -> PixelGrid {
    let (nx, ny) = (grid.nx, grid.ny);
    let wrap = grid.window.wraps_horizontally();
    let mut out = PixelGrid {
        cells: vec![0; nx * ny],
        ..grid.clone()
    };
    for y in 0..ny {
        for x in 0..nx {
            let c = grid.get(x, y);
            let mut nbrs = [None; 4];
            if x > 0 {
                nbrs[0] = Some((x - 1, y));
            } else if wrap {
                nbrs[0] = Some((nx - 1, y));
            }
            if x + 1 < nx {
                nbrs[1] = Some((x + 1, y));
            } else if wrap {
                nbrs[1] = Some((0, y));
            }
            if y > 0 {
                nbrs[2] = Some((x, y - 1));
            }
            if y + 1 < ny {
                nbrs[3] = Some((x, y + 1));
            }
            if nbrs.iter().flatten().any(|&(a, b)| grid.get(a, b) != c) {
                out.set(x, y, BOUNDARY);
            }
        }
    }
    out
}

pub fn encode_pgm(grid: &PixelGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    out.extend_from_slice(&grid.cells);
    out
}

/// Parses a binary PGM with maxval 255 into `(width, height, bytes)`.
pub fn decode_pgm(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |m: &str| Error::Format(format!("not a P5 image: {m}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&data[start..pos]).map_err(|_| bad("header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("magic"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("size"));
    let (w, h, max) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if max != 255 {
        return Err(bad("maxval"));
    }
    let body = &data[pos + 1..];
    if body.len() != w * h {
        return Err(bad("payload length"));
    }
    Ok((w, h, body.to_vec()))
}

pub fn write_pgm(grid: &PixelGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(grid))?;
    Ok(())
}

pub fn encode_ppm(grid: &PixelGrid, palette: impl Fn(u8) -> [u8; 3]) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    for &c in &grid.cells {
        out.extend_from_slice(&palette(c));
    }
    out
}

pub fn write_ppm(
    grid: &PixelGrid,
    path: impl AsRef<Path>,
    palette: impl Fn(u8) -> [u8; 3],
) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_ppm(grid, palette))?;
    Ok(())
}

pub fn fate_palette(code: u8) -> [u8; 3] {
    match code {
        FATE_UNDECIDED => [0, 0, 0],
        FATE_TRAPDOOR => [40, 90, 200],
        FATE_BOUNDED_CORE => [120, 40, 160],
        FATE_FAST_ESCAPING => [250, 200, 40],
        BOUNDARY => [255, 255, 255],
        c => {
            let j = c.wrapping_sub(ESCAPE_BASE) as i8 as i32;
            let shade = (60 + 30 * j.rem_euclid(6)) as u8;
            [shade, 200 - shade / 2, 60]
        }
    }
}

pub fn region_palette(code: u8) -> [u8; 3] {
    let k = region_level(code) as u32;
    let tint = (40 * (k % 5)) as u8;
    match region_zone(code) {
        1 => [30, 30, 30],
        2 => [200, 60 + tint, 60],
        3 => [230, 120 + tint / 2, 60],
        4 => [240, 180, 80 + tint],
        5 => [250, 250, 250],
        6 => [50, 90 + tint, 200],
        _ => [0, 0, 0],
    }
}

/// Window metadata written next to every image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: String,
    pub window: Window,
    pub resolution: [usize; 2],
    pub schedule_hash: Option<String>,
}

impl Sidecar {
    pub fn new(grid: &PixelGrid, schedule_hash: Option<String>) -> Self {
        Sidecar {
            kind: grid.window.kind().to_string(),
            window: grid.window,
            resolution: [grid.nx, grid.ny],
            schedule_hash,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
