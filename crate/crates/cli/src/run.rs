//! Subcommand execution. Every run writes `manifest.json` next to its
//! outputs.

use std::f64::consts::LN_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use entire_julia::construction::{
    build_schedule, cardioid_c, smallest_valid_r, verify_lemmas, Params, Schedule,
};
use entire_julia::dimension::{
    box_count_mask, box_count_points, critical_exponent, default_box_levels,
    default_whitney_levels, estimate_quadratic_dim, find_c_for_dimension, fit_dimension,
    restrict_to_distance, set_bbox_diameter, whitney_decompose, QuadBudget,
};
use entire_julia::grid::{PixelGrid, Window};
use entire_julia::partition::{
    circle_seeds, classify, compute_s_sequence, fate_statistics, orbit, OrbitOptions,
};
use entire_julia::quadratic::{julia_points_iim, points_to_csv};
use entire_julia::render::{
    boundary_mask, decode_pgm, encode_pgm, encode_ppm, fate_palette, region_code, region_palette,
    render_fates, render_regions, Sidecar,
};
use entire_julia::{LogComplex, Td};

use crate::args::*;
use crate::config::Invocation;

/// Output directory plus what has been written to it.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    schedule_hash: Option<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    fn load_schedule(&mut self, file: &ScheduleFile) -> Result<Schedule> {
        let text = fs::read_to_string(&file.schedule)
            .with_context(|| format!("cannot read schedule {}", file.schedule.display()))?;
        let s = Schedule::from_json(&text)
            .with_context(|| format!("invalid schedule {}", file.schedule.display()))?;
        self.schedule_hash = Some(s.hash());
        Ok(s)
    }
}

pub fn run(inv: &Invocation) -> Result<ExitCode> {
    let cli = &inv.cli;
    let dir = cli.global.out.clone();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut out = Outputs {
        dir,
        files: Vec::new(),
        schedule_hash: None,
    };
    let result = dispatch(cli, &mut out);
    write_manifest(inv, &mut out, result.as_ref().err())?;
    result
}

fn dispatch(cli: &Cli, out: &mut Outputs) -> Result<ExitCode> {
    match &cli.command {
        Command::Schedule(a) => schedule(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Classify(a) => classify_point(a, out),
        Command::Orbit(a) => orbit_point(a, out),
        Command::Render(RenderKind::Regions(a)) => render_region_image(a, out),
        Command::Render(RenderKind::Fates(a)) => render_fate_image(a, out),
        Command::Dim(DimKind::Box(a)) => dim_box(a, out),
        Command::Dim(DimKind::Whitney(a)) => dim_whitney(a, out),
        Command::Dim(DimKind::Quad(a)) => dim_quad(a, cli.global.seed, out),
        Command::FindC(a) => find_c(a, cli.global.seed, out),
        Command::Fates(a) => fates(a, out),
        Command::SSeq(a) => s_seq(a, out),
    }
}

fn write_manifest(
    inv: &Invocation,
    out: &mut Outputs,
    error: Option<&anyhow::Error>,
) -> Result<()> {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "tool": "ejulia",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": entire_julia::VERSION,
        "parallel": cfg!(feature = "parallel"),
        "command": inv.command,
        "config": inv.config,
        "schedule_hash": out.schedule_hash,
        "outputs": out.files,
        "error": error.map(|e| format!("{e:#}")),
        "created_unix": created,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let path = out.dir.join("manifest.json");
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn schedule(a: &ScheduleArgs, out: &mut Outputs) -> Result<ExitCode> {
    let c = cardioid_c(a.mu.0)?;
    let r = match a.r {
        Some(r) => r,
        None => smallest_valid_r(c, a.n)?,
    };
    let params = if a.exploratory {
        Params::exploratory(a.mu.0, a.n, r, a.k)?
    } else {
        Params::conformant(a.mu.0, a.n, r, a.k)?
    };
    let s = build_schedule(&params)?;
    out.schedule_hash = Some(s.hash());
    out.write("schedule.json", s.to_json())?;
    println!(
        "schedule {} R = {} K = {} logR[1] = {}",
        s.hash(),
        r,
        a.k,
        s.log_r(1)
    );
    Ok(ExitCode::SUCCESS)
}

fn verify(a: &ScheduleFile, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(a)?;
    let report = verify_lemmas(&s)?;
    out.write_json("report.json", &report)?;
    for e in &report.entries {
        println!("{:<40} {:?}", e.id, e.status);
    }
    if s.params.conformant && !report.passed() {
        let failed: Vec<&str> = report.failures().map(|e| e.id.as_str()).collect();
        eprintln!("error: conformance checks failed: {}", failed.join(", "));
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn point(s: &Schedule, p: &PointArgs) -> Result<LogComplex> {
    if let Some(z) = p.z {
        return Ok(LogComplex::from_cartesian(z.0));
    }
    if let Some(l) = p.log_abs {
        return Ok(LogComplex::from_polar(l, p.arg));
    }
    let (k, t) = (p.level.unwrap_or(1), p.t.unwrap_or(0.0));
    Ok(LogComplex::from_polar(radius(s, k)?.add_f64(t), p.arg))
}

/// `log R_k`, for `1 ≤ k ≤ K_max + 1`.
fn radius(s: &Schedule, k: u32) -> Result<Td> {
    if k == 0 || k > s.k_max() + 1 {
        bail!("level {k} is outside 1..={}", s.k_max() + 1);
    }
    Ok(s.log_r(k))
}

fn classify_point(a: &ClassifyArgs, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(&a.file)?;
    let z = point(&s, &a.point)?;
    let label = classify(&s, z)?;
    out.write_json(
        "label.json",
        &json!({
            "log_abs": z.log_mag,
            "phase": z.phase,
            "label": label,
            "name": label.to_string(),
            "code": region_code(&label),
        }),
    )?;
    println!("{label}");
    Ok(ExitCode::SUCCESS)
}

fn orbit_point(a: &OrbitArgs, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(&a.file)?;
    let z = point(&s, &a.point)?;
    let opts = OrbitOptions {
        max_iter: a.max_iter,
        follow_escape: a.follow_escape,
        ..OrbitOptions::default()
    };
    let it = orbit(&s, z, &opts)?;
    out.write("itinerary.csv", it.to_csv())?;
    out.write_json(
        "orbit.json",
        &json!({
            "fate": it.fate,
            "backward_events": it.backward_events,
            "truncated": it.truncated,
            "chain_violation": it.chain_violation,
            "steps": it.steps.len(),
        }),
    )?;
    println!("{} after {} steps", it.fate.tag.name(), it.steps.len());
    Ok(ExitCode::SUCCESS)
}

fn window(s: &Schedule, a: &RenderArgs) -> Result<Window> {
    if let Some(k) = a.annulus_k {
        let base = radius(s, k)?;
        let [lo, hi] = a.log_r.map(|f| f.0).unwrap_or([-2.0 * LN_2, 2.0 * LN_2]);
        if lo >= hi {
            bail!("empty log-radius range {lo},{hi}");
        }
        return Ok(Window::annulus(base.add_f64(lo), base.add_f64(hi)));
    }
    let [cx, cy, w, h] = a.cartesian.expect("window group is required").0;
    Ok(Window::Cartesian {
        center: Complex64::new(cx, cy),
        width: w,
        height: h,
    })
}

fn write_image(
    out: &mut Outputs,
    stem: &str,
    grid: &PixelGrid,
    palette: fn(u8) -> [u8; 3],
) -> Result<()> {
    out.write(&format!("{stem}.pgm"), encode_pgm(grid))?;
    out.write(&format!("{stem}.ppm"), encode_ppm(grid, palette))?;
    out.write_json(
        &format!("{stem}.json"),
        &Sidecar::new(grid, out.schedule_hash.clone()),
    )
}

fn render_region_image(a: &RenderArgs, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(&a.file)?;
    let grid = render_regions(&s, window(&s, a)?, a.width, a.height)?;
    write_image(out, "regions", &grid, region_palette)?;
    Ok(ExitCode::SUCCESS)
}

fn render_fate_image(a: &FateRenderArgs, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(&a.render.file)?;
    let grid = render_fates(
        &s,
        window(&s, &a.render)?,
        a.render.width,
        a.render.height,
        a.max_iter,
    )?;
    write_image(out, "fates", &grid, fate_palette)?;
    out.write("fates_boundary.pgm", encode_pgm(&boundary_mask(&grid)))?;
    Ok(ExitCode::SUCCESS)
}

fn read_mask(path: &Path) -> Result<PixelGrid> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (nx, ny, cells) =
        decode_pgm(&bytes).with_context(|| format!("invalid mask {}", path.display()))?;
    let mut grid = PixelGrid::new(Window::square(0.5), nx, ny)?;
    grid.cells = cells;
    Ok(grid)
}

fn read_points(path: &Path) -> Result<Vec<Complex64>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    reader
        .deserialize::<(f64, f64)>()
        .map(|row| {
            let (re, im) =
                row.with_context(|| format!("invalid point row in {}", path.display()))?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}

fn dyadic_exponent(grid: &PixelGrid) -> Result<u32> {
    if grid.nx != grid.ny || !grid.nx.is_power_of_two() {
        bail!(
            "mask must be square with a power-of-two side, got {}x{}",
            grid.nx,
            grid.ny
        );
    }
    Ok(grid.nx.trailing_zeros())
}

fn dim_box(a: &BoxArgs, out: &mut Outputs) -> Result<ExitCode> {
    let table = if let Some(path) = &a.mask {
        let grid = read_mask(path)?;
        let m = dyadic_exponent(&grid)?;
        let Levels(lo, hi) = a.levels.unwrap_or_else(|| {
            let (lo, hi) = default_box_levels(m);
            Levels(lo, hi)
        });
        box_count_mask(&grid, &(lo..=hi).collect::<Vec<_>>())?
    } else {
        let path = a.points.as_ref().expect("input group is required");
        let pts = read_points(path)?;
        let Levels(lo, hi) = a.levels.unwrap_or(Levels(5, 11));
        box_count_points(&pts, &(lo..=hi).collect::<Vec<_>>())?
    };
    let est = fit_dimension(&table)?;
    out.write("counts.csv", table.to_csv())?;
    out.write_json("estimate.json", &est)?;
    println!(
        "box dimension {:.4} (residual {:.4})",
        est.value, est.residual
    );
    Ok(ExitCode::SUCCESS)
}

fn dim_whitney(a: &WhitneyArgs, out: &mut Outputs) -> Result<ExitCode> {
    let grid = read_mask(&a.mask)?;
    let m = dyadic_exponent(&grid)?;
    let [lo, hi, step] = a.alphas.0;
    if !(step > 0.0 && hi > lo) {
        bail!("alphas must satisfy lo < hi and step > 0");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let alphas: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    let Levels(flo, fhi) = a.levels.unwrap_or_else(|| {
        let (lo, hi) = default_whitney_levels(m);
        Levels(lo, hi)
    });
    let cubes = whitney_decompose(&grid, m)?;
    let near = restrict_to_distance(&cubes, a.near.unwrap_or_else(|| set_bbox_diameter(&grid)));
    let ce = critical_exponent(&near, &alphas, (flo, fhi))?;
    out.write("sums.csv", ce.to_csv())?;
    out.write_json("estimate.json", &ce)?;
    println!(
        "critical exponent {:.4} in [{}, {}]",
        ce.estimate.value, ce.bracket.0, ce.bracket.1
    );
    Ok(ExitCode::SUCCESS)
}

fn budget(points: usize, levels: Levels, seed: u64) -> QuadBudget {
    QuadBudget {
        points,
        seed,
        levels: (levels.0, levels.1),
    }
}

fn dim_quad(a: &QuadArgs, seed: u64, out: &mut Outputs) -> Result<ExitCode> {
    let b = budget(a.points, a.levels, seed);
    let est = estimate_quadratic_dim(a.c.0, &b)?;
    out.write_json("estimate.json", &est)?;
    if a.save_points {
        out.write(
            "points.csv",
            points_to_csv(&julia_points_iim(a.c.0, a.points, seed)?),
        )?;
    }
    println!(
        "box dimension {:.4} (residual {:.4})",
        est.estimate.value, est.estimate.residual
    );
    Ok(ExitCode::SUCCESS)
}

fn find_c(a: &FindCArgs, seed: u64, out: &mut Outputs) -> Result<ExitCode> {
    let found = find_c_for_dimension(a.s, a.tol, &budget(a.points, a.levels, seed))?;
    out.write_json("find_c.json", &found)?;
    println!(
        "mu = {} c = {} achieved {:.4}{}",
        found.mu,
        found.c,
        found.achieved,
        if found.best_effort {
            " (best effort)"
        } else {
            ""
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn fates(a: &FatesArgs, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(&a.file)?;
    let seeds = circle_seeds(radius(&s, a.level)?.add_f64(a.t), a.seeds);
    let summary = fate_statistics(&s, &seeds, a.max_iter)?;
    out.write("fates.csv", summary.to_csv())?;
    let fraction = summary.fraction_with_backward_event();
    out.write_json(
        "fate_summary.json",
        &json!({
            "counts": summary.counts,
            "backward_histogram": summary.backward_histogram,
            "fraction_with_backward_event": fraction,
        }),
    )?;
    for (tag, n) in &summary.counts {
        println!("{tag:<16} {n}");
    }
    println!("with backward event: {fraction}");
    Ok(ExitCode::SUCCESS)
}

fn s_seq(a: &SSeqArgs, out: &mut Outputs) -> Result<ExitCode> {
    let s = out.load_schedule(&a.file)?;
    if !(a.s0 > 0.0 && a.s0.is_finite()) {
        bail!("s0 = {} must be positive", a.s0);
    }
    let seq = compute_s_sequence(&s, s.log_r(1).add_f64(a.s0.ln()), a.length)?;
    let mut csv = String::from("n,log_s\n");
    for (i, l) in seq.log_s.iter().enumerate() {
        csv.push_str(&format!("{i},{:e}\n", l.to_f64()));
    }
    out.write("s_seq.csv", csv)?;
    out.write_json("s_seq.json", &seq)?;
    println!(
        "{} terms{}",
        seq.log_s.len(),
        if seq.truncated {
            ", truncated at the certified range"
        } else {
            ""
        }
    );
    Ok(ExitCode::SUCCESS)
}
