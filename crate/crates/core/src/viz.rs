//! Static SVG plots and surface-data export.
//!
//! Heatmaps interpolate linearly between [`LOW_COLOR`] and [`HIGH_COLOR`].
//! Every cell is a `<rect class="cell">`, every bar a `<rect class="bar">`
//! and every codebook tile a `<rect class="tile">`, so the element counts
//! can be checked from the document alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::analytics::GridValues;
use crate::error::{Result, SomError};
use crate::model::SomModel;
use crate::preprocess::denormalize;

pub const LOW_COLOR: [u8; 3] = [0xf7, 0xfb, 0xff];
pub const HIGH_COLOR: [u8; 3] = [0x08, 0x30, 0x6b];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    ActivationHeatmap,
    UMatrixHeatmap,
    ActivationBars,
    SurfaceData,
    CodebookTiles,
}

impl PlotKind {
    pub fn needs_assignments(self) -> bool {
        matches!(self, PlotKind::ActivationHeatmap | PlotKind::ActivationBars)
    }
}

impl FromStr for PlotKind {
    type Err = SomError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "activation-heatmap" => PlotKind::ActivationHeatmap,
            "umatrix-heatmap" => PlotKind::UMatrixHeatmap,
            "activation-bars" => PlotKind::ActivationBars,
            "surface-data" => PlotKind::SurfaceData,
            "codebook-tiles" => PlotKind::CodebookTiles,
            other => return Err(SomError::InvalidArgument(format!("unknown plot kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorScale {
    #[default]
    Linear,
    /// `ln(1 + v − min)`, for skewed data such as activation counts.
    Log1p,
}

impl FromStr for ColorScale {
    type Err = SomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ColorScale::Linear),
            "log1p" => Ok(ColorScale::Log1p),
            other => Err(SomError::InvalidArgument(format!("unknown color scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub color_scale: ColorScale,
    /// Side of one grid cell (or width of one bar) in pixels.
    pub cell_size: u32,
}

impl PlotSpec {
    pub fn new(kind: PlotKind) -> Self {
        PlotSpec {
            kind,
            color_scale: ColorScale::Linear,
            cell_size: 24,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cell_size == 0 {
            return Err(SomError::InvalidArgument("cell size must be at least 1 pixel".into()));
        }
        Ok(())
    }
}

/// Position of `v` on the color ramp, in `[0, 1]`. A constant grid
/// (`min == max`) maps everything to 0.
pub fn scale_parameter(v: f64, min: f64, max: f64, scale: ColorScale) -> f64 {
    if max <= min {
        return 0.0;
    }
    let t = match scale {
        ColorScale::Linear => (v - min) / (max - min),
        ColorScale::Log1p => (v - min).ln_1p() / (max - min).ln_1p(),
    };
    t.clamp(0.0, 1.0)
}

pub fn ramp_color(t: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for i in 0..3 {
        let (lo, hi) = (f64::from(LOW_COLOR[i]), f64::from(HIGH_COLOR[i]));
        out[i] = (lo + t * (hi - lo)).round() as u8;
    }
    out
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.4}")
    }
}

fn svg_open(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect class="background" width="{width}" height="{height}" fill="white"/>"#);
}

const MARGIN: u32 = 36;
const LEGEND_WIDTH: u32 = 110;

/// `side × side` heatmap with row/column index labels and a min/max legend.
pub fn render_heatmap(grid: &GridValues, spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    if grid.values.is_empty() || grid.values.len() != grid.side * grid.side {
        return Err(SomError::InvalidArgument("heatmap grid is empty or not square".into()));
    }
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(SomError::NonFinite("heatmap grid".into()));
    }
    let min = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cs = spec.cell_size;
    let side = grid.side as u32;
    let map = side * cs;
    let (width, height) = (MARGIN + map + LEGEND_WIDTH, MARGIN + map + 12);

    let mut out = String::new();
    svg_open(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
        hex(LOW_COLOR),
        hex(HIGH_COLOR)
    );
    out.push_str("<g class=\"cells\">\n");
    for r in 0..grid.side {
        for c in 0..grid.side {
            let v = grid.get(r, c);
            let fill = hex(ramp_color(scale_parameter(v, min, max, spec.color_scale)));
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{}" y="{}" width="{cs}" height="{cs}" fill="{fill}" data-row="{r}" data-col="{c}" data-value="{v}"/>"#,
                MARGIN + c as u32 * cs,
                MARGIN + r as u32 * cs,
            );
        }
    }
    out.push_str("</g>\n<g class=\"axes\" font-size=\"10\" fill=\"#333\">\n");
    for i in 0..side {
        let center = MARGIN + i * cs + cs / 2;
        let _ = writeln!(out, r#"<text x="{center}" y="{}" text-anchor="middle">{i}</text>"#, MARGIN - 6);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{i}</text>"#, MARGIN - 6, center + 3);
    }
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="12">col</text><text x="2" y="{}">row</text>"#, MARGIN + 10);
    out.push_str("</g>\n<g class=\"legend\" font-size=\"10\" fill=\"#333\">\n");
    let lx = MARGIN + map + 16;
    let _ = writeln!(
        out,
        r##"<rect class="legend-ramp" x="{lx}" y="{MARGIN}" width="14" height="{map}" fill="url(#ramp)" stroke="#999"/>"##
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}">max {}</text>"#, lx + 20, MARGIN + 8, fmt_num(max));
    let _ = writeln!(out, r#"<text x="{}" y="{}">min {}</text>"#, lx + 20, MARGIN + map, fmt_num(min));
    if spec.color_scale == ColorScale::Log1p {
        let _ = writeln!(out, r#"<text x="{}" y="{}">log1p</text>"#, lx + 20, MARGIN + map / 2);
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Bar chart of an activation histogram: one bar per distinct activation
/// count, ascending, height proportional to the number of neurons.
pub fn render_bars(histogram: &BTreeMap<u64, usize>, spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    if histogram.is_empty() {
        return Err(SomError::InvalidArgument("histogram is empty".into()));
    }
    const PLOT_HEIGHT: u32 = 200;
    let tallest = *histogram.values().max().unwrap_or(&1).max(&1) as f64;
    let bw = spec.cell_size;
    let gap = (bw / 4).max(1);
    let n = histogram.len() as u32;
    let width = 2 * MARGIN + n * (bw + gap);
    let height = PLOT_HEIGHT + 2 * MARGIN;
    let base = MARGIN + PLOT_HEIGHT;

    let mut out = String::new();
    svg_open(&mut out, width, height);
    out.push_str("<g class=\"bars\">\n");
    for (i, (&count, &neurons)) in histogram.iter().enumerate() {
        let h = (neurons as f64 / tallest * f64::from(PLOT_HEIGHT)).round() as u32;
        let x = MARGIN + i as u32 * (bw + gap);
        let _ = writeln!(
            out,
            r#"<rect class="bar" x="{x}" y="{}" width="{bw}" height="{h}" fill="{}" data-activations="{count}" data-neurons="{neurons}"/>"#,
            base - h,
            hex(HIGH_COLOR)
        );
    }
    out.push_str("</g>\n<g class=\"axes\" font-size=\"10\" fill=\"#333\">\n");
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN}" y1="{base}" x2="{}" y2="{base}" stroke="#333"/>"##,
        width - MARGIN
    );
    for (i, (&count, &neurons)) in histogram.iter().enumerate() {
        let cx = MARGIN + i as u32 * (bw + gap) + bw / 2;
        let _ = writeln!(out, r#"<text x="{cx}" y="{}" text-anchor="middle">{count}</text>"#, base + 12);
        let h = (neurons as f64 / tallest * f64::from(PLOT_HEIGHT)).round() as u32;
        let _ = writeln!(out, r#"<text x="{cx}" y="{}" text-anchor="middle">{neurons}</text>"#, base - h - 3);
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">activations per neuron</text>"#,
        width / 2,
        height - 6
    );
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// `{"side": k, "values": [...]}` with values row-major.
pub fn surface_json(grid: &GridValues) -> Result<String> {
    if grid.values.len() != grid.side * grid.side || grid.side == 0 {
        return Err(SomError::InvalidArgument("surface grid is empty or not square".into()));
    }
    let mut out = format!("{{\"side\":{},\"values\":[", grid.side);
    for (i, v) in grid.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(SomError::NonFinite("surface grid".into()));
        }
        if i > 0 {
            out.push(',');
        }
        if v.fract() == 0.0 && v.abs() < 9.0e15 {
            let _ = write!(out, "{}", *v as i64);
        } else {
            out.push_str(&serde_json::to_string(v).map_err(|e| SomError::Invariant(e.to_string()))?);
        }
    }
    out.push_str("]}");
    Ok(out)
}

pub fn export_surface(grid: &GridValues, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = surface_json(grid)?;
    fs::write(path, text).map_err(|e| SomError::io(path, e))
}

/// Codebook rendered as colored tiles, reading each raw-unit weight vector as
/// an RGB triple clamped to `[0, 255]`. Only 3-dimensional models qualify.
pub fn render_codebook_tiles(model: &SomModel, spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    if model.dim() != 3 {
        return Err(SomError::DimensionMismatch {
            expected: 3,
            found: model.dim(),
        });
    }
    let wm = model.weights();
    let cs = spec.cell_size;
    let size = 2 * MARGIN + wm.side() as u32 * cs;
    let mut out = String::new();
    svg_open(&mut out, size, size);
    out.push_str("<g class=\"tiles\">\n");
    for p in wm.positions() {
        let raw = denormalize(wm.neuron(p.flat_index), model.normalization())?;
        let [r, g, b] = tile_rgb(&raw);
        let _ = writeln!(
            out,
            r#"<rect class="tile" x="{}" y="{}" width="{cs}" height="{cs}" fill="rgb({r},{g},{b})"/>"#,
            MARGIN + p.col as u32 * cs,
            MARGIN + p.row as u32 * cs,
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn tile_rgb(raw: &[f64]) -> [u8; 3] {
    let ch = |v: f64| v.clamp(0.0, 255.0).round() as u8;
    [ch(raw[0]), ch(raw[1]), ch(raw[2])]
}
