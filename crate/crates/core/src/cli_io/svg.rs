use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::cplx_fn::AnalyticMap;
use crate::error::{Error, Result};
use crate::evolution::Trajectory;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;
const SAMPLES: usize = 400;

fn boundary(coeffs: &[Complex64]) -> Vec<Complex64> {
    (0..=SAMPLES)
        .map(|i| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / SAMPLES as f64);
            // Horner on z * sum a_j z^j
            coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a) * z
        })
        .collect()
}

/// One closed curve of the picture, with optional point markers.
#[derive(Debug, Clone)]
pub struct SvgLayer {
    pub label: String,
    pub points: Vec<Complex64>,
    pub markers: Vec<Complex64>,
}

/// Layers are colored from blue (first) to red (last); markers are crosses
/// and each curve carries its label at its rightmost point.
pub fn render_layers_svg(layers: &[SvgLayer]) -> Result<String> {
    if layers.iter().all(|l| l.points.is_empty()) {
        return Err(Error::Io("nothing to draw".into()));
    }
    let (mut lo, mut hi) = (Complex64::new(f64::MAX, f64::MAX), Complex64::new(f64::MIN, f64::MIN));
    for z in layers
        .iter()
        .flat_map(|l| l.points.iter().chain(&l.markers))
        .filter(|z| z.re.is_finite() && z.im.is_finite())
    {
        lo = Complex64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let px = |z: Complex64| (MARGIN + (z.re - lo.re) * scale, SIZE - MARGIN - (z.im - lo.im) * scale);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let last = (layers.len().saturating_sub(1)).max(1) as f64;
    for (i, layer) in layers.iter().enumerate() {
        let frac = i as f64 / last;
        let color = format!("rgb({},60,{})", (255.0 * frac) as u8, (255.0 * (1.0 - frac)) as u8);
        writeln!(s, r#"<g id="layer-{i}">"#).unwrap();
        let pts: Vec<String> = layer
            .points
            .iter()
            .map(|&z| {
                let (x, y) = px(z);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke-width="1.2" stroke="{color}" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        for &b in &layer.markers {
            let (x, y) = px(b);
            writeln!(
                s,
                r#"<path stroke="black" d="M{:.2},{:.2} l6,6 M{:.2},{:.2} l6,-6"/>"#,
                x - 3.0,
                y - 3.0,
                x - 3.0,
                y + 3.0
            )
            .unwrap();
        }
        if let Some(anchor) = layer
            .points
            .iter()
            .copied()
            .reduce(|m, z| if z.re > m.re { z } else { m })
        {
            let (x, y) = px(anchor);
            writeln!(
                s,
                r#"<text font-family="monospace" font-size="10" x="{:.2}" y="{y:.2}">{}</text>"#,
                x + 4.0,
                layer.label
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    Ok(s)
}

/// One layer per recorded state, labeled with its time, branch values marked.
pub fn render_boundary_svg(traj: &Trajectory) -> Result<String> {
    if traj.states.is_empty() {
        return Err(Error::Io("trajectory has no recorded states".into()));
    }
    let layers: Vec<SvgLayer> = traj
        .states
        .iter()
        .map(|st| SvgLayer {
            label: format!("t={:.4}", st.t),
            points: boundary(&st.coeffs),
            markers: st.branch_values.clone(),
        })
        .collect();
    render_layers_svg(&layers)
}

/// The image of the unit circle under a single map.
pub fn render_map_svg(map: &AnalyticMap, markers: &[Complex64]) -> Result<String> {
    let f = map.to_rational();
    let points = (0..=SAMPLES)
        .map(|i| {
            f.eval_unchecked(Complex64::from_polar(
                1.0,
                std::f64::consts::TAU * i as f64 / SAMPLES as f64,
            ))
        })
        .collect();
    render_layers_svg(&[SvgLayer {
        label: "t=0".into(),
        points,
        markers: markers.to_vec(),
    }])
}

pub fn export_svg(traj: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, render_boundary_svg(traj)?)?;
    Ok(())
}
