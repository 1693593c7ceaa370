use std::fmt::Write;

use ncbounds::bounds::CurvePoint;

/// 12 significant digits: plain decimal, or scientific below `1e-4`.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.abs() < 1e-4 {
        return format!("{x:.11e}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn sweep_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("sigma,alpha,d_lower\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", num(p.t), num(p.alpha), num(p.dimension));
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

pub fn sweep_svg(curve: &[CurvePoint]) -> String {
    let (t0, t1) = (curve[0].t, curve[curve.len() - 1].t);
    let (mut y0, mut y1) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.dimension), hi.max(p.dimension)));
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + (t - t0) / (t1 - t0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let points: Vec<String> = curve
        .iter()
        .map(|p| format!("{:.2},{:.2}", sx(p.t), sy(p.dimension)))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = HEIGHT - BOTTOM,
        r = WIDTH - RIGHT
    );
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    for (t, anchor) in [(t0, "start"), (t1, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            sx(t),
            HEIGHT - BOTTOM + 18.0,
            tick(t)
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(y) + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">Σ</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">L(Σ)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        points.join(" ")
    );
    let _ = writeln!(out, "</svg>");
    out
}

fn tick(x: f64) -> String {
    format!("{x:.4}")
}
