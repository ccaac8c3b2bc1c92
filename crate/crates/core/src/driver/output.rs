use std::fmt::Write as _;
use std::path::Path;

use super::{Record, Trajectory};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 35] = [
    "step", "t", "theta", "eps_xx", "eps_yy", "eps_zz", "eps_xy", "eps_yz", "eps_zx", "sig_xx",
    "sig_yy", "sig_zz", "sig_xy", "sig_yz", "sig_zx", "chi_M", "chi_S", "dtr_xx", "dtr_yy",
    "dtr_zz", "dtr_xy", "dtr_yz", "dtr_zx", "B_M", "B_S", "F_M", "F_S", "F_d", "zeta_M", "zeta_S",
    "zeta_d", "gamma_M", "gamma_S", "diss_inc", "psi",
];

/// Extra columns available to plots: Frobenius norms of the strain and
/// stress deviators.
pub const PLOT_COLUMNS: [&str; 2] = ["eps_amplitude", "sig_amplitude"];

pub(crate) fn column_index(name: &str) -> Option<usize> {
    CSV_COLUMNS
        .iter()
        .chain(PLOT_COLUMNS.iter())
        .position(|c| *c == name)
}

fn values(r: &Record) -> [f64; 37] {
    let res = &r.result;
    let s = &res.state;
    let mut v = [0.0; 37];
    v[0] = r.step as f64;
    v[1] = r.t;
    v[2] = s.theta;
    v[3..9].copy_from_slice(s.eps.as_array());
    v[9..15].copy_from_slice(res.sigma.as_array());
    v[15] = s.chi_m;
    v[16] = s.chi_s;
    v[17..23].copy_from_slice(s.d_tr.as_sym().as_array());
    let m = &res.multipliers;
    v[23..35].copy_from_slice(&[
        res.forces.b_m,
        res.forces.b_s,
        res.yields.f_m,
        res.yields.f_s,
        res.yields.f_d,
        m.zeta_m,
        m.zeta_s,
        m.zeta_d,
        m.gamma_m,
        m.gamma_s,
        res.dissipation,
        res.psi,
    ]);
    v[35] = s.eps.dev().norm();
    v[36] = res.sigma.dev().norm();
    v
}

/// Value of a named CSV or plot column.
pub fn column(record: &Record, name: &str) -> Option<f64> {
    column_index(name).map(|i| values(record)[i])
}

/// The CSV text: a header, then one row per step with every value in
/// scientific notation at 17 significant digits.
pub fn to_csv_string(traj: &Trajectory) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in &traj.records {
        let v = values(r);
        write!(out, "{}", r.step).unwrap();
        for x in &v[1..CSV_COLUMNS.len()] {
            write!(out, ",{x:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(traj)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;

fn range(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes a standalone SVG line plot of two columns.
pub fn emit_svg(traj: &Trajectory, x: &str, y: &str, path: &Path) -> Result<()> {
    let available = || {
        CSV_COLUMNS
            .iter()
            .chain(PLOT_COLUMNS.iter())
            .map(|s| s.to_string())
            .collect()
    };
    let (Some(ix), Some(iy)) = (column_index(x), column_index(y)) else {
        let name = if column_index(x).is_none() { x } else { y };
        return Err(Error::UnknownColumn {
            name: name.to_string(),
            available: available(),
        });
    };
    let pts: Vec<(f64, f64)> = traj
        .records
        .iter()
        .map(|r| {
            let v = values(r);
            (v[ix], v[iy])
        })
        .collect();
    let (x0, x1) = range(pts.iter().map(|p| p.0));
    let (y0, y1) = range(pts.iter().map(|p| p.1));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + (1.0 - (v - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = TOP + ph,
        r = LEFT + pw
    )
    .unwrap();
    let text = |svg: &mut String, x: f64, y: f64, anchor: &str, extra: &str, s: &str| {
        writeln!(
            svg,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="12"{extra}>{}</text>"#,
            escape(s)
        )
        .unwrap();
    };
    text(
        &mut svg,
        LEFT,
        TOP + ph + 16.0,
        "start",
        "",
        &format!("{x0:.4e}"),
    );
    text(
        &mut svg,
        LEFT + pw,
        TOP + ph + 16.0,
        "end",
        "",
        &format!("{x1:.4e}"),
    );
    text(
        &mut svg,
        LEFT - 6.0,
        TOP + ph,
        "end",
        "",
        &format!("{y0:.3e}"),
    );
    text(
        &mut svg,
        LEFT - 6.0,
        TOP + 10.0,
        "end",
        "",
        &format!("{y1:.3e}"),
    );
    text(&mut svg, LEFT + 0.5 * pw, H - 15.0, "middle", "", x);
    let (lx, ly) = (20.0, TOP + 0.5 * ph);
    text(
        &mut svg,
        lx,
        ly,
        "middle",
        &format!(r#" transform="rotate(-90 {lx} {ly})""#),
        y,
    );
    let points: Vec<String> = pts
        .iter()
        .map(|&(a, b)| format!("{:.3},{:.3}", sx(a), sy(b)))
        .collect();
    writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.join(" ")
    )
    .unwrap();
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
