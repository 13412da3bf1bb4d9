//! JSON, CSV and SVG emitters.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use ambimerton::pde::ValueSurface;
use serde::Serialize;

use crate::commands::{MinimaxReport, PolicyReport, RegionsReport};
use crate::error::Result;

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
    #[serde(flatten)]
    report: &'a T,
}

/// Pretty JSON with keys in declaration order; the timestamp is dropped when
/// `reproducible` is set.
pub fn json<T: Serialize>(command: &'static str, report: &T, reproducible: bool) -> Result<String> {
    let generated_at_unix = (!reproducible).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let mut s = serde_json::to_string_pretty(&Envelope {
        command,
        version: env!("CARGO_PKG_VERSION"),
        generated_at_unix,
        report,
    })?;
    s.push('\n');
    Ok(s)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per asset.
pub fn policy_csv(r: &PolicyReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "asset",
        "regime",
        "pi",
        "mu_star",
        "sigma_star",
        "r_star",
        "beta",
        "consumption_fraction_t0",
        "phi0",
    ])?;
    for i in 0..r.pi.len() {
        let regime = r.regimes.get(i).or(r.regimes.first()).copied().unwrap_or("");
        w.write_record([
            i.to_string(),
            regime.to_string(),
            r.pi[i].to_string(),
            r.mu_star[i].to_string(),
            r.sigma_star[i].to_string(),
            r.r_star.map(|v| v.to_string()).unwrap_or_default(),
            r.beta.to_string(),
            r.consumption_fraction_t0.to_string(),
            r.phi0.to_string(),
        ])?;
    }
    finish(w)
}

/// Columns `param, regime, pi_star`.
pub fn regions_csv(r: &RegionsReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["param", "regime", "pi_star"])?;
    for p in &r.points {
        w.write_record([p.param.to_string(), p.regime.to_string(), p.pi_star.to_string()])?;
    }
    finish(w)
}

/// Columns `t, x, phi, pi, c` for every `stride`-th policy row.
pub fn surface_csv(s: &ValueSurface, stride: usize) -> Result<String> {
    let g = s.grid();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "x", "phi", "pi", "c"])?;
    for n in (0..g.nt()).step_by(stride.max(1)) {
        for j in 0..g.nx() {
            w.write_record([
                g.t(n).to_string(),
                g.x(j).to_string(),
                s.phi(n, j).to_string(),
                s.pi(n, j).to_string(),
                s.c(n, j).to_string(),
            ])?;
        }
    }
    finish(w)
}

/// One row per table cell.
pub fn minimax_csv(r: &MinimaxReport) -> Result<String> {
    let s = &r.saddle;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pi", "mu", "sigma", "r", "utility", "utility_se"])?;
    for (i, pi) in s.policies.iter().enumerate() {
        for (k, prior) in s.priors.iter().enumerate() {
            w.write_record([
                pi.to_string(),
                prior.mu()[0].to_string(),
                prior.sigma()[0].to_string(),
                prior.r().to_string(),
                s.utility[i][k].to_string(),
                s.utility_se[i][k].to_string(),
            ])?;
        }
    }
    finish(w)
}

fn regime_colour(regime: &str) -> &'static str {
    match regime {
        "Short" | "ShortAndSave" => "#d95f02",
        "NonParticipation" => "#bdbdbd",
        "LongLowDrift" | "LongAndSave" => "#1b9e77",
        "AllInAsset" => "#7570b3",
        "LongAndBorrow" => "#e7298a",
        _ => "#666666",
    }
}

/// Static 1-D region diagram: one coloured band per run of equal regime and
/// dashed markers at the computed boundaries.
pub fn regions_svg(r: &RegionsReport) -> String {
    const W: f64 = 900.0;
    const LEFT: f64 = 40.0;
    const RIGHT: f64 = 860.0;
    const BAND_Y: f64 = 70.0;
    const BAND_H: f64 = 36.0;
    let span = (r.to - r.from).max(f64::MIN_POSITIVE);
    let px = |v: f64| LEFT + (RIGHT - LEFT) * (v - r.from) / span;

    let mut runs: Vec<(f64, f64, &str)> = Vec::new();
    for (k, p) in r.points.iter().enumerate() {
        let lo = if k == 0 { r.from } else { 0.5 * (r.points[k - 1].param + p.param) };
        let hi = match r.points.get(k + 1) {
            Some(next) => 0.5 * (p.param + next.param),
            None => r.to,
        };
        match runs.last_mut() {
            Some(last) if last.2 == p.regime => last.1 = hi,
            _ => runs.push((lo, hi, p.regime)),
        }
    }

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="190" viewBox="0 0 {W} 190" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"  <text x="{LEFT}" y="24" font-size="14">Regimes along {} ({})</text>"#,
        r.axis, r.model
    );
    for (lo, hi, regime) in &runs {
        let (x0, x1) = (px(*lo), px(*hi));
        let _ = writeln!(
            s,
            r#"  <rect x="{x0:.2}" y="{BAND_Y}" width="{:.2}" height="{BAND_H}" fill="{}"><title>{regime}</title></rect>"#,
            (x1 - x0).max(0.0),
            regime_colour(regime)
        );
        let _ = writeln!(
            s,
            r#"  <text x="{:.2}" y="{}" text-anchor="middle">{regime}</text>"#,
            0.5 * (x0 + x1),
            BAND_Y + BAND_H + 20.0
        );
    }
    for b in &r.boundaries {
        let x = px(b.at);
        let _ = writeln!(
            s,
            r#"  <line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black" stroke-dasharray="4 3"/>"#,
            BAND_Y - 18.0,
            BAND_Y + BAND_H + 4.0
        );
        let _ = writeln!(
            s,
            r#"  <text x="{x:.2}" y="{}" text-anchor="middle" font-size="10">{} ({:.4})</text>"#,
            BAND_Y - 22.0,
            b.threshold,
            b.at
        );
    }
    let axis_y = BAND_Y + BAND_H + 40.0;
    let _ = writeln!(
        s,
        r#"  <line x1="{LEFT}" y1="{axis_y}" x2="{RIGHT}" y2="{axis_y}" stroke="black"/>"#
    );
    for v in [r.from, r.to] {
        let _ = writeln!(
            s,
            r#"  <text x="{:.2}" y="{}" text-anchor="middle">{v:.4}</text>"#,
            px(v),
            axis_y + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}
