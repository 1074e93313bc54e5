//! Bound curves over a scaled rank family, as CSV and SVG.

use std::fmt::Write;

use super::{tt_finite_bound, tt_unique_bound, unfolding_bound, BoundsInputs};
use crate::error::{Error, Result};

pub const CURVE_HEADER: &str =
    "r,unfolding_bound,tt_finite_bound,tt_unique_bound,valid_unfolding,valid_tt_finite,valid_tt_unique";

/// A family of rank vectors indexed by a scalar `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankTemplate {
    /// `r_i = c_i · r`.
    Linear(Vec<usize>),
    /// `r_i = r^{e_i}`.
    Power(Vec<u32>),
}

impl RankTemplate {
    /// `(r, 2r, 3r, 3r, 2r, r)` for `d = 7`, `n = 10³`, `r = 1..=80`.
    pub fn fig1() -> Self {
        RankTemplate::Linear(vec![1, 2, 3, 3, 2, 1])
    }

    /// `(r, r², r³, r³, r², r)` for `d = 7`, `n = 10³`, `r = 1..=20`.
    pub fn fig2() -> Self {
        RankTemplate::Power(vec![1, 2, 3, 3, 2, 1])
    }

    /// `d - 1`.
    pub fn len(&self) -> usize {
        match self {
            RankTemplate::Linear(c) => c.len(),
            RankTemplate::Power(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ranks(&self, r: usize) -> Result<Vec<usize>> {
        let out: Option<Vec<usize>> = match self {
            RankTemplate::Linear(c) => c.iter().map(|&c| c.checked_mul(r)).collect(),
            RankTemplate::Power(e) => e.iter().map(|&e| r.checked_pow(e)).collect(),
        };
        out.ok_or_else(|| Error::InvalidArgument(format!("rank template overflows at r = {r}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub r: usize,
    pub unfolding: f64,
    pub tt_finite: f64,
    pub tt_unique: f64,
    pub valid_unfolding: bool,
    pub valid_tt_finite: bool,
    pub valid_tt_unique: bool,
}

impl CurveRow {
    /// All three hypothesis sets hold.
    pub fn all_valid(&self) -> bool {
        self.valid_unfolding && self.valid_tt_finite && self.valid_tt_unique
    }
}

/// Evaluates the three bounds at every `r` in `rs`.
pub fn curve(
    template: &RankTemplate,
    n: u64,
    epsilon: f64,
    rs: impl IntoIterator<Item = usize>,
) -> Result<Vec<CurveRow>> {
    let d = template.len() + 1;
    rs.into_iter()
        .map(|r| {
            let inp = BoundsInputs::new(n, d, template.ranks(r)?, epsilon)?;
            let (u, f, q) = (unfolding_bound(&inp).total, tt_finite_bound(&inp), tt_unique_bound(&inp));
            Ok(CurveRow {
                r,
                unfolding: u.value,
                tt_finite: f.value,
                tt_unique: q.value,
                valid_unfolding: u.valid,
                valid_tt_finite: f.valid,
                valid_tt_unique: q.valid,
            })
        })
        .collect()
}

/// Values use the shortest representation that round-trips.
pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for row in rows {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{:?},{},{},{}",
            row.r,
            row.unfolding,
            row.tt_finite,
            row.tt_unique,
            row.valid_unfolding,
            row.valid_tt_finite,
            row.valid_tt_unique
        );
    }
    s
}

/// Line plot with a log-scale sample axis; one polyline per bound.
pub fn curves_svg(rows: &[CurveRow], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 60.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let logs: Vec<f64> = rows
        .iter()
        .flat_map(|r| [r.unfolding, r.tt_finite, r.tt_unique])
        .filter(|v| *v > 0.0 && v.is_finite())
        .map(f64::log10)
        .collect();
    if rows.is_empty() || logs.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let (r0, r1) = (rows[0].r as f64, rows[rows.len() - 1].r as f64);
    let span = (r1 - r0).max(1.0);
    let px = |r: f64| PAD + (r - r0) / span * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v.log10() - lo) / (hi - lo) * (H - 2.0 * PAD);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} L{PAD} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    for e in lo as i64..=hi as i64 {
        let y = py(10f64.powi(e as i32));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y:.1}" text-anchor="end" font-family="sans-serif" font-size="10">1e{e}</text>"#,
            PAD - 6.0
        );
    }
    for r in [r0, r1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{r}</text>"#,
            px(r),
            H - PAD + 16.0
        );
    }
    let series: [(&str, &str, fn(&CurveRow) -> f64); 3] = [
        ("unfolding", "#d62728", |r| r.unfolding),
        ("TT finite", "#1f77b4", |r| r.tt_finite),
        ("TT unique", "#2ca02c", |r| r.tt_unique),
    ];
    for (k, (name, color, get)) in series.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| get(r) > 0.0 && get(r).is_finite())
            .map(|r| format!("{:.1},{:.1}", px(r.r as f64), py(get(r))))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}" font-family="sans-serif" font-size="11">{name}</text>"#,
            W - PAD - 70.0,
            PAD + 14.0 * k as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
