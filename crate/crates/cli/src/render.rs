//! Report tables rendered from a [`ReportBundle`], as CSV files or one JSON
//! document.

use std::io::Write;

use serde::Serialize;
use taplink_core::stats::stars;

use crate::bundle::{Desc, PairedEntry, ReportBundle, SweepTable, TestEntry};

pub const INSUFFICIENT: &str = "insufficient data";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&str]) -> Self {
        Self {
            name,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Two decimals, without a negative sign on zero.
pub fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn opt2(x: Option<f64>) -> String {
    x.map_or_else(|| INSUFFICIENT.to_string(), fmt2)
}

/// P-value at three decimals with significance stars, e.g. `0.058*`.
pub fn fmt_p(p: f64) -> String {
    format!("{p:.3}{}", stars(p))
}

fn test_cell(t: &TestEntry) -> String {
    match t.p_value {
        Some(p) => fmt_p(p),
        None => INSUFFICIENT.into(),
    }
}

pub fn cutoff_label(c: Option<f64>) -> String {
    match c {
        None => "All data".into(),
        Some(c) if c.fract() == 0.0 => format!("{c:.0} mins"),
        Some(c) => format!("{c} mins"),
    }
}

const STAT_ROWS: [&str; 8] = ["Count", "Mean", "Std", "25%", "Median", "75%", "IQR", "P-value"];

fn stat_value(d: Option<&Desc>, row: &str) -> String {
    let Some(d) = d else {
        return if row == "Count" { "0".into() } else { INSUFFICIENT.into() };
    };
    match row {
        "Count" => d.count.to_string(),
        "Mean" => fmt2(d.mean),
        "Std" => opt2(d.std),
        "25%" => fmt2(d.q1),
        "Median" => fmt2(d.median),
        "75%" => fmt2(d.q3),
        "IQR" => fmt2(d.iqr),
        _ => unreachable!("not a statistic row: {row}"),
    }
}

/// Descriptive statistics per level on the all-data rows, one column per
/// (variable, level), with the variable's test p-value under its first level.
fn level_table(name: &'static str, tables: &[SweepTable]) -> Table {
    let mut header = vec!["Statistic".to_string()];
    let mut cols = Vec::new();
    for t in tables {
        let Some(row) = t.rows.iter().find(|r| r.cutoff_min.is_none()).or(t.rows.first()) else {
            continue;
        };
        for (i, g) in row.groups.iter().enumerate() {
            header.push(format!("{}: {}", t.title, g.level));
            cols.push((g, (i == 0).then_some(&row.test)));
        }
    }
    let mut out = Table {
        name,
        header,
        rows: Vec::new(),
    };
    for stat in STAT_ROWS {
        let mut r = vec![stat.to_string()];
        for (g, test) in &cols {
            r.push(if stat == "P-value" {
                test.map(test_cell).unwrap_or_default()
            } else {
                stat_value(g.stats.as_ref(), stat)
            });
        }
        out.push(r);
    }
    out
}

/// Counts and medians of every level across cut-offs, with the test p-value
/// per cut-off.
fn sensitivity_table(name: &'static str, tables: &[SweepTable], cutoffs: &[Option<f64>]) -> Table {
    let mut header = vec!["Variable".to_string(), "Level".into(), "Statistic".into()];
    header.extend(cutoffs.iter().map(|&c| cutoff_label(c)));
    let mut out = Table {
        name,
        header,
        rows: Vec::new(),
    };
    for t in tables {
        let levels: Vec<&str> = t
            .rows
            .first()
            .map(|r| r.groups.iter().map(|g| g.level.as_str()).collect())
            .unwrap_or_default();
        for (li, level) in levels.iter().enumerate() {
            for stat in ["Count", "Median"] {
                let mut r = vec![t.title.clone(), level.to_string(), stat.into()];
                for row in &t.rows {
                    let g = &row.groups[li];
                    r.push(if stat == "Count" {
                        g.count.to_string()
                    } else {
                        opt2(g.stats.as_ref().map(|s| s.median))
                    });
                }
                out.push(r);
            }
        }
        let mut r = vec![t.title.clone(), String::new(), "P-value".into()];
        r.extend(t.rows.iter().map(|row| test_cell(&row.test)));
        out.push(r);
    }
    out
}

fn paired_table(rows: &[PairedEntry]) -> Table {
    let mut t = Table::new(
        "table9_paired",
        &[
            "Cut-off",
            "Count",
            "1st trip median",
            "2nd trip median",
            "1st trip IQR",
            "2nd trip IQR",
            "P-value",
        ],
    );
    for r in rows {
        t.push(vec![
            cutoff_label(r.cutoff_min),
            r.count.to_string(),
            opt2(r.first.as_ref().map(|d| d.median)),
            opt2(r.second.as_ref().map(|d| d.median)),
            opt2(r.first.as_ref().map(|d| d.iqr)),
            opt2(r.second.as_ref().map(|d| d.iqr)),
            test_cell(&r.test),
        ]);
    }
    t
}

fn card_frequency_tables(b: &ReportBundle) -> Vec<Table> {
    let mut freq = Table::new(
        "table2_card_frequency",
        &["Day", "1 trip", "2 trips", "3 trips", "4+ trips", "Total"],
    );
    let mut od = Table::new("table3_od", &["Statistic", "Value"]);
    let mut years = Table::new(
        "diary_years",
        &["Year", "Respondents", "Trips", "1 trip", "2 trips", "3 trips", "4+ trips"],
    );
    let mut rates = Table::new("table4_match_rate", &["Year", "Eligible", "Matched", "Match rate (%)"]);
    let Some(ing) = &b.ingest else {
        for t in [&mut freq, &mut od, &mut years, &mut rates] {
            let n = t.header.len();
            t.push(std::iter::once(INSUFFICIENT.to_string()).chain(vec![String::new(); n - 1]).collect());
        }
        return vec![freq, od, years, rates];
    };
    let counts = |b: &[u64; 4]| {
        let mut r: Vec<String> = b.iter().map(u64::to_string).collect();
        r.push(b.iter().sum::<u64>().to_string());
        r
    };
    let cf = &ing.card_frequency;
    for d in &cf.by_day {
        let mut r = vec![d.day.clone()];
        r.extend(counts(&d.buckets));
        freq.push(r);
    }
    let mut r = vec!["All days (pooled)".to_string()];
    r.extend(counts(&cf.pooled));
    freq.push(r);
    let mut r = vec!["Average day".to_string()];
    match cf.average_day {
        Some(a) => {
            r.extend(a.iter().map(|&x| fmt2(x)));
            r.push(fmt2(a.iter().sum()));
        }
        None => r.extend(vec![INSUFFICIENT.to_string(); 5]),
    }
    freq.push(r);

    match &ing.od {
        Some(o) => {
            od.push(vec!["OD-day pairs".into(), o.od_days.to_string()]);
            od.push(vec!["Journeys".into(), o.journeys.to_string()]);
            od.push(vec!["Mean".into(), fmt2(o.mean)]);
            od.push(vec!["Median".into(), fmt2(o.median)]);
            od.push(vec!["Std".into(), fmt2(o.std)]);
        }
        None => od.push(vec!["OD-day pairs".into(), INSUFFICIENT.into()]),
    }

    for y in &ing.diary_years {
        let mut r = vec![y.year.to_string(), y.respondents.to_string(), y.trips.to_string()];
        r.extend(y.by_trip_count.iter().map(u64::to_string));
        years.push(r);
    }

    for m in &ing.match_rates {
        rates.push(vec![
            m.year.map_or_else(|| "Total".into(), |y| y.to_string()),
            m.eligible.to_string(),
            m.matched.to_string(),
            opt2(m.percent),
        ]);
    }
    vec![freq, od, years, rates]
}

/// Every report table, in a fixed order.
pub fn tables(b: &ReportBundle) -> Vec<Table> {
    let mut out = card_frequency_tables(b);

    let mut overall = Table::new("overall", &["Statistic", "Value"]);
    let o = &b.overall;
    overall.push(vec!["Respondents".into(), o.respondents.to_string()]);
    overall.push(vec!["Trips".into(), o.trips.to_string()]);
    for (label, d) in [
        ("first stop |error|", &o.abs_first),
        ("last stop |error|", &o.abs_last),
        ("first stop signed", &o.signed_first),
        ("last stop signed", &o.signed_last),
    ] {
        for stat in ["Median", "IQR", "Mean"] {
            overall.push(vec![format!("{stat} {label} (min)"), stat_value(d.as_ref(), stat)]);
        }
    }
    overall.push(vec![
        "Signed first/last correlation".into(),
        o.signed_correlation.map_or_else(|| INSUFFICIENT.into(), |c| format!("{c:.4}")),
    ]);
    out.push(overall);

    let mut norm = Table::new(
        "normality",
        &["Variable", "n", "Tested n", "Subsampled", "W", "P-value", "Verdict"],
    );
    for e in &b.normality {
        match &e.gate {
            Some(g) => norm.push(vec![
                e.variable.clone(),
                g.n.to_string(),
                g.tested_n.to_string(),
                if g.tested_n < g.n { "yes" } else { "no" }.into(),
                format!("{:.4}", g.w),
                format!("{:.4}", g.p_value),
                g.verdict().into(),
            ]),
            None => {
                let mut r = vec![e.variable.clone()];
                r.extend(vec![String::new(); 5]);
                r.push(INSUFFICIENT.into());
                norm.push(r);
            }
        }
    }
    out.push(norm);

    out.push(level_table("table5_two_level", &b.two_level));
    out.push(sensitivity_table("table6_sensitivity", &b.two_level, &b.cutoffs_min));
    out.push(level_table("table7_multi_level", &b.multi_level));
    out.push(sensitivity_table("table8_multi_sensitivity", &b.multi_level, &b.cutoffs_min));
    out.push(paired_table(&b.paired));

    let sc = &b.second_card;
    let mut buckets = Table::new(
        "table10_gap_buckets",
        &["Average gap per stop (min)", "Respondents", "Share (%)"],
    );
    for r in &sc.buckets {
        buckets.push(vec![r.label.clone(), r.respondents.to_string(), opt2(r.percent)]);
    }
    let total: u64 = sc.buckets.iter().map(|r| r.respondents).sum();
    buckets.push(vec![
        "Total".into(),
        total.to_string(),
        if total > 0 { fmt2(100.0) } else { INSUFFICIENT.into() },
    ]);
    out.push(buckets);
    out.push(level_table("table11_second_card_two_level", &sc.two_level));
    out.push(level_table("table12_second_card_multi_level", &sc.multi_level));
    let mut med = Table::new(
        "second_card_medians",
        &["Variable", "Level", "Best card median", "Second card median"],
    );
    let title = |code: &str| {
        sc.two_level
            .iter()
            .chain(&sc.multi_level)
            .find(|t| t.grouping == code)
            .map_or(code.to_string(), |t| t.title.clone())
    };
    for m in &sc.medians {
        med.push(vec![title(&m.grouping), m.level.clone(), opt2(m.best_median), opt2(m.second_median)]);
    }
    out.push(med);

    let q = &b.quadrants;
    let mut quad = Table::new("quadrants", &["Quadrant", "Trips", "Share (%)"]);
    let classified = q.late_late + q.early_early + q.late_early + q.early_late;
    for (label, n, share) in [
        ("lateLate", q.late_late, true),
        ("earlyEarly", q.early_early, true),
        ("lateEarly", q.late_early, true),
        ("earlyLate", q.early_late, true),
        ("zero first only", q.zero_first_only, false),
        ("zero last only", q.zero_last_only, false),
        ("zero both", q.zero_both, false),
    ] {
        let pct = if !share {
            String::new()
        } else if classified == 0 {
            INSUFFICIENT.into()
        } else {
            fmt2(100.0 * n as f64 / classified as f64)
        };
        quad.push(vec![label.into(), n.to_string(), pct]);
    }
    quad.push(vec!["Total".into(), q.total.to_string(), String::new()]);
    quad.push(vec![
        "Same sign".into(),
        (q.late_late + q.early_early).to_string(),
        opt2(q.consistent_fraction.map(|f| 100.0 * f)),
    ]);
    out.push(quad);

    let mut heat = Table::new("heatmap", &["First stop bin (min)", "Last stop bin (min)", "Trips"]);
    for c in &b.heatmap {
        heat.push(vec![c.first_bin_min.to_string(), c.last_bin_min.to_string(), c.trips.to_string()]);
    }
    out.push(heat);
    for (name, bins) in [
        ("histogram_first", &b.histogram_first),
        ("histogram_last", &b.histogram_last),
    ] {
        let mut h = Table::new(name, &["Signed difference (min)", "Trips"]);
        for bin in bins {
            h.push(vec![bin.minute.to_string(), bin.trips.to_string()]);
        }
        out.push(h);
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    tables: &'a [Table],
}

pub fn write_json<W: Write>(w: W, tables: &[Table]) -> serde_json::Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, &JsonReport { tables })?;
    writeln!(w).map_err(serde_json::Error::io)
}
