//! Text renderings of bound reports: a markdown table in interval notation,
//! a per-eigenvalue detail table, and CSV.
//!
//! Lower bounds are always rounded down and upper bounds up, so a printed
//! interval never claims more than was computed.

use std::fmt::Write as _;

use crate::bounds::{BoundsReport, RateTable};

pub const DEFAULT_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    Down,
    Up,
}

/// Formats `x` with `digits` significant digits. Magnitudes outside
/// `[1e-4, 1e15)` use scientific notation.
pub fn format_sig(x: f64, digits: usize, rounding: Rounding) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        let mut m = directed(x / 10f64.powi(mag), digits as i32 - 1, rounding);
        let mut mag = mag;
        if m.abs() >= 10.0 {
            m /= 10.0;
            mag += 1;
        }
        return format!("{:.*}e{mag}", digits - 1, m);
    }
    let decimals = (digits as i32 - 1 - mag).max(0);
    let y = directed(x, decimals, rounding);
    // rounding may carry into a new leading digit (9.99 -> 10.0)
    let decimals = if y != 0.0 && y.abs().log10().floor() as i32 > mag {
        (decimals - 1).max(0)
    } else {
        decimals
    };
    format!("{:.*}", decimals as usize, y)
}

fn directed(x: f64, decimals: i32, rounding: Rounding) -> f64 {
    let scale = 10f64.powi(decimals);
    let s = x * scale;
    let r = match rounding {
        Rounding::Nearest => s.round(),
        Rounding::Down => s.floor(),
        Rounding::Up => s.ceil(),
    };
    // guard against the product itself having been rounded inward
    let v = r / scale;
    match rounding {
        Rounding::Down if v > x => (r - 1.0) / scale,
        Rounding::Up if v < x => (r + 1.0) / scale,
        _ => v,
    }
}

/// Caveat printed under every table.
pub fn rigor_note(certified: bool) -> &'static str {
    if certified {
        "Bounds are quasi-rigorous: eigenpairs are certified by floating-point residual \
         enclosures, not interval arithmetic."
    } else {
        "Bounds use the computed eigenvalues without certification; run with --certify \
         for residual enclosures."
    }
}

/// One column per mesh level: `C_h`, an interval row per eigenvalue, and
/// rate rows when `rates` is given.
pub fn markdown_table(reports: &[BoundsReport], rates: Option<&RateTable>, digits: usize) -> String {
    let mut out = String::new();
    let row = |out: &mut String, head: &str, cells: Vec<String>| {
        let _ = writeln!(out, "| {head} | {} |", cells.join(" | "));
    };
    row(&mut out, "h", reports.iter().map(|r| r.label.clone()).collect());
    let _ = writeln!(out, "|---|{}", "---|".repeat(reports.len()));
    row(
        &mut out,
        "C_h",
        reports
            .iter()
            .map(|r| format_sig(r.c_h, digits, Rounding::Up))
            .collect(),
    );
    let k = reports.iter().map(|r| r.rows.len()).max().unwrap_or(0);
    for i in 0..k {
        let cells = reports
            .iter()
            .map(|r| match r.rows.get(i) {
                Some(b) => format!(
                    "({}, {})",
                    format_sig(b.lower, digits, Rounding::Down),
                    format_sig(b.upper, digits, Rounding::Up)
                ),
                None => "-".to_string(),
            })
            .collect();
        row(&mut out, &format!("λ{}", i + 1), cells);
    }
    if let Some(rt) = rates {
        let sigma = |v: &[Option<f64>]| -> Vec<String> {
            v.iter()
                .map(|s| s.map_or("-".to_string(), |s| format!("{s:.2}")))
                .collect()
        };
        row(&mut out, "σ_lower", sigma(&rt.sigma_lower));
        row(&mut out, "σ_upper", sigma(&rt.sigma_upper));
    }
    let certified = reports.iter().all(|r| r.certified);
    let _ = writeln!(out, "\n{}", rigor_note(certified));
    out
}

/// Detail table for a single mesh.
pub fn markdown_detail(report: &BoundsReport, reference: Option<&[f64]>, digits: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} mesh: {} elements, max h_K = {}, C_h = {}\n",
        report.domain.name(),
        report.elements,
        format_sig(report.max_h, digits, Rounding::Nearest),
        format_sig(report.c_h, digits, Rounding::Up)
    );
    match reference {
        Some(_) => {
            let _ = writeln!(out, "| i | Lower | CR λ_h | λ̃ | Upper |\n|---|---|---|---|---|");
        }
        None => {
            let _ = writeln!(out, "| i | Lower | CR λ_h | Upper |\n|---|---|---|---|");
        }
    }
    for (i, b) in report.rows.iter().enumerate() {
        let reference_cell = match reference {
            Some(r) => match r.get(i) {
                Some(v) => format!(" {v} |"),
                None => " - |".to_string(),
            },
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} |{} {} |",
            b.index,
            format_sig(b.lower, digits, Rounding::Down),
            format_sig(b.lambda_h, digits, Rounding::Nearest),
            reference_cell,
            format_sig(b.upper, digits, Rounding::Up)
        );
    }
    let _ = writeln!(out, "\n{}", rigor_note(report.certified));
    out
}

pub const CSV_HEADER: &str = "h,i,lower,lambda_h,upper,Ch";

/// CSV with one row per (level, eigenvalue).
pub fn csv(reports: &[BoundsReport], digits: usize) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        for b in &r.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                format_sig(r.h, digits, Rounding::Nearest),
                b.index,
                format_sig(b.lower, digits, Rounding::Down),
                format_sig(b.lambda_h, digits, Rounding::Nearest),
                format_sig(b.upper, digits, Rounding::Up),
                format_sig(r.c_h, digits, Rounding::Up)
            );
        }
    }
    out
}
