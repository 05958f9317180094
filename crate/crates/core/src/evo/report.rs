//! Run reporting: CSV summary and an SVG line plot of best fitness per
//! generation.

use std::fmt::Write as _;
use std::path::Path;

use super::run::EvolutionHistory;
use crate::error::Result;

/// Writes `generation,best_fitness,mean_fitness,best_velocity_sum,
/// best_energy_sum` rows.
pub fn write_csv_report(history: &EvolutionHistory, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "generation,best_fitness,mean_fitness,best_velocity_sum,best_energy_sum");
    for rec in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            rec.generation,
            rec.best_fitness,
            rec.mean_fitness,
            rec.best_velocity_sum,
            rec.best_energy_sum
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a line plot of best (solid) and mean (dashed) fitness.
pub fn write_fitness_svg(history: &EvolutionHistory, path: &Path) -> Result<()> {
    let (w, h, margin) = (640.0, 400.0, 50.0);
    let n = history.len().max(1);
    let best: Vec<f64> = history.iter().map(|r| r.best_fitness).collect();
    let mean: Vec<f64> = history.iter().map(|r| r.mean_fitness).collect();
    let lo = best
        .iter()
        .chain(&mean)
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    let hi = best.iter().chain(&mean).copied().fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-9);
    let x = |i: usize| margin + (w - 2.0 * margin) * i as f64 / (n.max(2) - 1) as f64;
    let y = |v: f64| h - margin - (h - 2.0 * margin) * (v - lo) / (hi - lo);
    let polyline = |vals: &[f64]| {
        vals.iter().enumerate().map(|(i, &v)| format!("{:.1},{:.1}", x(i), y(v))).collect::<Vec<_>>().join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        h - margin,
        w - margin,
        h - margin
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>",
        h - margin
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">generation</text>",
        w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">fitness</text>",
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\">{:.3}</text>",
        8.0,
        y(hi) + 4.0,
        hi
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\">{:.3}</text>",
        8.0,
        y(lo) + 4.0,
        lo
    );
    if !best.is_empty() {
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>",
            polyline(&best)
        );
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#999\" stroke-width=\"1.5\" stroke-dasharray=\"5,4\"/>",
            polyline(&mean)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#1f6fb2\">best</text>",
        w - margin + 6.0,
        y(*best.last().unwrap_or(&lo))
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#999\">mean</text>",
        w - margin + 6.0,
        y(*mean.last().unwrap_or(&lo)) + 14.0
    );
    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evo::run::GenerationRecord;

    fn history() -> EvolutionHistory {
        (0..5)
            .map(|g| GenerationRecord {
                generation: g,
                members: vec![],
                next_id: 0,
                best_id: 0,
                best_fitness: 1.0 + g as f64,
                mean_fitness: 0.5 + g as f64,
                best_velocity_sum: 0.1,
                best_energy_sum: 0.2,
                short_selection: false,
            })
            .collect()
    }

    #[test]
    fn csv_has_header_and_one_row_per_generation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.csv");
        write_csv_report(&history(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("generation,best_fitness"));
        assert!(lines[1].starts_with("0,1,0.5,"));
    }

    #[test]
    fn svg_is_written_and_contains_polylines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fitness.svg");
        write_fitness_svg(&history(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert_eq!(text.matches("<polyline").count(), 2);
    }
}
