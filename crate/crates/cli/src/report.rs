use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use nemflow_core::diagnostics::{read_csv, CsvLedger, CSV_COLUMNS};
use plotters::prelude::*;

use crate::commands::{CmdResult, Failure};

pub fn run(csv: &Path, plot: Option<&Path>) -> CmdResult {
    let file = File::open(csv).with_context(|| format!("cannot open {}", csv.display())).map_err(Failure::Usage)?;
    let ledger = read_csv(file)
        .with_context(|| format!("malformed ledger {}", csv.display()))
        .map_err(Failure::Usage)?;
    let mut out = std::io::stdout().lock();
    match out.write_all(table(&ledger).as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(Failure::Runtime(e.into())),
        _ => {}
    }
    if let Some(path) = plot {
        energy_plot(&ledger, path).map_err(Failure::Runtime)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn table(ledger: &CsvLedger) -> String {
    let mut s = format!("{} records\n{:<16} {:>13} {:>13} {:>13} {:>13}\n", ledger.rows.len(), "column", "first", "last", "min", "max");
    for (i, name) in CSV_COLUMNS.iter().enumerate() {
        let col: Vec<f64> = ledger.rows.iter().map(|r| r[i]).collect();
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        s += &format!("{name:<16} {:>13.6e} {:>13.6e} {min:>13.6e} {max:>13.6e}\n", col[0], col[col.len() - 1]);
    }
    s
}

/// Kinetic, elastic and total energy against time.
fn energy_plot(ledger: &CsvLedger, out: &Path) -> anyhow::Result<()> {
    let col = |n: &str| ledger.column(n).ok_or_else(|| anyhow!("missing column {n}"));
    let t = col("t")?;
    let series = [("e_kin", col("e_kin")?, BLUE), ("e_frank", col("e_frank")?, RED), ("e_total", col("e_total")?, BLACK)];
    let (t0, t1) = (t[0], t[t.len() - 1].max(t[0] + f64::EPSILON));
    let ymax = series.iter().flat_map(|s| s.1.iter()).copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE) * 1.05;

    let root = SVGBackend::new(out, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("energy", ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(t0..t1, 0.0..ymax)?;
    chart.configure_mesh().x_desc("t").draw()?;
    for (name, ys, colour) in series {
        chart
            .draw_series(LineSeries::new(t.iter().copied().zip(ys), colour))?
            .label(name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], colour));
    }
    chart.configure_series_labels().background_style(WHITE).border_style(BLACK).draw()?;
    root.present()?;
    Ok(())
}
