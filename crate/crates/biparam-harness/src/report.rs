//! Report emission: sweep.csv with the versioned schema, report.json, and
//! the plot-data files. Output bytes are a pure function of the report, so
//! identical configs reproduce identical files.

use crate::baseline::BaselineVerdict;
use crate::experiments::{SweepReport, CSV_COLUMNS, CSV_SCHEMA};
use biparam_sparse::{Error, Result};
use serde::Serialize;
use std::fs;
use std::path::Path;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(format!("io: {e}"))
}

/// sweep.csv: one schema comment line, the column header, then the rows of
/// every section in order.
pub fn render_csv(reports: &[SweepReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# biparam-sweep schema={CSV_SCHEMA}\n"));
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for rep in reports {
        for row in &rep.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: &'static str,
    sections: &'a [SweepReport],
    baseline_verdict: &'a Option<BaselineVerdict>,
}

pub fn render_json(reports: &[SweepReport], verdict: &Option<BaselineVerdict>) -> String {
    serde_json::to_string_pretty(&JsonReport {
        schema: CSV_SCHEMA,
        sections: reports,
        baseline_verdict: verdict,
    })
    .expect("report serializes")
}

/// Write report.json, sweep.csv, and plotdata/*.csv under `dir`.
pub fn write_outputs(
    dir: &Path,
    reports: &[SweepReport],
    verdict: &Option<BaselineVerdict>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err)?;
    fs::write(dir.join("sweep.csv"), render_csv(reports)).map_err(io_err)?;
    fs::write(dir.join("report.json"), render_json(reports, verdict)).map_err(io_err)?;
    let plot = dir.join("plotdata");
    fs::create_dir_all(&plot).map_err(io_err)?;

    let mut by_depth = String::from("depth_x,depth_y,ratio\n");
    let mut by_complexity = String::from("complexity_total,ratio\n");
    let mut by_a2 = String::from("a2,ratio\n");
    for rep in reports {
        for row in &rep.rows {
            if let Some(ratio) = row.ratio {
                by_depth.push_str(&format!("{},{},{ratio}\n", row.depth_x, row.depth_y));
                let total =
                    row.i1 as u32 + row.i2 as u32 + row.j1 as u32 + row.j2 as u32;
                if total > 0 || !row.generator.is_empty() {
                    by_complexity.push_str(&format!("{total},{ratio}\n"));
                }
                if let Some(a2) = row.a2 {
                    by_a2.push_str(&format!("{a2},{ratio}\n"));
                }
            }
        }
    }
    fs::write(plot.join("ratio_vs_depth.csv"), by_depth).map_err(io_err)?;
    fs::write(plot.join("ratio_vs_complexity.csv"), by_complexity).map_err(io_err)?;
    fs::write(plot.join("ratio_vs_a2.csv"), by_a2).map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, ExperimentKind};
    use crate::experiments::run_experiment;

    #[test]
    fn csv_output_is_reproducible() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::WeakType);
        cfg.trials = 4;
        cfg.depth_1d = 6;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(render_csv(&[a]), render_csv(&[b]));
    }

    #[test]
    fn outputs_written(){
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::WeakType);
        cfg.trials = 2;
        cfg.depth_1d = 5;
        let rep = run_experiment(&cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("biparam-report-test-{}", std::process::id()));
        write_outputs(&dir, &[rep], &None).unwrap();
        assert!(dir.join("sweep.csv").exists());
        assert!(dir.join("report.json").exists());
        assert!(dir.join("plotdata/ratio_vs_depth.csv").exists());
        fs::remove_dir_all(&dir).ok();
    }
}
