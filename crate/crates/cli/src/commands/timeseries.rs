//! `morpho timeseries`: year-windowed feature evolution.

use std::process::ExitCode;

use morpho_core::analysis::{sliding_window, write_series_csv};
use morpho_core::measures::read_features_file;
use morpho_core::svg;

use crate::commands::{ensure_dir, write_file};
use crate::config::{pick, require, FileConfig};
use crate::errors::CliError;
use crate::TimeseriesArgs;

pub fn run(args: TimeseriesArgs, file: &FileConfig) -> Result<ExitCode, CliError> {
    let features_path = require(args.features, file.features.clone(), "features")?;
    let out = require(args.out, file.out.clone(), "out")?;
    let dt = pick(args.dt, file.dt, 20);
    let step = pick(args.step, file.step, 1);
    let plot = args.plot.unwrap_or_else(|| "a,h1,smean".to_string());

    let records = read_features_file(&features_path)?;
    let series = sliding_window(&records, dt, step)?;
    ensure_dir(&out)?;

    let mut buf = Vec::new();
    write_series_csv(&mut buf, &series)?;
    write_file(&out.join("series.csv"), &String::from_utf8(buf).unwrap())?;

    for feature in plot.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !series.labels.iter().any(|l| l == feature) {
            return Err(CliError::Config(format!(
                "unknown series feature `{feature}` (have: {})",
                series.labels.join(", ")
            )));
        }
        let chart = svg::line_chart(
            &series,
            feature,
            &format!("windowed mean of {feature} (dt = {dt}, step = {step})"),
        );
        write_file(&out.join(format!("series_{feature}.svg")), &chart)?;
    }

    let populated = series.counts.iter().filter(|&&c| c > 0).count();
    println!(
        "timeseries: {} windows ({populated} populated), outputs at {}",
        series.counts.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
