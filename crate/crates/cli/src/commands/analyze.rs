//! `morpho analyze`: correlation map and PCA projections.

use std::process::ExitCode;

use morpho_core::analysis::{
    correlation_map, fit_pca, project, write_correlation_csv, write_pca_variance_csv,
    write_projection_csv,
};
use morpho_core::measures::{feature_matrix, read_features_file};
use morpho_core::svg;

use crate::commands::{ensure_dir, write_file};
use crate::config::{pick, require, FileConfig};
use crate::errors::CliError;
use crate::AnalyzeArgs;

pub fn run(args: AnalyzeArgs, file: &FileConfig) -> Result<ExitCode, CliError> {
    let features_path = require(args.features, file.features.clone(), "features")?;
    let out = require(args.out, file.out.clone(), "out")?;
    let include_length = args.include_length || file.include_length.unwrap_or(false);

    let records = read_features_file(&features_path)?;
    let matrix = feature_matrix(&records, include_length)?;
    if !matrix.dropped.is_empty() {
        eprintln!("warning: dropped zero-variance columns: {}", matrix.dropped.join(", "));
    }
    ensure_dir(&out)?;

    let correlation = correlation_map(&matrix)?;
    let mut buf = Vec::new();
    write_correlation_csv(&mut buf, &correlation)?;
    write_file(&out.join("correlation.csv"), &String::from_utf8(buf).unwrap())?;
    write_file(&out.join("correlation.svg"), &svg::heatmap(&correlation))?;

    let model = fit_pca(&matrix)?;
    let mut buf = Vec::new();
    write_pca_variance_csv(&mut buf, &model)?;
    write_file(&out.join("pca_variance.csv"), &String::from_utf8(buf).unwrap())?;

    let k = pick(args.components, file.components, 2).min(model.components.len());
    let projection = project(&model, &matrix, k)?;
    let mut buf = Vec::new();
    write_projection_csv(&mut buf, &projection, &records)?;
    write_file(&out.join("projection.csv"), &String::from_utf8(buf).unwrap())?;

    if k >= 2 {
        type Getter = fn(&morpho_core::measures::InstrumentRecord) -> String;
        let points: Vec<(f64, f64)> =
            projection.scores.iter().map(|s| (s[0], s[1])).collect();
        let fields: [(&str, Getter); 3] = [
            ("maker", |r| r.meta.maker.clone().unwrap_or_default()),
            ("country", |r| r.meta.country.clone().unwrap_or_default()),
            ("period", |r| r.meta.period.map(|p| p.to_string()).unwrap_or_default()),
        ];
        for (name, getter) in fields {
            let cats: Vec<String> = records.iter().map(getter).collect();
            if cats.iter().all(|c| c.is_empty()) {
                continue;
            }
            let chart = svg::scatter(
                &points,
                &cats,
                &format!("projection by {name}"),
                "pc1",
                "pc2",
            );
            write_file(&out.join(format!("pca_by_{name}.svg")), &chart)?;
        }
    }

    println!(
        "analyze: {} instruments, {} columns, outputs at {}",
        records.len(),
        matrix.n_cols(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
