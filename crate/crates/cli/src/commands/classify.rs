//! `morpho classify`: random-forest prediction of maker or country with a
//! chance-baseline report.

use std::process::ExitCode;

use morpho_core::classify::{
    evaluate, pool_rare_labels, train_forest, write_confusion_csv, write_importance_csv,
    write_summary, ForestParams,
};
use morpho_core::fmt::sig9;
use morpho_core::measures::{feature_matrix, read_features_file};

use crate::commands::{ensure_dir, write_file};
use crate::config::{pick, require, FileConfig};
use crate::errors::CliError;
use crate::ClassifyArgs;

/// Classes rarer than this pool into `Other` before splitting.
const MIN_CLASS_SIZE: usize = 4;

pub fn run(args: ClassifyArgs, file: &FileConfig) -> Result<ExitCode, CliError> {
    let features_path = require(args.features, file.features.clone(), "features")?;
    let target = require(args.target, file.target.clone(), "target")?;
    let out = require(args.out, file.out.clone(), "out")?;
    let include_length = args.include_length || file.include_length.unwrap_or(false);
    let params = ForestParams {
        n_trees: pick(args.trees, file.trees, 100),
        max_depth: args.max_depth.or(file.max_depth),
        min_leaf: pick(args.min_leaf, file.min_leaf, 1),
        features_per_split: args.features_per_split.or(file.features_per_split),
        seed: pick(args.seed, file.seed, 0),
        train_fraction: pick(args.train_fraction, file.train_fraction, 0.7),
    };

    let records = read_features_file(&features_path)?;
    let labeled: Vec<_> = records
        .iter()
        .filter_map(|r| {
            let label = match target.as_str() {
                "maker" => r.meta.maker.clone(),
                "country" => r.meta.country.clone(),
                other => return Some(Err(CliError::Config(format!("unknown target `{other}`")))),
            };
            label.map(|l| Ok((r.clone(), l)))
        })
        .collect::<Result<_, _>>()?;
    if labeled.is_empty() {
        return Err(CliError::MissingField(target));
    }

    let rows: Vec<_> = labeled.iter().map(|(r, _)| r.clone()).collect();
    let labels = pool_rare_labels(
        &labeled.iter().map(|(_, l)| l.clone()).collect::<Vec<_>>(),
        MIN_CLASS_SIZE,
    );
    let matrix = feature_matrix(&rows, include_length)?;
    if !matrix.dropped.is_empty() {
        eprintln!("warning: dropped zero-variance columns: {}", matrix.dropped.join(", "));
    }

    let report = evaluate(&matrix, &labels, &params)?;

    ensure_dir(&out)?;
    let mut buf = Vec::new();
    write_summary(&mut buf, &target, &report)?;
    write_file(&out.join(format!("classify_{target}_summary.txt")), &String::from_utf8(buf).unwrap())?;
    let mut buf = Vec::new();
    write_confusion_csv(&mut buf, &report)?;
    write_file(&out.join(format!("classify_{target}_confusion.csv")), &String::from_utf8(buf).unwrap())?;
    let mut buf = Vec::new();
    write_importance_csv(&mut buf, &report)?;
    write_file(&out.join(format!("classify_{target}_importance.csv")), &String::from_utf8(buf).unwrap())?;

    if let Some(model_path) = args.save_model {
        // Reusable model: fit on every labeled row rather than the split.
        let forest = train_forest(&matrix, &labels, &params)?;
        let file = std::fs::File::create(&model_path)?;
        forest.save(std::io::BufWriter::new(file))?;
    }

    println!("classify {target}: accuracy={} chance={}", sig9(report.accuracy), sig9(report.chance));
    Ok(ExitCode::SUCCESS)
}
