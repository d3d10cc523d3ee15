//! `morpho extract`: batch feature extraction. Individual image failures
//! never abort the run; they land in the manifest and flip the exit code
//! to 1.

use std::path::PathBuf;
use std::process::ExitCode;

use morpho_core::geometry::{write_landmarks_csv, write_profile_csv, SmoothingParams};
use morpho_core::ingest::{load_image, load_metadata_file, write_contour_csv, Metadata};
use morpho_core::measures::{write_features_csv, InstrumentRecord};
use morpho_core::pipeline::{extract_from_image, Extraction};

use crate::commands::{ensure_dir, write_file};
use crate::config::{effective_threads, parse_bounds, period_table, pick, require, FileConfig};
use crate::errors::CliError;
use crate::manifest::{ConfigSnapshot, InstrumentStatus, RunManifest};
use crate::ExtractArgs;

pub fn run(args: ExtractArgs, file: &FileConfig) -> Result<ExitCode, CliError> {
    let images_dir = require(args.images, file.images.clone(), "images")?;
    let metadata_path = args.metadata.or_else(|| file.metadata.clone());
    let out = require(args.out, file.out.clone(), "out")?;
    let n_resample = pick(args.n_resample, file.n_resample, 2048);
    let sigma = pick(args.sigma, file.sigma, 5.0);
    let bounds = match args.period_bounds {
        Some(text) => parse_bounds(&text)?,
        None => file.period_bounds.unwrap_or([1750, 1820, 1900, 1920]),
    };
    let dump_curvature = args.dump_curvature || file.dump_curvature.unwrap_or(false);
    let threads = effective_threads(args.threads.or(file.threads));
    let params = SmoothingParams::new(n_resample, sigma)?;
    let table = period_table(bounds);

    // Input images, sorted by file name for a deterministic batch order.
    let mut images: Vec<(String, PathBuf)> = std::fs::read_dir(&images_dir)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", images_dir.display())))?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
                Some("pgm") | Some("png")
            )
        })
        .filter_map(|p| p.file_stem().map(|s| (s.to_string_lossy().into_owned(), p.clone())))
        .collect();
    images.sort();
    if images.is_empty() {
        return Err(CliError::EmptyDataset);
    }

    let metadata = match &metadata_path {
        Some(path) => load_metadata_file(path, &table)?,
        None => Vec::new(),
    };
    let meta_of = |id: &str| -> Metadata {
        metadata.iter().find(|m| m.id == id).cloned().unwrap_or_else(|| Metadata::bare(id))
    };

    ensure_dir(&out)?;
    ensure_dir(&out.join("contours"))?;
    ensure_dir(&out.join("landmarks"))?;
    if dump_curvature {
        ensure_dir(&out.join("curvature"))?;
    }

    let process = |(id, path): &(String, PathBuf)| -> (String, Result<Extraction, CliError>) {
        let result = load_image(path)
            .map_err(CliError::from)
            .and_then(|img| extract_from_image(&img, &params).map_err(|e| match e {
                morpho_core::pipeline::ExtractError::Ingest(e) => CliError::Ingest(e),
                morpho_core::pipeline::ExtractError::Geometry(e) => CliError::Geometry(e),
                morpho_core::pipeline::ExtractError::Measure(e) => CliError::Measure(e),
            }));
        (id.clone(), result)
    };
    let results: Vec<(String, Result<Extraction, CliError>)> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(e.to_string()))?;
            pool.install(|| {
                use rayon::prelude::*;
                images.par_iter().map(process).collect()
            })
        }
        None => {
            use rayon::prelude::*;
            images.par_iter().map(process).collect()
        }
    };

    let mut records: Vec<InstrumentRecord> = Vec::new();
    let mut statuses = Vec::new();
    for (id, result) in &results {
        match result {
            Ok(extraction) => {
                let mut buf = Vec::new();
                if let Some(traced) = &extraction.traced {
                    write_contour_csv(&mut buf, traced)?;
                    write_file(&out.join("contours").join(format!("{id}.csv")), &text(buf))?;
                }
                let mut buf = Vec::new();
                write_landmarks_csv(&mut buf, &extraction.resampled, &extraction.landmarks)?;
                write_file(&out.join("landmarks").join(format!("{id}.csv")), &text(buf))?;
                if dump_curvature {
                    let mut buf = Vec::new();
                    write_profile_csv(&mut buf, &extraction.profile)?;
                    write_file(&out.join("curvature").join(format!("{id}.csv")), &text(buf))?;
                }
                records.push(InstrumentRecord { meta: meta_of(id), features: extraction.features.clone() });
                statuses.push(InstrumentStatus::ok(id));
            }
            Err(err) => statuses.push(InstrumentStatus::failed(id, err.kind(), err.to_string())),
        }
    }

    let mut buf = Vec::new();
    write_features_csv(&mut buf, &records)?;
    write_file(&out.join("features.csv"), &text(buf))?;

    let manifest = RunManifest::new(
        ConfigSnapshot {
            images: images_dir,
            metadata: metadata_path,
            out: out.clone(),
            n_resample,
            sigma,
            period_bounds: bounds,
            threads,
        },
        statuses,
    );
    write_file(&out.join("manifest.json"), &manifest.to_json())?;

    let failures = manifest.failures();
    println!(
        "extract: {} ok, {failures} failed, features at {}",
        records.len(),
        out.join("features.csv").display()
    );
    Ok(if failures > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn text(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("output is utf-8")
}
