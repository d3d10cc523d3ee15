//! `morpho synth`: deterministic synthetic corpus with ground truth.

use std::process::ExitCode;

use morpho_core::ingest::{write_metadata, write_pgm};
use morpho_core::synth::{generate_corpus, place_in_image, rasterize, GroundTruth};
use serde::Serialize;

use crate::commands::{ensure_dir, write_file};
use crate::config::{parse_bounds, period_table, pick, require, FileConfig};
use crate::errors::CliError;
use crate::SynthArgs;

#[derive(Serialize)]
struct TruthEntry<'a> {
    id: &'a str,
    maker: Option<&'a str>,
    country: Option<&'a str>,
    year: Option<i32>,
    truth: &'a GroundTruth,
}

#[derive(Serialize)]
struct TruthFile<'a> {
    seed: u64,
    noise: f64,
    count: usize,
    instruments: Vec<TruthEntry<'a>>,
}

const IMAGE_MARGIN: f64 = 8.0;

pub fn run(args: SynthArgs, file: &FileConfig) -> Result<ExitCode, CliError> {
    let out = require(args.out, file.out.clone(), "out")?;
    let count = pick(args.count, file.count, 50);
    let noise = pick(args.noise, file.noise, 0.01);
    let seed = pick(args.seed, file.seed, 7);
    let year_start = pick(args.year_start, file.year_start, 1620);
    let year_end = pick(args.year_end, file.year_end, 1980);
    let bounds = match args.period_bounds {
        Some(text) => parse_bounds(&text)?,
        None => file.period_bounds.unwrap_or([1750, 1820, 1900, 1920]),
    };
    if count == 0 {
        return Err(CliError::Config("count must be positive".into()));
    }
    if !(0.0..=0.05).contains(&noise) {
        return Err(CliError::Config(format!("noise {noise} outside [0, 0.05]")));
    }

    let table = period_table(bounds);
    let mut corpus = generate_corpus(count, noise, seed, (year_start, year_end), &table);

    let images_dir = out.join("images");
    let contours_dir = out.join("contours");
    ensure_dir(&images_dir)?;
    ensure_dir(&contours_dir)?;
    for inst in &mut corpus {
        place_in_image(inst, IMAGE_MARGIN);
        let img = rasterize(&inst.contour, IMAGE_MARGIN);
        write_pgm(&images_dir.join(format!("{}.pgm", inst.id)), &img)?;
        // The exact generated outline, before rasterization.
        let mut csv = String::from("x,y\n");
        for p in &inst.contour.points {
            csv.push_str(&format!("{:.3},{:.3}\n", p.x, p.y));
        }
        write_file(&contours_dir.join(format!("{}.csv", inst.id)), &csv)?;
    }

    let metadata: Vec<_> = corpus.iter().map(|i| i.meta.clone()).collect();
    let mut buf = Vec::new();
    write_metadata(&mut buf, &metadata)?;
    write_file(&out.join("metadata.csv"), &String::from_utf8(buf).expect("csv is utf-8"))?;

    let truth = TruthFile {
        seed,
        noise,
        count,
        instruments: corpus
            .iter()
            .map(|i| TruthEntry {
                id: &i.id,
                maker: i.meta.maker.as_deref(),
                country: i.meta.country.as_deref(),
                year: i.meta.year,
                truth: &i.truth,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&truth).expect("truth serializes");
    json.push('\n');
    write_file(&out.join("truth.json"), &json)?;

    println!("synth: wrote {count} instruments to {}", out.display());
    Ok(ExitCode::SUCCESS)
}
