//! `morpho morph`: thin-plate-spline deformation of a reference outline
//! toward per-window average landmark configurations, one SVG frame per
//! rendered window plus a bending-energy table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use morpho_core::analysis::format_center_year;
use morpho_core::contour::{Contour, Point};
use morpho_core::fmt::sig9;
use morpho_core::geometry::{read_landmarks_csv, resample};
use morpho_core::ingest::read_contour_csv;
use morpho_core::measures::read_features_file;
use morpho_core::svg;
use morpho_core::tps::{
    deformation_grid, epoch_targets, fit_tps, normalize_landmarks, warp_points, DatedShape,
    EpochTarget, LandmarkCorrespondence, Rect,
};

use crate::commands::{ensure_dir, write_file};
use crate::config::{pick, require, FileConfig};
use crate::errors::CliError;
use crate::MorphArgs;

const LANDMARK_ORDER: [&str; 7] = ["QR", "AR", "BR", "BOTTOM", "BL", "AL", "QL"];

fn read_named_landmarks(path: &Path) -> Result<Vec<Point>, CliError> {
    let file = std::fs::File::open(path)?;
    let rows = read_landmarks_csv(std::io::BufReader::new(file))?;
    let by_name: BTreeMap<&str, Point> =
        rows.iter().map(|(name, _, p)| (name.as_str(), *p)).collect();
    LANDMARK_ORDER
        .iter()
        .map(|name| {
            by_name.get(name).copied().ok_or_else(|| {
                CliError::Config(format!("{}: missing landmark `{name}`", path.display()))
            })
        })
        .collect()
}

pub fn run(args: MorphArgs, file: &FileConfig) -> Result<ExitCode, CliError> {
    let features_path = require(args.features, file.features.clone(), "features")?;
    let reference_id = require(args.reference, file.reference.clone(), "reference")?;
    let out = require(args.out, file.out.clone(), "out")?;
    let dt = pick(args.dt, file.dt, 20);
    let step = pick(args.step, file.step, 1);
    let n_resample = pick(args.n_resample, file.n_resample, 2048);
    let grid_nx = pick(args.grid_nx, file.grid_nx, 10);
    let grid_ny = pick(args.grid_ny, file.grid_ny, 14);

    let sibling = |name: &str| -> PathBuf {
        features_path.parent().unwrap_or_else(|| Path::new(".")).join(name)
    };
    let landmarks_dir = args.landmarks.unwrap_or_else(|| sibling("landmarks"));
    let contours_dir = args.contours.unwrap_or_else(|| sibling("contours"));

    let records = read_features_file(&features_path)?;
    if !records.iter().any(|r| r.id() == reference_id) {
        return Err(CliError::UnknownId(reference_id));
    }

    // Normalized landmark shapes for every instrument that has them.
    let mut shapes = Vec::new();
    let mut reference_landmarks = None;
    let mut reference_total = 0.0;
    for record in &records {
        let path = landmarks_dir.join(format!("{}.csv", record.id()));
        if !path.exists() {
            continue;
        }
        let raw = read_named_landmarks(&path)?;
        let normalized = normalize_landmarks(&raw, record.features.total);
        if record.id() == reference_id {
            reference_landmarks = Some((raw, normalized.clone()));
            reference_total = record.features.total;
        }
        shapes.push(DatedShape { year: record.meta.year, landmarks: normalized });
    }
    let Some((reference_raw, reference_normalized)) = reference_landmarks else {
        return Err(CliError::Config(format!(
            "no landmark file for reference `{reference_id}` under {}",
            landmarks_dir.display()
        )));
    };

    // Reference outline, mapped into the same normalized frame as its
    // landmarks (centroid at the origin, total length 1).
    let contour_path = contours_dir.join(format!("{reference_id}.csv"));
    let traced = read_contour_csv(std::io::BufReader::new(std::fs::File::open(&contour_path)?))?;
    let resampled = resample(&traced, n_resample)?;
    let centroid = Point::new(
        reference_raw.iter().map(|p| p.x).sum::<f64>() / reference_raw.len() as f64,
        reference_raw.iter().map(|p| p.y).sum::<f64>() / reference_raw.len() as f64,
    );
    let reference_contour: Vec<Point> = resampled
        .points
        .iter()
        .map(|p| Point::new((p.x - centroid.x) / reference_total, (p.y - centroid.y) / reference_total))
        .collect();

    let targets = epoch_targets(&shapes, dt, step)?;
    let selected = select_windows(&targets, args.centers.as_deref())?;
    if selected.is_empty() {
        return Err(CliError::Config("no populated windows to morph toward".into()));
    }

    // Grid bounds: the reference outline's box with a margin.
    let bbox = Contour::new(reference_contour.clone()).bbox();
    let pad_x = 0.12 * (bbox.2 - bbox.0);
    let pad_y = 0.12 * (bbox.3 - bbox.1);
    let bounds = Rect::new(bbox.0 - pad_x, bbox.1 - pad_y, bbox.2 + pad_x, bbox.3 + pad_y);

    ensure_dir(&out)?;
    let mut energy_rows = Vec::new();
    let mut frames = 0usize;
    for target in &selected {
        let landmarks = target.landmarks.as_ref().expect("selected windows are populated");
        let transform = fit_tps(&LandmarkCorrespondence::new(
            reference_normalized.clone(),
            landmarks.clone(),
        ))?;
        let warped = warp_points(&transform, &reference_contour);
        let grid = deformation_grid(&transform, bounds, grid_nx, grid_ny)?;
        let center = format_center_year(target.center_year);
        let caption = format!(
            "window center {center}, n = {}, bending energy {:.3e}",
            target.count, transform.bending_energy
        );
        let frame =
            svg::morph_frame(&warped, &grid, &reference_normalized, landmarks, &caption);
        write_file(&out.join(format!("morph_{center}.svg")), &frame)?;
        energy_rows.push((target.center_year, transform.bending_energy));
        frames += 1;
    }

    let mut csv = String::from("center_year,bending_energy\n");
    for (center, energy) in &energy_rows {
        csv.push_str(&format!("{},{}\n", format_center_year(*center), sig9(*energy)));
    }
    write_file(&out.join("bending_energy.csv"), &csv)?;

    println!("morph: {frames} frames from reference `{reference_id}` at {}", out.display());
    Ok(ExitCode::SUCCESS)
}

/// All populated windows, or the ones nearest the requested midpoints.
fn select_windows<'a>(
    targets: &'a [EpochTarget],
    centers: Option<&str>,
) -> Result<Vec<&'a EpochTarget>, CliError> {
    let populated: Vec<&EpochTarget> = targets.iter().filter(|t| t.count > 0).collect();
    let Some(centers) = centers else {
        return Ok(populated);
    };
    let mut picked: Vec<&EpochTarget> = Vec::new();
    for token in centers.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let wanted: f64 = token
            .parse()
            .map_err(|_| CliError::Config(format!("bad center year `{token}`")))?;
        let best = populated
            .iter()
            .min_by(|a, b| {
                (a.center_year - wanted)
                    .abs()
                    .partial_cmp(&(b.center_year - wanted).abs())
                    .unwrap()
            })
            .copied()
            .ok_or_else(|| CliError::Config("no populated windows".into()))?;
        if !picked.iter().any(|t| t.center_year == best.center_year) {
            picked.push(best);
        }
    }
    Ok(picked)
}
