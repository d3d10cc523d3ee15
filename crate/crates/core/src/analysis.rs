//! Dataset-level statistics: pairwise correlation, PCA and sliding-window
//! year series.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fmt::sig9;
use crate::measures::{FeatureMatrix, FeatureVector, InstrumentRecord};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no record carries a fabrication year")]
    NoDates,
    #[error("need at least {needed} {what}, got {got}")]
    Insufficient { what: &'static str, needed: usize, got: usize },
}

impl AnalysisError {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisError::ZeroVariance(_) => "ZeroVarianceError",
            AnalysisError::Numerical(_) => "NumericalError",
            AnalysisError::Dimension(_) => "DimensionError",
            AnalysisError::NoDates => "NoDatesError",
            AnalysisError::Insufficient { .. } => "InsufficientDataError",
        }
    }
}

/// Symmetric matrix of Pearson coefficients between feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    pub labels: Vec<String>,
    pub r: Vec<Vec<f64>>,
}

/// Pearson correlation for every pair of columns, labels in matrix order.
pub fn correlation_map(m: &FeatureMatrix) -> Result<CorrelationMap, AnalysisError> {
    let n = m.n_rows;
    let p = m.n_cols();
    if n < 3 {
        return Err(AnalysisError::Insufficient { what: "rows", needed: 3, got: n });
    }

    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut norms = Vec::with_capacity(p);
    for j in 0..p {
        let col = m.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(AnalysisError::ZeroVariance(m.labels[j].clone()));
        }
        centered.push(c);
        norms.push(norm);
    }

    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        r[j][j] = 1.0;
        for k in j + 1..p {
            let dot: f64 = centered[j].iter().zip(&centered[k]).map(|(a, b)| a * b).sum();
            let val = (dot / (norms[j] * norms[k])).clamp(-1.0, 1.0);
            r[j][k] = val;
            r[k][j] = val;
        }
    }
    Ok(CorrelationMap { labels: m.labels.clone(), r })
}

/// Principal components of the standardized feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PCAModel {
    pub mean: Vec<f64>,
    /// Orthonormal loading vectors, one per component, eigenvalue-descending.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_ratio: Vec<f64>,
}

/// Eigendecomposition of the sample covariance matrix (divisor `n - 1`).
/// Component signs are fixed so the largest-magnitude loading is positive.
pub fn fit_pca(m: &FeatureMatrix) -> Result<PCAModel, AnalysisError> {
    let n = m.n_rows;
    let p = m.n_cols();
    if n < 2 || p < 2 {
        return Err(AnalysisError::Insufficient { what: "rows and columns", needed: 2, got: n.min(p) });
    }
    for i in 0..n {
        if m.row(i).iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::Numerical(format!("non-finite value in row {i}")));
        }
    }

    let mean: Vec<f64> = (0..p).map(|j| m.column(j).iter().sum::<f64>() / n as f64).collect();
    let mut x = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = m.get(i, j) - mean[j];
        }
    }
    let cov = {
        let c = x.transpose() * &x / (n as f64 - 1.0);
        (&c + c.transpose()) * 0.5
    };

    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut components = Vec::with_capacity(p);
    let mut eigenvalues = Vec::with_capacity(p);
    for &j in &order {
        eigenvalues.push(eig.eigenvalues[j].max(0.0));
        let col: DVector<f64> = eig.eigenvectors.column(j).into();
        let mut v: Vec<f64> = col.iter().copied().collect();
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        if v[lead] < 0.0 {
            for w in &mut v {
                *w = -*w;
            }
        }
        components.push(v);
    }
    let trace: f64 = eigenvalues.iter().sum();
    let explained_ratio = if trace > 0.0 {
        eigenvalues.iter().map(|&l| l / trace).collect()
    } else {
        vec![0.0; p]
    };
    Ok(PCAModel { mean, components, eigenvalues, explained_ratio })
}

/// Per-row scores on the leading components.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub scores: Vec<Vec<f64>>,
}

pub fn project(model: &PCAModel, m: &FeatureMatrix, k: usize) -> Result<Projection, AnalysisError> {
    if k > model.components.len() {
        return Err(AnalysisError::Dimension(format!(
            "requested {k} components, model has {}",
            model.components.len()
        )));
    }
    if m.n_cols() != model.mean.len() {
        return Err(AnalysisError::Dimension(format!(
            "matrix has {} columns, model expects {}",
            m.n_cols(),
            model.mean.len()
        )));
    }
    let scores = (0..m.n_rows)
        .map(|i| {
            let row = m.row(i);
            (0..k)
                .map(|c| {
                    row.iter()
                        .zip(&model.mean)
                        .zip(&model.components[c])
                        .map(|((v, mu), w)| (v - mu) * w)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(Projection { scores })
}

/// Year-windowed feature means. Empty windows are reported with `count == 0`
/// and no values so time axes remain uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub labels: Vec<String>,
    pub center_years: Vec<f64>,
    pub counts: Vec<usize>,
    pub values: Vec<Option<Vec<f64>>>,
}

/// Inclusive year window starts: from the earliest year, advancing by
/// `step`, while the start does not exceed the latest year. Each window
/// covers `[start, start + dt)`.
pub fn window_starts(min_year: i32, max_year: i32, step: i32) -> Vec<i32> {
    let mut starts = Vec::new();
    let mut y = min_year;
    while y <= max_year {
        starts.push(y);
        y += step;
    }
    starts
}

/// Sliding mean of every analysis feature (plus the segment-curvature mean
/// `smean`) over `[y, y + dt)` windows labeled by midpoint year.
pub fn sliding_window(
    records: &[InstrumentRecord],
    dt: i32,
    step: i32,
) -> Result<TimeSeries, AnalysisError> {
    if dt < 1 || step < 1 {
        return Err(AnalysisError::Numerical(format!("dt {dt} and step {step} must be >= 1")));
    }
    let dated: Vec<&InstrumentRecord> = records.iter().filter(|r| r.meta.year.is_some()).collect();
    if dated.is_empty() {
        return Err(AnalysisError::NoDates);
    }
    let years: Vec<i32> = dated.iter().map(|r| r.meta.year.unwrap()).collect();
    let min_year = *years.iter().min().unwrap();
    let max_year = *years.iter().max().unwrap();

    let mut labels = FeatureVector::analysis_labels(false);
    labels.push("smean".to_string());
    let rows: Vec<Vec<f64>> = dated
        .iter()
        .map(|r| {
            let mut v = r.features.analysis_row(false);
            v.push(r.features.s_mean());
            v
        })
        .collect();

    let mut center_years = Vec::new();
    let mut counts = Vec::new();
    let mut values = Vec::new();
    for start in window_starts(min_year, max_year, step) {
        let members: Vec<usize> = years
            .iter()
            .enumerate()
            .filter(|(_, &y)| y >= start && y < start + dt)
            .map(|(i, _)| i)
            .collect();
        center_years.push(start as f64 + dt as f64 / 2.0);
        counts.push(members.len());
        if members.is_empty() {
            values.push(None);
        } else {
            // Anchor the mean on the first member so a constant feature
            // averages to exactly that constant.
            let anchor = &rows[members[0]];
            let mut dev = vec![0.0; labels.len()];
            for &i in &members[1..] {
                for ((d, v), base) in dev.iter_mut().zip(&rows[i]).zip(anchor) {
                    *d += v - base;
                }
            }
            let mean: Vec<f64> = anchor
                .iter()
                .zip(&dev)
                .map(|(base, d)| base + d / members.len() as f64)
                .collect();
            values.push(Some(mean));
        }
    }
    Ok(TimeSeries { labels, center_years, counts, values })
}

/// Correlation matrix CSV with a label header row and column.
pub fn write_correlation_csv<W: Write>(writer: W, map: &CorrelationMap) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, ",{}", map.labels.join(","))?;
    for (label, row) in map.labels.iter().zip(&map.r) {
        let cells: Vec<String> = row.iter().map(|&v| sig9(v)).collect();
        writeln!(w, "{label},{}", cells.join(","))?;
    }
    w.flush()
}

/// Projection CSV: `id,pc1,...,pck,maker,country,year,period`.
pub fn write_projection_csv<W: Write>(
    writer: W,
    proj: &Projection,
    records: &[InstrumentRecord],
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let k = proj.scores.first().map_or(0, |s| s.len());
    let mut header = vec!["id".to_string()];
    header.extend((1..=k).map(|i| format!("pc{i}")));
    header.extend(["maker", "country", "year", "period"].map(String::from));
    w.write_record(&header)?;
    for (rec, score) in records.iter().zip(&proj.scores) {
        let mut row = vec![rec.meta.id.clone()];
        row.extend(score.iter().map(|&v| sig9(v)));
        row.push(rec.meta.maker.clone().unwrap_or_default());
        row.push(rec.meta.country.clone().unwrap_or_default());
        row.push(rec.meta.year.map(|y| y.to_string()).unwrap_or_default());
        row.push(rec.meta.period.map(|p| p.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()
}

/// Explained-variance CSV: `component,eigenvalue,explained_ratio`.
pub fn write_pca_variance_csv<W: Write>(writer: W, model: &PCAModel) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "component,eigenvalue,explained_ratio")?;
    for (i, (l, r)) in model.eigenvalues.iter().zip(&model.explained_ratio).enumerate() {
        writeln!(w, "pc{},{},{}", i + 1, sig9(*l), sig9(*r))?;
    }
    w.flush()
}

/// Format a window midpoint: integral midpoints print without a fraction.
pub fn format_center_year(c: f64) -> String {
    if c.fract() == 0.0 {
        format!("{}", c as i64)
    } else {
        format!("{c:.1}")
    }
}

/// Series CSV: `center_year,count,<feature columns>`; empty windows leave
/// the feature cells blank.
pub fn write_series_csv<W: Write>(writer: W, ts: &TimeSeries) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "center_year,count,{}", ts.labels.join(","))?;
    for i in 0..ts.center_years.len() {
        let cells = match &ts.values[i] {
            Some(v) => v.iter().map(|&x| sig9(x)).collect::<Vec<_>>().join(","),
            None => vec![String::new(); ts.labels.len()].join(","),
        };
        writeln!(w, "{},{},{}", format_center_year(ts.center_years[i]), ts.counts[i], cells)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Metadata;
    use approx::assert_relative_eq;

    fn matrix(labels: &[&str], rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::from_rows(labels.iter().map(|s| s.to_string()).collect(), rows)
    }

    #[test]
    fn perfect_linear_dependence() {
        let m = matrix(
            &["x", "y", "z"],
            &[
                vec![1.0, 2.0, -1.0],
                vec![2.0, 4.0, -2.0],
                vec![3.0, 6.0, -3.0],
                vec![4.0, 8.0, -4.0],
            ],
        );
        let c = correlation_map(&m).unwrap();
        assert_relative_eq!(c.r[0][1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.r[0][2], -1.0, epsilon = 1e-12);
        assert_relative_eq!(c.r[0][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_computed_pearson() {
        // x = (1,2,3,4), y = (1,3,2,4): r = 0.8.
        let m = matrix(
            &["x", "y"],
            &[vec![1.0, 1.0], vec![2.0, 3.0], vec![3.0, 2.0], vec![4.0, 4.0]],
        );
        let c = correlation_map(&m).unwrap();
        assert_relative_eq!(c.r[0][1], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn zero_variance_column_named() {
        let m = matrix(
            &["x", "flat"],
            &[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
        );
        match correlation_map(&m) {
            Err(AnalysisError::ZeroVariance(name)) => assert_eq!(name, "flat"),
            other => panic!("expected ZeroVariance, got {other:?}"),
        }
    }

    #[test]
    fn correlation_invariant_under_affine_rescaling() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![t.sin(), 0.3 * t + t.cos(), (t * 0.7).sin() * 2.0]
            })
            .collect();
        let rescaled: Vec<Vec<f64>> =
            rows.iter().map(|r| vec![5.0 * r[0] + 2.0, 0.1 * r[1] - 7.0, 3.0 * r[2]]).collect();
        let a = correlation_map(&matrix(&["u", "v", "w"], &rows)).unwrap();
        let b = correlation_map(&matrix(&["u", "v", "w"], &rescaled)).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_relative_eq!(a.r[j][k], b.r[j][k], epsilon = 1e-12);
            }
        }
    }

    fn standardize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = rows.len();
        let p = rows[0].len();
        let mut out = rows.to_vec();
        for j in 0..p {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
            let std = var.sqrt();
            for r in &mut out {
                r[j] = (r[j] - mean) / std;
            }
        }
        out
    }

    #[test]
    fn rank_one_line_explains_everything() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let m = matrix(&["x", "y"], &standardize(&rows));
        let model = fit_pca(&m).unwrap();
        assert!((model.explained_ratio[0] - 1.0).abs() < 1e-9);
        assert!(model.eigenvalues[1].abs() < 1e-9);
    }

    #[test]
    fn three_point_dataset_matches_closed_form() {
        // {(0,0),(1,0),(0,1)} standardized: covariance [[1.5, -0.75], [-0.75, 1.5]] / ... ;
        // verified against the quadratic-formula eigenvalues of the 2x2.
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let std_rows = standardize(&rows);
        let m = matrix(&["x", "y"], &std_rows);
        let model = fit_pca(&m).unwrap();

        // Closed-form: sample covariance of the standardized data.
        let n = 3.0;
        let mean: Vec<f64> = (0..2)
            .map(|j| std_rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let mut cov = [[0.0; 2]; 2];
        for r in &std_rows {
            for j in 0..2 {
                for k in 0..2 {
                    cov[j][k] += (r[j] - mean[j]) * (r[k] - mean[k]) / (n - 1.0);
                }
            }
        }
        let tr = cov[0][0] + cov[1][1];
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
        assert!((model.eigenvalues[0] - l1).abs() < 1e-9);
        assert!((model.eigenvalues[1] - l2).abs() < 1e-9);
    }

    #[test]
    fn non_finite_input_is_a_numerical_error() {
        let m = matrix(&["x", "y"], &[vec![0.0, 1.0], vec![f64::NAN, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(fit_pca(&m), Err(AnalysisError::Numerical(_))));
    }

    #[test]
    fn isotropic_gaussian_splits_variance_evenly() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12345);
        let gauss = |rng: &mut rand_chacha::ChaCha8Rng| {
            // Box-Muller.
            let u1: f64 = rng.gen::<f64>().max(1e-12);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let rows: Vec<Vec<f64>> = (0..10000).map(|_| vec![gauss(&mut rng), gauss(&mut rng)]).collect();
        let model = fit_pca(&matrix(&["x", "y"], &rows)).unwrap();
        assert!((model.explained_ratio[0] - 0.5).abs() < 0.03);
        assert!((model.explained_ratio[1] - 0.5).abs() < 0.03);
    }

    #[test]
    fn components_are_orthonormal_and_reconstruct_covariance() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                let t: f64 = rng.gen_range(-1.0..1.0);
                let u: f64 = rng.gen_range(-0.2..0.2);
                let v: f64 = rng.gen_range(-0.05..0.05);
                vec![t + u, t - u + v, 0.5 * t + v, u + 0.3 * v]
            })
            .collect();
        let m = matrix(&["p", "q", "r", "s"], &rows);
        let model = fit_pca(&m).unwrap();
        let p = 4;
        for a in 0..p {
            for b in 0..p {
                let dot: f64 =
                    model.components[a].iter().zip(&model.components[b]).map(|(x, y)| x * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9, "C{a}.C{b} = {dot}");
            }
        }
        // Covariance reconstruction within 1e-6 relative Frobenius.
        let n = m.n_rows as f64;
        let mut cov = vec![vec![0.0; p]; p];
        for i in 0..m.n_rows {
            let row = m.row(i);
            for a in 0..p {
                for b in 0..p {
                    cov[a][b] += (row[a] - model.mean[a]) * (row[b] - model.mean[b]) / (n - 1.0);
                }
            }
        }
        let mut err = 0.0;
        let mut norm = 0.0;
        for a in 0..p {
            for b in 0..p {
                let rec: f64 = (0..p)
                    .map(|c| model.eigenvalues[c] * model.components[c][a] * model.components[c][b])
                    .sum();
                err += (rec - cov[a][b]).powi(2);
                norm += cov[a][b].powi(2);
            }
        }
        assert!(err.sqrt() / norm.sqrt() < 1e-6);
    }

    #[test]
    fn score_covariance_is_eigenvalue_diagonal() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| {
                let t: f64 = rng.gen_range(-2.0..2.0);
                vec![t + rng.gen_range(-0.1..0.1), -t + rng.gen_range(-0.1..0.1), rng.gen_range(-0.3..0.3)]
            })
            .collect();
        let m = matrix(&["x", "y", "z"], &rows);
        let model = fit_pca(&m).unwrap();
        let k = 2;
        let proj = project(&model, &m, k).unwrap();
        let n = m.n_rows as f64;
        for a in 0..k {
            for b in 0..k {
                let mean_a: f64 = proj.scores.iter().map(|s| s[a]).sum::<f64>() / n;
                let mean_b: f64 = proj.scores.iter().map(|s| s[b]).sum::<f64>() / n;
                let cov: f64 = proj
                    .scores
                    .iter()
                    .map(|s| (s[a] - mean_a) * (s[b] - mean_b))
                    .sum::<f64>()
                    / (n - 1.0);
                let expect = if a == b { model.eigenvalues[a] } else { 0.0 };
                assert!((cov - expect).abs() < 1e-6, "score cov[{a}][{b}] = {cov}, want {expect}");
            }
        }
    }

    #[test]
    fn full_rank_projection_is_an_isometry() {
        let rows = vec![
            vec![0.1, -0.4, 0.9],
            vec![1.2, 0.3, -0.2],
            vec![-0.7, 0.8, 0.1],
            vec![0.4, -1.1, 0.5],
            vec![0.9, 0.2, -0.8],
        ];
        let m = matrix(&["x", "y", "z"], &rows);
        let model = fit_pca(&m).unwrap();
        let proj = project(&model, &m, 3).unwrap();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let d_data: f64 = (0..3)
                    .map(|c| (rows[i][c] - rows[j][c]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let d_score: f64 = (0..3)
                    .map(|c| (proj.scores[i][c] - proj.scores[j][c]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!((d_data - d_score).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_one_scores_are_signed_line_distances() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64]).collect();
        let std_rows = standardize(&rows);
        let m = matrix(&["x", "y"], &std_rows);
        let model = fit_pca(&m).unwrap();
        let proj = project(&model, &m, 1).unwrap();
        let dir = 1.0 / 2.0_f64.sqrt();
        for (i, r) in std_rows.iter().enumerate() {
            let centered = [r[0] - model.mean[0], r[1] - model.mean[1]];
            let expect = centered[0] * dir + centered[1] * dir;
            assert!((proj.scores[i][0] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_dimension_checks() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        let m = matrix(&["x", "y"], &rows);
        let model = fit_pca(&m).unwrap();
        assert!(matches!(project(&model, &m, 3), Err(AnalysisError::Dimension(_))));
        let wider = matrix(&["x", "y", "z"], &[vec![0.0; 3], vec![1.0; 3]]);
        assert!(matches!(project(&model, &wider, 1), Err(AnalysisError::Dimension(_))));
    }

    fn dated_record(id: &str, year: Option<i32>, value: f64) -> InstrumentRecord {
        InstrumentRecord {
            meta: Metadata { id: id.into(), maker: None, country: None, year, period: None },
            features: FeatureVector {
                a: value,
                b: value,
                c: value,
                d: value,
                e: value,
                f: value,
                h1: value,
                h2: value,
                ell: value,
                total: 1000.0,
                s: [value; 6],
            },
        }
    }

    #[test]
    fn two_records_average_in_shared_window() {
        let recs =
            vec![dated_record("a", Some(1600), 1.0), dated_record("b", Some(1610), 3.0)];
        let ts = sliding_window(&recs, 20, 1).unwrap();
        assert_eq!(ts.center_years[0], 1610.0);
        assert_eq!(ts.counts[0], 2);
        let v = ts.values[0].as_ref().unwrap();
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-12);
        // Window starting 1610 holds only the second record.
        let i = ts.center_years.iter().position(|&c| c == 1620.0).unwrap();
        assert_eq!(ts.counts[i], 1);
        assert_relative_eq!(ts.values[i].as_ref().unwrap()[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_record_fills_its_windows() {
        let recs = vec![dated_record("solo", Some(1700), 0.25)];
        let ts = sliding_window(&recs, 20, 1).unwrap();
        assert_eq!(ts.center_years.len(), 1);
        assert_eq!(ts.counts[0], 1);
        assert_relative_eq!(ts.values[0].as_ref().unwrap()[0], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn undated_records_are_excluded() {
        let recs = vec![
            dated_record("a", Some(1700), 1.0),
            dated_record("b", None, 99.0),
            dated_record("c", Some(1705), 3.0),
        ];
        let ts = sliding_window(&recs, 20, 20).unwrap();
        assert_eq!(ts.counts.iter().sum::<usize>(), 2);
        assert_relative_eq!(ts.values[0].as_ref().unwrap()[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn no_dates_is_an_error() {
        let recs = vec![dated_record("a", None, 1.0)];
        assert!(matches!(sliding_window(&recs, 20, 1), Err(AnalysisError::NoDates)));
    }

    #[test]
    fn partition_when_step_equals_dt() {
        let recs: Vec<InstrumentRecord> = (0..37)
            .map(|i| dated_record(&format!("r{i}"), Some(1600 + 7 * i), 1.0))
            .collect();
        let ts = sliding_window(&recs, 20, 20).unwrap();
        assert_eq!(ts.counts.iter().sum::<usize>(), 37, "windows must partition dated records");
    }

    #[test]
    fn constant_feature_stays_constant() {
        let recs: Vec<InstrumentRecord> = (0..10)
            .map(|i| dated_record(&format!("r{i}"), Some(1650 + 13 * i), 0.21))
            .collect();
        let ts = sliding_window(&recs, 20, 1).unwrap();
        for (count, values) in ts.counts.iter().zip(&ts.values) {
            if *count > 0 {
                assert_relative_eq!(values.as_ref().unwrap()[0], 0.21, epsilon = 1e-12);
            } else {
                assert!(values.is_none());
            }
        }
        // Midpoints advance by the step.
        for w in ts.center_years.windows(2) {
            assert_relative_eq!(w[1] - w[0], 1.0, epsilon = 1e-12);
        }
    }
}
