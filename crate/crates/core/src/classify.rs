//! Random-forest classification of instrument attributes.
//!
//! Plain CART trees over bootstrap samples: Gini-impurity splits, a uniform
//! random subset of candidate features per node (default `ceil(sqrt(p))`),
//! and midpoint thresholds between sorted distinct values. Every random
//! choice derives from the seed (one RNG stream per tree, one for the
//! train/test split), so a run is reproducible bit for bit.

use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fmt::sig9;
use crate::measures::FeatureMatrix;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("need at least two classes with two instances each")]
    DegenerateLabels,
    #[error("stratified split failed: {0}")]
    Stratification(String),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ClassifyError {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifyError::DegenerateLabels => "DegenerateLabelsError",
            ClassifyError::Stratification(_) => "StratificationError",
            ClassifyError::ModelFormat(_) => "ModelFormatError",
            ClassifyError::Io(_) => "IoError",
        }
    }
}

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Candidate features per split; `None` = `ceil(sqrt(p))`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            seed: 0,
            train_fraction: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// A trained forest plus everything needed to reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    pub classes: Vec<String>,
    pub feature_labels: Vec<String>,
    /// Mean impurity decrease per feature, normalized to sum 1 when any
    /// split occurred.
    pub importances: Vec<f64>,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct TreeBuilder<'a> {
    data: &'a FeatureMatrix,
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    n_train: f64,
}

impl<'a> TreeBuilder<'a> {
    fn majority(&self, rows: &[usize]) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in rows {
            counts[self.y[r]] += 1;
        }
        counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .unwrap_or(0)
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in &rows {
            counts[self.y[r]] += 1;
        }
        let node_gini = gini(&counts, rows.len());
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            let class = self.majority(&rows);
            self.nodes.push(Node::Leaf { class });
            return self.nodes.len() - 1;
        }

        // Uniformly sample distinct candidate features (partial Fisher-Yates).
        let p = self.data.n_cols();
        let mut pool: Vec<usize> = (0..p).collect();
        for i in 0..self.mtry.min(p) {
            let j = rng.gen_range(i..p);
            pool.swap(i, j);
        }
        let candidates = &pool[..self.mtry.min(p)];

        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for &feat in candidates {
            scratch.clear();
            scratch.extend(rows.iter().map(|&r| (self.data.get(r, feat), self.y[r])));
            scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

            let total = scratch.len();
            let mut left_counts = vec![0usize; self.n_classes];
            let mut right_counts = counts.clone();
            for i in 0..total - 1 {
                let (v, cls) = scratch[i];
                left_counts[cls] += 1;
                right_counts[cls] -= 1;
                let next_v = scratch[i + 1].0;
                if v == next_v {
                    continue; // threshold must separate distinct values
                }
                let n_left = i + 1;
                let n_right = total - n_left;
                if n_left < self.min_leaf || n_right < self.min_leaf {
                    continue;
                }
                let w = (n_left as f64 * gini(&left_counts, n_left)
                    + n_right as f64 * gini(&right_counts, n_right))
                    / total as f64;
                let threshold = 0.5 * (v + next_v);
                if best.is_none_or(|(bw, _, _)| w < bw) {
                    best = Some((w, feat, threshold));
                }
            }
        }

        match best {
            Some((w, feature, threshold)) if w < node_gini - 1e-12 => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| self.data.get(r, feature) <= threshold);
                self.importance[feature] += rows.len() as f64 / self.n_train * (node_gini - w);
                let slot = self.nodes.len();
                self.nodes.push(Node::Leaf { class: 0 }); // placeholder
                let left = self.build(left_rows, depth + 1, rng);
                let right = self.build(right_rows, depth + 1, rng);
                self.nodes[slot] = Node::Split { feature, threshold, left, right };
                slot
            }
            _ => {
                let class = self.majority(&rows);
                self.nodes.push(Node::Leaf { class });
                self.nodes.len() - 1
            }
        }
    }
}

fn class_index(classes: &[String], label: &str) -> usize {
    classes.iter().position(|c| c == label).expect("label in class list")
}

fn sorted_classes(labels: &[String]) -> Vec<String> {
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    classes
}

/// Train a forest on the full matrix. Labels align with matrix rows.
pub fn train_forest(
    m: &FeatureMatrix,
    labels: &[String],
    params: &ForestParams,
) -> Result<Forest, ClassifyError> {
    assert_eq!(labels.len(), m.n_rows, "one label per row");
    let classes = sorted_classes(labels);
    if classes.len() < 2 {
        return Err(ClassifyError::DegenerateLabels);
    }
    let y: Vec<usize> = labels.iter().map(|l| class_index(&classes, l)).collect();
    let n = m.n_rows;
    let p = m.n_cols();
    let mtry = params.features_per_split.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize).clamp(1, p.max(1));

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut importances = vec![0.0; p];
    for t in 0..params.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(t as u64 + 1); // stream 0 is reserved for the split
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut builder = TreeBuilder {
            data: m,
            y: &y,
            n_classes: classes.len(),
            mtry,
            max_depth: params.max_depth.unwrap_or(usize::MAX),
            min_leaf: params.min_leaf.max(1),
            nodes: Vec::new(),
            importance: vec![0.0; p],
            n_train: n as f64,
        };
        builder.build(rows, 0, &mut rng);
        trees.push(Tree { nodes: builder.nodes });
        for (acc, v) in importances.iter_mut().zip(&builder.importance) {
            *acc += v / params.n_trees as f64;
        }
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in &mut importances {
            *v /= total;
        }
    }
    Ok(Forest {
        trees,
        classes,
        feature_labels: m.labels.clone(),
        importances,
    })
}

impl Forest {
    /// Majority vote over trees; ties resolve to the lexicographically
    /// first class.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.classes.len()];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .unwrap()
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Vec<usize> {
        (0..m.n_rows).map(|i| self.predict_row(m.row(i))).collect()
    }

    /// Line-oriented text serialization with a versioned header.
    pub fn save<W: Write>(&self, writer: W) -> Result<(), ClassifyError> {
        let mut w = std::io::BufWriter::new(writer);
        writeln!(w, "morpho-forest v1")?;
        writeln!(w, "classes\t{}", self.classes.join("\t"))?;
        writeln!(w, "features\t{}", self.feature_labels.join("\t"))?;
        let imp: Vec<String> = self.importances.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "importances\t{}", imp.join("\t"))?;
        writeln!(w, "trees\t{}", self.trees.len())?;
        for tree in &self.trees {
            writeln!(w, "tree\t{}", tree.nodes.len())?;
            for node in &tree.nodes {
                match node {
                    Node::Leaf { class } => writeln!(w, "leaf\t{class}")?,
                    Node::Split { feature, threshold, left, right } => {
                        writeln!(w, "split\t{feature}\t{threshold}\t{left}\t{right}")?
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load<R: std::io::Read>(reader: R) -> Result<Forest, ClassifyError> {
        let mut lines = std::io::BufReader::new(reader).lines();
        let mut next = |what: &str| -> Result<String, ClassifyError> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| ClassifyError::ModelFormat(format!("missing {what}")))
        };
        if next("header")? != "morpho-forest v1" {
            return Err(ClassifyError::ModelFormat("unknown header".into()));
        }
        let tail = |line: String, key: &str| -> Result<Vec<String>, ClassifyError> {
            let mut it = line.split('\t');
            if it.next() != Some(key) {
                return Err(ClassifyError::ModelFormat(format!("expected `{key}` line")));
            }
            Ok(it.map(|s| s.to_string()).collect())
        };
        let classes = tail(next("classes")?, "classes")?;
        let feature_labels = tail(next("features")?, "features")?;
        let importances: Vec<f64> = tail(next("importances")?, "importances")?
            .iter()
            .map(|s| s.parse().map_err(|_| ClassifyError::ModelFormat("bad importance".into())))
            .collect::<Result<_, _>>()?;
        let n_trees: usize = tail(next("trees")?, "trees")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ClassifyError::ModelFormat("bad tree count".into()))?;

        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let n_nodes: usize = tail(next("tree")?, "tree")?
                .first()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ClassifyError::ModelFormat("bad node count".into()))?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let line = next("node")?;
                let parts: Vec<&str> = line.split('\t').collect();
                match parts.as_slice() {
                    ["leaf", class] => nodes.push(Node::Leaf {
                        class: class
                            .parse()
                            .map_err(|_| ClassifyError::ModelFormat("bad leaf".into()))?,
                    }),
                    ["split", feature, threshold, left, right] => nodes.push(Node::Split {
                        feature: feature
                            .parse()
                            .map_err(|_| ClassifyError::ModelFormat("bad split".into()))?,
                        threshold: threshold
                            .parse()
                            .map_err(|_| ClassifyError::ModelFormat("bad threshold".into()))?,
                        left: left.parse().map_err(|_| ClassifyError::ModelFormat("bad split".into()))?,
                        right: right
                            .parse()
                            .map_err(|_| ClassifyError::ModelFormat("bad split".into()))?,
                    }),
                    _ => return Err(ClassifyError::ModelFormat(format!("bad node line `{line}`"))),
                }
            }
            trees.push(Tree { nodes });
        }
        Ok(Forest { trees, classes, feature_labels, importances })
    }
}

/// Held-out evaluation of one forest run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub classes: Vec<String>,
    pub accuracy: f64,
    /// Largest class prior over the full labeled subset: the accuracy of
    /// always answering the most frequent class.
    pub chance: f64,
    /// `confusion[true][predicted]` counts over the test split.
    pub confusion: Vec<Vec<usize>>,
    /// Per-class recall; NaN for classes absent from the test split.
    pub per_class_recall: Vec<f64>,
    pub feature_labels: Vec<String>,
    pub feature_importance: Vec<f64>,
    pub n_train: usize,
    pub n_test: usize,
}

/// Pool classes rarer than `min_count` into a single `Other` label.
pub fn pool_rare_labels(labels: &[String], min_count: usize) -> Vec<String> {
    let classes = sorted_classes(labels);
    let counts: Vec<usize> =
        classes.iter().map(|c| labels.iter().filter(|l| *l == c).count()).collect();
    labels
        .iter()
        .map(|l| {
            let idx = class_index(&classes, l);
            if counts[idx] < min_count {
                "Other".to_string()
            } else {
                l.clone()
            }
        })
        .collect()
}

/// Seeded stratified train/test split, a forest fit on the train rows, and
/// held-out metrics.
pub fn evaluate(
    m: &FeatureMatrix,
    labels: &[String],
    params: &ForestParams,
) -> Result<EvaluationReport, ClassifyError> {
    assert_eq!(labels.len(), m.n_rows, "one label per row");
    let classes = sorted_classes(labels);
    if classes.len() < 2 {
        return Err(ClassifyError::DegenerateLabels);
    }
    if !(params.train_fraction > 0.0 && params.train_fraction < 1.0) {
        return Err(ClassifyError::Stratification(format!(
            "train fraction {} outside (0, 1)",
            params.train_fraction
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(0);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for class in &classes {
        let mut members: Vec<usize> =
            (0..labels.len()).filter(|&i| &labels[i] == class).collect();
        // Fisher-Yates shuffle.
        for i in (1..members.len()).rev() {
            let j = rng.gen_range(0..=i);
            members.swap(i, j);
        }
        let n_train = (params.train_fraction * members.len() as f64).round() as usize;
        if n_train == 0 {
            return Err(ClassifyError::Stratification(format!(
                "class `{class}` would have no training instances"
            )));
        }
        train_rows.extend_from_slice(&members[..n_train]);
        test_rows.extend_from_slice(&members[n_train..]);
    }
    if test_rows.is_empty() {
        return Err(ClassifyError::Stratification("empty test split".into()));
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();

    let subset = |rows: &[usize]| -> (FeatureMatrix, Vec<String>) {
        let data: Vec<Vec<f64>> = rows.iter().map(|&r| m.row(r).to_vec()).collect();
        let lab: Vec<String> = rows.iter().map(|&r| labels[r].clone()).collect();
        (FeatureMatrix::from_rows(m.labels.clone(), &data), lab)
    };
    let (train_m, train_labels) = subset(&train_rows);
    let (test_m, test_labels) = subset(&test_rows);

    let forest = train_forest(&train_m, &train_labels, params)?;

    let predictions = forest.predict(&test_m);
    let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
    let mut correct = 0usize;
    for (i, &pred) in predictions.iter().enumerate() {
        let truth = class_index(&classes, &test_labels[i]);
        // The forest's class order matches `classes` (both sorted).
        confusion[truth][pred] += 1;
        if truth == pred {
            correct += 1;
        }
    }
    let per_class_recall: Vec<f64> = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: usize = row.iter().sum();
            if total == 0 {
                f64::NAN
            } else {
                row[i] as f64 / total as f64
            }
        })
        .collect();

    let max_prior = classes
        .iter()
        .map(|c| labels.iter().filter(|l| *l == c).count())
        .max()
        .unwrap_or(0) as f64
        / labels.len() as f64;

    Ok(EvaluationReport {
        classes,
        accuracy: correct as f64 / test_rows.len() as f64,
        chance: max_prior,
        confusion,
        per_class_recall,
        feature_labels: forest.feature_labels.clone(),
        feature_importance: forest.importances.clone(),
        n_train: train_rows.len(),
        n_test: test_rows.len(),
    })
}

/// Confusion matrix CSV with class labels on both axes.
pub fn write_confusion_csv<W: Write>(writer: W, report: &EvaluationReport) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, ",{}", report.classes.join(","))?;
    for (label, row) in report.classes.iter().zip(&report.confusion) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{label},{}", cells.join(","))?;
    }
    w.flush()
}

/// Plain-text summary: accuracy, chance and per-class recall.
pub fn write_summary<W: Write>(writer: W, target: &str, report: &EvaluationReport) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "target={target}")?;
    writeln!(w, "n_train={} n_test={}", report.n_train, report.n_test)?;
    writeln!(w, "accuracy={}", sig9(report.accuracy))?;
    writeln!(w, "chance={}", sig9(report.chance))?;
    for (class, recall) in report.classes.iter().zip(&report.per_class_recall) {
        if recall.is_nan() {
            writeln!(w, "recall_{class}=")?;
        } else {
            writeln!(w, "recall_{class}={}", sig9(*recall))?;
        }
    }
    w.flush()
}

/// Feature-importance CSV.
pub fn write_importance_csv<W: Write>(writer: W, report: &EvaluationReport) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "feature,importance")?;
    for (label, value) in report.feature_labels.iter().zip(&report.feature_importance) {
        writeln!(w, "{label},{}", sig9(*value))?;
    }
    w.flush()
}
