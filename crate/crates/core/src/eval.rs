//! Train/test splitting, classification and regression metrics, and plot data.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionType;

const N_TYPES: usize = EvolutionType::TRAINABLE.len();

/// Shuffle under `seed` and cut into `train : test` proportions. The test
/// share is `round(n * test / (train + test))`.
pub fn split<T: Clone>(items: &[T], ratio: (u32, u32), seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if items.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "cannot split {} samples",
            items.len()
        )));
    }
    let (a, b) = ratio;
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter(format!("bad split ratio {a}:{b}")));
    }
    let n = items.len();
    let n_test = ((n as f64) * b as f64 / (a + b) as f64).round() as usize;
    let n_test = n_test.clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = order.split_at(n - n_test);
    Ok((
        train.iter().map(|&i| items[i].clone()).collect(),
        test.iter().map(|&i| items[i].clone()).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub per_class: BTreeMap<EvolutionType, ClassMetrics>,
    /// `confusion[true][predicted]` in [`EvolutionType::TRAINABLE`] order.
    pub confusion: [[usize; N_TYPES]; N_TYPES],
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn classification_report(
    truth: &[EvolutionType],
    predicted: &[EvolutionType],
) -> Result<ClassificationReport> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    let index = |t: EvolutionType| {
        t.class_index().ok_or_else(|| {
            Error::InvalidParameter(format!("`{t}` is not a predictable evolution type"))
        })
    };
    let mut confusion = [[0usize; N_TYPES]; N_TYPES];
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[index(t)?][index(p)?] += 1;
    }

    let total = truth.len();
    let correct: usize = (0..N_TYPES).map(|i| confusion[i][i]).sum();
    let mut per_class = BTreeMap::new();
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    for (i, &t) in EvolutionType::TRAINABLE.iter().enumerate() {
        let support: usize = confusion[i].iter().sum();
        let predicted_as: usize = (0..N_TYPES).map(|r| confusion[r][i]).sum();
        let tp = confusion[i][i];
        let precision = ratio(tp, predicted_as);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let w = support as f64 / total as f64;
        wp += w * precision;
        wr += w * recall;
        wf += w * f1;
        per_class.insert(
            t,
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            },
        );
    }

    Ok(ClassificationReport {
        accuracy: ratio(correct, total),
        weighted_precision: wp,
        weighted_recall: wr,
        weighted_f1: wf,
        per_class,
        confusion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub mape_percent: f64,
    pub n_evaluated: usize,
    pub n_excluded_zero_target: usize,
    pub truth: Vec<f64>,
    pub predicted: Vec<f64>,
}

/// Mean absolute percentage error over samples with a nonzero true extent.
pub fn mape(truth: &[f64], predicted: &[f64]) -> Result<RegressionReport> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let terms: Vec<f64> = truth
        .iter()
        .zip(predicted)
        .filter(|(&y, _)| y != 0.0)
        .map(|(&y, &p)| ((y - p) / y).abs())
        .collect();
    if terms.is_empty() {
        return Err(Error::MapeUndefined);
    }
    Ok(RegressionReport {
        mape_percent: 100.0 * terms.iter().sum::<f64>() / terms.len() as f64,
        n_evaluated: terms.len(),
        n_excluded_zero_target: truth.len() - terms.len(),
        truth: truth.to_vec(),
        predicted: predicted.to_vec(),
    })
}

/// Everything `evaluate` reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_samples: usize,
    pub classification: ClassificationReport,
    pub regression: Option<RegressionReport>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Two-column `true,predicted` rows in test order.
pub fn write_plot_data<W: Write>(out: W, report: &RegressionReport) -> Result<()> {
    if report.truth.is_empty() {
        return Err(Error::EmptyInput("plot series"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["true", "predicted"])?;
    for (t, p) in report.truth.iter().zip(&report.predicted) {
        w.write_record([t.to_string(), p.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<plot data>", e))?;
    Ok(())
}

pub fn read_plot_data<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(input);
    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .unwrap_or_default()
                .parse()
                .map_err(|_| Error::parse(i + 2, "bad number"))
        };
        truth.push(num(0)?);
        predicted.push(num(1)?);
    }
    Ok((truth, predicted))
}

/// Real (blue) and predicted (orange) extents as overlaid polylines.
pub fn render_svg(report: &RegressionReport) -> String {
    const W: f64 = 900.0;
    const H: f64 = 360.0;
    const PAD: f64 = 30.0;
    let n = report.truth.len();
    let (lo, hi) = report
        .truth
        .iter()
        .chain(&report.predicted)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_at = |i: usize| PAD + (W - 2.0 * PAD) * i as f64 / (n.max(2) - 1) as f64;
    let y_at = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / span;
    let line = |series: &[f64], colour: &str| {
        let pts: Vec<String> = series
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_at(i), y_at(v)))
            .collect();
        format!(
            "  <polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        )
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "  <text x=\"{PAD}\" y=\"18\" font-size=\"12\">real (blue) vs predicted (orange) extent, MAPE {:.4}%</text>\n",
        report.mape_percent
    ));
    svg.push_str(&line(&report.truth, "#1f77b4"));
    svg.push_str(&line(&report.predicted, "#ff7f0e"));
    svg.push_str("</svg>\n");
    svg
}

/// Writes `path` (CSV) and, when `svg` is set, a chart next to it.
pub fn emit_plot_data(report: &RegressionReport, path: &Path, svg: Option<&Path>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_plot_data(std::io::BufWriter::new(file), report)?;
    if let Some(svg_path) = svg {
        std::fs::write(svg_path, render_svg(report)).map_err(|e| Error::io(svg_path, e))?;
    }
    Ok(())
}
