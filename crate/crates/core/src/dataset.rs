//! Labeled feature samples and their delimited-text file format.
//!
//! Header: `snapshot,community_id,<15 feature names>,etype,extent`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolution::EvolutionType;
use crate::features::{FeatureVector, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub snapshot: usize,
    pub community: u64,
    pub features: FeatureVector,
    pub etype: EvolutionType,
    pub extent: i64,
}

pub fn header() -> Vec<String> {
    let mut h = vec!["snapshot".to_owned(), "community_id".to_owned()];
    h.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    h.push("etype".to_owned());
    h.push("extent".to_owned());
    h
}

pub fn write_dataset<W: Write>(out: W, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for s in samples {
        let mut row = vec![s.snapshot.to_string(), s.community.to_string()];
        row.extend(s.features.0.iter().map(|x| x.to_string()));
        row.push(s.etype.to_string());
        row.push(s.extent.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<dataset>", e))?;
    Ok(())
}

pub fn read_dataset<R: Read>(input: R) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_reader(input);
    let expected = header();
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != expected {
        return Err(Error::parse(
            1,
            format!("unexpected dataset header: {}", found.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize| -> Result<f64> {
            field(k)
                .parse()
                .map_err(|_| Error::parse(line, format!("bad number `{}`", field(k))))
        };
        let mut features = [0.0; N_FEATURES];
        for (j, f) in features.iter_mut().enumerate() {
            *f = num(2 + j)?;
        }
        out.push(Sample {
            snapshot: field(0)
                .parse()
                .map_err(|_| Error::parse(line, "bad snapshot index"))?,
            community: field(1)
                .parse()
                .map_err(|_| Error::parse(line, "bad community id"))?,
            features: FeatureVector(features),
            etype: field(2 + N_FEATURES)
                .parse()
                .map_err(|e: Error| Error::parse(line, e.to_string()))?,
            extent: field(3 + N_FEATURES)
                .parse()
                .map_err(|_| Error::parse(line, "bad extent"))?,
        });
    }
    Ok(out)
}

pub fn save_dataset(path: &Path, samples: &[Sample]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(std::io::BufWriter::new(file), samples)
}

pub fn load_dataset(path: &Path) -> Result<Vec<Sample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(file))
}

/// Per-type counts in [`EvolutionType::TRAINABLE`] order.
pub fn class_counts(samples: &[Sample]) -> [usize; 6] {
    let mut counts = [0; 6];
    for s in samples {
        if let Some(i) = s.etype.class_index() {
            counts[i] += 1;
        }
    }
    counts
}
