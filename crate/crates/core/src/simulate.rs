//! Finite-count measurement simulation.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pom::{probabilities, Pom, PomKind, OUTCOMES};
use crate::rng::{rng_from_seed, Rng};
use crate::states::DensityMatrix;

/// Probabilities below this are rejected as invalid input.
pub const NEGATIVE_PROBABILITY_LIMIT: f64 = -1e-9;
/// Above this many clicks the alias table replaces cumulative search.
pub const ALIAS_THRESHOLD: u64 = 1000;

/// Detector counts of one simulated experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub n: u64,
    pub counts: [u64; OUTCOMES],
    pub pom_kind: PomKind,
    pub seed: u64,
}

/// Relative frequencies `counts / N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyVector(pub [f64; OUTCOMES]);

impl FrequencyVector {
    pub fn values(&self) -> &[f64; OUTCOMES] {
        &self.0
    }
}

fn sanitize(probs: &[f64; OUTCOMES]) -> Result<[f64; OUTCOMES]> {
    let mut out = *probs;
    for (index, p) in out.iter_mut().enumerate() {
        if !p.is_finite() || *p < NEGATIVE_PROBABILITY_LIMIT {
            return Err(Error::NegativeProbability { index, value: *p });
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidRecord("all outcome probabilities vanish".into()));
    }
    out.iter_mut().for_each(|p| *p /= total);
    Ok(out)
}

/// Multinomial counts from `n` independent categorical draws.
pub fn sample_counts(probs: &[f64; OUTCOMES], n: u64, rng: &mut Rng) -> Result<[u64; OUTCOMES]> {
    let probs = sanitize(probs)?;
    let mut counts = [0u64; OUTCOMES];
    if n > ALIAS_THRESHOLD {
        let table =
            WeightedAliasIndex::new(probs.to_vec()).map_err(|e| Error::InvalidRecord(format!("alias table: {e}")))?;
        for _ in 0..n {
            counts[table.sample(rng)] += 1;
        }
    } else {
        let index = WeightedIndex::new(probs).map_err(|e| Error::InvalidRecord(format!("weights: {e}")))?;
        for _ in 0..n {
            counts[index.sample(rng)] += 1;
        }
    }
    Ok(counts)
}

/// Simulates `n` clicks of `pom` on `rho`, seeded by `seed`.
pub fn simulate_clicks(pom: &Pom, rho: &DensityMatrix, n: u64, seed: u64) -> Result<ClickRecord> {
    if n == 0 {
        return Err(Error::InvalidRecord("N must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let counts = sample_counts(&probabilities(pom, rho), n, &mut rng)?;
    Ok(ClickRecord { n, counts, pom_kind: pom.kind(), seed })
}

pub fn frequencies(record: &ClickRecord) -> Result<FrequencyVector> {
    if record.n == 0 {
        return Err(Error::InvalidRecord("N must be positive".into()));
    }
    let total: u64 = record.counts.iter().sum();
    if total != record.n {
        return Err(Error::InvalidRecord(format!("counts sum to {total}, expected {}", record.n)));
    }
    let n = record.n as f64;
    Ok(FrequencyVector(record.counts.map(|k| k as f64 / n)))
}

impl ClickRecord {
    pub fn csv_header() -> Vec<String> {
        let mut header = vec!["pom_kind".to_string(), "seed".into(), "N".into()];
        header.extend((0..OUTCOMES).map(|j| format!("c{}{}", j / 4, j % 4)));
        header
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![self.pom_kind.to_string(), self.seed.to_string(), self.n.to_string()];
        row.extend(self.counts.iter().map(u64::to_string));
        row
    }

    pub fn from_csv_row(row: &csv::StringRecord) -> Result<Self> {
        let bad = |what: &str| Error::InvalidRecord(format!("bad CSV field `{what}`"));
        if row.len() != 3 + OUTCOMES {
            return Err(Error::InvalidRecord(format!("expected {} fields, got {}", 3 + OUTCOMES, row.len())));
        }
        let pom_kind = row[0].parse()?;
        let seed = row[1].parse().map_err(|_| bad("seed"))?;
        let n = row[2].parse().map_err(|_| bad("N"))?;
        let mut counts = [0u64; OUTCOMES];
        for (j, slot) in counts.iter_mut().enumerate() {
            *slot = row[3 + j].parse().map_err(|_| bad("count"))?;
        }
        let record = ClickRecord { n, counts, pom_kind, seed };
        frequencies(&record)?;
        Ok(record)
    }
}

pub fn write_click_csv<W: Write>(records: &[ClickRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ClickRecord::csv_header())?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
