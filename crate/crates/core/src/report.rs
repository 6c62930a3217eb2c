//! CSV and image output.

use std::io::Write;

use crate::enn::{classify, EpochMetrics};
use crate::error::{Error, Result};
use crate::sim::{SerPoint, SplitEpochMetrics, SweepPoint};

pub const METRICS_HEADER: [&str; 6] = ["epoch", "accuracy", "mse", "fwd_ser", "bwd_ser", "clamps"];
pub const SWEEP_HEADER: [&str; 3] = ["channel", "snr_db", "accuracy"];
pub const SER_HEADER: [&str; 5] = ["snr_db", "trials", "errors", "ser_measured", "ser_analytic"];

/// One row of the training log; centralized runs report zero link errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub epoch: usize,
    pub accuracy: f64,
    pub mse: f64,
    pub fwd_ser: f64,
    pub bwd_ser: f64,
    pub clamps: usize,
}

impl From<&SplitEpochMetrics> for MetricsRow {
    fn from(m: &SplitEpochMetrics) -> Self {
        MetricsRow {
            epoch: m.epoch,
            accuracy: m.accuracy,
            mse: m.mse,
            fwd_ser: m.fwd_ser(),
            bwd_ser: m.bwd_ser(),
            clamps: m.clamps,
        }
    }
}

impl From<&EpochMetrics> for MetricsRow {
    fn from(m: &EpochMetrics) -> Self {
        MetricsRow {
            epoch: m.epoch,
            accuracy: m.accuracy,
            mse: m.mse,
            fwd_ser: 0.0,
            bwd_ser: 0.0,
            clamps: 0,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn write_rows<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics<W: Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    write_rows(
        out,
        &METRICS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.epoch.to_string(),
                r.accuracy.to_string(),
                r.mse.to_string(),
                r.fwd_ser.to_string(),
                r.bwd_ser.to_string(),
                r.clamps.to_string(),
            ]
        }),
    )
}

pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    write_rows(
        out,
        &SWEEP_HEADER,
        points.iter().map(|p| {
            vec![
                p.channel.kind.name().to_string(),
                snr_field(p.channel.snr_db),
                p.accuracy.to_string(),
            ]
        }),
    )
}

pub fn write_ser<W: Write>(out: W, points: &[SerPoint]) -> Result<()> {
    write_rows(
        out,
        &SER_HEADER,
        points.iter().map(|p| {
            vec![
                snr_field(p.channel.snr_db),
                p.trials.to_string(),
                p.errors.to_string(),
                p.ser_measured().to_string(),
                p.ser_analytic.to_string(),
            ]
        }),
    )
}

/// The ideal channel has no finite SNR.
fn snr_field(snr_db: f64) -> String {
    if snr_db == f64::MAX {
        "inf".to_string()
    } else {
        snr_db.to_string()
    }
}

/// Class decisions on a square grid over `[-1, 1]^2`. Row 0 is the top
/// of the picture (`x2 = 1`), column 0 the left edge (`x1 = -1`).
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMap {
    pub resolution: usize,
    pub labels: Vec<f64>,
}

impl DecisionMap {
    /// Grid coordinate of column or row `i`; both ends of the square are
    /// included.
    pub fn coordinate(&self, i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / (self.resolution - 1) as f64
    }

    /// Evaluates `predict(x1, x2)` at every pixel, in row-major order.
    pub fn evaluate(
        resolution: usize,
        mut predict: impl FnMut(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidParameter(
                "map resolution must be >= 2".into(),
            ));
        }
        let mut map = DecisionMap {
            resolution,
            labels: Vec::with_capacity(resolution * resolution),
        };
        for row in 0..resolution {
            let x2 = -map.coordinate(row);
            for col in 0..resolution {
                let x1 = map.coordinate(col);
                map.labels.push(classify(predict(x1, x2)?));
            }
        }
        Ok(map)
    }

    pub fn label(&self, row: usize, col: usize) -> f64 {
        self.labels[row * self.resolution + col]
    }

    /// Fraction of pixels on which two maps agree.
    pub fn agreement(&self, other: &DecisionMap) -> Result<f64> {
        if other.resolution != self.resolution {
            return Err(Error::DimensionMismatch {
                expected: self.resolution,
                actual: other.resolution,
            });
        }
        let same = self
            .labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| a == b)
            .count();
        Ok(same as f64 / self.labels.len() as f64)
    }

    /// Plain PGM, 255 for the positive class.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "P2\n{} {}\n255", self.resolution, self.resolution)?;
        for row in self.labels.chunks(self.resolution) {
            let line: Vec<&str> = row
                .iter()
                .map(|&l| if l > 0.0 { "255" } else { "0" })
                .collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let r = self.resolution;
        write_rows(
            out,
            &["x1", "x2", "label"],
            (0..r * r).map(|i| {
                let (row, col) = (i / r, i % r);
                vec![
                    self.coordinate(col).to_string(),
                    (-self.coordinate(row)).to_string(),
                    self.labels[i].to_string(),
                ]
            }),
        )
    }
}
