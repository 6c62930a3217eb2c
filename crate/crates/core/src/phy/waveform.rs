use std::io::Write;

use num_complex::Complex64;

/// Complex baseband samples of one channel use.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform(Vec<Complex64>);

impl Waveform {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Waveform(samples)
    }

    pub fn zeros(len: usize) -> Self {
        Waveform(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_real(samples: impl IntoIterator<Item = f64>) -> Self {
        Waveform(
            samples
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect(),
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.0
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.energy() / self.0.len() as f64
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }

    /// `sum_n a[n] conj(b[n])`.
    pub fn inner(&self, other: &Waveform) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scaled(&self, c: Complex64) -> Waveform {
        Waveform(self.0.iter().map(|s| s * c).collect())
    }

    /// Debug dump: header `n,real,imag`, one sample per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,real,imag")?;
        for (n, s) in self.0.iter().enumerate() {
            writeln!(out, "{n},{:?},{:?}", s.re, s.im)?;
        }
        Ok(())
    }
}

impl From<Vec<Complex64>> for Waveform {
    fn from(v: Vec<Complex64>) -> Self {
        Waveform(v)
    }
}
