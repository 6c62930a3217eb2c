//! Run configuration: built-in defaults, then an optional `key=value`
//! file, then command-line flags.

use std::path::{Path, PathBuf};

use ennsplit::channel::{ChannelKind, ChannelModel};
use ennsplit::data::{DatasetSpec, Labeler};
use ennsplit::enn::{EnnConfig, FirstLayerNorm, LearningRates, TrainOptions};
use ennsplit::phy::{Access, Detection, Modulation, PhyConfig};
use ennsplit::sim::{SplitExperiment, SweepProtocol};
use ennsplit::{Error, Result};

/// Every tunable of the four commands. See [`RunConfig::KEYS`] for the
/// names accepted in config files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub channel: ChannelKind,
    pub snr_list: Vec<f64>,
    pub backward_snr_db: f64,
    pub mode: Modulation,
    pub detection: Option<Detection>,
    pub access: Access,
    pub n: usize,
    pub extension: usize,
    pub symbol_period: f64,
    pub neurons: usize,
    pub coeffs: usize,
    pub labeler: Labeler,
    pub n_train: usize,
    pub n_test: usize,
    pub epochs: usize,
    pub lr_linear: f64,
    pub lr_coeffs: f64,
    pub decay: f64,
    pub protocol: SweepProtocol,
    pub trials: usize,
    pub map_resolution: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rates = LearningRates::default();
        let train = TrainOptions::default();
        let data = DatasetSpec::default();
        RunConfig {
            seed: 1,
            out: PathBuf::from("out"),
            channel: ChannelKind::Awgn,
            snr_list: vec![0.0, -5.0, -10.0, -12.5, -15.0, -17.5],
            backward_snr_db: -10.0,
            mode: Modulation::FskBpsk,
            detection: None,
            access: Access::Tdm,
            n: 128,
            extension: 1,
            symbol_period: 1e-3,
            neurons: 6,
            coeffs: 6,
            labeler: data.labeler,
            n_train: data.n_train,
            n_test: data.n_test,
            epochs: 6,
            lr_linear: rates.linear,
            lr_coeffs: rates.coeffs,
            decay: train.decay,
            protocol: SweepProtocol::Retrain,
            trials: 10_000,
            map_resolution: 101,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse `{value}`")))
}

pub fn parse_snr_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num("snr_list", s))
        .collect()
}

impl RunConfig {
    pub const KEYS: [&'static str; 23] = [
        "seed",
        "out",
        "channel",
        "snr_list",
        "backward_snr_db",
        "mode",
        "detection",
        "access",
        "n",
        "extension",
        "symbol_period",
        "neurons",
        "coeffs",
        "labeler",
        "n_train",
        "n_test",
        "epochs",
        "lr_linear",
        "lr_coeffs",
        "decay",
        "protocol",
        "trials",
        "map_resolution",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse_num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "channel" => self.channel = ChannelKind::from_name(v)?,
            "snr_list" => self.snr_list = parse_snr_list(v)?,
            "backward_snr_db" => self.backward_snr_db = parse_num(key, v)?,
            "mode" => self.mode = Modulation::from_name(v)?,
            "detection" => {
                self.detection = Some(match v {
                    "coherent" => Detection::Coherent,
                    "noncoherent" => Detection::Noncoherent,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown detection `{other}`"
                        )))
                    }
                })
            }
            "access" => self.access = Access::from_name(v)?,
            "n" => self.n = parse_num(key, v)?,
            "extension" => self.extension = parse_num(key, v)?,
            "symbol_period" => self.symbol_period = parse_num(key, v)?,
            "neurons" => self.neurons = parse_num(key, v)?,
            "coeffs" => self.coeffs = parse_num(key, v)?,
            "labeler" => self.labeler = Labeler::from_name(v)?,
            "n_train" => self.n_train = parse_num(key, v)?,
            "n_test" => self.n_test = parse_num(key, v)?,
            "epochs" => self.epochs = parse_num(key, v)?,
            "lr_linear" => self.lr_linear = parse_num(key, v)?,
            "lr_coeffs" => self.lr_coeffs = parse_num(key, v)?,
            "decay" => self.decay = parse_num(key, v)?,
            "protocol" => {
                self.protocol = match v {
                    "retrain" => SweepProtocol::Retrain,
                    "fixed" => SweepProtocol::FixedModel,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown protocol `{other}`"
                        )))
                    }
                }
            }
            "trials" => self.trials = parse_num(key, v)?,
            "map_resolution" => self.map_resolution = parse_num(key, v)?,
            other => {
                return Err(Error::Parse(format!(
                    "unknown config key `{other}` (known: {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a config file: `key = value` per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    pub fn detection(&self) -> Detection {
        self.detection
            .unwrap_or_else(|| Detection::default_for(self.mode))
    }

    pub fn enn(&self) -> Result<EnnConfig> {
        EnnConfig::new(2, self.neurons, self.coeffs, self.n)
    }

    pub fn phy(&self) -> Result<PhyConfig> {
        let mut phy = PhyConfig::with_extension(self.n, self.mode, self.extension)?;
        phy.access = self.access;
        phy.symbol_period = self.symbol_period;
        phy.validate()?;
        Ok(phy)
    }

    pub fn dataset(&self) -> DatasetSpec {
        DatasetSpec {
            labeler: self.labeler,
            n_train: self.n_train,
            n_test: self.n_test,
            seed: self.seed,
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            rates: LearningRates {
                linear: self.lr_linear,
                coeffs: self.lr_coeffs,
            },
            decay: self.decay,
            norm: FirstLayerNorm::Gradient,
            seed: self.seed.wrapping_add(2),
        }
    }

    pub fn init_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    pub fn channel_seed(&self) -> u64 {
        self.seed.wrapping_add(3)
    }

    /// The sweep points; the ideal channel has a single point.
    pub fn channels(&self) -> Result<Vec<ChannelModel>> {
        match self.channel {
            ChannelKind::Ideal => Ok(vec![ChannelModel::ideal()]),
            kind => self
                .snr_list
                .iter()
                .map(|&snr| ChannelModel::new(kind, snr))
                .collect(),
        }
    }

    pub fn experiment(&self) -> Result<SplitExperiment> {
        Ok(SplitExperiment {
            enn: self.enn()?,
            phy: self.phy()?,
            detection: self.detection(),
            train: self.train_options(),
            epochs: self.epochs,
            backward_snr_db: self.backward_snr_db,
            init_seed: self.init_seed(),
            channel_seed: self.channel_seed(),
        })
    }

    /// Checks everything the commands will need before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.enn()?;
        let phy = self.phy()?;
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidParameter("dataset sizes must be > 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be > 0".into()));
        }
        if self.map_resolution < 2 {
            return Err(Error::InvalidParameter(
                "map_resolution must be >= 2".into(),
            ));
        }
        for (name, v) in [("lr_linear", self.lr_linear), ("lr_coeffs", self.lr_coeffs)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0")));
            }
        }
        if !(self.decay.is_finite() && self.decay > 0.0) {
            return Err(Error::InvalidParameter("decay must be > 0".into()));
        }
        if self.channel != ChannelKind::Ideal && self.snr_list.is_empty() {
            return Err(Error::InvalidParameter("empty SNR list".into()));
        }
        if !self.backward_snr_db.is_finite() {
            return Err(Error::NonFinite("backward_snr_db"));
        }
        self.channels()?;
        if self.detection() == Detection::Noncoherent && phy.mode == Modulation::FskBpsk {
            return Err(Error::InvalidParameter(
                "fsk-bpsk needs coherent detection".into(),
            ));
        }
        if self.access == Access::Ocdm && self.neurons > phy.samples_per_symbol() {
            return Err(Error::InvalidParameter("more streams than chirps".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn every_key_is_settable() {
        let samples = [
            ("seed", "5"),
            ("out", "x"),
            ("channel", "rayleigh"),
            ("snr_list", "1,-2.5"),
            ("backward_snr_db", "-3"),
            ("mode", "plain"),
            ("detection", "noncoherent"),
            ("access", "ocdm"),
            ("n", "64"),
            ("extension", "2"),
            ("symbol_period", "0.002"),
            ("neurons", "4"),
            ("coeffs", "3"),
            ("labeler", "halfplane"),
            ("n_train", "10"),
            ("n_test", "5"),
            ("epochs", "0"),
            ("lr_linear", "0.1"),
            ("lr_coeffs", "0.01"),
            ("decay", "1"),
            ("protocol", "fixed"),
            ("trials", "7"),
            ("map_resolution", "9"),
        ];
        assert_eq!(samples.len(), RunConfig::KEYS.len());
        let mut cfg = RunConfig::default();
        for ((key, value), expected) in samples.iter().zip(RunConfig::KEYS) {
            assert_eq!(*key, expected);
            cfg.set(key, value).unwrap();
        }
        assert_eq!(cfg.snr_list, vec![1.0, -2.5]);
        assert_eq!(cfg.protocol, SweepProtocol::FixedModel);
        cfg.validate().unwrap();
        assert_eq!(cfg.phy().unwrap().samples_per_symbol(), 128);
    }

    #[test]
    fn file_syntax() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# comment\n\n n = 64 # trailing\nepochs=2\n")
            .unwrap();
        assert_eq!((cfg.n, cfg.epochs), (64, 2));
        assert!(cfg.apply_text("epochs 2").is_err());
        assert!(cfg.apply_text("colour=blue").is_err());
        assert!(cfg.apply_text("n=abc").is_err());
    }

    #[test]
    fn invalid_combinations() {
        let mut cfg = RunConfig::default();
        cfg.n = 127;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.detection = Some(Detection::Noncoherent);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.snr_list.clear();
        assert!(cfg.validate().is_err());
        cfg.channel = ChannelKind::Ideal;
        assert!(cfg.validate().is_ok());
    }
}
