use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ennsplit::channel::ChannelModel;
use ennsplit::data::make_map_dataset;
use ennsplit::enn::{accuracy, serialize, train_centralized, EnnModel};
use ennsplit::phy::Access;
use ennsplit::report::{self, DecisionMap, MetricsRow};
use ennsplit::sim::{link_accuracy, ser_sweep, SplitSession, SweepPoint, SweepProtocol};
use ennsplit::Result;

use crate::config::RunConfig;

/// Writes through a temporary file so readers never see partial output.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn point_tag(channel: &ChannelModel) -> String {
    if channel.kind == ennsplit::channel::ChannelKind::Ideal {
        "ideal".to_string()
    } else {
        format!("{}_{}", channel.kind.name(), channel.snr_db)
    }
}

fn write_map(out: &Path, stem: &str, map: &DecisionMap) -> Result<()> {
    write_atomic(&out.join(format!("{stem}.pgm")), |w| map.write_pgm(w))?;
    write_atomic(&out.join(format!("{stem}.csv")), |w| map.write_csv(w))
}

fn write_model(path: PathBuf, model: &EnnModel) -> Result<()> {
    write_atomic(&path, |w| {
        Ok(w.write_all(serialize::to_text(model).as_bytes())?)
    })
}

pub fn train_centralized_cmd(cfg: &RunConfig) -> Result<()> {
    let (train, test) = make_map_dataset(&cfg.dataset());
    let exp = cfg.experiment()?;
    let (model, metrics) =
        train_centralized(&exp.initial_model()?, &train, cfg.epochs, &exp.train)?;
    let acc = accuracy(&model, &test)?;
    fs::create_dir_all(&cfg.out)?;
    let rows: Vec<MetricsRow> = metrics.iter().map(MetricsRow::from).collect();
    write_atomic(&cfg.out.join("metrics.csv"), |w| {
        report::write_metrics(w, &rows)
    })?;
    write_model(cfg.out.join("model.txt"), &model)?;
    let map = DecisionMap::evaluate(cfg.map_resolution, |x1, x2| model.predict(&[x1, x2]))?;
    write_map(&cfg.out, "map", &map)?;
    println!("test_accuracy={acc}");
    Ok(())
}

pub fn train_split_cmd(cfg: &RunConfig) -> Result<()> {
    let (train, test) = make_map_dataset(&cfg.dataset());
    let exp = cfg.experiment()?;
    fs::create_dir_all(&cfg.out)?;
    let channels = cfg.channels()?;
    let mut points = Vec::with_capacity(channels.len());
    let fixed = match cfg.protocol {
        SweepProtocol::FixedModel => {
            let model = exp.centralized(&train)?;
            write_model(cfg.out.join("model.txt"), &model)?;
            Some(model)
        }
        SweepProtocol::Retrain => None,
    };
    for channel in channels {
        let tag = point_tag(&channel);
        let session = match &fixed {
            Some(model) => {
                let session = exp.session(model.clone(), channel)?;
                let result = link_accuracy(&session, &test, exp.channel_seed.wrapping_add(1))?;
                points.push(SweepPoint {
                    channel,
                    accuracy: result.accuracy,
                    ser: result.ser(),
                });
                session
            }
            None => {
                let run = exp.run(channel, &train, &test)?;
                let rows: Vec<MetricsRow> = run.metrics.iter().map(MetricsRow::from).collect();
                write_atomic(&cfg.out.join(format!("metrics_{tag}.csv")), |w| {
                    report::write_metrics(w, &rows)
                })?;
                write_model(cfg.out.join(format!("model_{tag}.txt")), &run.model)?;
                points.push(SweepPoint {
                    channel,
                    accuracy: run.test.accuracy,
                    ser: run.test.ser(),
                });
                exp.session(run.model, channel)?
            }
        };
        let map = split_map(&session, cfg)?;
        write_map(&cfg.out, &format!("map_{tag}"), &map)?;
        let p = points.last().expect("pushed above");
        println!("{tag} accuracy={} ser={}", p.accuracy, p.ser);
    }
    write_atomic(&cfg.out.join("sweep.csv"), |w| {
        report::write_sweep(w, &points)
    })
}

/// Decision map with every pixel sent through the link.
fn split_map(session: &SplitSession, cfg: &RunConfig) -> Result<DecisionMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.channel_seed().wrapping_add(2));
    DecisionMap::evaluate(cfg.map_resolution, |x1, x2| {
        session.predict(&[x1, x2], &mut rng)
    })
}

pub fn ser_sweep_cmd(cfg: &RunConfig) -> Result<()> {
    let phy = cfg.phy()?;
    let points = ser_sweep(
        &phy,
        cfg.detection(),
        &cfg.channels()?,
        cfg.trials,
        cfg.seed,
    )?;
    fs::create_dir_all(&cfg.out)?;
    write_atomic(&cfg.out.join("ser.csv"), |w| report::write_ser(w, &points))?;
    for p in &points {
        println!(
            "{} ser_measured={} ser_analytic={}",
            point_tag(&p.channel),
            p.ser_measured(),
            p.ser_analytic
        );
    }
    Ok(())
}

/// Text report; the caller prints it.
pub fn bandwidth_report(cfg: &RunConfig) -> Result<String> {
    let phy = cfg.phy()?;
    let single = phy.bandwidth();
    let base = ennsplit::phy::bandwidth(phy.n, phy.symbol_period)?;
    let (expansion, uses) = match phy.access {
        Access::Ocdm => (cfg.neurons, 1),
        Access::Tdm => (1, cfg.neurons),
    };
    Ok(format!(
        "mode={} n={} extension={} symbol_period_s={}\n\
         bandwidth_hz={}\n\
         alphabet_expansion={}\n\
         access={} streams={} channel_uses={} access_expansion={}\n\
         total_bandwidth_hz={}\n",
        phy.mode.name(),
        phy.n,
        phy.extension,
        phy.symbol_period,
        single,
        single / base,
        phy.access.name(),
        cfg.neurons,
        uses,
        expansion,
        single * expansion as f64,
    ))
}
