//! discriminate: per-window scores and adversarial losses for a
//! real/fake mel-spectrogram pair.

use crate::config::{Config, ConfigFlags, SCHEMA_VERSION};
use crate::io;
use crate::CliError;
use prosograph::disc::{adversarial_losses, DiscriminatorParams, MelSpectrogram};
use prosograph::Rng;
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct WindowReport {
    window: usize,
    real_start: usize,
    fake_start: usize,
    real_score: f64,
    fake_score: f64,
    d_loss: f64,
    g_loss: f64,
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    config: Config,
    windows: Vec<WindowReport>,
    d_loss: f64,
    g_loss: f64,
}

pub fn run(
    flags: &ConfigFlags,
    real_path: &Path,
    fake_path: &Path,
    params_path: Option<&Path>,
    init_seed: Option<u64>,
) -> Result<(), CliError> {
    let config = Config::resolve(flags, None);
    let dcfg = config.disc_config();
    dcfg.validate()?;

    let load_mel = |path: &Path| -> Result<MelSpectrogram, CliError> {
        let t = io::read_tensor(path)?;
        if t.ndim() != 2 || t.cols() != dcfg.n_mels {
            return Err(CliError::Input(format!(
                "{}: mel-spectrogram must have {} columns, found shape {:?}",
                path.display(),
                dcfg.n_mels,
                t.shape()
            )));
        }
        Ok(MelSpectrogram::new(t)?)
    };
    let real = load_mel(real_path)?;
    let fake = load_mel(fake_path)?;

    let params = match (params_path, init_seed) {
        (Some(path), None) => {
            let bundle = io::read_bundle(path)?;
            DiscriminatorParams::from_bundle(&bundle, &dcfg)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(seed)) => DiscriminatorParams::init(&dcfg, &mut Rng::new(seed))?,
        _ => {
            return Err(CliError::Input(
                "exactly one of --params or --init-seed is required".into(),
            ))
        }
    };

    let mut rng = Rng::new(config.seed);
    let losses = adversarial_losses(
        &real,
        &fake,
        &params,
        &mut rng,
        config.loss_family_enum(),
        false,
    )?;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        config,
        windows: losses
            .per_window
            .iter()
            .map(|w| WindowReport {
                window: w.window,
                real_start: w.real_start,
                fake_start: w.fake_start,
                real_score: w.real_score,
                fake_score: w.fake_score,
                d_loss: w.d_loss,
                g_loss: w.g_loss,
            })
            .collect(),
        d_loss: losses.d_loss,
        g_loss: losses.g_loss,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Internal(format!("serializing report: {e}")))?
    );
    Ok(())
}
