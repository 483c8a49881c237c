//! Resolved run configuration, embedded in every output file.

use clap::Args;
use prosograph::disc::{DiscConfig, LossFamily};
use prosograph::encoder::EncoderConfig;
use prosograph::graph::Language;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Configuration flags shared by every subcommand. Defaults follow the
/// published model configuration; everything is overridable.
#[derive(Debug, Clone, Args)]
pub struct ConfigFlags {
    /// Hidden size of the graph encoder
    #[arg(long, global = true, default_value_t = 192)]
    pub hidden_size: usize,
    /// Number of gated graph convolution layers
    #[arg(long, global = true, default_value_t = 2)]
    pub layers: usize,
    /// Message-passing iterations per layer
    #[arg(long, global = true, default_value_t = 5)]
    pub iterations: usize,
    /// Discriminator window lengths (frames)
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [32usize, 64, 128])]
    pub windows: Vec<usize>,
    /// Mel bins per frame
    #[arg(long, global = true, default_value_t = 80)]
    pub n_mels: usize,
    /// Conv channel width of each discriminator
    #[arg(long, global = true, default_value_t = 32)]
    pub disc_channels: usize,
    /// Rows of the speaker embedding table
    #[arg(long, global = true, default_value_t = 2320)]
    pub num_speakers: usize,
    /// LeakyReLU negative slope
    #[arg(long, global = true, default_value_t = 0.2)]
    pub leaky_slope: f64,
    /// Dropout rate (training mode)
    #[arg(long, global = true, default_value_t = 0.1)]
    pub dropout_rate: f64,
    /// Instance-norm epsilon
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub instnorm_eps: f64,
    /// Seed for all randomness in the command
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Include the pooled input in the encoder's layer sum
    #[arg(long, global = true, default_value_t = false)]
    pub sum_includes_input: bool,
    /// Adversarial loss family
    #[arg(long, global = true, value_parser = parse_loss_family, default_value = "lsgan")]
    pub loss_family: String,
}

fn parse_loss_family(s: &str) -> Result<String, String> {
    match s {
        "lsgan" | "hinge" => Ok(s.to_string()),
        other => Err(format!("unknown loss family '{other}' (expected lsgan or hinge)")),
    }
}

/// The resolved configuration written into output headers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub language: Option<Language>,
    pub hidden_size: usize,
    pub graph_conv_layers: usize,
    pub iterations: usize,
    pub num_encoders: usize,
    pub windows: Vec<usize>,
    pub conv2d_layers: usize,
    pub disc_channels: usize,
    pub n_mels: usize,
    pub num_speakers: usize,
    pub leaky_slope: f64,
    pub dropout_rate: f64,
    pub instnorm_eps: f64,
    pub seed: u64,
    pub sum_includes_input: bool,
    pub loss_family: String,
}

impl Config {
    /// The model learns one graph encoder for the duration predictor
    /// and one for the prior flow.
    pub const NUM_ENCODERS: usize = 2;
    /// Conv layers per CNN discriminator (N + 1 with N = 2).
    pub const CONV2D_LAYERS: usize = 3;

    pub fn resolve(flags: &ConfigFlags, language: Option<Language>) -> Self {
        Config {
            language,
            hidden_size: flags.hidden_size,
            graph_conv_layers: flags.layers,
            iterations: flags.iterations,
            num_encoders: Self::NUM_ENCODERS,
            windows: flags.windows.clone(),
            conv2d_layers: Self::CONV2D_LAYERS,
            disc_channels: flags.disc_channels,
            n_mels: flags.n_mels,
            num_speakers: flags.num_speakers,
            leaky_slope: flags.leaky_slope,
            dropout_rate: flags.dropout_rate,
            instnorm_eps: flags.instnorm_eps,
            seed: flags.seed,
            sum_includes_input: flags.sum_includes_input,
            loss_family: flags.loss_family.clone(),
        }
    }

    pub fn encoder_config(&self, language: Language) -> EncoderConfig {
        let mut cfg = EncoderConfig::for_language(language);
        cfg.hidden = self.hidden_size;
        cfg.layers = self.graph_conv_layers;
        cfg.iterations = self.iterations;
        cfg.sum_includes_input = self.sum_includes_input;
        cfg
    }

    pub fn disc_config(&self) -> DiscConfig {
        DiscConfig {
            windows: self.windows.clone(),
            n_mels: self.n_mels,
            channels: self.disc_channels,
            conv_layers: Self::CONV2D_LAYERS,
            leaky_slope: self.leaky_slope,
            dropout_rate: self.dropout_rate,
            instnorm_eps: self.instnorm_eps,
        }
    }

    pub fn loss_family_enum(&self) -> LossFamily {
        match self.loss_family.as_str() {
            "hinge" => LossFamily::Hinge,
            _ => LossFamily::LeastSquares,
        }
    }

    /// Scalar parameter count of one speaker table at this config.
    pub fn speaker_params(&self) -> usize {
        self.num_speakers * self.hidden_size
    }
}
