//! encode: pooled phoneme encodings -> unit-level syntactic encoding,
//! optionally expanded to phoneme or frame granularity.

use crate::config::{Config, ConfigFlags};
use crate::io;
use crate::{CliError, ExpandLevel};
use prosograph::encoder::{
    encode_batch, expand_to_frame, expand_to_phoneme, mean_pool_rows, DurationTable,
    GraphEncoderParams, SentenceInput,
};
use prosograph::graph::Language;
use prosograph::num::ops::{concat_rows, split_rows};
use prosograph::{Rng, Tensor};
use std::path::Path;

#[allow(clippy::too_many_arguments)]
pub fn run(
    flags: &ConfigFlags,
    graph_path: &Path,
    phoneme_enc: Option<&Path>,
    random: Option<usize>,
    params_path: Option<&Path>,
    init_seed: Option<u64>,
    out_path: &Path,
    expand: Option<ExpandLevel>,
    durations_path: Option<&Path>,
) -> Result<(), CliError> {
    let gf = io::read_graph_file(graph_path)?;
    if gf.sentences.is_empty() {
        return Err(CliError::Input(format!(
            "{}: graph file holds no sentences",
            graph_path.display()
        )));
    }
    let language = gf.sentences[0].boundary.language();
    if gf
        .sentences
        .iter()
        .any(|s| s.boundary.language() != language)
    {
        return Err(CliError::Input(format!(
            "{}: sentences mix languages",
            graph_path.display()
        )));
    }
    let config = Config::resolve(flags, Some(language));
    let enc_cfg = config.encoder_config(language);

    let params = match (params_path, init_seed) {
        (Some(path), None) => {
            let bundle = io::read_bundle(path)?;
            GraphEncoderParams::from_bundle(&bundle, &enc_cfg)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(seed)) => GraphEncoderParams::init(&enc_cfg, &mut Rng::new(seed)),
        _ => {
            return Err(CliError::Input(
                "exactly one of --params or --init-seed is required".into(),
            ))
        }
    };

    let phoneme_counts: Vec<usize> = gf
        .sentences
        .iter()
        .map(|s| s.boundary.num_phonemes())
        .collect();
    let total_phonemes: usize = phoneme_counts.iter().sum();
    let pe = match (phoneme_enc, random) {
        (Some(path), None) => {
            let t = io::read_tensor(path)?;
            if t.ndim() != 2 || t.rows() != total_phonemes || t.cols() != enc_cfg.hidden {
                return Err(CliError::Input(format!(
                    "{}: phoneme encoding must have shape [{total_phonemes}, {}], found {:?}",
                    path.display(),
                    enc_cfg.hidden,
                    t.shape()
                )));
            }
            t
        }
        (None, Some(p)) => {
            if p != total_phonemes {
                return Err(CliError::Input(format!(
                    "--random {p} does not match the graph file's {total_phonemes} phonemes"
                )));
            }
            Tensor::uniform(&[p, enc_cfg.hidden], 1.0, &mut Rng::new(config.seed))
        }
        _ => {
            return Err(CliError::Input(
                "exactly one of --phoneme-enc or --random is required".into(),
            ))
        }
    };

    let pe_parts = split_rows(&pe, &phoneme_counts)?;
    let inputs: Vec<SentenceInput> = gf
        .sentences
        .iter()
        .zip(&pe_parts)
        .map(|(s, part)| SentenceInput {
            phoneme_enc: part,
            boundary: &s.boundary,
            graph: &s.graph,
        })
        .collect();
    let unit_encodings = encode_batch(&inputs, &params)?;

    let output = match expand {
        None => {
            let refs: Vec<&Tensor> = unit_encodings.iter().collect();
            concat_rows(&refs)?
        }
        Some(level) => {
            let durations_path = durations_path.expect("clap enforces --durations");
            let durations: Vec<DurationTable> = io::read_one_or_many(durations_path)?;
            if durations.len() != gf.sentences.len() {
                return Err(CliError::Input(format!(
                    "{}: {} duration tables for {} sentences",
                    durations_path.display(),
                    durations.len(),
                    gf.sentences.len()
                )));
            }
            let mut expanded = Vec::with_capacity(durations.len());
            for ((sentence, units), table) in
                gf.sentences.iter().zip(&unit_encodings).zip(&durations)
            {
                // Chinese units are characters; bridge to word level first
                let word_enc = match language {
                    Language::English => units.clone(),
                    Language::Chinese => {
                        let chars_per_word = sentence
                            .boundary
                            .chars_per_word()
                            .expect("Chinese boundary has characters");
                        mean_pool_rows(units, &chars_per_word)?
                    }
                };
                if table.num_words() != word_enc.rows() {
                    return Err(CliError::Input(format!(
                        "{}: duration table covers {} words but the sentence has {}",
                        durations_path.display(),
                        table.num_words(),
                        word_enc.rows()
                    )));
                }
                if table.total_phonemes() != sentence.boundary.num_phonemes() {
                    return Err(CliError::Input(format!(
                        "{}: phoneme durations sum to {} but the boundary map has {}",
                        durations_path.display(),
                        table.total_phonemes(),
                        sentence.boundary.num_phonemes()
                    )));
                }
                expanded.push(match level {
                    ExpandLevel::Phoneme => expand_to_phoneme(&word_enc, table)?,
                    ExpandLevel::Frame => expand_to_frame(&word_enc, table)?,
                });
            }
            let refs: Vec<&Tensor> = expanded.iter().collect();
            concat_rows(&refs)?
        }
    };
    io::write_json(out_path, &io::tensor_file(config, output))
}
