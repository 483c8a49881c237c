//! gradcheck: central finite differences against the analytic backward
//! passes, reported per parameter group.

use crate::config::ConfigFlags;
use crate::{CliError, Component};
use prosograph::disc::{disc_backward, disc_forward, DiscConfig, DiscriminatorParams};
use prosograph::encoder::{
    encode, encode_backward, encode_with_cache, GraphEncoderParams,
};
use prosograph::graph::{build_chinese_graph, build_english_graph, Language, SyntacticGraph};
use prosograph::num::gradcheck;
use prosograph::testing::{random_chinese_boundary, random_english_boundary, random_tree};
use prosograph::{Rng, Tensor};

pub const TOLERANCE: f64 = 1e-5;
const FD_EPS: f64 = 1e-5;

pub fn run(flags: &ConfigFlags, component: Component) -> Result<(), CliError> {
    let worst = match component {
        Component::Encoder => check_encoder(flags.seed)?,
        Component::Discriminator => check_discriminator(flags.seed)?,
    };
    println!("max_rel_error {worst:.3e} tolerance {TOLERANCE:.0e}");
    if worst < TOLERANCE {
        Ok(())
    } else {
        Err(CliError::Internal(format!(
            "gradient check failed: {worst:.3e} >= {TOLERANCE:.0e}"
        )))
    }
}

/// Check one contiguous group of a flat parameter vector: perturb only
/// that slice and compare against the matching analytic slice.
fn group_error<F>(
    f: &mut F,
    point: &[f64],
    analytic: &[f64],
    offset: usize,
    len: usize,
) -> Result<f64, CliError>
where
    F: FnMut(&[f64]) -> Result<f64, prosograph::NumError>,
{
    let sub = |group: &[f64], full: &[f64]| {
        let mut v = full.to_vec();
        v[offset..offset + len].copy_from_slice(group);
        v
    };
    let full = point.to_vec();
    let err = gradcheck(
        |group: &[f64]| f(&sub(group, &full)),
        &point[offset..offset + len],
        &analytic[offset..offset + len],
        FD_EPS,
    )
    .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(err)
}

fn check_encoder(seed: u64) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for language in [Language::English, Language::Chinese] {
        let tag = match language {
            Language::English => "en",
            Language::Chinese => "zh",
        };
        let mut rng = Rng::new(seed.wrapping_add(language as u64));
        let d = 4;
        let tree = random_tree(3, language, &mut rng);
        let (boundary, graph): (_, SyntacticGraph) = match language {
            Language::English => {
                let b = random_english_boundary(3, 3, &mut rng);
                let g = build_english_graph(&tree, &b)?;
                (b, g)
            }
            Language::Chinese => {
                let b = random_chinese_boundary(3, 2, 2, &mut rng);
                let g = build_chinese_graph(&tree, &b)?;
                (b, g)
            }
        };
        let mut cfg = prosograph::encoder::EncoderConfig::for_language(language);
        cfg.hidden = d;
        let params = GraphEncoderParams::init(&cfg, &mut rng);
        let phoneme_enc = Tensor::uniform(&[boundary.num_phonemes(), d], 1.0, &mut rng);

        let (out, cache) = encode_with_cache(&phoneme_enc, &boundary, &graph, &params)?;
        let ones = Tensor::full(out.shape(), 1.0);
        let grads = encode_backward(&params, &cache, phoneme_enc.shape(), &ones)?;
        let analytic = grads.params.to_flat();
        let point = params.to_flat();

        let mut f = |flat: &[f64]| {
            let mut q = GraphEncoderParams::zeros(&cfg);
            q.assign_flat(flat)
                .map_err(|e| prosograph::NumError::Config(e.to_string()))?;
            let o = encode(&phoneme_enc, &boundary, &graph, &q)
                .map_err(|e| prosograph::NumError::Config(e.to_string()))?;
            Ok(o.sum())
        };
        for (name, offset, len) in params.flat_layout() {
            let err = group_error(&mut f, &point, &analytic, offset, len)?;
            println!("encoder {tag}:{name} {err:.3e}");
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

fn check_discriminator(seed: u64) -> Result<f64, CliError> {
    let cfg = DiscConfig {
        windows: vec![8],
        n_mels: 8,
        channels: 2,
        ..DiscConfig::default()
    };
    let mut rng = Rng::new(seed.wrapping_add(101));
    let params = DiscriminatorParams::init(&cfg, &mut rng)?;
    let clip = Tensor::uniform(&[8, 8], 1.0, &mut rng);

    let (_, cache) = disc_forward(&clip, &params.cnns[0], &cfg, &mut Rng::new(0), false)?;
    let (g_clip, g_params) = disc_backward(&params.cnns[0], &cfg, &cache, 1.0);
    let analytic = DiscriminatorParams {
        config: cfg.clone(),
        cnns: vec![g_params],
    }
    .to_flat();
    let point = params.to_flat();

    let mut worst: f64 = 0.0;
    let mut f = |flat: &[f64]| {
        let mut q = DiscriminatorParams::zeros(&cfg)
            .map_err(|e| prosograph::NumError::Config(e.to_string()))?;
        q.assign_flat(flat)
            .map_err(|e| prosograph::NumError::Config(e.to_string()))?;
        let (s, _) = disc_forward(&clip, &q.cnns[0], &cfg, &mut Rng::new(0), false)
            .map_err(|e| prosograph::NumError::Config(e.to_string()))?;
        Ok(s)
    };
    for (name, offset, len) in params.flat_layout() {
        let err = group_error(&mut f, &point, &analytic, offset, len)?;
        println!("discriminator {name} {err:.3e}");
        worst = worst.max(err);
    }

    // input-side gradient
    let mut fc = |c: &[f64]| {
        let t = Tensor::new(clip.shape().to_vec(), c.to_vec())?;
        let (s, _) = disc_forward(&t, &params.cnns[0], &cfg, &mut Rng::new(0), false)
            .map_err(|e| prosograph::NumError::Config(e.to_string()))?;
        Ok(s)
    };
    let err = group_error(&mut fc, clip.data(), g_clip.data(), 0, clip.len())?;
    println!("discriminator clip {err:.3e}");
    worst = worst.max(err);
    Ok(worst)
}
