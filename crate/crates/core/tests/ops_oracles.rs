//! Kernel-level oracles: conv2d against the six-nested-loop reference,
//! statistical checks for instance norm and dropout, and
//! finite-difference verification of every primitive's VJP.

mod common;

use common::reference_conv2d;
use prosograph::num::ops::*;
use prosograph::num::{gradcheck, Rng, Tensor};

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

#[test]
fn conv2d_identity_with_unit_1x1_kernel() {
    let mut rng = Rng::new(1);
    let x = Tensor::uniform(&[2, 4, 5], 1.0, &mut rng);
    let mut kernel = Tensor::zeros(&[2, 2, 1, 1]);
    // kernel[c][c] = 1: map each channel to itself
    kernel.data_mut()[0] = 1.0; // (0,0,0,0)
    kernel.data_mut()[3] = 1.0; // (1,1,0,0)
    let y = conv2d(&x, &kernel, 1, 0).unwrap();
    assert_eq!(y, x);
}

#[test]
fn conv2d_all_ones_3x3_on_all_ones_4x4_padded() {
    let x = Tensor::full(&[1, 4, 4], 1.0);
    let k = Tensor::full(&[1, 1, 3, 3], 1.0);
    let y = conv2d(&x, &k, 1, 1).unwrap();
    assert_eq!(y.shape(), &[1, 4, 4]);
    // corners see a 2x2 patch, edges 2x3, center 3x3
    let get = |r: usize, c: usize| y.data()[r * 4 + c];
    assert_eq!(get(0, 0), 4.0);
    assert_eq!(get(0, 3), 4.0);
    assert_eq!(get(3, 0), 4.0);
    assert_eq!(get(3, 3), 4.0);
    assert_eq!(get(1, 1), 9.0);
    assert_eq!(get(2, 2), 9.0);
    assert_eq!(get(0, 1), 6.0);
}

#[test]
fn conv2d_matches_nested_loop_reference_exactly() {
    let mut rng = Rng::new(2);
    for case in 0..60 {
        let c_in = 1 + rng.below(3);
        let c_out = 1 + rng.below(3);
        let h = 3 + rng.below(6);
        let w = 3 + rng.below(6);
        let kh = 1 + rng.below(3);
        let kw = 1 + rng.below(3);
        let stride = 1 + rng.below(2);
        let padding = rng.below(2);
        let x = Tensor::uniform(&[c_in, h, w], 1.0, &mut rng);
        let k = Tensor::uniform(&[c_out, c_in, kh, kw], 1.0, &mut rng);
        let y = conv2d(&x, &k, stride, padding).unwrap();
        let expected = reference_conv2d(
            x.data(),
            c_in,
            h,
            w,
            k.data(),
            c_out,
            kh,
            kw,
            stride,
            padding,
        );
        assert_eq!(y.data(), expected.as_slice(), "case {case} must be exact");
    }
}

#[test]
fn conv2d_rejects_degenerate_output() {
    let x = Tensor::full(&[1, 2, 2], 1.0);
    let k = Tensor::full(&[1, 1, 3, 3], 1.0);
    assert!(conv2d(&x, &k, 1, 0).is_err());
    assert!(conv2d(&x, &k, 1, 1).is_ok());
}

#[test]
fn conv2d_vjp_passes_gradcheck() {
    let mut rng = Rng::new(3);
    let x = Tensor::uniform(&[2, 4, 4], 1.0, &mut rng);
    let k = Tensor::uniform(&[2, 2, 3, 3], 1.0, &mut rng);
    let g = Tensor::uniform(&[2, 2, 2], 1.0, &mut rng);
    let (gx, gk) = conv2d_vjp(&x, &k, 2, 1, &g);

    // loss = <conv2d(x, k), g>
    let fx = |p: &[f64]| {
        let xt = Tensor::new(x.shape().to_vec(), p.to_vec()).unwrap();
        let y = conv2d(&xt, &k, 2, 1).unwrap();
        Ok(y.data().iter().zip(g.data()).map(|(a, b)| a * b).sum())
    };
    assert!(gradcheck(fx, x.data(), gx.data(), 1e-5).unwrap() < 1e-6);

    let fk = |p: &[f64]| {
        let kt = Tensor::new(k.shape().to_vec(), p.to_vec()).unwrap();
        let y = conv2d(&x, &kt, 2, 1).unwrap();
        Ok(y.data().iter().zip(g.data()).map(|(a, b)| a * b).sum())
    };
    assert!(gradcheck(fk, k.data(), gk.data(), 1e-5).unwrap() < 1e-6);
}

// ---------------------------------------------------------------------------
// instance norm
// ---------------------------------------------------------------------------

#[test]
fn instance_norm_constant_channel_is_zero() {
    let x = Tensor::full(&[2, 3, 3], 5.5);
    let y = instance_norm(&x, 1e-5).unwrap();
    assert!(y.data().iter().all(|&v| v == 0.0));
}

#[test]
fn instance_norm_two_value_channel_analytic() {
    // channel [0, 2]: mean 1, population var 1 -> output ~ [-1, 1]
    let x = Tensor::new(vec![1, 1, 2], vec![0.0, 2.0]).unwrap();
    let eps = 1e-10;
    let y = instance_norm(&x, eps).unwrap();
    assert!((y.data()[0] + 1.0).abs() < 1e-9);
    assert!((y.data()[1] - 1.0).abs() < 1e-9);
}

#[test]
fn instance_norm_output_statistics_near_standard() {
    let mut rng = Rng::new(4);
    for _ in 0..20 {
        let (h, w) = (4 + rng.below(5), 4 + rng.below(5));
        let x = Tensor::uniform(&[3, h, w], 2.0, &mut rng);
        let y = instance_norm(&x, 1e-10).unwrap();
        let hw = h * w;
        for c in 0..3 {
            let chan = &y.data()[c * hw..(c + 1) * hw];
            let mean = chan.iter().sum::<f64>() / hw as f64;
            let var = chan.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / hw as f64;
            assert!(mean.abs() < 1e-12, "mean {mean}");
            assert!((var - 1.0).abs() < 1e-6, "var {var}");
        }
    }
}

#[test]
fn instance_norm_vjp_passes_gradcheck() {
    let mut rng = Rng::new(5);
    let x = Tensor::uniform(&[2, 3, 4], 1.0, &mut rng);
    let g = Tensor::uniform(&[2, 3, 4], 1.0, &mut rng);
    let eps = 1e-5;
    let gx = instance_norm_vjp(&x, eps, &g);
    let f = |p: &[f64]| {
        let xt = Tensor::new(x.shape().to_vec(), p.to_vec()).unwrap();
        let y = instance_norm(&xt, eps).unwrap();
        Ok(y.data().iter().zip(g.data()).map(|(a, b)| a * b).sum())
    };
    assert!(gradcheck(f, x.data(), gx.data(), 1e-6).unwrap() < 1e-7);
}

// ---------------------------------------------------------------------------
// dropout
// ---------------------------------------------------------------------------

#[test]
fn dropout_rate_zero_and_inference_are_identity() {
    let mut rng = Rng::new(6);
    let x = Tensor::uniform(&[10, 10], 1.0, &mut rng);
    let (y, _) = dropout(&x, 0.0, &mut rng, true).unwrap();
    assert_eq!(y, x);
    let (y, _) = dropout(&x, 0.9, &mut rng, false).unwrap();
    assert_eq!(y, x);
}

#[test]
fn dropout_rejects_invalid_rate() {
    let mut rng = Rng::new(7);
    let x = Tensor::full(&[2], 1.0);
    assert!(dropout(&x, 1.0, &mut rng, true).is_err());
    assert!(dropout(&x, -0.1, &mut rng, true).is_err());
}

#[test]
fn dropout_empirical_zero_fraction_tracks_rate() {
    let mut rng = Rng::new(8);
    let x = Tensor::full(&[1_000_000], 1.0);
    for rate in [0.1, 0.3, 0.5] {
        let (y, _) = dropout(&x, rate, &mut rng, true).unwrap();
        let zeros = y.data().iter().filter(|&&v| v == 0.0).count();
        let frac = zeros as f64 / y.len() as f64;
        assert!((frac - rate).abs() < 0.01, "rate {rate}: fraction {frac}");
        // survivors are scaled by 1/(1-rate)
        let scale = 1.0 / (1.0 - rate);
        assert!(y
            .data()
            .iter()
            .all(|&v| v == 0.0 || (v - scale).abs() < 1e-12));
    }
}

#[test]
fn dropout_vjp_applies_the_same_mask() {
    let mut rng = Rng::new(9);
    let x = Tensor::full(&[1000], 2.0);
    let (y, mask) = dropout(&x, 0.4, &mut rng, true).unwrap();
    let g = Tensor::full(&[1000], 1.0);
    let gx = dropout_vjp(&mask, &g);
    for (yv, gv) in y.data().iter().zip(gx.data()) {
        // zeroed forward elements get zero gradient, survivors the scale
        assert_eq!(yv == &0.0, gv == &0.0);
    }
}

// ---------------------------------------------------------------------------
// dense primitives
// ---------------------------------------------------------------------------

#[test]
fn matmul_identity_and_mismatch() {
    let mut rng = Rng::new(10);
    let a = Tensor::uniform(&[4, 6], 1.0, &mut rng);
    let y = matmul(&a, &Tensor::eye(6)).unwrap();
    assert_eq!(y, a);
    let b = Tensor::zeros(&[5, 2]);
    let err = matmul(&a, &b).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("[4, 6]") && msg.contains("[5, 2]"), "{msg}");
}

#[test]
fn activation_point_values() {
    let x = Tensor::new(vec![3], vec![0.0, -1.0, 1.0]).unwrap();
    assert_eq!(sigmoid(&x).data()[0], 0.5);
    let lr = leaky_relu(&x, 0.2);
    assert_eq!(lr.data(), &[0.0, -0.2, 1.0]);
    assert_eq!(tanh(&x).data()[0], 0.0);
}

#[test]
fn elementwise_and_linear_vjps_pass_gradcheck() {
    let mut rng = Rng::new(11);
    let a = Tensor::uniform(&[3, 4], 1.0, &mut rng);
    let b = Tensor::uniform(&[3, 4], 1.0, &mut rng);
    let g = Tensor::uniform(&[3, 4], 1.0, &mut rng);

    // mul
    let (ga, _gb) = mul_vjp(&a, &b, &g);
    let f = |p: &[f64]| {
        let at = Tensor::new(a.shape().to_vec(), p.to_vec()).unwrap();
        let y = mul(&at, &b).unwrap();
        Ok(y.data().iter().zip(g.data()).map(|(x, gg)| x * gg).sum())
    };
    assert!(gradcheck(f, a.data(), ga.data(), 1e-5).unwrap() < 1e-6);

    // matmul both sides
    let m = Tensor::uniform(&[3, 2], 1.0, &mut rng);
    let n = Tensor::uniform(&[2, 4], 1.0, &mut rng);
    let gy = Tensor::uniform(&[3, 4], 1.0, &mut rng);
    let (gm, gn) = matmul_vjp(&m, &n, &gy);
    let fm = |p: &[f64]| {
        let mt = Tensor::new(m.shape().to_vec(), p.to_vec()).unwrap();
        let y = matmul(&mt, &n).unwrap();
        Ok(y.data().iter().zip(gy.data()).map(|(x, gg)| x * gg).sum())
    };
    assert!(gradcheck(fm, m.data(), gm.data(), 1e-5).unwrap() < 1e-6);
    let fn_ = |p: &[f64]| {
        let nt = Tensor::new(n.shape().to_vec(), p.to_vec()).unwrap();
        let y = matmul(&m, &nt).unwrap();
        Ok(y.data().iter().zip(gy.data()).map(|(x, gg)| x * gg).sum())
    };
    assert!(gradcheck(fn_, n.data(), gn.data(), 1e-5).unwrap() < 1e-6);

    // add_bias
    let bias = Tensor::uniform(&[4], 1.0, &mut rng);
    let gb = colsum(&g);
    let fb = |p: &[f64]| {
        let bt = Tensor::new(vec![4], p.to_vec()).unwrap();
        let y = add_bias(&a, &bt).unwrap();
        Ok(y.data().iter().zip(g.data()).map(|(x, gg)| x * gg).sum())
    };
    assert!(gradcheck(fb, bias.data(), gb.data(), 1e-5).unwrap() < 1e-6);
}

#[test]
fn activation_vjps_pass_gradcheck() {
    let mut rng = Rng::new(12);
    // keep leaky-relu inputs away from the kink
    let mut vals: Vec<f64> = (0..12).map(|_| rng.uniform(-2.0, 2.0)).collect();
    prosograph::num::nudge_away_from_zero(&mut vals, 1e-2);
    let x = Tensor::new(vec![3, 4], vals).unwrap();
    let g = Tensor::uniform(&[3, 4], 1.0, &mut rng);

    let y = sigmoid(&x);
    let gx = sigmoid_vjp(&y, &g);
    let f = |p: &[f64]| {
        let xt = Tensor::new(x.shape().to_vec(), p.to_vec()).unwrap();
        Ok(sigmoid(&xt).data().iter().zip(g.data()).map(|(a, b)| a * b).sum())
    };
    assert!(gradcheck(f, x.data(), gx.data(), 1e-5).unwrap() < 1e-6);

    let y = tanh(&x);
    let gx = tanh_vjp(&y, &g);
    let f = |p: &[f64]| {
        let xt = Tensor::new(x.shape().to_vec(), p.to_vec()).unwrap();
        Ok(tanh(&xt).data().iter().zip(g.data()).map(|(a, b)| a * b).sum())
    };
    assert!(gradcheck(f, x.data(), gx.data(), 1e-5).unwrap() < 1e-6);

    let gx = leaky_relu_vjp(&x, 0.2, &g);
    let f = |p: &[f64]| {
        let xt = Tensor::new(x.shape().to_vec(), p.to_vec()).unwrap();
        Ok(leaky_relu(&xt, 0.2)
            .data()
            .iter()
            .zip(g.data())
            .map(|(a, b)| a * b)
            .sum())
    };
    assert!(gradcheck(f, x.data(), gx.data(), 1e-5).unwrap() < 1e-6);
}

#[test]
fn mean_and_concat_vjps_pass_gradcheck() {
    let mut rng = Rng::new(13);
    let x = Tensor::uniform(&[3, 5], 1.0, &mut rng);
    for axis in [0usize, 1] {
        let y = mean_over_axis(&x, axis).unwrap();
        let g = Tensor::uniform(y.shape(), 1.0, &mut rng);
        let gx = mean_over_axis_vjp(x.shape(), axis, &g);
        let f = |p: &[f64]| {
            let xt = Tensor::new(x.shape().to_vec(), p.to_vec()).unwrap();
            let yt = mean_over_axis(&xt, axis).unwrap();
            Ok(yt.data().iter().zip(g.data()).map(|(a, b)| a * b).sum())
        };
        assert!(gradcheck(f, x.data(), gx.data(), 1e-5).unwrap() < 1e-6);
    }

    // concat_rows / split_rows are exact inverses
    let a = Tensor::uniform(&[2, 3], 1.0, &mut rng);
    let b = Tensor::uniform(&[4, 3], 1.0, &mut rng);
    let y = concat_rows(&[&a, &b]).unwrap();
    let parts = split_rows(&y, &[2, 4]).unwrap();
    assert_eq!(parts[0], a);
    assert_eq!(parts[1], b);
}

#[test]
fn mean_over_axis_values() {
    let x = Tensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(mean_over_axis(&x, 0).unwrap().data(), &[2.0, 3.0]);
    assert_eq!(mean_over_axis(&x, 1).unwrap().data(), &[1.5, 3.5]);
    assert!(mean_over_axis(&x, 2).is_err());
}
