//! Finite-difference verification of analytic gradients.

use super::tensor::NumError;

/// Compare an analytic gradient against central finite differences.
///
/// `f` evaluates the scalar objective at an arbitrary parameter vector;
/// `analytic` is the claimed gradient at `point`. Returns the maximum
/// over coordinates of `|a - n| / max(|a|, |n|, 1e-8)`.
///
/// Central differences are exact for quadratics up to roundoff, so a
/// correct backward pass lands far below any sensible threshold. The
/// caller is responsible for keeping `f` smooth near `point` (e.g.
/// nudging leaky-ReLU pre-activations away from 0).
pub fn gradcheck<F>(
    mut f: F,
    point: &[f64],
    analytic: &[f64],
    eps: f64,
) -> Result<f64, NumError>
where
    F: FnMut(&[f64]) -> Result<f64, NumError>,
{
    if point.len() != analytic.len() {
        return Err(NumError::Config(format!(
            "gradcheck: point has {} coordinates but analytic gradient has {}",
            point.len(),
            analytic.len()
        )));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(NumError::Config(format!(
            "gradcheck: eps must be positive and finite, got {eps}"
        )));
    }
    let mut x = point.to_vec();
    let mut max_err = 0.0f64;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + eps;
        let fp = f(&x)?;
        x[i] = orig - eps;
        let fm = f(&x)?;
        x[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(NumError::Numeric(format!(
                "gradcheck: non-finite objective at coordinate {i}"
            )));
        }
        let numeric = (fp - fm) / (2.0 * eps);
        let a = analytic[i];
        if !a.is_finite() {
            return Err(NumError::Numeric(format!(
                "gradcheck: non-finite analytic gradient at coordinate {i}"
            )));
        }
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if rel > max_err {
            max_err = rel;
        }
    }
    Ok(max_err)
}

/// Shift coordinates with magnitude below `margin` away from zero,
/// keeping their sign (zero moves to `+margin`). Used to keep
/// finite-difference probes clear of leaky-ReLU kinks.
pub fn nudge_away_from_zero(xs: &mut [f64], margin: f64) {
    for v in xs.iter_mut() {
        if v.abs() < margin {
            *v = if *v < 0.0 { -margin } else { margin };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_function_at_three() {
        // f(x) = x^2, f'(3) = 6
        let err = gradcheck(|x| Ok(x[0] * x[0]), &[3.0], &[6.0], 1e-5).unwrap();
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn quadratic_form_is_exact_up_to_roundoff() {
        // f(x) = x' A x with fixed A; gradient (A + A')x
        let a = [[2.0, 0.5, -1.0], [0.5, 1.5, 0.25], [-1.0, 0.25, 3.0]];
        let x = [0.3, -1.2, 0.7];
        let f = |p: &[f64]| {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += p[i] * a[i][j] * p[j];
                }
            }
            Ok(acc)
        };
        let mut grad = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                grad[i] += (a[i][j] + a[j][i]) * x[j];
            }
        }
        let err = gradcheck(f, &x, &grad, 1e-5).unwrap();
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn sign_flipped_gradient_is_detected() {
        let err = gradcheck(|x| Ok(x[0] * x[0]), &[3.0], &[-6.0], 1e-5).unwrap();
        assert!(err > 0.5, "a flipped gradient must produce a large error");
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(gradcheck(|x| Ok(x[0]), &[1.0, 2.0], &[1.0], 1e-5).is_err());
    }

    #[test]
    fn nudge_moves_small_values() {
        let mut xs = [0.0, 1e-9, -1e-9, 0.5, -0.5];
        nudge_away_from_zero(&mut xs, 1e-3);
        assert_eq!(xs, [1e-3, 1e-3, -1e-3, 0.5, -0.5]);
    }
}
