//! Cubic B-spline bases with interior knots at training-data quantiles.
//!
//! Basis functions form a partition of unity on the training range and
//! extend linearly outside it. Evaluation uses the triangular de Boor
//! scheme over the containing knot span.

use serde::{Deserialize, Serialize};

use super::InfoModelError;

/// A B-spline basis frozen at fit time: degree, knot vector (boundary knots
/// repeated degree+1 times), and the training range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    pub degree: usize,
    /// Number of basis functions.
    pub df: usize,
    pub knots: Vec<f64>,
    pub feature_range: (f64, f64),
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Build a cubic basis with `df` functions over the training values:
/// interior knots at equally spaced quantiles, boundary knots at the data
/// range. Fewer distinct values than `df` step the basis down with a
/// warning.
pub fn build_spline_basis(values: &[f64], df: usize) -> Result<SplineBasis, InfoModelError> {
    if values.is_empty() || df == 0 {
        return Err(InfoModelError::InvalidInput(
            "spline basis needs non-empty values and df >= 1".to_string(),
        ));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(InfoModelError::InvalidInput(format!(
            "non-finite value at index {i}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distinct = sorted.clone();
    distinct.dedup();

    let mut df_eff = df;
    if distinct.len() < df {
        log::warn!(
            "only {} distinct values for a df={} basis; stepping down to df={}",
            distinct.len(),
            df,
            distinct.len()
        );
        df_eff = distinct.len();
    }

    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    if df_eff == 1 || hi <= lo {
        // Constant basis.
        return Ok(SplineBasis {
            degree: 0,
            df: 1,
            knots: vec![lo, hi],
            feature_range: (lo, hi),
        });
    }

    let degree = (df_eff - 1).min(3);
    // Interior knots at equally spaced quantiles; duplicates (heavy ties)
    // are dropped, stepping df down further.
    let mut interior = Vec::new();
    let m = df_eff - degree - 1;
    for i in 1..=m {
        let k = quantile(&sorted, i as f64 / (m + 1) as f64);
        if k > lo && k < hi && interior.last().map_or(true, |&p| k > p) {
            interior.push(k);
        }
    }
    let df_final = degree + 1 + interior.len();
    if df_final < df_eff {
        log::warn!(
            "tied quantile knots collapsed; basis stepped down to df={df_final}"
        );
    }

    let mut knots = vec![lo; degree + 1];
    knots.extend(interior);
    knots.extend(vec![hi; degree + 1]);
    Ok(SplineBasis {
        degree,
        df: df_final,
        knots,
        feature_range: (lo, hi),
    })
}

/// The `degree + 1` basis values that do not vanish on `span` (functions
/// `span - degree ..= span`), by the triangular de Boor scheme. Requires
/// `knots[span] <= x < knots[span + 1]` with positive span width.
fn nonzero_basis(knots: &[f64], span: usize, degree: usize, x: f64) -> Vec<f64> {
    let mut values = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    values[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom != 0.0 { values[r] / denom } else { 0.0 };
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    values
}

impl SplineBasis {
    /// Index of the positive-width knot span containing `x` in
    /// `[degree, df - 1]`; values at or beyond the range's upper boundary
    /// use the last span.
    fn span(&self, x: f64) -> usize {
        let p = self.degree;
        let last_span = self.df - 1;
        if x >= self.knots[self.df] {
            return last_span;
        }
        let mut span = p;
        while span < last_span && self.knots[span + 1] <= x {
            span += 1;
        }
        span
    }

    /// Basis values at `x` within the range, scattered into a df-length
    /// vector.
    fn evaluate_inside(&self, x: f64) -> Vec<f64> {
        let p = self.degree;
        let mut out = vec![0.0; self.df];
        if p == 0 {
            out[0] = 1.0;
            return out;
        }
        let span = self.span(x);
        let values = nonzero_basis(&self.knots, span, p, x);
        for (r, &v) in values.iter().enumerate() {
            out[span - p + r] = v;
        }
        out
    }

    /// First derivatives of all basis functions at `x` inside the range,
    /// via the degree-lowering identity
    /// `N'_{i,p} = p (N_{i,p-1}/(t_{i+p}-t_i) - N_{i+1,p-1}/(t_{i+p+1}-t_{i+1}))`
    /// with the lower-degree values taken over the same knot vector.
    fn derivative_inside(&self, x: f64) -> Vec<f64> {
        let p = self.degree;
        let mut out = vec![0.0; self.df];
        if p == 0 {
            return out;
        }
        let span = self.span(x);
        // Degree p-1 functions that are nonzero on this span:
        // indices span - p + 1 ..= span.
        let low_values = nonzero_basis(&self.knots, span, p - 1, x);
        let low_first = span + 1 - p;
        let n_low = |i: usize| -> f64 {
            if i < low_first || i > span {
                0.0
            } else {
                low_values[i - low_first]
            }
        };
        for i in 0..self.df {
            let d1 = self.knots[i + p] - self.knots[i];
            let d2 = self.knots[i + p + 1] - self.knots[i + 1];
            let a = if d1 != 0.0 { n_low(i) / d1 } else { 0.0 };
            let b = if d2 != 0.0 { n_low(i + 1) / d2 } else { 0.0 };
            out[i] = p as f64 * (a - b);
        }
        out
    }

    /// Basis values at `x`; outside the training range each function
    /// extends linearly from the boundary, which preserves their unit sum.
    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        let (lo, hi) = self.feature_range;
        if x < lo {
            let base = self.evaluate_inside(lo);
            let deriv = self.derivative_inside(lo);
            base.iter()
                .zip(&deriv)
                .map(|(&b, &d)| b + d * (x - lo))
                .collect()
        } else if x > hi {
            let base = self.evaluate_inside(hi);
            let deriv = self.derivative_inside(hi);
            base.iter()
                .zip(&deriv)
                .map(|(&b, &d)| b + d * (x - hi))
                .collect()
        } else {
            self.evaluate_inside(x)
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Textbook Cox-de Boor recursion, the independent oracle for the
    /// triangular scheme above.
    pub(crate) fn cox_de_boor(knots: &[f64], i: usize, p: usize, x: f64, upper: f64) -> f64 {
        if p == 0 {
            // Half-open spans, except the last span closes at the range's
            // upper boundary.
            let closes = knots[i + 1] >= upper;
            return if (knots[i] <= x && x < knots[i + 1])
                || (closes && x == upper && knots[i] < knots[i + 1])
            {
                1.0
            } else {
                0.0
            };
        }
        let d1 = knots[i + p] - knots[i];
        let a = if d1 > 0.0 {
            (x - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, x, upper)
        } else {
            0.0
        };
        let d2 = knots[i + p + 1] - knots[i + 1];
        let b = if d2 > 0.0 {
            (knots[i + p + 1] - x) / d2 * cox_de_boor(knots, i + 1, p - 1, x, upper)
        } else {
            0.0
        };
        a + b
    }

    fn sample_values(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-3.0..7.0)).collect()
    }

    #[test]
    fn df_four_gives_four_cubic_functions_and_no_interior_knots() {
        let basis = build_spline_basis(&sample_values(1, 50), 4).unwrap();
        assert_eq!(basis.df, 4);
        assert_eq!(basis.degree, 3);
        assert_eq!(basis.knots.len(), 8);
    }

    #[test]
    fn partition_of_unity_on_training_range() {
        for seed in 0..5 {
            for df in [4usize, 6] {
                let values = sample_values(seed, 80);
                let basis = build_spline_basis(&values, df).unwrap();
                let (lo, hi) = basis.feature_range;
                for i in 0..=1000 {
                    let x = lo + (hi - lo) * i as f64 / 1000.0;
                    let sum: f64 = basis.evaluate(x).iter().sum();
                    assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn matches_cox_de_boor_recursion_at_knots_and_grid() {
        for seed in 0..10 {
            let values = sample_values(seed, 60);
            let basis = build_spline_basis(&values, 5).unwrap();
            let (lo, hi) = basis.feature_range;
            let mut points: Vec<f64> = basis.knots.clone();
            points.extend((0..100).map(|i| (lo + (hi - lo) * i as f64 / 99.0).min(hi)));
            for x in points {
                let fast = basis.evaluate(x);
                for i in 0..basis.df {
                    let slow = cox_de_boor(&basis.knots, i, basis.degree, x, hi);
                    assert_abs_diff_eq!(fast[i], slow, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn linear_extension_outside_range() {
        let values = sample_values(3, 40);
        let basis = build_spline_basis(&values, 4).unwrap();
        let (lo, hi) = basis.feature_range;
        // Linear in x beyond each boundary: second differences vanish.
        for (edge, dir) in [(hi, 1.0), (lo, -1.0)] {
            let f = |t: f64| -> Vec<f64> { basis.evaluate(edge + dir * t) };
            let (a, b, c) = (f(0.5), f(1.0), f(1.5));
            for i in 0..basis.df {
                let second_diff = a[i] - 2.0 * b[i] + c[i];
                assert_abs_diff_eq!(second_diff, 0.0, epsilon = 1e-10);
            }
            // The unit sum survives extension.
            let sum: f64 = f(2.0).iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn few_distinct_values_step_down_df() {
        let values = vec![1.0, 1.0, 2.0, 2.0, 3.0];
        let basis = build_spline_basis(&values, 4).unwrap();
        assert_eq!(basis.df, 3);
        assert_eq!(basis.degree, 2);
        let sum: f64 = basis.evaluate(1.5).iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_values_collapse_to_constant_basis() {
        let basis = build_spline_basis(&[5.0; 20], 4).unwrap();
        assert_eq!(basis.df, 1);
        assert_eq!(basis.evaluate(5.0), vec![1.0]);
        assert_eq!(basis.evaluate(9.0), vec![1.0]);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(build_spline_basis(&[], 4).is_err());
        assert!(build_spline_basis(&[1.0, f64::NAN], 4).is_err());
    }
}
