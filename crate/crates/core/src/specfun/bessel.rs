use super::{invalid, SpecFunError};

/// Above this argument the scaled functions switch from the power series to
/// the large-argument asymptotic expansion.
const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

/// Exponentially scaled modified Bessel function `exp(-z) I_order(z)`, `z >= 0`.
pub fn bessel_i_scaled(order: u32, z: f64) -> Result<f64, SpecFunError> {
    if !z.is_finite() || z < 0.0 {
        return Err(invalid(
            "bessel_i_scaled",
            format!("z must be finite and >= 0, got {z}"),
        ));
    }
    if z == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if z <= ASYMPTOTIC_THRESHOLD {
        Ok(power_series(order, z) * (-z).exp())
    } else {
        Ok(asymptotic_scaled(order, z))
    }
}

/// Modified Bessel function of the first kind `I_order(z)`, `z >= 0`.
///
/// Returns [`SpecFunError::Overflow`] once `I_order(z)` leaves the `f64`
/// range; use [`bessel_i_scaled`] for large arguments.
pub fn bessel_i(order: u32, z: f64) -> Result<f64, SpecFunError> {
    if !z.is_finite() || z < 0.0 {
        return Err(invalid(
            "bessel_i",
            format!("z must be finite and >= 0, got {z}"),
        ));
    }
    if z <= ASYMPTOTIC_THRESHOLD {
        return Ok(if z == 0.0 {
            if order == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            power_series(order, z)
        });
    }
    let scaled = asymptotic_scaled(order, z);
    // exp(z) may overflow on its own while the product is still representable.
    let ln = scaled.ln() + z;
    if ln >= f64::MAX.ln() {
        return Err(SpecFunError::Overflow {
            function: "bessel_i",
            argument: z,
        });
    }
    Ok(ln.exp())
}

// sum_k (z/2)^(2k+order) / (k! (k+order)!), all terms positive.
fn power_series(order: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = 1.0;
    for j in 1..=order {
        term *= half / j as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term <= sum * f64::EPSILON * 0.25 {
            break;
        }
    }
    sum
}

// exp(-z) I_v(z) ~ (2 pi z)^(-1/2) sum_k (-1)^k prod_{j<=k} (4v^2 - (2j-1)^2) / (k! (8z)^k)
fn asymptotic_scaled(order: u32, z: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * f64::EPSILON * 0.25 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Scaled sequence `exp(-z) I_k(z)` for `k = 0..=kmax` by Miller's backward
/// recurrence, normalised with `I_0 + 2 sum_{k>=1} I_k = exp(z)`.
pub fn bessel_i_scaled_sequence(z: f64, kmax: usize) -> Result<Vec<f64>, SpecFunError> {
    if !z.is_finite() || z < 0.0 {
        return Err(invalid(
            "bessel_i_scaled_sequence",
            format!("z must be finite and >= 0, got {z}"),
        ));
    }
    let mut out = vec![0.0; kmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if z < 1.0 {
        // recurrence seeds would overflow as 2k/z blows up; the series is short here
        let scale = (-z).exp();
        for (k, v) in out.iter_mut().enumerate() {
            *v = power_series(k as u32, z) * scale;
        }
        return Ok(out);
    }
    if z > 1e4 && (kmax as f64) < 0.1 * z.sqrt() {
        // all requested orders sit deep in the large-argument regime
        for (k, v) in out.iter_mut().enumerate() {
            *v = asymptotic_scaled(k as u32, z);
        }
        return Ok(out);
    }
    let start = kmax + 16 + (9.0 * z.sqrt()).ceil() as usize;
    const BIG: f64 = 1e250;
    let two_over_z = 2.0 / z;
    let mut above = 0.0; // I_{k+1}
    let mut current = 1e-280; // I_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = above + k as f64 * two_over_z * current;
        if k <= kmax {
            out[k] = current;
        }
        norm += 2.0 * current;
        above = current;
        current = below;
        if current > BIG {
            above /= BIG;
            current /= BIG;
            norm /= BIG;
            for v in out.iter_mut().skip(k) {
                *v /= BIG;
            }
        }
    }
    out[0] = current;
    norm += current;
    for v in &mut out {
        *v /= norm;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Independent oracle: direct power series summed to 1e-16 with explicit factorials.
    fn series_oracle(order: u32, z: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..200u32 {
            let mut t = 1.0;
            for j in 1..=k {
                t *= (z / 2.0) * (z / 2.0) / (j as f64 * j as f64);
            }
            // divide by (k+1)...(k+order) and multiply (z/2)^order
            for j in 1..=order {
                t *= (z / 2.0) / (k + j) as f64;
            }
            sum += t;
            if k > 5 && t < sum * 1e-17 {
                break;
            }
        }
        sum
    }

    #[test]
    fn small_argument_values() {
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            bessel_i(0, 1.0).unwrap(),
            1.2660658777520082,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            bessel_i(0, 1.0).unwrap(),
            series_oracle(0, 1.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn matches_series_oracle_across_branches() {
        for order in 0..=2 {
            for &z in &[0.01, 0.5, 3.0, 10.0, 24.9, 25.1, 30.0, 40.0, 60.0] {
                let want = series_oracle(order, z);
                assert_relative_eq!(bessel_i(order, z).unwrap(), want, max_relative = 1e-13);
                assert_relative_eq!(
                    bessel_i_scaled(order, z).unwrap(),
                    want * (-z).exp(),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            bessel_i(0, 800.0),
            Err(SpecFunError::Overflow { .. })
        ));
        assert!(bessel_i_scaled(0, 800.0).unwrap() > 0.0);
        assert!(bessel_i(0, -1.0).is_err());
    }

    #[test]
    fn monotone_in_z() {
        for order in 0..=2 {
            let mut last = -1.0;
            for i in 0..200 {
                let v = bessel_i(order, i as f64 * 0.3).unwrap();
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn miller_sequence_agrees_with_direct_evaluation() {
        for &z in &[
            1e-200, 1e-12, 1e-3, 0.4, 0.999, 1.0, 2.0, 7.5, 24.0, 26.0, 80.0, 400.0, 5000.0,
        ] {
            let seq = bessel_i_scaled_sequence(z, 4).unwrap();
            for order in 0..=2u32 {
                let direct = bessel_i_scaled(order, z).unwrap();
                if direct > 1e-280 {
                    assert_relative_eq!(seq[order as usize], direct, max_relative = 1e-12);
                }
            }
        }
        let seq = bessel_i_scaled_sequence(0.0, 3).unwrap();
        assert_eq!(seq, vec![1.0, 0.0, 0.0, 0.0]);
    }
}
