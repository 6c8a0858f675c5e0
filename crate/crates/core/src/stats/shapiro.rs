use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{Method, PMode, StatsError, TestResult};

pub const SHAPIRO_MAX_N: usize = 5000;

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Upper-half coefficients a_1..a_{n/2} (largest first).
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let std_normal = Normal::standard();
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=half)
        .map(|i| std_normal.inverse_cdf((i as f64 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let mut a = vec![0.0; half];
    a[0] = a1;
    let (start, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in start..half {
        a[i] = -m[i] / fac;
    }
    a
}

/// Shapiro-Wilk W with Royston's normalizing approximation for p.
pub fn shapiro_wilk(x: &[f64]) -> Result<TestResult, StatsError> {
    let n = x.len();
    if !(3..=SHAPIRO_MAX_N).contains(&n) {
        return Err(StatsError::SampleSizeOutOfRange(n));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteValue(i));
    }
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let range = xs[n - 1] - xs[0];
    if range <= 0.0 || range < 1e-19 * xs[n - 1].abs().max(1.0) {
        return Err(StatsError::ZeroVariance);
    }
    // centre on the middle order statistic before scaling, which keeps the
    // sums well conditioned for data far from zero
    let centre = xs[n / 2];
    for v in &mut xs {
        *v = (*v - centre) / range;
    }

    let half = coefficients(n);
    // full antisymmetric coefficient vector, ascending order statistics
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        if i < j {
            -half[i]
        } else if i > j {
            half[j]
        } else {
            0.0
        }
    };
    let nn = n as f64;
    let sa = (0..n).map(coef).sum::<f64>() / nn;
    let sx = xs.iter().sum::<f64>() / nn;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, &v) in xs.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = v - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    // 1 - W, computed without cancellation when W is close to 1
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p = if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::FRAC_PI_3;
        (pi6 * (w.sqrt().asin() - stqr)).max(0.0)
    } else {
        let y = w1.ln();
        let lnn = nn.ln();
        let (y, m, s) = if n <= 11 {
            let gamma = poly(&G, nn);
            if y >= gamma {
                // W this small is off the approximation's scale
                return Ok(result(w, 1e-99, n));
            }
            (-(gamma - y).ln(), poly(&C3, nn), poly(&C4, nn).exp())
        } else {
            (y, poly(&C5, lnn), poly(&C6, lnn).exp())
        };
        Normal::new(m, s).expect("positive scale").sf(y)
    };
    Ok(result(w, p.clamp(0.0, 1.0), n))
}

fn result(w: f64, p: f64, n: usize) -> TestResult {
    TestResult {
        method: Method::ShapiroWilk,
        statistic: w,
        aux: BTreeMap::from([("W", w)]),
        p_value: p,
        mode: PMode::RoystonApprox,
        n: vec![n],
    }
}
