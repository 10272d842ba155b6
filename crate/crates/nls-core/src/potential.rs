//! Slowly varying coefficient `a(r)`, evaluated at the slow variable `r = εx`.
//!
//! The family is `a(r) = (a- + a+)/2 + (a+ - a-)/2 * tanh(μ r)`.

use crate::error::{NlsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSpec {
    pub direction: Direction,
    pub epsilon: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub steepness: f64,
}

impl PotentialSpec {
    /// Increasing step `1 -> 2` with unit steepness.
    pub fn increasing(epsilon: f64) -> Self {
        PotentialSpec { direction: Direction::Increasing, epsilon, a_minus: 1.0, a_plus: 2.0, steepness: 1.0 }
    }

    /// Decreasing step `1 -> a0` with unit steepness.
    pub fn decreasing(epsilon: f64, a0: f64) -> Self {
        PotentialSpec { direction: Direction::Decreasing, epsilon, a_minus: 1.0, a_plus: a0, steepness: 1.0 }
    }

    /// Constant coefficient `a ≡ level`.
    pub fn uniform(level: f64) -> Self {
        PotentialSpec {
            direction: Direction::Increasing,
            epsilon: 0.05,
            a_minus: level,
            a_plus: level,
            steepness: 1.0,
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.a_minus == self.a_plus
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.epsilon > 0.0
            && self.epsilon < 1.0
            && self.a_minus > 0.0
            && self.a_plus > 0.0
            && self.steepness > 0.0
            && [self.epsilon, self.a_minus, self.a_plus, self.steepness].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(NlsError::InvalidParameter(format!("bad potential {self:?}")))
        }
    }

    /// `a^{(order)}(r)` for `order <= 3`.
    pub fn eval(&self, r: f64, order: u8) -> f64 {
        let h = 0.5 * (self.a_plus - self.a_minus);
        let mu = self.steepness;
        let z = mu * r;
        let s = z.tanh();
        let sech2 = if z.abs() > 350.0 { 0.0 } else { 1.0 / z.cosh().powi(2) };
        match order {
            0 => 0.5 * (self.a_minus + self.a_plus) + h * s,
            1 => h * mu * sech2,
            2 => -2.0 * h * mu * mu * s * sech2,
            3 => -2.0 * h * mu.powi(3) * sech2 * (1.0 - 3.0 * s * s),
            _ => panic!("derivative order {order} not supported"),
        }
    }

    /// `a(εx)` at physical position `x`.
    pub fn at(&self, x: f64) -> f64 {
        self.eval(self.epsilon * x, 0)
    }

    /// Limit value approached as `r -> -∞` or `+∞`.
    pub fn limit(&self, plus: bool) -> f64 {
        if plus {
            self.a_plus
        } else {
            self.a_minus
        }
    }

    /// Distance `r` beyond which `|a(r) - a±| < tol * |a+ - a-|`.
    pub fn flat_radius(&self, tol: f64) -> f64 {
        // 1 - tanh(z) ≈ 2 e^{-2z}
        (2.0 / tol).ln() / (2.0 * self.steepness)
    }
}

/// `a^{(order)}(r)`.
pub fn eval_potential(spec: &PotentialSpec, r: f64, order: u8) -> f64 {
    spec.eval(r, order)
}

#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub valid: bool,
    pub violations: Vec<String>,
    /// Fitted exponential decay rates of `|a'|, |a''|, |a'''|` in the tails.
    pub decay_rates: [f64; 3],
    pub expected_rate: f64,
}

/// Check monotonicity, strict bounds and exponential flatness of `a` on `range`.
pub fn validate_hypotheses(spec: &PotentialSpec, range: (f64, f64)) -> Result<HypothesisReport> {
    let mu = spec.steepness;
    if !(range.0 <= -20.0 / mu && range.1 >= 20.0 / mu) {
        return Err(NlsError::InvalidParameter(format!(
            "sample range {range:?} must cover [-20/μ, 20/μ]"
        )));
    }
    let mut violations = Vec::new();
    let (lo, hi) = match spec.direction {
        Direction::Increasing => (spec.a_minus, spec.a_plus),
        Direction::Decreasing => (spec.a_plus, spec.a_minus),
    };
    if !(lo < hi) {
        violations.push(format!(
            "limits not ordered for {:?}: a_minus = {}, a_plus = {}",
            spec.direction, spec.a_minus, spec.a_plus
        ));
    }
    let samples = 4001;
    let step = (range.1 - range.0) / (samples - 1) as f64;
    let mut sign_bad = 0usize;
    let mut bound_bad = 0usize;
    for i in 0..samples {
        let r = range.0 + i as f64 * step;
        let d1 = spec.eval(r, 1);
        let a = spec.eval(r, 0);
        let sign_ok = match spec.direction {
            Direction::Increasing => d1 > 0.0,
            Direction::Decreasing => d1 < 0.0,
        };
        // deep in the tails a' underflows; only demand the sign where it is representable
        if !sign_ok && (mu * r).abs() < 300.0 {
            sign_bad += 1;
        }
        if !(a > lo && a < hi) && (mu * r).abs() < 15.0 {
            bound_bad += 1;
        }
    }
    if sign_bad > 0 {
        violations.push(format!("a' has the wrong sign at {sign_bad} samples"));
    }
    if bound_bad > 0 {
        violations.push(format!("a leaves ({lo}, {hi}) at {bound_bad} samples"));
    }

    let expected_rate = 2.0 * mu;
    let mut decay_rates = [0.0; 3];
    for (idx, order) in [1u8, 2, 3].into_iter().enumerate() {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..200)
            .flat_map(|i| {
                let r = (4.0 + 12.0 * i as f64 / 199.0) / mu;
                [r, -r]
            })
            .filter_map(|r| {
                let v = spec.eval(r, order).abs();
                (v > 0.0).then(|| (r.abs(), v.ln()))
            })
            .unzip();
        decay_rates[idx] = if xs.len() > 2 { -slope(&xs, &ys) } else { 0.0 };
        if !(decay_rates[idx] >= 0.9 * expected_rate) {
            violations.push(format!(
                "a^({order}) decays at rate {:.4} < 0.9 * {:.4}",
                decay_rates[idx], expected_rate
            ));
        }
    }
    Ok(HypothesisReport { valid: violations.is_empty(), violations, decay_rates, expected_rate })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
