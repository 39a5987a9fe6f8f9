use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Monotone map from queue length to contention aggressiveness.
#[derive(Clone)]
pub enum WeightFunction {
    /// `0.5 * ln(1 + x)`
    HalfLog,
    /// `ln(1 + x)`
    Log1p,
    /// `sqrt(x)`
    Sqrt,
    /// `x`
    Linear,
    /// User-supplied map; must be nonnegative and strictly increasing on `[0, inf)`.
    Custom(CustomWeight),
}

#[derive(Clone)]
pub struct CustomWeight {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomWeight {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomWeight {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::Custom(c) => write!(f, "Custom({})", c.name),
            other => f.write_str(other.name()),
        }
    }
}

impl PartialEq for WeightFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (WeightFunction::Custom(a), WeightFunction::Custom(b)) => Arc::ptr_eq(&a.f, &b.f),
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl WeightFunction {
    pub const NAMED: [WeightFunction; 4] = [
        WeightFunction::HalfLog,
        WeightFunction::Log1p,
        WeightFunction::Sqrt,
        WeightFunction::Linear,
    ];

    pub fn name(&self) -> &str {
        match self {
            WeightFunction::HalfLog => "halflog",
            WeightFunction::Log1p => "log1p",
            WeightFunction::Sqrt => "sqrt",
            WeightFunction::Linear => "linear",
            WeightFunction::Custom(c) => &c.name,
        }
    }

    /// Parses one of the named kinds (`halflog`, `log1p`, `sqrt`, `linear`).
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "halflog" => Some(WeightFunction::HalfLog),
            "log1p" => Some(WeightFunction::Log1p),
            "sqrt" => Some(WeightFunction::Sqrt),
            "linear" => Some(WeightFunction::Linear),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightFunction::HalfLog => 0.5 * x.ln_1p(),
            WeightFunction::Log1p => x.ln_1p(),
            WeightFunction::Sqrt => x.sqrt(),
            WeightFunction::Linear => x,
            WeightFunction::Custom(c) => (c.f)(x),
        }
    }

    /// Smallest `x >= 0` with `f(x) = y`, for `y >= f(0)`.
    fn inverse(&self, y: f64) -> f64 {
        match self {
            WeightFunction::HalfLog => (2.0 * y).exp_m1(),
            WeightFunction::Log1p => y.exp_m1(),
            WeightFunction::Sqrt => y * y,
            WeightFunction::Linear => y,
            WeightFunction::Custom(_) => {
                let mut hi = 1.0;
                while self.eval(hi) < y {
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return f64::INFINITY;
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.eval(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

pub fn weight_eval(f: &WeightFunction, x: f64) -> f64 {
    f.eval(x)
}

/// A probability in `(0, 1)` stored as its log-odds. Keeping the logit
/// avoids saturation at 1.0 for steep weight functions, so
/// [`tx_prob_inverse`] recovers the queue length exactly.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TxProb {
    logit: f64,
}

impl TxProb {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityDomain(p));
        }
        Ok(TxProb {
            logit: p.ln() - (-p).ln_1p(),
        })
    }

    pub fn from_logit(logit: f64) -> Self {
        TxProb { logit }
    }

    pub fn logit(self) -> f64 {
        self.logit
    }

    pub fn value(self) -> f64 {
        1.0 / (1.0 + (-self.logit).exp())
    }

    pub fn complement(self) -> f64 {
        1.0 / (1.0 + self.logit.exp())
    }
}

/// Logistic transmission probability `e^f(q) / (1 + e^f(q))`.
pub fn tx_prob(f: &WeightFunction, q: u64) -> TxProb {
    TxProb::from_logit(f.eval(q as f64))
}

/// The queue length at which the transmission probability equals `p`.
/// Probabilities below `tx_prob(f, 0)` clamp to 0.
pub fn tx_prob_inverse(f: &WeightFunction, p: TxProb) -> f64 {
    let y = p.logit();
    if y <= f.eval(0.0) {
        0.0
    } else {
        f.inverse(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds() -> Vec<WeightFunction> {
        let mut v = WeightFunction::NAMED.to_vec();
        v.push(WeightFunction::Custom(CustomWeight::new(
            "cube-root",
            |x: f64| x.cbrt(),
        )));
        v
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_eval(&WeightFunction::Log1p, 0.0), 0.0);
        assert_eq!(weight_eval(&WeightFunction::Sqrt, 4.0), 2.0);
        let x = std::f64::consts::E.powi(2) - 1.0;
        assert!((weight_eval(&WeightFunction::HalfLog, x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tx_prob_examples() {
        assert_eq!(tx_prob(&WeightFunction::Log1p, 0).value(), 0.5);
        assert!((tx_prob(&WeightFunction::Log1p, 2).value() - 0.75).abs() < 1e-15);
        assert_eq!(tx_prob(&WeightFunction::Linear, 0).value(), 0.5);
    }

    #[test]
    fn log1p_tx_prob_matches_rational_form() {
        for q in 0..500u64 {
            let want = (1.0 + q as f64) / (2.0 + q as f64);
            assert!((tx_prob(&WeightFunction::Log1p, q).value() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn tx_prob_inverse_examples() {
        let half = TxProb::new(0.5).unwrap();
        assert_eq!(tx_prob_inverse(&WeightFunction::Log1p, half), 0.0);
        let p = TxProb::new(0.9).unwrap();
        let oracle = (2.0 * 0.9 - 1.0) / (1.0 - 0.9);
        assert!((tx_prob_inverse(&WeightFunction::Log1p, p) - oracle).abs() < 1e-12);
        assert!((oracle - 8.0).abs() < 1e-12);
    }

    #[test]
    fn tx_prob_inverse_clamps_below_p0() {
        let f = WeightFunction::Custom(CustomWeight::new("shifted", |x: f64| 1.0 + x));
        let p = TxProb::new(0.6).unwrap();
        assert!(p.logit() < 1.0);
        assert_eq!(tx_prob_inverse(&f, p), 0.0);
    }

    #[test]
    fn domain_errors() {
        for p in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(TxProb::new(p).is_err());
        }
    }

    #[test]
    fn inverse_round_trip_all_kinds() {
        for f in all_kinds() {
            for q in 0..=100u64 {
                let back = tx_prob_inverse(&f, tx_prob(&f, q));
                assert!((back - q as f64).abs() < 1e-9, "{f:?} q={q} back={back}");
            }
        }
    }

    #[test]
    fn tx_prob_strictly_increasing() {
        for f in all_kinds() {
            for q in 0..200u64 {
                assert!(
                    tx_prob(&f, q + 1).logit() > tx_prob(&f, q).logit(),
                    "{f:?} {q}"
                );
            }
            assert_eq!(tx_prob(&f, 0).value(), 0.5);
        }
    }

    #[test]
    fn steep_weight_does_not_overflow() {
        let p = tx_prob(&WeightFunction::Linear, 5000);
        assert_eq!(p.value(), 1.0);
        assert_eq!(p.complement(), 0.0);
        assert!(!p.value().is_nan());
    }

    #[test]
    fn names_parse() {
        for f in WeightFunction::NAMED {
            assert_eq!(WeightFunction::from_name(f.name()), Some(f.clone()));
        }
        assert_eq!(WeightFunction::from_name("cubic"), None);
    }
}
