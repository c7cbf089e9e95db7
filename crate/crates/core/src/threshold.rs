use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two bisection endpoints after convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Last parameter at which the predicate held.
    pub holds: f64,
    /// Last parameter at which it failed.
    pub fails: f64,
    pub evaluations: usize,
}

/// Bisects a monotone predicate on `[lo, hi]` until the endpoints are within
/// `width`. The predicate must differ at the two ends.
pub fn bisect(lo: f64, hi: f64, width: f64, mut predicate: impl FnMut(f64) -> Result<bool>) -> Result<Transition> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::OutOfRange(format!("bracket [{lo}, {hi}] is not an ordered interval")));
    }
    let at_lo = predicate(lo)?;
    let at_hi = predicate(hi)?;
    if at_lo == at_hi {
        return Err(Error::Bracket { lo, hi });
    }
    let (mut holds, mut fails) = if at_lo { (lo, hi) } else { (hi, lo) };
    let mut evaluations = 2;
    while (holds - fails).abs() > width {
        let mid = 0.5 * (holds + fails);
        evaluations += 1;
        if predicate(mid)? {
            holds = mid;
        } else {
            fails = mid;
        }
    }
    Ok(Transition { holds, fails, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_step() {
        let t = bisect(0.0, 1.0, 1e-6, |x| Ok(x <= 0.3)).unwrap();
        assert!((t.holds - 0.3).abs() < 1e-6 && t.holds <= 0.3 && t.fails > 0.3);
        let t = bisect(0.0, 1.0, 1e-6, |x| Ok(x > 0.7)).unwrap();
        assert!(t.holds > 0.7 && t.fails <= 0.7);
        assert!(matches!(bisect(0.0, 1.0, 1e-3, |_| Ok(true)), Err(Error::Bracket { .. })));
        assert!(bisect(1.0, 0.0, 1e-3, |_| Ok(true)).is_err());
    }
}
