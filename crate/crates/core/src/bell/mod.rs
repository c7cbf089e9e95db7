//! Two-outcome Bell inequalities in correlator form
//!
//! ```text
//! I = Σ_xy γ_xy ⟨A_x B_y⟩ + Σ_x α_x ⟨A_x⟩ + Σ_y β_y ⟨B_y⟩ ≤ 1
//! ```
//!
//! with local bounds by enumeration, see-saw lower bounds on the quantum value
//! for fixed Alice measurements, and analytic no-violation certificates.

mod certificate;
mod seesaw;

pub use certificate::{no_violation_certificate, no_violation_certificate_for, CertificatePath, NoViolationCertificate, K3};
pub use seesaw::{
    bell_operator, bell_threshold, bell_threshold_over_relabelings, correlators_from_quantum, seesaw_optimize,
    BellThreshold, SeesawConfig, SeesawResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n_a + n_b` for which the local bound is enumerated.
pub const ENUMERATION_CAP_BITS: usize = 24;

/// Relative agreement required between a declared and an enumerated bound.
const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellInequality {
    pub name: String,
    pub n_a: usize,
    pub n_b: usize,
    /// `gamma[x][y]` multiplies `⟨A_x B_y⟩`.
    pub gamma: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub local_bound: f64,
}

/// Catalog file entry. The loader rescales the coefficients so that the
/// enumerated local bound is 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub gamma: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub claimed_bound: Option<f64>,
}

impl BellInequality {
    /// Validates shapes and computes the local bound by enumeration.
    pub fn new(name: impl Into<String>, gamma: Vec<Vec<f64>>, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let n_a = alpha.len();
        let n_b = beta.len();
        if n_a == 0 || n_b == 0 {
            return Err(Error::Parse("alpha and beta must be non-empty".into()));
        }
        if gamma.len() != n_a {
            return Err(Error::Parse(format!("gamma has {} rows, alpha has {n_a} entries", gamma.len())));
        }
        if let Some((x, row)) = gamma.iter().enumerate().find(|(_, r)| r.len() != n_b) {
            return Err(Error::Parse(format!("gamma row {x} has {} entries, beta has {n_b}", row.len())));
        }
        if gamma.iter().flatten().chain(&alpha).chain(&beta).any(|c| !c.is_finite()) {
            return Err(Error::Parse("non-finite coefficient".into()));
        }
        let mut ineq = Self { name: name.into(), n_a, n_b, gamma, alpha, beta, local_bound: f64::NAN };
        ineq.local_bound = ineq.local_bound()?;
        Ok(ineq)
    }

    /// Builds from a catalog entry, rejects a claimed bound that disagrees with
    /// enumeration and rescales to local bound 1.
    pub fn from_catalog(entry: CatalogEntry) -> Result<Self> {
        let raw = Self::new(entry.name, entry.gamma, entry.alpha, entry.beta)?;
        if let Some(claimed) = entry.claimed_bound {
            if (raw.local_bound - claimed).abs() > BOUND_TOL * claimed.abs().max(1.0) {
                return Err(Error::InvalidInequality(format!(
                    "{}: claimed local bound {claimed} but enumeration gives {}",
                    raw.name, raw.local_bound
                )));
            }
        }
        raw.normalized()
    }

    /// Rescaled copy with local bound 1.
    pub fn normalized(&self) -> Result<Self> {
        let b = self.local_bound;
        if !(b > 0.0) {
            return Err(Error::InvalidInequality(format!("{}: local bound {b} cannot be normalized to 1", self.name)));
        }
        Self::new(
            self.name.clone(),
            self.gamma.iter().map(|r| r.iter().map(|g| g / b).collect()).collect(),
            self.alpha.iter().map(|a| a / b).collect(),
            self.beta.iter().map(|v| v / b).collect(),
        )
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "chsh" => Self::new("chsh", vec![vec![0.5, 0.5], vec![0.5, -0.5]], vec![0.0; 2], vec![0.0; 2]),
            "i3322" => Self::new(
                "i3322",
                vec![vec![0.25, 0.25, 0.25], vec![0.25, 0.25, -0.25], vec![0.25, -0.25, 0.0]],
                vec![-0.25, -0.25, 0.0],
                vec![0.25, 0.25, 0.0],
            ),
            "chained3" => Self::new(
                "chained3",
                vec![vec![0.25, 0.0, -0.25], vec![0.25, 0.25, 0.0], vec![0.0, 0.25, 0.25]],
                vec![0.0; 3],
                vec![0.0; 3],
            ),
            other => Err(Error::Parse(format!("unknown builtin inequality {other:?}"))),
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["chsh", "i3322", "chained3"]
    }

    /// `α = β = 0`.
    pub fn is_full_correlation(&self) -> bool {
        self.alpha.iter().chain(&self.beta).all(|c| *c == 0.0)
    }

    /// `Σ_xy γ_xy a_x b_y + Σ α_x a_x + Σ β_y b_y` for deterministic `±1` outputs.
    pub fn deterministic_value(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut v: f64 = self.beta.iter().zip(b).map(|(beta, by)| beta * by).sum();
        for (x, ax) in a.iter().enumerate() {
            let row: f64 = self.gamma[x].iter().zip(b).map(|(g, by)| g * by).sum();
            v += ax * (row + self.alpha[x]);
        }
        v
    }

    /// Exact maximum over all `2^{n_a + n_b}` deterministic strategies.
    pub fn local_bound(&self) -> Result<f64> {
        let bits = self.n_a + self.n_b;
        if bits > ENUMERATION_CAP_BITS {
            return Err(Error::CapExceeded { what: "deterministic strategy bits", value: bits, cap: ENUMERATION_CAP_BITS });
        }
        let mut best = f64::NEG_INFINITY;
        for sa in 0u64..1 << self.n_a {
            let a = signs(sa, self.n_a);
            for sb in 0u64..1 << self.n_b {
                best = best.max(self.deterministic_value(&a, &signs(sb, self.n_b)));
            }
        }
        Ok(best)
    }

    /// Local bound by enumerating Bob's strategies only, with Alice answering
    /// `a_x = sign(α_x + Σ_y γ_xy b_y)` for each.
    pub fn local_bound_by_bob(&self) -> Result<f64> {
        if self.n_b > ENUMERATION_CAP_BITS {
            return Err(Error::CapExceeded { what: "Bob strategy bits", value: self.n_b, cap: ENUMERATION_CAP_BITS });
        }
        let mut best = f64::NEG_INFINITY;
        for sb in 0u64..1 << self.n_b {
            let b = signs(sb, self.n_b);
            let bob: f64 = self.beta.iter().zip(&b).map(|(v, by)| v * by).sum();
            let alice: f64 = (0..self.n_a)
                .map(|x| (self.alpha[x] + self.gamma[x].iter().zip(&b).map(|(g, by)| g * by).sum::<f64>()).abs())
                .sum();
            best = best.max(bob + alice);
        }
        Ok(best)
    }

    /// Flips Alice's outcome labels on the settings in `flips` (bit `x`).
    pub fn flip_alice(&self, flips: u64) -> Self {
        let s = |x: usize| if flips >> x & 1 == 1 { -1.0 } else { 1.0 };
        let mut out = self.clone();
        for x in 0..self.n_a {
            out.alpha[x] *= s(x);
            out.gamma[x].iter_mut().for_each(|g| *g *= s(x));
        }
        out
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn swap_parties(&self) -> Self {
        Self {
            name: self.name.clone(),
            n_a: self.n_b,
            n_b: self.n_a,
            gamma: (0..self.n_b).map(|y| (0..self.n_a).map(|x| self.gamma[x][y]).collect()).collect(),
            alpha: self.beta.clone(),
            beta: self.alpha.clone(),
            local_bound: self.local_bound,
        }
    }

    /// All Alice outcome relabelings, and their party swaps when the inequality
    /// is square. Every member has the same local bound.
    pub fn relabelings(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for flips in 0u64..1 << self.n_a {
            let f = self.flip_alice(flips);
            if self.n_a == self.n_b {
                out.push(f.swap_parties());
            }
            out.push(f);
        }
        out
    }

    pub fn evaluate(&self, c: &Correlators) -> Result<f64> {
        if c.a.len() != self.n_a || c.b.len() != self.n_b || c.ab.len() != self.n_a || c.ab.iter().any(|r| r.len() != self.n_b) {
            return Err(Error::DimensionMismatch("correlator table does not match the inequality".into()));
        }
        let mut v = 0.0;
        for x in 0..self.n_a {
            v += self.alpha[x] * c.a[x];
            for y in 0..self.n_b {
                v += self.gamma[x][y] * c.ab[x][y];
            }
        }
        v += self.beta.iter().zip(&c.b).map(|(b, e)| b * e).sum::<f64>();
        Ok(v)
    }
}

fn signs(bits: u64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if bits >> k & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// `evaluate(ineq, c)`.
pub fn evaluate(ineq: &BellInequality, c: &Correlators) -> Result<f64> {
    ineq.evaluate(c)
}

/// `builtin name` or `file:<path>` holding one catalog entry.
pub fn load_inequality(source: &str) -> Result<BellInequality> {
    match source.strip_prefix("file:") {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let entry: CatalogEntry = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
            BellInequality::from_catalog(entry)
        }
        None => BellInequality::builtin(source),
    }
}

/// Expectation values `⟨A_x B_y⟩`, `⟨A_x⟩`, `⟨B_y⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlators {
    pub ab: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Correlators {
    pub fn new(ab: Vec<Vec<f64>>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if ab.iter().flatten().chain(&a).chain(&b).any(|v| !(v.abs() <= 1.0 + crate::tolerance::TOL.assertion)) {
            return Err(Error::OutOfRange("correlators must lie in [-1, 1]".into()));
        }
        Ok(Self { ab, a, b })
    }
}
