use crate::geometry::fixtures::fubini_study_block;
use crate::geometry::Jet2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    Flat,
    FubiniStudy,
}

impl std::str::FromStr for BaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "flat" => Ok(BaseKind::Flat),
            "fubini-study" | "fs" => Ok(BaseKind::FubiniStudy),
            other => Err(format!("unknown base kind {other:?} (expected flat or fubini-study)")),
        }
    }
}

impl std::fmt::Display for BaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BaseKind::Flat => "flat",
            BaseKind::FubiniStudy => "fubini-study",
        })
    }
}

/// The Kähler–Einstein base `(N, h)` of complex dimension `m − 1` in one
/// affine chart, with real coordinates `(x_1, y_1, ...)`.
///
/// Fubini–Study is normalized with potential `½ log(1 + |z|²)`, so it is
/// Euclidean at the origin and has Einstein constant `2(dim + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseModel {
    pub kind: BaseKind,
    pub complex_dim: usize,
}

impl BaseModel {
    pub fn new(kind: BaseKind, complex_dim: usize) -> Self {
        Self { kind, complex_dim }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim
    }

    /// Einstein constant of `h`.
    pub fn kappa(&self) -> f64 {
        match self.kind {
            BaseKind::Flat => 0.0,
            BaseKind::FubiniStudy => 2.0 * (self.complex_dim as f64 + 1.0),
        }
    }

    /// Row-major components of `h`.
    pub fn metric(&self, x: &[Jet2]) -> Vec<Jet2> {
        match self.kind {
            BaseKind::Flat => {
                let d = x.len();
                (0..d * d)
                    .map(|i| Jet2::constant(if i / d == i % d { 1.0 } else { 0.0 }))
                    .collect()
            }
            BaseKind::FubiniStudy => fubini_study_block(x),
        }
    }

    /// `ρ` with `i∂∂̄ρ = s·ω_h`: `(s/2)|x|²` (flat) or `(s/2) log(1 + |x|²)`.
    pub fn rho(&self, x: &[Jet2], s: f64) -> Jet2 {
        let r2: Jet2 = x.iter().map(|&v| v * v).sum();
        match self.kind {
            BaseKind::Flat => r2 * (0.5 * s),
            BaseKind::FubiniStudy => (r2 + 1.0).ln() * (0.5 * s),
        }
    }

    /// `∂ρ/∂x_a` as jets.
    pub fn rho_gradient(&self, x: &[Jet2], s: f64) -> Vec<Jet2> {
        match self.kind {
            BaseKind::Flat => x.iter().map(|&v| v * s).collect(),
            BaseKind::FubiniStudy => {
                let r2: Jet2 = x.iter().map(|&v| v * v).sum();
                let inv = (r2 + 1.0).recip() * s;
                x.iter().map(|&v| v * inv).collect()
            }
        }
    }
}
