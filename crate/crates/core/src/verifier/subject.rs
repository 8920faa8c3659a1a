use std::sync::Arc;

use crate::builder::{ChartSampler, Construction, SkrChart};
use crate::geometry::{ChartPoint, ComplexStructure, MetricChart, ScalarField};

/// One sample: a chart, a point in it and whatever fields the checks need.
///
/// Different samples may use different charts of the same manifold.
#[derive(Clone)]
pub struct Site {
    pub chart: Arc<dyn MetricChart>,
    pub point: ChartPoint,
    pub tau: Option<Arc<dyn ScalarField>>,
    pub f: Option<Arc<dyn ScalarField>>,
    pub j: Option<Arc<dyn ComplexStructure>>,
    /// The bundle chart itself, for sites of a built construction.
    pub bundle: Option<Arc<SkrChart>>,
}

/// A deterministic source of sample sites.
pub trait Subject: Send + Sync {
    fn describe(&self) -> String;

    fn seed(&self) -> u64;

    /// The site with this index. May fail near domain edges; the runner then
    /// retries with a different index.
    fn site(&self, index: u64) -> Result<Site, String>;
}

/// A single chart sampled on the Halton points of a coordinate box, shrunk by
/// the sampling margin.
pub struct FixtureSubject {
    pub name: String,
    pub chart: Arc<dyn MetricChart>,
    pub tau: Option<Arc<dyn ScalarField>>,
    pub f: Option<Arc<dyn ScalarField>>,
    pub j: Option<Arc<dyn ComplexStructure>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    seed: u64,
    halton: crate::builder::Halton,
}

impl FixtureSubject {
    pub fn new(name: impl Into<String>, chart: Arc<dyn MetricChart>, lo: Vec<f64>, hi: Vec<f64>, seed: u64) -> Self {
        assert_eq!(lo.len(), chart.dim());
        assert_eq!(hi.len(), chart.dim());
        let halton = crate::builder::Halton::new(lo.len(), seed);
        Self {
            name: name.into(),
            chart,
            tau: None,
            f: None,
            j: None,
            lo,
            hi,
            seed,
            halton,
        }
    }

    pub fn with_tau(mut self, tau: Arc<dyn ScalarField>) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_f(mut self, f: Arc<dyn ScalarField>) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_j(mut self, j: Arc<dyn ComplexStructure>) -> Self {
        self.j = Some(j);
        self
    }
}

impl Subject for FixtureSubject {
    fn describe(&self) -> String {
        format!("{} ({})", self.name, self.chart.describe())
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn site(&self, index: u64) -> Result<Site, String> {
        let m = crate::builder::SAMPLE_MARGIN;
        let u = self.halton.point(index);
        let coords = (0..u.len())
            .map(|i| self.lo[i] + (self.hi[i] - self.lo[i]) * (m + (1.0 - 2.0 * m) * u[i]))
            .collect();
        let point = ChartPoint::new(coords).map_err(|e| e.to_string())?;
        Ok(Site {
            chart: self.chart.clone(),
            point,
            tau: self.tau.clone(),
            f: self.f.clone(),
            j: self.j.clone(),
            bundle: None,
        })
    }
}

/// The samples of a built bundle metric: each site uses the chart adapted to
/// its base point and level.
pub struct ConstructionSubject<'a> {
    pub construction: &'a Construction,
    sampler: ChartSampler,
    seed: u64,
}

impl<'a> ConstructionSubject<'a> {
    pub fn new(construction: &'a Construction, seed: u64) -> Self {
        Self {
            construction,
            sampler: construction.sampler(seed),
            seed,
        }
    }
}

impl Subject for ConstructionSubject<'_> {
    fn describe(&self) -> String {
        self.construction.chart.describe()
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn site(&self, index: u64) -> Result<Site, String> {
        let spec = self.sampler.sample(index);
        let (chart, point) = self.construction.site(&spec).map_err(|e| e.to_string())?;
        Ok(Site {
            tau: Some(chart.tau_field()),
            f: Some(chart.f_field(self.construction.k())),
            j: Some(Arc::new(chart.complex_structure())),
            chart: chart.clone(),
            bundle: Some(chart),
            point,
        })
    }
}
