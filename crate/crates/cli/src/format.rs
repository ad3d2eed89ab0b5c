//! JSON file formats for instances, norms, solutions and distributions.
//!
//! Reals are written as decimal strings (`"inf"` for a forbidden entry) and
//! read back from either strings or plain JSON numbers. Dense matrices are
//! flat, row-major arrays.

use std::path::Path;

use maxnorm::fair::SolutionDistribution;
use maxnorm::{
    Assignment, ClusterInstance, ClusterSolution, Error, FacilityConstraint, FairClusterInstance, FairLoadInstance,
    Knapsack, LoadInstance, Norm, PartitionMatroid, Result,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A real number as it appears in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Text(String),
    Number(f64),
}

impl Real {
    pub fn value(&self) -> Result<f64> {
        match self {
            Real::Number(x) => Ok(*x),
            Real::Text(s) => match s.trim() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                t => t.parse().map_err(|_| Error::InvalidInput(format!("not a decimal number: {s:?}"))),
            },
        }
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::Text(decimal(x))
    }
}

/// Shortest decimal string that parses back to `x`.
pub fn decimal(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == 0.0 {
        // also folds -0
        "0".into()
    } else {
        format!("{x}")
    }
}

pub fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().map(|&x| x.into()).collect()
}

fn values(xs: &[Real]) -> Result<Vec<f64>> {
    xs.iter().map(Real::value).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Load,
    FairLoad,
    Cluster,
    FairCluster,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sizes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machines: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clients: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facilities: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: Kind,
    pub sizes: Sizes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Real>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wt: Option<Vec<Real>>,
    #[serde(rename = "W", skip_serializing_if = "Option::is_none")]
    pub budget: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<usize>>,
}

/// A parsed instance of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Load(LoadInstance),
    FairLoad(FairLoadInstance),
    Cluster(ClusterInstance),
    FairCluster(FairClusterInstance),
}

fn field<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("instance is missing field {name:?}")))
}

impl InstanceFile {
    pub fn parse(&self) -> Result<Instance> {
        match self.kind {
            Kind::Load | Kind::FairLoad => {
                let machines = field(self.sizes.machines, "sizes.machines")?;
                let jobs = field(self.sizes.jobs, "sizes.jobs")?;
                let base = LoadInstance::new(machines, jobs, values(field(self.p.as_ref(), "p")?)?)?;
                if self.kind == Kind::Load {
                    return Ok(Instance::Load(base));
                }
                Ok(Instance::FairLoad(FairLoadInstance::new(base, values(field(self.e.as_ref(), "e")?)?)?))
            }
            Kind::Cluster | Kind::FairCluster => {
                let clients = field(self.sizes.clients, "sizes.clients")?;
                let facilities = field(self.sizes.facilities, "sizes.facilities")?;
                let d = values(field(self.d.as_ref(), "d")?)?;
                let constraint = match (&self.wt, &self.parts) {
                    (Some(_), Some(_)) => return Err(Error::InvalidInput("give either wt/W or parts/caps, not both".into())),
                    (Some(wt), None) => FacilityConstraint::Knapsack(Knapsack {
                        weights: values(wt)?,
                        budget: field(self.budget.as_ref(), "W")?.value()?,
                    }),
                    (None, Some(parts)) => FacilityConstraint::Partition(PartitionMatroid::new(
                        facilities,
                        parts.clone(),
                        field(self.caps.clone(), "caps")?,
                    )?),
                    (None, None) => FacilityConstraint::Cardinality(field(self.k, "k")?),
                };
                let base = ClusterInstance::with_constraint(
                    clients,
                    facilities,
                    d,
                    constraint,
                    self.m.unwrap_or(0),
                    field(self.l.clone(), "l")?,
                    field(self.r.clone(), "r")?,
                )?;
                if self.kind == Kind::Cluster {
                    return Ok(Instance::Cluster(base));
                }
                Ok(Instance::FairCluster(FairClusterInstance::new(base, values(field(self.e.as_ref(), "e")?)?)?))
            }
        }
    }

    fn empty(kind: Kind, sizes: Sizes) -> Self {
        InstanceFile {
            kind,
            sizes,
            p: None,
            d: None,
            k: None,
            m: None,
            l: None,
            r: None,
            e: None,
            wt: None,
            budget: None,
            parts: None,
            caps: None,
        }
    }

    fn load(inst: &LoadInstance, kind: Kind) -> Self {
        let sizes = Sizes { machines: Some(inst.machines()), jobs: Some(inst.jobs()), ..Sizes::default() };
        InstanceFile { p: Some(reals(inst.processing_times())), ..Self::empty(kind, sizes) }
    }

    fn cluster(inst: &ClusterInstance, kind: Kind) -> Self {
        let sizes = Sizes { clients: Some(inst.clients()), facilities: Some(inst.facilities()), ..Sizes::default() };
        let mut f = InstanceFile {
            d: Some(reals(inst.metric())),
            m: Some(inst.coverage()),
            l: Some(inst.lower().to_vec()),
            r: Some(inst.upper().to_vec()),
            ..Self::empty(kind, sizes)
        };
        match inst.constraint() {
            FacilityConstraint::Cardinality(k) => f.k = Some(*k),
            FacilityConstraint::Partition(pm) => {
                f.parts = Some(pm.parts().to_vec());
                f.caps = Some(pm.capacities().to_vec());
            }
            FacilityConstraint::Knapsack(ks) => {
                f.wt = Some(reals(&ks.weights));
                f.budget = Some(ks.budget.into());
            }
        }
        f
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        match inst {
            Instance::Load(i) => InstanceFile::load(i, Kind::Load),
            Instance::FairLoad(i) => InstanceFile { e: Some(reals(&i.e)), ..InstanceFile::load(&i.base, Kind::FairLoad) },
            Instance::Cluster(i) => InstanceFile::cluster(i, Kind::Cluster),
            Instance::FairCluster(i) => {
                InstanceFile { e: Some(reals(&i.e)), ..InstanceFile::cluster(&i.base, Kind::FairCluster) }
            }
        }
    }
}

/// `{weights: [[...], ...]}`; other fields (such as a tightness file's `t`) are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub weights: Vec<Vec<Real>>,
}

impl WeightsFile {
    pub fn norm(&self) -> Result<Norm> {
        Norm::max_ordered(self.weights.iter().map(|w| values(w)).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessFile {
    pub kind: String,
    pub t: u32,
    pub weights: Vec<Vec<Real>>,
}

/// `{sigma}` for load, `{S, S_j}` for clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolutionFile {
    Load {
        sigma: Vec<usize>,
    },
    Cluster {
        #[serde(rename = "S")]
        open: Vec<usize>,
        #[serde(rename = "S_j")]
        connections: Vec<Vec<usize>>,
    },
}

impl From<&Assignment> for SolutionFile {
    fn from(a: &Assignment) -> Self {
        SolutionFile::Load { sigma: a.sigma.clone() }
    }
}

impl From<&ClusterSolution> for SolutionFile {
    fn from(s: &ClusterSolution) -> Self {
        SolutionFile::Cluster { open: s.open.clone(), connections: s.connections.clone() }
    }
}

impl SolutionFile {
    pub fn assignment(&self) -> Result<Assignment> {
        match self {
            SolutionFile::Load { sigma } => Ok(Assignment::new(sigma.clone())),
            _ => Err(Error::InvalidInput("expected a load solution {sigma}".into())),
        }
    }

    pub fn cluster(&self) -> Result<ClusterSolution> {
        match self {
            SolutionFile::Cluster { open, connections } => Ok(ClusterSolution::new(open.clone(), connections.clone())),
            _ => Err(Error::InvalidInput("expected a cluster solution {S, S_j}".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for Fraction {
    fn from(q: &BigRational) -> Self {
        Fraction { num: q.numer().to_string(), den: q.denom().to_string() }
    }
}

impl Fraction {
    pub fn value(&self) -> Result<BigRational> {
        let bad = || Error::InvalidInput(format!("bad fraction {}/{}", self.num, self.den));
        let num: BigInt = self.num.parse().map_err(|_| bad())?;
        let den: BigInt = self.den.parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(bad());
        }
        Ok(BigRational::new(num, den))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionFile {
    pub b: Real,
    pub norm: String,
    pub support: Vec<SolutionFile>,
    pub lambda: Vec<Fraction>,
}

impl DistributionFile {
    pub fn new<T>(b: f64, norm: &str, dist: &SolutionDistribution<T>) -> Self
    where
        for<'a> SolutionFile: From<&'a T>,
    {
        DistributionFile {
            b: b.into(),
            norm: norm.to_string(),
            support: dist.support().iter().map(SolutionFile::from).collect(),
            lambda: dist.lambda().iter().map(Fraction::from).collect(),
        }
    }

    /// The distribution with its support converted by `f`.
    pub fn parse<T>(&self, f: impl Fn(&SolutionFile) -> Result<T>) -> Result<SolutionDistribution<T>> {
        let support = self.support.iter().map(f).collect::<Result<_>>()?;
        let lambda = self.lambda.iter().map(Fraction::value).collect::<Result<_>>()?;
        SolutionDistribution::new(support, lambda)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
