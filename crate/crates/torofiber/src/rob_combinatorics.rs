//! Real-oriented-blow-up bookkeeping at chart level: the radial/angular map
//! formulas, the homeomorphism-type invariants of the blow-up fibers, and
//! the circle-bundle tower data over closed strata.

use std::fmt;

use num_bigint::BigInt;

use crate::exact_linalg::IntMatrix;
use crate::fiber_space::{ChartModel, FiberError, ToricFiberSpace};
use crate::special_fiber::{SpecialFiberStratification, StrataRingCache};
use crate::toric_cohomology::{euler_class, CohClass};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RobError {
    InvariantNegative,
    NotComplete,
    Fiber(FiberError),
}

impl fmt::Display for RobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobError::InvariantNegative => write!(f, "malformed chart: negative invariant"),
            RobError::NotComplete => write!(f, "stratum is not complete"),
            RobError::Fiber(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RobError {}

/// The blow-up chart map: radial monomials and the integer linear map on
/// the angular coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupChartMap {
    pub chart: ChartModel,
    /// Per target branch: the (coordinate, exponent) pairs of its radial
    /// monomial `s_j = prod r_i^{l_i}`.
    pub radial: Vec<Vec<(usize, BigInt)>>,
    /// Angular map `phi_j = sum l_i theta_i`: row j carries the exponents of
    /// block j, zero elsewhere (an m' x n' matrix).
    pub angular: IntMatrix,
}

pub fn blowup_chart_map(chart: &ChartModel) -> BlowupChartMap {
    let mut radial = Vec::with_capacity(chart.m_prime);
    let mut angular = IntMatrix::zero(chart.m_prime, chart.n_prime);
    for j in 0..chart.m_prime {
        let mut mono = Vec::new();
        for i in chart.block_range(j) {
            mono.push((i, chart.exponents[i].clone()));
            angular.set(j, i, chart.exponents[i].clone());
        }
        radial.push(mono);
    }
    BlowupChartMap { chart: chart.clone(), radial, angular }
}

/// Homeomorphism type of the blow-up fiber over a boundary base point:
/// `[0,1)^a x (S^1)^b x (D^2)^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberInvariant {
    pub interval: usize,
    pub circle: usize,
    pub disc: usize,
}

pub fn fiber_invariants(chart: &ChartModel) -> Result<FiberInvariant, RobError> {
    if chart.n_prime < chart.m_prime || chart.n + chart.m_prime < chart.n_prime + chart.m {
        return Err(RobError::InvariantNegative);
    }
    let a = chart.n_prime - chart.m_prime;
    let c = (chart.n + chart.m_prime) - (chart.n_prime + chart.m);
    Ok(FiberInvariant { interval: a, circle: a, disc: c })
}

/// The circle-bundle tower over a closed stratum: one Euler class per branch
/// cutting the stratum out of its reference component, plus the trivial
/// torus factor coming from the base point circles.
#[derive(Debug, Clone)]
pub struct BundleTower {
    pub reference_component: usize,
    /// Rays of the stratum cone beyond the reference component's cone.
    pub branch_rays: Vec<usize>,
    /// Euler class of each branch circle bundle, in the stratum's ring.
    pub euler_classes: Vec<CohClass>,
    /// Rank of the trivial torus factor (the dimension of the base cone).
    pub trivial_torus_rank: usize,
}

pub fn bundle_tower(
    fs: &ToricFiberSpace,
    st: &SpecialFiberStratification,
    cache: &mut StrataRingCache,
    index_set: &[usize],
) -> Result<BundleTower, RobError> {
    let stratum = st
        .stratum(index_set)
        .ok_or_else(|| RobError::Fiber(FiberError::ConeNotInFan(index_set.to_vec())))?;
    let reference = index_set[0];
    let sigma = &st.components[reference];
    let ring = cache
        .get(&stratum.cone)
        .map_err(|e| match e {
            FiberError::NotProper => RobError::NotComplete,
            other => RobError::Fiber(other),
        })?
        .clone();
    let branch_rays: Vec<usize> =
        stratum.cone.iter().filter(|r| !sigma.contains(r)).cloned().collect();
    let mut euler_classes = Vec::with_capacity(branch_rays.len());
    for &rho in &branch_rays {
        let e = euler_class(fs.source(), &ring, rho)
            .map_err(|_| RobError::Fiber(FiberError::NonSimplicial))?;
        euler_classes.push(e);
    }
    Ok(BundleTower {
        reference_component: reference,
        branch_rays,
        euler_classes,
        trivial_torus_rank: st.tau.len(),
    })
}
