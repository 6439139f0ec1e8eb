//! The special fiber over the distinguished point of a target cone:
//! irreducible components, strata with identifications, the dual complex,
//! Mayer-Vietoris cohomology, and formal sheaf decompositions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::One;

use crate::exact_linalg::QMatrix;
use crate::fan_geometry::Fan;
use crate::fiber_space::{FiberError, ToricFiberSpace};
use crate::toric_cohomology::{restrict_between, CohomologyError, StratumRing};

/// One stratum `E_S` of the fiber: an intersection of components, realized
/// as the orbit closure of the cone spanned by their rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumData {
    /// Component indices (0-based, sorted).
    pub index_set: Vec<usize>,
    /// Ray index set of the cone whose orbit closure is the stratum.
    pub cone: Vec<usize>,
    /// Dimension of the stratum: source rank minus cone size.
    pub dim: usize,
}

/// Components and strata of the fiber over the distinguished point of `tau`.
#[derive(Debug, Clone)]
pub struct SpecialFiberStratification {
    pub tau: Vec<usize>,
    /// Minimal source cones mapping onto `tau`, in (dim, lex) order; the
    /// fiber components are their orbit closures.
    pub components: Vec<Vec<usize>>,
    /// All nonempty strata, sorted by (|S|, lex on S).
    pub strata: Vec<StratumData>,
}

impl SpecialFiberStratification {
    pub fn stratum(&self, index_set: &[usize]) -> Option<&StratumData> {
        self.strata.iter().find(|s| s.index_set == index_set)
    }

    /// Strata with `|S| = t + 1`.
    pub fn level(&self, t: usize) -> Vec<&StratumData> {
        self.strata.iter().filter(|s| s.index_set.len() == t + 1).collect()
    }

    pub fn depth(&self) -> usize {
        self.strata.iter().map(|s| s.index_set.len()).max().unwrap_or(0)
    }

    /// Groups of index sets labelling the same closed stratum, keyed by the
    /// underlying cone. Only groups with more than one member are returned.
    pub fn identification_classes(&self) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
        let mut by_cone: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
        for s in &self.strata {
            by_cone.entry(s.cone.clone()).or_default().push(s.index_set.clone());
        }
        by_cone.into_iter().filter(|(_, v)| v.len() > 1).collect()
    }
}

fn require_weakly_semistable(fs: &ToricFiberSpace) -> Result<(), FiberError> {
    if !fs.check_equidimensional() {
        return Err(FiberError::NotEquidimensional);
    }
    if !fs.check_reduced()? {
        return Err(FiberError::NotReduced);
    }
    Ok(())
}

/// The irreducible components of the fiber over `tau`: orbit closures of the
/// minimal cones mapping onto `tau`.
pub fn fiber_components(
    fs: &ToricFiberSpace,
    tau: &[usize],
) -> Result<SpecialFiberStratification, FiberError> {
    require_weakly_semistable(fs)?;
    if !fs.target().contains_cone(tau) {
        return Err(FiberError::ConeNotInFan(tau.to_vec()));
    }
    let mut over_tau: Vec<Vec<usize>> = Vec::new();
    for c in fs.source().cones() {
        if fs.image_cone(c).as_deref() == Some(tau) {
            over_tau.push(c.clone());
        }
    }
    let components: Vec<Vec<usize>> = over_tau
        .iter()
        .filter(|c| {
            !over_tau.iter().any(|d| d.len() < c.len() && d.iter().all(|i| c.contains(i)))
        })
        .cloned()
        .collect();
    let n = fs.source().rank();
    let strata = components
        .iter()
        .enumerate()
        .map(|(i, c)| StratumData { index_set: vec![i], cone: c.clone(), dim: n - c.len() })
        .collect();
    Ok(SpecialFiberStratification { tau: tau.to_vec(), components, strata })
}

/// The full strata table: for every subset of components whose cones span a
/// cone of the fan, the corresponding closed stratum.
pub fn strata(
    fs: &ToricFiberSpace,
    tau: &[usize],
) -> Result<SpecialFiberStratification, FiberError> {
    let mut st = fiber_components(fs, tau)?;
    let l = st.components.len();
    let n = fs.source().rank();
    // grow index sets one component at a time; any subset whose ray union is
    // not a cone is empty, and so are all its supersets
    let mut frontier: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (i, c) in st.components.iter().enumerate() {
        frontier.push((vec![i], c.clone()));
    }
    let mut all: Vec<StratumData> = Vec::new();
    while let Some((s, cone)) = frontier.pop() {
        all.push(StratumData { index_set: s.clone(), cone: cone.clone(), dim: n - cone.len() });
        let start = s.last().map(|x| x + 1).unwrap_or(0);
        for j in start..l {
            let mut union = cone.clone();
            for &r in &st.components[j] {
                if !union.contains(&r) {
                    union.push(r);
                }
            }
            union.sort_unstable();
            if fs.source().contains_cone(&union) {
                let mut s2 = s.clone();
                s2.push(j);
                frontier.push((s2, union));
            }
        }
    }
    all.sort_by(|a, b| {
        (a.index_set.len(), a.index_set.clone()).cmp(&(b.index_set.len(), b.index_set.clone()))
    });
    st.strata = all;
    Ok(st)
}

/// The dual complex: vertices are components, simplices the nonempty index
/// sets; identified strata are recorded by their shared cone.
#[derive(Debug, Clone)]
pub struct DualComplex {
    pub vertex_count: usize,
    /// (index set, cone) for every nonempty stratum with |S| >= 2.
    pub simplices: Vec<(Vec<usize>, Vec<usize>)>,
    pub identifications: Vec<(Vec<usize>, Vec<Vec<usize>>)>,
}

pub fn dual_complex(st: &SpecialFiberStratification) -> DualComplex {
    let simplices = st
        .strata
        .iter()
        .filter(|s| s.index_set.len() >= 2)
        .map(|s| (s.index_set.clone(), s.cone.clone()))
        .collect();
    DualComplex {
        vertex_count: st.components.len(),
        simplices,
        identifications: st.identification_classes(),
    }
}

impl DualComplex {
    /// Number of connected components of the vertex/edge graph.
    pub fn connected_components(&self) -> usize {
        if self.vertex_count == 0 {
            return 0;
        }
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for (s, _) in &self.simplices {
            if s.len() == 2 {
                let a = find(&mut parent, s[0]);
                let b = find(&mut parent, s[1]);
                parent[a] = b;
            }
        }
        let mut roots: Vec<usize> =
            (0..self.vertex_count).map(|i| find(&mut parent, i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Deterministic DOT rendering; nodes are named by sorted index sets.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "graph dual_complex {{").unwrap();
        for v in 0..self.vertex_count {
            writeln!(out, "  E{} [shape=circle];", v + 1).unwrap();
        }
        for (s, cone) in &self.simplices {
            if s.len() == 2 {
                let label: Vec<String> = cone.iter().map(|r| format!("{}", r + 1)).collect();
                writeln!(
                    out,
                    "  E{} -- E{} [label=\"<{}>\"];",
                    s[0] + 1,
                    s[1] + 1,
                    label.join(",")
                )
                .unwrap();
            }
        }
        for (cone, sets) in &self.identifications {
            let names: Vec<String> = sets
                .iter()
                .map(|s| {
                    let idx: Vec<String> = s.iter().map(|i| format!("{}", i + 1)).collect();
                    format!("E{{{}}}", idx.join(","))
                })
                .collect();
            let cl: Vec<String> = cone.iter().map(|r| format!("{}", r + 1)).collect();
            writeln!(out, "  // identified on <{}>: {}", cl.join(","), names.join(" = "))
                .unwrap();
        }
        writeln!(out, "}}").unwrap();
        out
    }
}

/// Cache of stratum cohomology rings, keyed by cone.
pub struct StrataRingCache {
    ambient: Fan,
    rings: BTreeMap<Vec<usize>, StratumRing>,
}

impl StrataRingCache {
    pub fn new(ambient: &Fan) -> StrataRingCache {
        StrataRingCache { ambient: ambient.clone(), rings: BTreeMap::new() }
    }

    pub fn ambient(&self) -> &Fan {
        &self.ambient
    }

    pub fn get(&mut self, gamma: &[usize]) -> Result<&StratumRing, FiberError> {
        if !self.rings.contains_key(gamma) {
            let ring = StratumRing::new(&self.ambient, gamma).map_err(|e| match e {
                CohomologyError::NotComplete => FiberError::NotProper,
                CohomologyError::ConeNotInFan(c) => FiberError::ConeNotInFan(c),
                _ => FiberError::NonSimplicial,
            })?;
            self.rings.insert(gamma.to_vec(), ring);
        }
        Ok(&self.rings[gamma])
    }

    /// Matrix of the restriction map between nested strata in degree 2k,
    /// columns indexed by the source standard basis.
    pub fn restriction_matrix(
        &mut self,
        from: &[usize],
        to: &[usize],
        k: usize,
    ) -> Result<QMatrix, FiberError> {
        let from_ring = self.get(from)?.clone();
        let to_ring = self.get(to)?.clone();
        let rows = to_ring.ring.dim(k);
        let cols = from_ring.ring.dim(k);
        let mut m = QMatrix::zero(rows, cols);
        for c in 0..cols {
            let basis = from_ring.ring.basis_class(k, c);
            let img = restrict_between(&self.ambient, &from_ring, &to_ring, &basis)
                .map_err(|_| FiberError::NonSimplicial)?;
            for (r, v) in img.component(k).into_iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }
}

/// Graded dimensions of `H^*(E; Q)` by the Mayer-Vietoris complex of the
/// closed cover by components: the total cohomology of the double complex
/// whose columns are strata cohomologies and whose rows are alternating
/// restriction maps.
pub fn mv_cohomology(
    fs: &ToricFiberSpace,
    st: &SpecialFiberStratification,
) -> Result<Vec<i64>, FiberError> {
    let mut cache = StrataRingCache::new(fs.source());
    let fiber_dim = st.strata.iter().map(|s| s.dim).max().unwrap_or(0);
    let depth = st.depth();
    let mut out = vec![0i64; 2 * fiber_dim + depth + 1];

    for k in 0..=fiber_dim {
        // one Cech complex per even coefficient degree 2k
        let mut dims: Vec<usize> = Vec::new();
        let mut offsets: Vec<BTreeMap<Vec<usize>, usize>> = Vec::new();
        for t in 0..depth {
            let mut off = BTreeMap::new();
            let mut total = 0usize;
            for s in st.level(t) {
                let ring = cache.get(&s.cone)?;
                off.insert(s.index_set.clone(), total);
                total += ring.ring.dim(k);
            }
            offsets.push(off);
            dims.push(total);
        }
        let mut mats: Vec<QMatrix> = Vec::new();
        for t in 0..depth.saturating_sub(1) {
            let mut m = QMatrix::zero(dims[t + 1], dims[t]);
            for s in st.level(t) {
                let col0 = offsets[t][&s.index_set];
                for target in st.level(t + 1) {
                    if !s.index_set.iter().all(|i| target.index_set.contains(i)) {
                        continue;
                    }
                    let extra: Vec<usize> = target
                        .index_set
                        .iter()
                        .filter(|i| !s.index_set.contains(i))
                        .cloned()
                        .collect();
                    if extra.len() != 1 {
                        continue;
                    }
                    let pos = target.index_set.iter().position(|&i| i == extra[0]).unwrap();
                    let sign =
                        if pos % 2 == 0 { BigRational::one() } else { -BigRational::one() };
                    let block = cache.restriction_matrix(&s.cone, &target.cone, k)?;
                    let row0 = offsets[t + 1][&target.index_set];
                    for r in 0..block.rows() {
                        for c in 0..block.cols() {
                            let v = m.get(row0 + r, col0 + c) + block.get(r, c) * &sign;
                            m.set(row0 + r, col0 + c, v);
                        }
                    }
                }
            }
            mats.push(m);
        }
        for t in 0..depth {
            let rank_out = if t < mats.len() { mats[t].rank() } else { 0 };
            let rank_in = if t > 0 { mats[t - 1].rank() } else { 0 };
            let h = dims[t] - rank_out - rank_in;
            let n = t + 2 * k;
            if h > 0 {
                out[n] += h as i64;
            }
        }
    }
    while out.last() == Some(&0) && out.len() > 1 {
        out.pop();
    }
    Ok(out)
}

/// A closed union of orbit closures, canonically an antichain of cones.
pub type StratumLabel = Vec<Vec<usize>>;

/// Intersect two labels inside the fan: pairwise joins of cones, reduced to
/// the minimal antichain. Empty result = empty intersection.
pub fn intersect_labels(fan: &Fan, a: &StratumLabel, b: &StratumLabel) -> StratumLabel {
    let mut joins: Vec<Vec<usize>> = Vec::new();
    for ca in a {
        for cb in b {
            let mut u = ca.clone();
            for &r in cb {
                if !u.contains(&r) {
                    u.push(r);
                }
            }
            u.sort_unstable();
            if fan.contains_cone(&u) && !joins.contains(&u) {
                joins.push(u);
            }
        }
    }
    let minimal: Vec<Vec<usize>> = joins
        .iter()
        .filter(|c| !joins.iter().any(|d| d.len() < c.len() && d.iter().all(|i| c.contains(i))))
        .cloned()
        .collect();
    let mut out = minimal;
    out.sort();
    out
}

/// Formal nonnegative combination of closed-stratum labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSheaf {
    pub terms: Vec<(StratumLabel, u64)>,
}

fn binom_u(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Expansion of the p-th exterior power of `Q_base^l ⊕ (⊕_b Q_{G_b})`:
/// `binom(l, a)` copies of the intersection of each `J ⊆ boundary` with the
/// base, summed over `a + |J| = p`. Empty intersections are dropped.
pub fn exterior_power_sheaf(
    fan: &Fan,
    base: &StratumLabel,
    p: usize,
    boundary: &[StratumLabel],
    l: usize,
) -> FormalSheaf {
    let mut acc: BTreeMap<StratumLabel, u64> = BTreeMap::new();
    let nb = boundary.len();
    assert!(nb < 32);
    for mask in 0u32..(1u32 << nb) {
        let j_size = mask.count_ones() as usize;
        if j_size > p {
            continue;
        }
        let a = p - j_size;
        let mult = binom_u(l as u64, a as u64);
        if mult == 0 {
            continue;
        }
        let mut label = base.clone();
        let mut empty = false;
        for b in 0..nb {
            if mask & (1 << b) != 0 {
                label = intersect_labels(fan, &label, &boundary[b]);
                if label.is_empty() {
                    empty = true;
                    break;
                }
            }
        }
        if empty {
            continue;
        }
        *acc.entry(label).or_insert(0) += mult;
    }
    FormalSheaf { terms: acc.into_iter().collect() }
}
