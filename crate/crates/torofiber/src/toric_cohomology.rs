//! Rational cohomology of complete simplicial toric varieties.
//!
//! Betti numbers come from the h-vector of the fan; the ring structure comes
//! from the Stanley-Reisner presentation with linear relations given by the
//! lattice coordinate functionals. Restriction and Gysin maps between orbit
//! closures are expressed through divisor classes indexed by the ambient
//! fan's rays, which keeps maps between different strata composable.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact_linalg::{IntMatrix, QMatrix};
use crate::fan_geometry::{star_fan, Fan, FanError, StarFanData};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    NotComplete,
    NotSimplicial,
    RayNotInFan(usize),
    ConeNotInFan(Vec<usize>),
    RingMismatch,
}

impl fmt::Display for CohomologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohomologyError::NotComplete => write!(f, "fan is not complete"),
            CohomologyError::NotSimplicial => write!(f, "fan is not simplicial"),
            CohomologyError::RayNotInFan(i) => write!(f, "ray {i} is not in the fan"),
            CohomologyError::ConeNotInFan(c) => write!(f, "cone {c:?} is not in the fan"),
            CohomologyError::RingMismatch => write!(f, "classes live in different rings"),
        }
    }
}

impl std::error::Error for CohomologyError {}

impl From<FanError> for CohomologyError {
    fn from(e: FanError) -> Self {
        match e {
            FanError::ConeNotInFan(c) => CohomologyError::ConeNotInFan(c),
            _ => CohomologyError::NotSimplicial,
        }
    }
}

/// Exponent vector of a monomial in the ray variables.
pub type ExpVec = Vec<u32>;

/// Sparse polynomial in the ray variables, used as an intermediate before
/// reduction to the standard basis.
pub type Poly = BTreeMap<ExpVec, BigRational>;

/// f-vector of a simplicial fan: entry `i` counts cones with `i` rays
/// (so entry 0 is 1, for the origin).
pub fn f_vector(fan: &Fan) -> Vec<i64> {
    let mut f = vec![0i64; fan.rank() + 1];
    for c in fan.cones() {
        if c.len() <= fan.rank() {
            f[c.len()] += 1;
        }
    }
    f
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let mut r = 1i64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// h-vector of a complete simplicial fan. The even Betti numbers of the
/// associated toric variety are `b_{2k} = h_k`; odd Betti numbers vanish.
pub fn h_vector(fan: &Fan) -> Result<Vec<i64>, CohomologyError> {
    if !fan.is_simplicial() {
        return Err(CohomologyError::NotSimplicial);
    }
    if !fan.is_complete() {
        return Err(CohomologyError::NotComplete);
    }
    let r = fan.rank() as i64;
    let f = f_vector(fan);
    let mut h = vec![0i64; fan.rank() + 1];
    for k in 0..=r {
        let mut acc = 0i64;
        for i in 0..=k {
            let sign = if (k - i) % 2 == 0 { 1 } else { -1 };
            acc += sign * binom(r - i, k - i) * f[i as usize];
        }
        h[k as usize] = acc;
    }
    Ok(h)
}

/// Betti numbers, indexed by real cohomological degree 0..=2r.
pub fn betti_numbers(fan: &Fan) -> Result<Vec<i64>, CohomologyError> {
    let h = h_vector(fan)?;
    let mut b = vec![0i64; 2 * fan.rank() + 1];
    for (k, &hk) in h.iter().enumerate() {
        b[2 * k] = hk;
    }
    Ok(b)
}

struct DegreeData {
    /// Face-supported monomials of this degree, sorted ascending.
    monomials: Vec<ExpVec>,
    /// RREF rows of the relation space over `monomials`.
    rel_rows: Vec<Vec<BigRational>>,
    /// Pivot column per RREF row.
    pivots: Vec<usize>,
    /// Indices (into `monomials`) of the standard monomials.
    std_idx: Vec<usize>,
}

/// Graded presentation of `H^*(X_Sigma; Q)` for a complete simplicial fan,
/// with one degree-2 variable per ray.
pub struct CohomologyRing {
    fan: Fan,
    degrees: Vec<DegreeData>,
    h: Vec<i64>,
}

impl fmt::Debug for CohomologyRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CohomologyRing(rank {}, h {:?})", self.fan.rank(), self.h)
    }
}

impl CohomologyRing {
    /// Build the ring; the fan must be complete and simplicial.
    pub fn new(fan: &Fan) -> Result<Arc<CohomologyRing>, CohomologyError> {
        let h = h_vector(fan)?;
        let rank = fan.rank();
        let nrays = fan.rays().len();
        let mut degrees: Vec<DegreeData> = Vec::new();
        for k in 0..=rank {
            let monomials = face_monomials(fan, k as u32);
            // relations: theta_j * m' over the coordinate functionals
            // theta_j = sum_i <e_j, v_i> x_i and face monomials m' of degree k-1
            let index: BTreeMap<&ExpVec, usize> =
                monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut rows: Vec<Vec<BigRational>> = Vec::new();
            if k >= 1 {
                let prev = face_monomials(fan, k as u32 - 1);
                for mprime in &prev {
                    for j in 0..rank {
                        let mut row = vec![BigRational::zero(); monomials.len()];
                        let mut nonzero = false;
                        for i in 0..nrays {
                            let coeff = fan.ray(i)[j].clone();
                            if coeff.is_zero() {
                                continue;
                            }
                            let mut m = mprime.clone();
                            m[i] += 1;
                            if let Some(&col) = index.get(&m) {
                                row[col] += BigRational::from(coeff);
                                nonzero = true;
                            }
                        }
                        if nonzero {
                            rows.push(row);
                        }
                    }
                }
            }
            let (rel_rows, pivots) = rref_rows(rows, monomials.len());
            let std_idx: Vec<usize> =
                (0..monomials.len()).filter(|i| !pivots.contains(i)).collect();
            degrees.push(DegreeData { monomials, rel_rows, pivots, std_idx });
        }
        let ring = CohomologyRing { fan: fan.clone(), degrees, h: h.clone() };
        for (k, &hk) in h.iter().enumerate() {
            debug_assert_eq!(ring.degrees[k].std_idx.len() as i64, hk, "degree {k} dimension");
        }
        Ok(Arc::new(ring))
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn h(&self) -> &[i64] {
        &self.h
    }

    /// Dimension of the degree-2k graded piece.
    pub fn dim(&self, k: usize) -> usize {
        if k < self.degrees.len() {
            self.degrees[k].std_idx.len()
        } else {
            0
        }
    }

    pub fn top_degree(&self) -> usize {
        self.fan.rank()
    }

    /// Standard monomials of degree k, in the deterministic graded-lex order.
    pub fn std_monomials(&self, k: usize) -> Vec<ExpVec> {
        if k >= self.degrees.len() {
            return Vec::new();
        }
        let d = &self.degrees[k];
        d.std_idx.iter().map(|&i| d.monomials[i].clone()).collect()
    }

    pub fn zero(self: &Arc<Self>) -> CohClass {
        CohClass { ring: Arc::clone(self), parts: BTreeMap::new() }
    }

    pub fn one(self: &Arc<Self>) -> CohClass {
        let mut p = Poly::new();
        p.insert(vec![0; self.fan.rays().len()], BigRational::one());
        self.class_from_poly(&p)
    }

    /// A single standard basis element in degree 2k.
    pub fn basis_class(self: &Arc<Self>, k: usize, i: usize) -> CohClass {
        let mut v = vec![BigRational::zero(); self.dim(k)];
        v[i] = BigRational::one();
        let mut parts = BTreeMap::new();
        parts.insert(k, v);
        CohClass { ring: Arc::clone(self), parts }
    }

    /// Reduce a polynomial in the ray variables to the standard basis. Terms
    /// above the top degree vanish in the quotient and are dropped.
    pub fn class_from_poly(self: &Arc<Self>, poly: &Poly) -> CohClass {
        let mut parts: BTreeMap<usize, Vec<BigRational>> = BTreeMap::new();
        for (m, coeff) in poly {
            if coeff.is_zero() {
                continue;
            }
            let k: u32 = m.iter().sum();
            let k = k as usize;
            if k > self.top_degree() {
                continue;
            }
            let support: Vec<usize> = (0..m.len()).filter(|&i| m[i] > 0).collect();
            if !self.fan.contains_cone(&support) {
                continue; // Stanley-Reisner relation
            }
            let d = &self.degrees[k];
            let col = d.monomials.binary_search(m).expect("face monomial present");
            let vec_part = parts
                .entry(k)
                .or_insert_with(|| vec![BigRational::zero(); d.std_idx.len()]);
            match d.pivots.iter().position(|&p| p == col) {
                None => {
                    let si = d.std_idx.iter().position(|&s| s == col).unwrap();
                    vec_part[si] += coeff;
                }
                Some(row) => {
                    // pivot monomial: substitute minus the rest of its row
                    for (si, &scol) in d.std_idx.iter().enumerate() {
                        let c = &d.rel_rows[row][scol];
                        if !c.is_zero() {
                            vec_part[si] -= coeff * c;
                        }
                    }
                }
            }
        }
        parts.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        CohClass { ring: Arc::clone(self), parts }
    }

    /// The class of the boundary divisor of one of the fan's own rays.
    pub fn divisor_class(self: &Arc<Self>, ray: usize) -> Result<CohClass, CohomologyError> {
        if ray >= self.fan.rays().len() {
            return Err(CohomologyError::RayNotInFan(ray));
        }
        let mut m = vec![0u32; self.fan.rays().len()];
        m[ray] = 1;
        let mut p = Poly::new();
        p.insert(m, BigRational::one());
        Ok(self.class_from_poly(&p))
    }

    /// Total dimension; equals the number of maximal cones.
    pub fn total_dim(&self) -> usize {
        (0..=self.top_degree()).map(|k| self.dim(k)).sum()
    }
}

fn face_monomials(fan: &Fan, k: u32) -> Vec<ExpVec> {
    let n = fan.rays().len();
    let mut out: Vec<ExpVec> = Vec::new();
    fn rec(pos: usize, remaining: u32, comp: &mut Vec<u32>, c: &[usize], n: usize, out: &mut Vec<ExpVec>) {
        if pos == comp.len() {
            if remaining == 0 {
                let mut m = vec![0u32; n];
                for (i, &ray) in c.iter().enumerate() {
                    m[ray] = comp[i];
                }
                out.push(m);
            }
            return;
        }
        for extra in 0..=remaining {
            comp[pos] = 1 + extra;
            rec(pos + 1, remaining - extra, comp, c, n, out);
        }
    }
    for c in fan.cones() {
        if c.is_empty() {
            if k == 0 {
                out.push(vec![0; n]);
            }
            continue;
        }
        if (c.len() as u32) > k {
            continue;
        }
        let mut comp = vec![1u32; c.len()];
        let rest = k - c.len() as u32;
        rec(0, rest, &mut comp, c, n, &mut out);
    }
    out.sort();
    out
}

fn rref_rows(rows: Vec<Vec<BigRational>>, cols: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    if rows.is_empty() || cols == 0 {
        return (Vec::new(), Vec::new());
    }
    let m = QMatrix::from_rows(&rows);
    let (r, pivots) = m.rref();
    let kept: Vec<Vec<BigRational>> = (0..pivots.len())
        .map(|i| (0..cols).map(|j| r.get(i, j).clone()).collect())
        .collect();
    (kept, pivots)
}

/// A cohomology class: exact rational coefficients over the standard
/// monomial basis, one component per degree.
#[derive(Clone)]
pub struct CohClass {
    ring: Arc<CohomologyRing>,
    parts: BTreeMap<usize, Vec<BigRational>>,
}

impl fmt::Debug for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CohClass{:?}", self.parts)
    }
}

impl CohClass {
    pub fn ring(&self) -> &Arc<CohomologyRing> {
        &self.ring
    }

    pub fn parts(&self) -> &BTreeMap<usize, Vec<BigRational>> {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Coefficients in degree 2k over the standard basis.
    pub fn component(&self, k: usize) -> Vec<BigRational> {
        match self.parts.get(&k) {
            Some(v) => v.clone(),
            None => vec![BigRational::zero(); self.ring.dim(k)],
        }
    }

    pub fn same_ring(&self, other: &CohClass) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring.fan == other.ring.fan
    }

    pub fn add(&self, other: &CohClass) -> Result<CohClass, CohomologyError> {
        if !self.same_ring(other) {
            return Err(CohomologyError::RingMismatch);
        }
        let mut parts = self.parts.clone();
        for (k, v) in &other.parts {
            let entry = parts.entry(*k).or_insert_with(|| vec![BigRational::zero(); v.len()]);
            for (a, b) in entry.iter_mut().zip(v.iter()) {
                *a += b;
            }
        }
        parts.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        Ok(CohClass { ring: Arc::clone(&self.ring), parts })
    }

    pub fn scale(&self, c: &BigRational) -> CohClass {
        if c.is_zero() {
            return CohClass { ring: Arc::clone(&self.ring), parts: BTreeMap::new() };
        }
        let parts = self
            .parts
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|x| x * c).collect()))
            .collect();
        CohClass { ring: Arc::clone(&self.ring), parts }
    }

    /// Expand the class back into a polynomial over the standard monomials.
    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::new();
        for (k, v) in &self.parts {
            let monos = self.ring.std_monomials(*k);
            for (i, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    p.insert(monos[i].clone(), c.clone());
                }
            }
        }
        p
    }
}

/// Cup product.
pub fn cup(a: &CohClass, b: &CohClass) -> Result<CohClass, CohomologyError> {
    if !a.same_ring(b) {
        return Err(CohomologyError::RingMismatch);
    }
    let pa = a.to_poly();
    let pb = b.to_poly();
    let mut prod = Poly::new();
    for (ma, ca) in &pa {
        for (mb, cb) in &pb {
            let m: ExpVec = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
            let e = prod.entry(m).or_insert_with(BigRational::zero);
            *e += ca * cb;
        }
    }
    Ok(a.ring.class_from_poly(&prod))
}

/// The cohomology ring of a closed toric stratum, together with the star-fan
/// data tying its variables back to the ambient fan's rays.
#[derive(Clone)]
pub struct StratumRing {
    pub cone: Vec<usize>,
    pub star: Arc<StarFanData>,
    pub ring: Arc<CohomologyRing>,
}

impl fmt::Debug for StratumRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StratumRing(cone {:?}, {:?})", self.cone, self.ring)
    }
}

impl StratumRing {
    /// Build the ring of the orbit closure of `gamma` in `ambient`.
    pub fn new(ambient: &Fan, gamma: &[usize]) -> Result<StratumRing, CohomologyError> {
        let star = star_fan(ambient, gamma)?;
        let ring = CohomologyRing::new(&star.fan)?;
        Ok(StratumRing { cone: gamma.to_vec(), star: Arc::new(star), ring })
    }

    /// The restriction to this stratum of the boundary divisor of an ambient
    /// ray `rho` not in the stratum's cone; `None` when the divisor misses
    /// the stratum. This is the class `(1/c) y_rho` where `c` is the lattice
    /// multiple of the projected ray.
    pub fn divisor_class_of_ambient_ray(&self, rho: usize) -> Option<CohClass> {
        let si = self.star.star_index_of_ray(rho)?;
        let c = BigRational::from(BigInt::one())
            / BigRational::from(self.star.ray_multiple[si].clone());
        let base = self.ring.divisor_class(si).ok()?;
        Some(base.scale(&c))
    }
}

// functional u with <u, v_rho> = 1 and <u, v> = 0 for the other listed rays
fn dual_functional(ambient: &Fan, rho: usize, orthogonal_to: &[usize]) -> Vec<BigRational> {
    let rank = ambient.rank();
    let mut cols: Vec<Vec<BigInt>> = vec![ambient.ray(rho).clone()];
    for &r in orthogonal_to {
        if r != rho {
            cols.push(ambient.ray(r).clone());
        }
    }
    let m = IntMatrix::from_columns(rank, &cols);
    let mt = QMatrix::from_int(&m.transpose());
    let mut target = vec![BigRational::zero(); cols.len()];
    target[0] = BigRational::one();
    mt.solve(&target).expect("independent rays admit a dual functional")
}

/// Restriction `H^*(V(gamma_from)) -> H^*(V(gamma_to))` for nested strata
/// `gamma_from ⊆ gamma_to` of the ambient fan.
pub fn restrict_between(
    ambient: &Fan,
    from: &StratumRing,
    to: &StratumRing,
    a: &CohClass,
) -> Result<CohClass, CohomologyError> {
    assert!(from.cone.iter().all(|i| to.cone.contains(i)), "strata must be nested");
    let nfrom = from.ring.fan().rays().len();
    let nto = to.ring.fan().rays().len();
    // image of each source variable as a linear form in the target variables
    let mut var_image: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); nfrom];
    for s in 0..nfrom {
        let rho = from.star.ray_origin[s];
        let c_from = BigRational::from(from.star.ray_multiple[s].clone());
        if to.cone.contains(&rho) {
            // rewrite with a functional dual to rho along the other rays of
            // gamma_to; on the normalized variables the lattice relation reads
            // x_rho = -sum_{rho'' not in gamma_to} <u, v''> x_rho''
            let u = dual_functional(ambient, rho, &to.cone);
            for (ti, &rho2) in to.star.ray_origin.iter().enumerate() {
                let pairing: BigRational = (0..ambient.rank())
                    .map(|j| &u[j] * BigRational::from(ambient.ray(rho2)[j].clone()))
                    .sum();
                if !pairing.is_zero() {
                    let c_to = BigRational::from(to.star.ray_multiple[ti].clone());
                    var_image[s].push((ti, -pairing * &c_from / c_to));
                }
            }
        } else if let Some(ti) = to.star.star_index_of_ray(rho) {
            let c_to = BigRational::from(to.star.ray_multiple[ti].clone());
            var_image[s].push((ti, c_from / c_to));
        }
        // else: the divisor misses the stratum; image is zero
    }

    let pa = a.to_poly();
    let mut out = Poly::new();
    for (m, coeff) in &pa {
        let mut acc: Vec<(ExpVec, BigRational)> = vec![(vec![0u32; nto], coeff.clone())];
        for (s, &e) in m.iter().enumerate() {
            for _ in 0..e {
                let mut next: Vec<(ExpVec, BigRational)> = Vec::new();
                for (mono, c) in &acc {
                    for (ti, ci) in &var_image[s] {
                        let mut m2 = mono.clone();
                        m2[*ti] += 1;
                        next.push((m2, c * ci));
                    }
                }
                acc = next;
            }
        }
        for (mono, c) in acc {
            let e = out.entry(mono).or_insert_with(BigRational::zero);
            *e += c;
        }
    }
    Ok(to.ring.class_from_poly(&out))
}

/// Gysin pushforward `H^{2k}(V(gamma ∪ {rho})) -> H^{2k+2}(V(gamma))` for a
/// divisorial stratum inclusion: lift through the restriction, then multiply
/// by the divisor class of the contracted ray.
pub fn gysin_between(
    _ambient: &Fan,
    from: &StratumRing,
    to: &StratumRing,
    a: &CohClass,
) -> Result<CohClass, CohomologyError> {
    let extra: Vec<usize> = from.cone.iter().filter(|i| !to.cone.contains(i)).cloned().collect();
    assert_eq!(extra.len(), 1, "gysin steps one ray at a time");
    let rho = extra[0];

    let pa = a.to_poly();
    let nto = to.ring.fan().rays().len();
    let mut lifted = Poly::new();
    for (m, coeff) in &pa {
        let mut mono = vec![0u32; nto];
        let mut c = coeff.clone();
        for (s, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let orig = from.star.ray_origin[s];
            let ti = to
                .star
                .star_index_of_ray(orig)
                .expect("deep star ray extends over the shallower stratum");
            mono[ti] += e;
            // match normalizations so that restrict(lift(a)) = a
            let c_from = BigRational::from(from.star.ray_multiple[s].clone());
            let c_to = BigRational::from(to.star.ray_multiple[ti].clone());
            for _ in 0..e {
                c = c * &c_to / &c_from;
            }
        }
        let entry = lifted.entry(mono).or_insert_with(BigRational::zero);
        *entry += c;
    }
    let lifted_class = to.ring.class_from_poly(&lifted);
    let dc = to
        .divisor_class_of_ambient_ray(rho)
        .expect("the contracted ray meets the stratum");
    cup(&lifted_class, &dc)
}

/// Euler class on `V(gamma)` of the boundary circle direction of a ray
/// `rho ∈ gamma`: the restriction of the ambient divisor class of `rho`,
/// written through a functional dual to `rho` along the rest of `gamma`.
pub fn euler_class(
    ambient: &Fan,
    at: &StratumRing,
    rho: usize,
) -> Result<CohClass, CohomologyError> {
    assert!(at.cone.contains(&rho), "euler_class is for rays of the stratum's cone");
    let u = dual_functional(ambient, rho, &at.cone);
    let mut poly = Poly::new();
    let nto = at.ring.fan().rays().len();
    for (ti, &rho2) in at.star.ray_origin.iter().enumerate() {
        let pairing: BigRational = (0..ambient.rank())
            .map(|j| &u[j] * BigRational::from(ambient.ray(rho2)[j].clone()))
            .sum();
        if !pairing.is_zero() {
            let c_to = BigRational::from(at.star.ray_multiple[ti].clone());
            let mut mono = vec![0u32; nto];
            mono[ti] = 1;
            poly.insert(mono, -pairing / c_to);
        }
    }
    Ok(at.ring.class_from_poly(&poly))
}

/// The ambient variety viewed as the stratum of the origin cone.
pub fn ambient_stratum(fan: &Fan, ring: &Arc<CohomologyRing>) -> StratumRing {
    StratumRing {
        cone: vec![],
        star: Arc::new(star_fan(fan, &[]).expect("origin is always a cone")),
        ring: Arc::clone(ring),
    }
}

/// Spec-level restriction: restrict a class on the complete toric variety of
/// the class's own fan to the closed stratum of `sigma`.
pub fn restrict(a: &CohClass, sigma: &[usize]) -> Result<(StratumRing, CohClass), CohomologyError> {
    let ambient = a.ring().fan().clone();
    let from = ambient_stratum(&ambient, a.ring());
    let to = StratumRing::new(&ambient, sigma)?;
    let restricted = restrict_between(&ambient, &from, &to, a)?;
    Ok((to, restricted))
}

/// Spec-level Gysin map from the stratum of a single ray back to the ambient
/// variety; `gysin(1) = divisor_class(rho)`.
pub fn gysin(
    ambient_ring: &Arc<CohomologyRing>,
    rho: usize,
    a: &CohClass,
) -> Result<CohClass, CohomologyError> {
    let ambient = ambient_ring.fan().clone();
    let from = StratumRing::new(&ambient, &[rho])?;
    let to = ambient_stratum(&ambient, ambient_ring);
    gysin_between(&ambient, &from, &to, a)
}
