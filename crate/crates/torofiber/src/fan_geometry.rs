//! Lattices, cones, fans and star fans.
//!
//! Fans are the combinatorial stand-in for toroidal varieties: rays are
//! boundary components, cones are boundary strata. Only simplicial fans are
//! accepted by the operations that need face structure; non-simplicial input
//! is rejected with an explicit error, never subdivided silently.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact_linalg::{is_primitive, primitive_part, snf, IntMatrix, QMatrix};

pub type IntVec = Vec<BigInt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FanError {
    NonPrimitiveRay(usize),
    DuplicateRay(usize),
    NotStronglyConvex(Vec<usize>),
    FaceIntersectionViolation { first: Vec<usize>, second: Vec<usize>, witness: IntVec },
    ConeNotInFan(Vec<usize>),
    NonSimplicial,
    IndexOutOfRange(usize),
    RankMismatch,
}

impl fmt::Display for FanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FanError::NonPrimitiveRay(i) => write!(f, "ray {i} is not primitive"),
            FanError::DuplicateRay(i) => write!(f, "ray {i} duplicates an earlier ray"),
            FanError::NotStronglyConvex(c) => write!(f, "cone {c:?} contains a line"),
            FanError::FaceIntersectionViolation { first, second, witness } => write!(
                f,
                "cones {first:?} and {second:?} do not intersect in a common face (witness {witness:?})"
            ),
            FanError::ConeNotInFan(c) => write!(f, "cone {c:?} is not in the fan"),
            FanError::NonSimplicial => write!(f, "operation requires a simplicial cone/fan"),
            FanError::IndexOutOfRange(i) => write!(f, "index {i} out of range"),
            FanError::RankMismatch => write!(f, "vector length does not match ambient rank"),
        }
    }
}

impl std::error::Error for FanError {}

/// A strongly convex rational cone given by its primitive ray generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    generators: Vec<IntVec>,
}

impl Cone {
    pub fn new(generators: Vec<IntVec>) -> Self {
        Cone { generators }
    }

    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    pub fn generator_matrix(&self, ambient: usize) -> IntMatrix {
        IntMatrix::from_columns(ambient, &self.generators)
    }

    pub fn dim(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        let ambient = self.generators[0].len();
        self.generator_matrix(ambient).rank()
    }

    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.generators.len()
    }

    /// All faces of a simplicial cone: one per subset of the generators.
    pub fn faces(&self) -> Result<Vec<Cone>, FanError> {
        if !self.is_simplicial() {
            return Err(FanError::NonSimplicial);
        }
        let k = self.generators.len();
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0u32..(1u32 << k) {
            let gens: Vec<IntVec> = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.generators[i].clone())
                .collect();
            out.push(Cone::new(gens));
        }
        Ok(out)
    }
}

/// Exact membership test for a simplicial cone given by independent generators.
pub fn simplicial_cone_contains(rays: &[IntVec], x: &[BigInt]) -> bool {
    if x.iter().all(|v| v.is_zero()) {
        return true;
    }
    if rays.is_empty() {
        return false;
    }
    let d = x.len();
    let m = QMatrix::from_int(&IntMatrix::from_columns(d, rays));
    let b: Vec<BigRational> = x.iter().map(|v| BigRational::from(v.clone())).collect();
    match m.solve(&b) {
        None => false,
        Some(lam) => {
            // solve zero-fills free variables, so verify and check signs
            let back = m.mul_vec(&lam);
            back == b && lam.iter().all(|l| !l.is_negative())
        }
    }
}

/// Membership in a cone spanned by an arbitrary generator list, by
/// Caratheodory: x lies in the cone iff it is a nonnegative combination of
/// some linearly independent subset of the generators.
pub fn cone_contains(gens: &[IntVec], x: &[BigInt]) -> bool {
    if x.iter().all(|v| v.is_zero()) {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let n = gens.len();
    assert!(n < 32);
    for mask in 1u32..(1u32 << n) {
        let subset: Vec<IntVec> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| gens[i].clone())
            .collect();
        let d = x.len();
        let m = IntMatrix::from_columns(d, &subset);
        if m.rank() != subset.len() {
            continue;
        }
        if simplicial_cone_contains(&subset, x) {
            return true;
        }
    }
    false
}

/// Does a nonzero nonnegative dependence among the generators exist? For
/// nonzero generators this is equivalent to the cone containing a line.
pub fn positive_dependence_exists(gens: &[IntVec]) -> bool {
    let n = gens.len();
    if n == 0 {
        return false;
    }
    let d = gens[0].len();
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let subset: Vec<IntVec> = idx.iter().map(|&i| gens[i].clone()).collect();
        let m = QMatrix::from_int(&IntMatrix::from_columns(d, &subset));
        let ker = m.kernel();
        if ker.len() == 1 {
            let v = &ker[0];
            if v.iter().all(|c| c.is_positive()) || v.iter().all(|c| c.is_negative()) {
                return true;
            }
        }
    }
    false
}

/// A fan: primitive rays plus maximal cones stored as sorted ray-index sets,
/// with the face closure derived from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    rays: Vec<IntVec>,
    max_cones: Vec<Vec<usize>>,
    /// Face closure (simplicial fans only): all index sets, including the
    /// origin (empty set), sorted by (len, lex).
    cones: Vec<Vec<usize>>,
    simplicial: bool,
}

/// Build a validated fan. Rays must be primitive; max cones are index sets
/// (0-based) into the ray list. Cones containing a line are rejected; for
/// simplicial input, every pair of maximal cones is checked to intersect in a
/// common face.
pub fn make_fan(
    rank: usize,
    rays: Vec<IntVec>,
    max_cone_sets: Vec<Vec<usize>>,
) -> Result<Fan, FanError> {
    for (i, r) in rays.iter().enumerate() {
        if r.len() != rank {
            return Err(FanError::RankMismatch);
        }
        if r.iter().all(|v| v.is_zero()) || !is_primitive(r) {
            return Err(FanError::NonPrimitiveRay(i));
        }
        if rays[..i].contains(r) {
            return Err(FanError::DuplicateRay(i));
        }
    }
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for s in &max_cone_sets {
        let mut c = s.clone();
        for &i in &c {
            if i >= rays.len() {
                return Err(FanError::IndexOutOfRange(i));
            }
        }
        c.sort_unstable();
        c.dedup();
        sets.push(c);
    }
    sets.sort();
    sets.dedup();
    // keep only maximal sets
    let maximal: Vec<Vec<usize>> = sets
        .iter()
        .filter(|s| !sets.iter().any(|t| t.len() > s.len() && s.iter().all(|i| t.contains(i))))
        .cloned()
        .collect();
    if maximal.is_empty() {
        // the fan consisting of the origin alone
        return Ok(Fan { rank, rays, max_cones: vec![], cones: vec![vec![]], simplicial: true });
    }

    let mut simplicial = true;
    for c in &maximal {
        let gens: Vec<IntVec> = c.iter().map(|&i| rays[i].clone()).collect();
        let m = IntMatrix::from_columns(rank, &gens);
        if m.rank() != gens.len() {
            if positive_dependence_exists(&gens) {
                return Err(FanError::NotStronglyConvex(c.clone()));
            }
            simplicial = false;
        }
    }

    if !simplicial {
        // accepted so that is_simplicial can report false; no face closure
        return Ok(Fan { rank, rays, max_cones: maximal, cones: vec![], simplicial: false });
    }

    let fan = Fan::assemble(rank, rays, maximal);
    fan.check_pairwise_intersections()?;
    Ok(fan)
}

impl Fan {
    /// Assemble a simplicial fan without the pairwise intersection check.
    /// Used for fans that are correct by construction (star fans, kernel
    /// fans, products of valid fans).
    pub(crate) fn assemble(rank: usize, rays: Vec<IntVec>, max_cones: Vec<Vec<usize>>) -> Fan {
        let mut closure: BTreeSet<Vec<usize>> = BTreeSet::new();
        closure.insert(vec![]);
        for c in &max_cones {
            let k = c.len();
            assert!(k < 32);
            for mask in 0u32..(1u32 << k) {
                let f: Vec<usize> =
                    (0..k).filter(|i| mask & (1 << i) != 0).map(|i| c[i]).collect();
                closure.insert(f);
            }
        }
        let mut cones: Vec<Vec<usize>> = closure.into_iter().collect();
        cones.sort_by_key(|c| (c.len(), c.clone()));
        let mut max_cones = max_cones;
        max_cones.sort();
        max_cones.dedup();
        Fan { rank, rays, max_cones, cones, simplicial: true }
    }

    fn check_pairwise_intersections(&self) -> Result<(), FanError> {
        let n = self.max_cones.len();
        for a in 0..n {
            for b in a + 1..n {
                self.check_pair(&self.max_cones[a].clone(), &self.max_cones[b].clone())?;
            }
        }
        Ok(())
    }

    // Verify cone(S) ∩ cone(T) = cone(S ∩ T). Every extreme ray of the
    // intersection is spanned by span(F) ∩ span(G) for some faces F ⊆ S,
    // G ⊆ T with one-dimensional intersection of spans, so enumerating those
    // candidate lines is exhaustive.
    fn check_pair(&self, s: &[usize], t: &[usize]) -> Result<(), FanError> {
        let common: Vec<usize> = s.iter().filter(|i| t.contains(i)).cloned().collect();
        let common_gens: Vec<IntVec> = common.iter().map(|&i| self.rays[i].clone()).collect();
        let s_gens: Vec<IntVec> = s.iter().map(|&i| self.rays[i].clone()).collect();
        let t_gens: Vec<IntVec> = t.iter().map(|&i| self.rays[i].clone()).collect();

        for fmask in 1u32..(1u32 << s.len()) {
            let f: Vec<IntVec> = (0..s.len())
                .filter(|i| fmask & (1 << i) != 0)
                .map(|i| s_gens[i].clone())
                .collect();
            for gmask in 1u32..(1u32 << t.len()) {
                let g: Vec<IntVec> = (0..t.len())
                    .filter(|i| gmask & (1 << i) != 0)
                    .map(|i| t_gens[i].clone())
                    .collect();
                // span(F) ∩ span(G) via the kernel of [F | -G]
                let mut cols = f.clone();
                for v in &g {
                    cols.push(v.iter().map(|x| -x).collect());
                }
                let m = QMatrix::from_int(&IntMatrix::from_columns(self.rank, &cols));
                let ker = m.kernel();
                let mut img: Vec<Vec<BigRational>> = Vec::new();
                for kv in &ker {
                    let v: Vec<BigRational> = (0..self.rank)
                        .map(|r| {
                            (0..f.len())
                                .map(|i| &kv[i] * BigRational::from(f[i][r].clone()))
                                .sum()
                        })
                        .collect();
                    if !v.iter().all(|c| c.is_zero()) {
                        img.push(v);
                    }
                }
                if img.is_empty() {
                    continue;
                }
                let img_m = QMatrix::from_rows(&img);
                if img_m.rank() != 1 {
                    continue;
                }
                // primitive integer generator of the candidate line
                let v = &img[0];
                let mut denom = BigInt::one();
                for c in v {
                    denom = num_integer::lcm(denom, c.denom().clone());
                }
                let iv: Vec<BigInt> = v
                    .iter()
                    .map(|c| (c * BigRational::from(denom.clone())).to_integer())
                    .collect();
                let iv = primitive_part(&iv);
                for cand in [iv.clone(), iv.iter().map(|x| -x).collect::<Vec<_>>()] {
                    if simplicial_cone_contains(&s_gens, &cand)
                        && simplicial_cone_contains(&t_gens, &cand)
                        && !simplicial_cone_contains(&common_gens, &cand)
                    {
                        return Err(FanError::FaceIntersectionViolation {
                            first: s.to_vec(),
                            second: t.to_vec(),
                            witness: cand,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &IntVec {
        &self.rays[i]
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// Face closure, sorted by (dimension, lex). Simplicial fans only.
    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn contains_cone(&self, c: &[usize]) -> bool {
        let mut s = c.to_vec();
        s.sort_unstable();
        s.dedup();
        self.cones.contains(&s)
    }

    pub fn cone_generators(&self, c: &[usize]) -> Vec<IntVec> {
        c.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn cone(&self, c: &[usize]) -> Result<Cone, FanError> {
        if !self.contains_cone(c) {
            return Err(FanError::ConeNotInFan(c.to_vec()));
        }
        Ok(Cone::new(self.cone_generators(c)))
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    /// A fan is unimodular when every cone's ray generators extend to a basis
    /// of the lattice: all elementary divisors of each generator matrix are 1.
    pub fn is_unimodular(&self) -> bool {
        if !self.simplicial {
            return false;
        }
        for c in &self.max_cones {
            let m = IntMatrix::from_columns(self.rank, &self.cone_generators(c));
            let res = snf(&m);
            for i in 0..c.len() {
                if !res.form.get(i, i).is_one() {
                    return false;
                }
            }
        }
        true
    }

    /// Completeness via the wall-count criterion: all maximal cones
    /// full-dimensional, every codimension-one cone a face of exactly two
    /// maximal cones, and the adjacency graph connected.
    pub fn is_complete(&self) -> bool {
        if self.rank == 0 {
            return true;
        }
        if !self.simplicial || self.max_cones.is_empty() {
            return false;
        }
        if self.max_cones.iter().any(|c| c.len() != self.rank) {
            return false;
        }
        let walls: Vec<&Vec<usize>> =
            self.cones.iter().filter(|c| c.len() + 1 == self.rank).collect();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.max_cones.len()];
        for w in walls {
            let incident: Vec<usize> = self
                .max_cones
                .iter()
                .enumerate()
                .filter(|(_, m)| w.iter().all(|i| m.contains(i)))
                .map(|(k, _)| k)
                .collect();
            if incident.len() != 2 {
                return false;
            }
            adjacency[incident[0]].push(incident[1]);
            adjacency[incident[1]].push(incident[0]);
        }
        let mut seen = vec![false; self.max_cones.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &n in &adjacency[k] {
                if !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Is `x` in the support of the fan?
    pub fn support_contains(&self, x: &[BigInt]) -> bool {
        if x.iter().all(|v| v.is_zero()) {
            return true;
        }
        self.max_cones
            .iter()
            .any(|c| simplicial_cone_contains(&self.cone_generators(c), x))
    }

    /// The smallest cone of the fan containing all the given vectors, if any.
    pub fn smallest_cone_containing(&self, xs: &[IntVec]) -> Option<Vec<usize>> {
        let mut best: Option<&Vec<usize>> = None;
        for c in &self.cones {
            let gens = self.cone_generators(c);
            if xs.iter().all(|x| simplicial_cone_contains(&gens, x)) {
                best = match best {
                    None => Some(c),
                    Some(b) if c.len() < b.len() => Some(c),
                    other => other,
                };
            }
        }
        best.cloned()
    }

    /// Product fan; valid by construction.
    pub fn product(&self, other: &Fan) -> Fan {
        assert!(self.simplicial && other.simplicial, "product of simplicial fans only");
        let rank = self.rank + other.rank;
        let mut rays: Vec<IntVec> = Vec::new();
        for r in &self.rays {
            let mut v = r.clone();
            v.extend(vec![BigInt::zero(); other.rank]);
            rays.push(v);
        }
        for r in &other.rays {
            let mut v = vec![BigInt::zero(); self.rank];
            v.extend(r.clone());
            rays.push(v);
        }
        let off = self.rays.len();
        let mut max_cones = Vec::new();
        let left: Vec<Vec<usize>> =
            if self.max_cones.is_empty() { vec![vec![]] } else { self.max_cones.clone() };
        let right: Vec<Vec<usize>> =
            if other.max_cones.is_empty() { vec![vec![]] } else { other.max_cones.clone() };
        for a in &left {
            for b in &right {
                let mut c = a.clone();
                c.extend(b.iter().map(|&i| i + off));
                max_cones.push(c);
            }
        }
        Fan::assemble(rank, rays, max_cones)
    }
}

/// The star fan of a cone: the fan of the corresponding closed stratum in the
/// quotient lattice.
#[derive(Debug, Clone)]
pub struct StarFanData {
    /// The quotient fan itself.
    pub fan: Fan,
    /// Projection onto the quotient lattice; surjective with saturated image.
    pub projection: IntMatrix,
    /// For each star ray, the index of the unique original ray mapping onto it.
    pub ray_origin: Vec<usize>,
    /// For each star ray, the positive integer with
    /// `projection * original_ray = multiple * star_ray`.
    pub ray_multiple: Vec<BigInt>,
    /// Images in the star fan of the original cones containing sigma, as
    /// (original cone, star cone index set) pairs.
    pub cone_images: Vec<(Vec<usize>, Vec<usize>)>,
}

impl StarFanData {
    pub fn star_index_of_ray(&self, original_ray: usize) -> Option<usize> {
        self.ray_origin.iter().position(|&r| r == original_ray)
    }
}

/// Compute the star fan of `sigma` (a sorted ray index set of `fan`).
pub fn star_fan(fan: &Fan, sigma: &[usize]) -> Result<StarFanData, FanError> {
    if !fan.is_simplicial() {
        return Err(FanError::NonSimplicial);
    }
    if !fan.contains_cone(sigma) {
        return Err(FanError::ConeNotInFan(sigma.to_vec()));
    }
    let rank = fan.rank();
    let k = sigma.len();
    let projection = if k == 0 {
        IntMatrix::identity(rank)
    } else {
        let b = IntMatrix::from_columns(rank, &fan.cone_generators(sigma));
        let res = snf(&b);
        // last rank-k rows of U kill the saturated span of sigma
        let mut p = IntMatrix::zero(rank - k, rank);
        for i in 0..rank - k {
            for j in 0..rank {
                p.set(i, j, res.left.get(k + i, j).clone());
            }
        }
        p
    };

    // star rays come from rays of cones containing sigma
    let mut star_ray_origin: Vec<usize> = Vec::new();
    for c in fan.cones() {
        if sigma.iter().all(|i| c.contains(i)) {
            for &r in c {
                if !sigma.contains(&r) && !star_ray_origin.contains(&r) {
                    star_ray_origin.push(r);
                }
            }
        }
    }
    star_ray_origin.sort_unstable();

    let mut star_rays: Vec<IntVec> = Vec::new();
    let mut ray_multiple: Vec<BigInt> = Vec::new();
    for &r in &star_ray_origin {
        let img = projection.mul_vec(fan.ray(r));
        assert!(!img.iter().all(|v| v.is_zero()), "ray image vanishes in star fan");
        let prim = primitive_part(&img);
        let mut mult = BigInt::zero();
        for (a, b) in img.iter().zip(prim.iter()) {
            if !b.is_zero() {
                mult = a / b;
                break;
            }
        }
        assert!(mult.is_positive());
        assert!(!star_rays.contains(&prim), "star fan ray collision");
        star_rays.push(prim);
        ray_multiple.push(mult);
    }

    let star_index =
        |r: usize| -> usize { star_ray_origin.iter().position(|&x| x == r).unwrap() };

    let mut cone_images: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut star_max: Vec<Vec<usize>> = Vec::new();
    for c in fan.cones() {
        if sigma.iter().all(|i| c.contains(i)) {
            let img: Vec<usize> =
                c.iter().filter(|r| !sigma.contains(r)).map(|&r| star_index(r)).collect();
            cone_images.push((c.clone(), img.clone()));
        }
    }
    for m in fan.max_cones() {
        if sigma.iter().all(|i| m.contains(i)) {
            let img: Vec<usize> =
                m.iter().filter(|r| !sigma.contains(r)).map(|&r| star_index(r)).collect();
            star_max.push(img);
        }
    }

    let star = Fan::assemble(rank - k, star_rays, star_max);
    debug_assert!({
        let res = snf(&projection);
        (0..projection.rows()).all(|i| res.form.get(i, i).is_one())
    });

    Ok(StarFanData { fan: star, projection, ray_origin: star_ray_origin, ray_multiple, cone_images })
}

/// The fan of the projective line: rays +1 and -1 in Z.
pub fn p1_fan() -> Fan {
    make_fan(1, vec![vec![BigInt::one()], vec![-BigInt::one()]], vec![vec![0], vec![1]]).unwrap()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn chain2_fan() -> Fan {
        make_fan(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(0), BigInt::from(1)],
                vec![BigInt::from(-1), BigInt::from(1)],
                vec![BigInt::from(-1), BigInt::from(0)],
            ],
            vec![vec![0, 1], vec![1, 2], vec![2, 3]],
        )
        .unwrap()
    }

    pub fn p2_fan() -> Fan {
        make_fan(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(0), BigInt::from(1)],
                vec![BigInt::from(-1), BigInt::from(-1)],
            ],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap()
    }

    #[test]
    fn p1_fan_is_valid_and_complete() {
        let f = p1_fan();
        assert_eq!(f.cones().len(), 3, "origin and two rays");
        assert!(f.is_simplicial());
        assert!(f.is_unimodular());
        assert!(f.is_complete());
    }

    #[test]
    fn chain2_fixture_valid() {
        let f = chain2_fan();
        assert!(f.is_simplicial());
        assert!(f.is_unimodular());
        assert!(!f.is_complete(), "support is a half-plane");
    }

    #[test]
    fn line_in_cone_rejected() {
        let err = make_fan(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(-1), BigInt::from(0)],
            ],
            vec![vec![0, 1]],
        )
        .unwrap_err();
        assert_eq!(err, FanError::NotStronglyConvex(vec![0, 1]));
    }

    #[test]
    fn nonprimitive_ray_rejected() {
        let err = make_fan(1, vec![vec![BigInt::from(2)]], vec![vec![0]]).unwrap_err();
        assert_eq!(err, FanError::NonPrimitiveRay(0));
    }

    #[test]
    fn overlapping_cones_rejected() {
        // two 2-dimensional cones overlapping in a 2-dimensional region
        let err = make_fan(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(0), BigInt::from(1)],
                vec![BigInt::from(1), BigInt::from(1)],
                vec![BigInt::from(-1), BigInt::from(1)],
            ],
            vec![vec![0, 1], vec![2, 3]],
        )
        .unwrap_err();
        assert!(matches!(err, FanError::FaceIntersectionViolation { .. }));
    }

    #[test]
    fn simpliciality_flags() {
        let f = make_fan(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(0), BigInt::from(1)],
                vec![BigInt::from(1), BigInt::from(1)],
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!(!f.is_simplicial());
        assert!(!f.is_unimodular());

        let f = make_fan(
            2,
            vec![
                vec![BigInt::from(1), BigInt::from(0)],
                vec![BigInt::from(1), BigInt::from(2)],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        assert!(f.is_simplicial());
        assert!(!f.is_unimodular(), "index 2 cone");
    }

    #[test]
    fn p2_complete_by_wall_count() {
        assert!(p2_fan().is_complete());
    }

    #[test]
    fn completeness_implies_grid_membership() {
        let f = p2_fan();
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                let v = vec![BigInt::from(x), BigInt::from(y)];
                assert!(f.support_contains(&v), "({x},{y}) must lie in some cone");
            }
        }
    }

    #[test]
    fn star_fan_of_ray_in_chain2_is_p1() {
        let f = chain2_fan();
        let star = star_fan(&f, &[1]).unwrap();
        assert_eq!(star.fan.rank(), 1);
        assert_eq!(star.fan.rays().len(), 2);
        let rays: Vec<IntVec> = star.fan.rays().to_vec();
        assert!(rays.contains(&vec![BigInt::from(1)]));
        assert!(rays.contains(&vec![BigInt::from(-1)]));
        assert!(star.fan.is_complete(), "the stratum is a projective line");
    }

    #[test]
    fn star_fan_of_origin_is_original() {
        let f = chain2_fan();
        let star = star_fan(&f, &[]).unwrap();
        assert_eq!(star.fan, f);
        assert_eq!(star.projection, IntMatrix::identity(2));
    }

    #[test]
    fn star_fan_of_max_cone_is_point() {
        let f = chain2_fan();
        let star = star_fan(&f, &[1, 2]).unwrap();
        assert_eq!(star.fan.rank(), 0);
        assert!(star.fan.rays().is_empty());
        assert!(star.fan.is_complete());
    }

    #[test]
    fn star_fan_composes() {
        // star of tau/sigma inside star(sigma) matches the star of the cone
        // generated by both
        let big = chain2_fan().product(&p1_fan());
        for sigma in big.cones() {
            let s1 = star_fan(&big, sigma).unwrap();
            for (orig, img) in &s1.cone_images {
                let s2a = star_fan(&s1.fan, img).unwrap();
                let s2b = star_fan(&big, orig).unwrap();
                assert_eq!(s2a.fan.rank(), s2b.fan.rank());
                assert_eq!(s2a.fan.rays().len(), s2b.fan.rays().len());
                assert_eq!(s2a.fan.max_cones().len(), s2b.fan.max_cones().len());
                assert_eq!(s2a.fan.is_complete(), s2b.fan.is_complete());
            }
        }
    }

    #[test]
    fn faces_of_cones() {
        let c = Cone::new(vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ]);
        assert_eq!(c.faces().unwrap().len(), 4);

        let ray = Cone::new(vec![vec![BigInt::from(1)]]);
        let faces = ray.faces().unwrap();
        assert_eq!(faces.len(), 2);
        assert!(faces.iter().any(|f| f.generators().is_empty()));

        let origin = Cone::new(vec![]);
        assert_eq!(origin.faces().unwrap().len(), 1);

        let bad = Cone::new(vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(1)],
        ]);
        assert_eq!(bad.faces(), Err(FanError::NonSimplicial));
    }

    #[test]
    fn face_closure_closed_under_intersection() {
        for fan in [chain2_fan(), p2_fan(), chain2_fan().product(&p1_fan())] {
            for a in fan.cones() {
                for b in fan.cones() {
                    let common: Vec<usize> =
                        a.iter().filter(|i| b.contains(i)).cloned().collect();
                    assert!(fan.contains_cone(&common));
                }
            }
        }
    }
}
