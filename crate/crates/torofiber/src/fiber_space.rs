//! Toric fiber spaces: a source fan, a target fan, and a lattice map.
//!
//! The module provides the validity predicates (toric morphism,
//! equidimensional, reduced, proper), chart extraction into monomial block
//! data, the Kummer base change producing a model with reduced fibers, and
//! the kernel fan of the generic fiber used as the oracle for the spectral
//! sequence checks.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact_linalg::{
    hilbert_basis_simplicial, hnf, kernel_basis, primitive_part, IntMatrix, QMatrix,
    SublatticeIndex,
};
use crate::fan_geometry::{cone_contains, simplicial_cone_contains, Fan, IntVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiberError {
    NotToric,
    NotEquidimensional,
    NotReduced,
    NotProper,
    TargetNotSmooth,
    IncompatibleDegrees(String),
    NonSimplicial,
    ConeNotInFan(Vec<usize>),
    InvalidChart(String),
}

impl fmt::Display for FiberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberError::NotToric => write!(f, "map is not a toric morphism of the fans"),
            FiberError::NotEquidimensional => write!(f, "morphism is not equidimensional"),
            FiberError::NotReduced => write!(f, "fibers are not reduced"),
            FiberError::NotProper => write!(f, "morphism is not proper"),
            FiberError::TargetNotSmooth => write!(f, "target fan must be unimodular"),
            FiberError::IncompatibleDegrees(s) => write!(f, "incompatible base-change degrees: {s}"),
            FiberError::NonSimplicial => write!(f, "fan must be simplicial"),
            FiberError::ConeNotInFan(c) => write!(f, "cone {c:?} is not in the fan"),
            FiberError::InvalidChart(s) => write!(f, "invalid chart data: {s}"),
        }
    }
}

impl std::error::Error for FiberError {}

/// Exponent data of a local monomial chart:
/// `f*(y_j) = prod_{i in block j} x_i^{l_i}` for `j = 1..m'`, with the
/// remaining target coordinates pulled back to coordinate functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartModel {
    pub n: usize,
    pub m: usize,
    pub n_prime: usize,
    pub m_prime: usize,
    /// Strictly increasing block boundaries `t_1 < ... < t_{m'} <= n'`.
    pub blocks: Vec<usize>,
    /// Exponents `l_1, ..., l_{t_{m'}}`, each at least 1.
    pub exponents: Vec<BigInt>,
}

impl ChartModel {
    pub fn new(
        n: usize,
        m: usize,
        n_prime: usize,
        m_prime: usize,
        blocks: Vec<usize>,
        exponents: Vec<BigInt>,
    ) -> Result<ChartModel, FiberError> {
        let c = ChartModel { n, m, n_prime, m_prime, blocks, exponents };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), FiberError> {
        if self.n_prime > self.n {
            return Err(FiberError::InvalidChart("n' exceeds n".into()));
        }
        if self.m_prime > self.m {
            return Err(FiberError::InvalidChart("m' exceeds m".into()));
        }
        if self.blocks.len() != self.m_prime {
            return Err(FiberError::InvalidChart(
                "need one block boundary per target branch".into(),
            ));
        }
        let mut prev = 0usize;
        for &t in &self.blocks {
            if t <= prev {
                return Err(FiberError::InvalidChart(
                    "block boundaries must strictly increase".into(),
                ));
            }
            prev = t;
        }
        if prev > self.n_prime {
            return Err(FiberError::InvalidChart("blocks exceed the boundary coordinates".into()));
        }
        if self.exponents.len() != prev {
            return Err(FiberError::InvalidChart("need one exponent per blocked coordinate".into()));
        }
        if self.exponents.iter().any(|l| !l.is_positive()) {
            return Err(FiberError::InvalidChart("exponents must be positive".into()));
        }
        if self.n - self.n_prime < self.m - self.m_prime {
            return Err(FiberError::InvalidChart("free directions cannot drop dimension".into()));
        }
        Ok(())
    }

    /// The index range (0-based, half open) of block `j` in `0..m'`.
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        let lo = if j == 0 { 0 } else { self.blocks[j - 1] };
        lo..self.blocks[j]
    }

    /// Total number of blocked coordinates `t_{m'}`.
    pub fn blocked(&self) -> usize {
        self.blocks.last().copied().unwrap_or(0)
    }
}

/// A toric fiber space: two fans plus an integer lattice map between the
/// lattices, with lazily computed validity flags.
pub struct ToricFiberSpace {
    source: Fan,
    target: Fan,
    map: IntMatrix,
    /// Basis of the current source lattice inside the one it was derived
    /// from, when this space arose from a base change.
    pub source_embedding: Option<IntMatrix>,
    pub target_embedding: Option<IntMatrix>,
    toroidal: OnceLock<Option<Vec<usize>>>,
    equidimensional: OnceLock<Option<Vec<usize>>>,
    reduced: OnceLock<Result<bool, FiberError>>,
    proper: OnceLock<bool>,
}

impl fmt::Debug for ToricFiberSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ToricFiberSpace(source rank {}, target rank {})",
            self.source.rank(),
            self.target.rank()
        )
    }
}

impl Clone for ToricFiberSpace {
    fn clone(&self) -> Self {
        ToricFiberSpace::new(self.source.clone(), self.target.clone(), self.map.clone())
    }
}

impl ToricFiberSpace {
    pub fn new(source: Fan, target: Fan, map: IntMatrix) -> ToricFiberSpace {
        assert_eq!(map.rows(), target.rank(), "map rows must match target rank");
        assert_eq!(map.cols(), source.rank(), "map cols must match source rank");
        ToricFiberSpace {
            source,
            target,
            map,
            source_embedding: None,
            target_embedding: None,
            toroidal: OnceLock::new(),
            equidimensional: OnceLock::new(),
            reduced: OnceLock::new(),
            proper: OnceLock::new(),
        }
    }

    pub fn source(&self) -> &Fan {
        &self.source
    }

    pub fn target(&self) -> &Fan {
        &self.target
    }

    pub fn map(&self) -> &IntMatrix {
        &self.map
    }

    pub fn ray_image(&self, ray: usize) -> IntVec {
        self.map.mul_vec(self.source.ray(ray))
    }

    /// For a vertical ray: the target ray it maps onto and the multiple.
    /// Horizontal rays (image zero) give `None`.
    pub fn ray_target(&self, ray: usize) -> Option<(usize, BigInt)> {
        let img = self.ray_image(ray);
        if img.iter().all(|v| v.is_zero()) {
            return None;
        }
        let prim = primitive_part(&img);
        for (j, w) in self.target.rays().iter().enumerate() {
            if *w == prim {
                let mut mult = BigInt::zero();
                for (a, b) in img.iter().zip(w.iter()) {
                    if !b.is_zero() {
                        mult = a / b;
                        break;
                    }
                }
                if mult.is_positive() {
                    return Some((j, mult));
                }
            }
        }
        None
    }

    pub fn is_vertical_ray(&self, ray: usize) -> bool {
        !self.ray_image(ray).iter().all(|v| v.is_zero())
    }

    /// First cone whose image is not contained in any single target cone,
    /// if one exists.
    pub fn toric_morphism_witness(&self) -> Option<Vec<usize>> {
        self.toroidal
            .get_or_init(|| {
                for c in self.source.cones() {
                    let images: Vec<IntVec> = c.iter().map(|&r| self.ray_image(r)).collect();
                    if self.target.smallest_cone_containing(&images).is_none() {
                        return Some(c.clone());
                    }
                }
                None
            })
            .clone()
    }

    /// True iff every cone of the source fan maps into some target cone.
    pub fn check_toric_morphism(&self) -> bool {
        self.source.is_simplicial()
            && self.target.is_simplicial()
            && self.toric_morphism_witness().is_none()
    }

    /// First cone whose image is not itself a cone of the target fan.
    pub fn equidimensional_witness(&self) -> Option<Vec<usize>> {
        self.equidimensional
            .get_or_init(|| {
                if !self.check_toric_morphism() {
                    return Some(self.toric_morphism_witness().unwrap_or_default());
                }
                for c in self.source.cones() {
                    let images: Vec<IntVec> = c.iter().map(|&r| self.ray_image(r)).collect();
                    let tau = self
                        .target
                        .smallest_cone_containing(&images)
                        .expect("toric morphism check passed");
                    // equality of the image cone with tau: every ray of tau
                    // must lie in the cone spanned by the images
                    let nonzero: Vec<IntVec> = images
                        .into_iter()
                        .filter(|v| !v.iter().all(|x| x.is_zero()))
                        .collect();
                    for &tray in &tau {
                        if !cone_contains(&nonzero, self.target.ray(tray)) {
                            return Some(c.clone());
                        }
                    }
                }
                None
            })
            .clone()
    }

    /// True iff the image of every source cone is a cone of the target fan.
    pub fn check_equidimensional(&self) -> bool {
        self.check_toric_morphism() && self.equidimensional_witness().is_none()
    }

    /// The image cone of a source cone, as a target ray index set.
    pub fn image_cone(&self, c: &[usize]) -> Option<Vec<usize>> {
        let images: Vec<IntVec> = c.iter().map(|&r| self.ray_image(r)).collect();
        self.target.smallest_cone_containing(&images)
    }

    /// Chart data at a cone: the boundary coordinates are the vertical rays
    /// of the cone, grouped into monomial blocks over the target rays.
    pub fn chart_model(&self, sigma: &[usize]) -> Result<ChartModel, FiberError> {
        if !self.check_equidimensional() {
            return Err(FiberError::NotEquidimensional);
        }
        if !self.source.contains_cone(sigma) {
            return Err(FiberError::ConeNotInFan(sigma.to_vec()));
        }
        let n = self.source.rank();
        let m = self.target.rank();
        // vertical rays grouped by target ray
        let mut by_target: Vec<(usize, Vec<(usize, BigInt)>)> = Vec::new();
        for &r in sigma {
            if let Some((j, l)) = self.ray_target(r) {
                match by_target.iter_mut().find(|(jj, _)| *jj == j) {
                    Some((_, v)) => v.push((r, l)),
                    None => by_target.push((j, vec![(r, l)])),
                }
            }
        }
        by_target.sort_by_key(|(j, _)| *j);
        let m_prime = by_target.len();
        let n_prime: usize = by_target.iter().map(|(_, v)| v.len()).sum();
        let mut blocks = Vec::with_capacity(m_prime);
        let mut exponents = Vec::with_capacity(n_prime);
        let mut acc = 0usize;
        for (_, v) in &by_target {
            acc += v.len();
            blocks.push(acc);
            for (_, l) in v {
                exponents.push(l.clone());
            }
        }
        ChartModel::new(n, m, n_prime, m_prime, blocks, exponents)
    }

    /// Reducedness: all chart exponents are 1 and, on every cone, the image
    /// of the lattice points equals the lattice points of the image cone.
    pub fn check_reduced(&self) -> Result<bool, FiberError> {
        self.reduced
            .get_or_init(|| {
                if !self.check_equidimensional() {
                    return Err(FiberError::NotEquidimensional);
                }
                for r in 0..self.source.rays().len() {
                    if self.is_vertical_ray(r) {
                        match self.ray_target(r) {
                            Some((_, l)) if l.is_one() => {}
                            _ => return Ok(false),
                        }
                    }
                }
                for c in self.source.cones() {
                    if c.is_empty() {
                        continue;
                    }
                    if !self.lattice_image_saturated(c) {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
            .clone()
    }

    fn lattice_image_saturated(&self, c: &[usize]) -> bool {
        let tau = self.image_cone(c).expect("equidimensional");
        if tau.is_empty() {
            return true;
        }
        let src = IntMatrix::from_columns(self.source.rank(), &self.source.cone_generators(c));
        let hb_src = hilbert_basis_simplicial(&src).expect("simplicial source cone");
        let gens: Vec<IntVec> = hb_src
            .iter()
            .map(|h| self.map.mul_vec(h))
            .filter(|v| !v.iter().all(|x| x.is_zero()))
            .collect();
        let tgt = IntMatrix::from_columns(self.target.rank(), &self.target.cone_generators(&tau));
        let hb_tgt = hilbert_basis_simplicial(&tgt).expect("simplicial target cone");
        let tau_gens = self.target.cone_generators(&tau);
        for h in &hb_tgt {
            if !semigroup_member(&gens, &tau_gens, h) {
                return false;
            }
        }
        true
    }

    /// Base-change degree per target ray: the lcm of the chart exponents of
    /// the vertical rays over it.
    pub fn reduction_degrees(&self) -> Result<Vec<BigInt>, FiberError> {
        if !self.check_equidimensional() {
            return Err(FiberError::NotEquidimensional);
        }
        let mut degrees = vec![BigInt::one(); self.target.rays().len()];
        for r in 0..self.source.rays().len() {
            if let Some((j, l)) = self.ray_target(r) {
                degrees[j] = degrees[j].lcm(&l);
            }
        }
        Ok(degrees)
    }

    /// Kummer base change along the given degrees. The target lattice is
    /// replaced by the sublattice scaling each boundary ray by its degree,
    /// the source lattice by the preimage of that sublattice, and all rays
    /// are re-primitivized in the new coordinates.
    ///
    /// When the underlying fiber product is disconnected the construction
    /// follows the component through the identity; `cover_connected`
    /// reports the index test separately.
    pub fn kummer_base_change(&self, degrees: &[BigInt]) -> Result<ToricFiberSpace, FiberError> {
        if !self.target.is_unimodular() {
            return Err(FiberError::TargetNotSmooth);
        }
        if degrees.len() != self.target.rays().len() || degrees.iter().any(|d| !d.is_positive()) {
            return Err(FiberError::IncompatibleDegrees(
                "need one positive degree per target ray".into(),
            ));
        }
        let m = self.target.rank();
        let n = self.source.rank();

        // lattice spanned by the scaled rays plus a complement of their span
        let mut gens: Vec<IntVec> = Vec::new();
        for (j, w) in self.target.rays().iter().enumerate() {
            gens.push(w.iter().map(|x| x * &degrees[j]).collect());
        }
        let ray_matrix = IntMatrix::from_columns(m, self.target.rays());
        let span_rank = ray_matrix.rank();
        if span_rank < m {
            let res = crate::exact_linalg::snf(&ray_matrix);
            let u_inv = crate::exact_linalg::unimodular_inverse(&res.left);
            for j in span_rank..m {
                gens.push(u_inv.column(j));
            }
        }
        let gen_matrix = IntMatrix::from_columns(m, &gens);
        let b = column_hnf_basis(&gen_matrix, m).ok_or_else(|| {
            FiberError::IncompatibleDegrees(
                "scaled rays do not span a finite-index sublattice".into(),
            )
        })?;

        // per-ray index check: the primitive generator of each ray direction
        // in the new lattice must be exactly degree * ray
        let bq = QMatrix::from_int(&b);
        for (j, w) in self.target.rays().iter().enumerate() {
            let scaled: Vec<BigRational> =
                w.iter().map(|x| BigRational::from(x * &degrees[j])).collect();
            let coords = bq.solve(&scaled).expect("full rank");
            let mut denom = BigInt::one();
            for c in &coords {
                denom = denom.lcm(c.denom());
            }
            if !denom.is_one() {
                return Err(FiberError::IncompatibleDegrees(format!(
                    "degree {} on ray {} is not realized by a sublattice",
                    degrees[j], j
                )));
            }
            let int_coords: Vec<BigInt> = coords.iter().map(|c| c.to_integer()).collect();
            if !crate::exact_linalg::is_primitive(&int_coords) {
                return Err(FiberError::IncompatibleDegrees(format!(
                    "ray {j} acquires index smaller than the requested degree"
                )));
            }
        }

        // new source lattice: preimage of the sublattice under the map,
        // via the kernel of [map | -B]
        let mut cols: Vec<IntVec> = Vec::new();
        for j in 0..n {
            cols.push(self.map.column(j));
        }
        for j in 0..m {
            cols.push(b.column(j).iter().map(|x| -x).collect());
        }
        let stacked = IntMatrix::from_columns(m, &cols);
        let ker = kernel_basis(&stacked);
        assert_eq!(ker.cols(), n, "preimage lattice has full rank");
        let mut v_parts: Vec<IntVec> = Vec::new();
        for j in 0..n {
            v_parts.push(ker.column(j)[..n].to_vec());
        }
        let c_basis = column_hnf_basis(&IntMatrix::from_columns(n, &v_parts), n)
            .expect("preimage lattice has full rank");

        // rewrite rays in the new coordinates, re-primitivized
        let cq = QMatrix::from_int(&c_basis);
        let mut new_source_rays: Vec<IntVec> = Vec::new();
        for r in self.source.rays() {
            let rhs: Vec<BigRational> = r.iter().map(|x| BigRational::from(x.clone())).collect();
            let coords = cq.solve(&rhs).expect("full rank");
            let mut denom = BigInt::one();
            for c in &coords {
                denom = denom.lcm(c.denom());
            }
            let v: Vec<BigInt> = coords
                .iter()
                .map(|c| (c * BigRational::from(denom.clone())).to_integer())
                .collect();
            debug_assert!(crate::exact_linalg::is_primitive(&v));
            new_source_rays.push(v);
        }
        let mut new_target_rays: Vec<IntVec> = Vec::new();
        for (j, w) in self.target.rays().iter().enumerate() {
            let scaled: Vec<BigRational> =
                w.iter().map(|x| BigRational::from(x * &degrees[j])).collect();
            let coords = bq.solve(&scaled).expect("full rank");
            new_target_rays.push(coords.iter().map(|c| c.to_integer()).collect());
        }

        // new map: B^{-1} * map * C
        let mc = self.map.mul(&c_basis);
        let mut new_map = IntMatrix::zero(m, n);
        for j in 0..n {
            let col: Vec<BigRational> =
                mc.column(j).iter().map(|x| BigRational::from(x.clone())).collect();
            let sol = bq.solve(&col).expect("full rank");
            for i in 0..m {
                debug_assert!(sol[i].denom().is_one(), "new map must be integral");
                new_map.set(i, j, sol[i].to_integer());
            }
        }

        let new_source = Fan::assemble(n, new_source_rays, self.source.max_cones().to_vec());
        let new_target = Fan::assemble(m, new_target_rays, self.target.max_cones().to_vec());
        let mut out = ToricFiberSpace::new(new_source, new_target, new_map);
        out.source_embedding = Some(c_basis);
        out.target_embedding = Some(b);
        Ok(out)
    }

    /// Connectedness of the cover induced by a base change: the fiber
    /// product is connected iff `map(N_X) + N_{Y'} = N_Y`.
    pub fn cover_connected(&self, degrees: &[BigInt]) -> bool {
        let m = self.target.rank();
        let mut gens: Vec<IntVec> = Vec::new();
        for j in 0..self.map.cols() {
            gens.push(self.map.column(j));
        }
        for (j, w) in self.target.rays().iter().enumerate() {
            gens.push(w.iter().map(|x| x * &degrees[j]).collect());
        }
        let ray_matrix = IntMatrix::from_columns(m, self.target.rays());
        let span_rank = ray_matrix.rank();
        if span_rank < m {
            let res = crate::exact_linalg::snf(&ray_matrix);
            let u_inv = crate::exact_linalg::unimodular_inverse(&res.left);
            for j in span_rank..m {
                gens.push(u_inv.column(j));
            }
        }
        let gm = IntMatrix::from_columns(m, &gens);
        matches!(
            crate::exact_linalg::sublattice_index(&gm, m),
            SublatticeIndex::Finite(d) if d.is_one()
        )
    }

    /// Index of the base-changed source lattice inside the original one.
    pub fn source_lattice_index(&self) -> Option<BigInt> {
        self.source_embedding.as_ref().map(|c| c.det().abs())
    }

    /// Properness via the support criterion: the preimage of the target
    /// support must equal the source support, probed through boundary walls
    /// and a small coordinate grid.
    pub fn check_proper(&self) -> bool {
        *self.proper.get_or_init(|| {
            if !self.check_toric_morphism() {
                return false;
            }
            if self.source.is_complete() {
                return true;
            }
            let systems = self.target_preimage_systems();
            // grid probe for thin or degenerate supports
            let n = self.source.rank();
            let mut grid = vec![vec![0i64; n]];
            for _ in 0..n {
                let mut next = Vec::new();
                for g in &grid {
                    for v in -2i64..=2 {
                        let mut h = g.clone();
                        h.remove(0);
                        h.push(v);
                        next.push(h);
                    }
                }
                grid = next;
            }
            for g in &grid {
                let x: IntVec = g.iter().map(|&v| BigInt::from(v)).collect();
                if x.iter().all(|v| v.is_zero()) {
                    continue;
                }
                let in_preimage = systems.iter().any(|s| s.contains(&self.map.mul_vec(&x)));
                if in_preimage && !self.source.support_contains(&x) {
                    return false;
                }
            }
            // boundary wall probes: crossing outward must leave the preimage
            if self.source.max_cones().iter().all(|c| c.len() == n) {
                for c in self.source.max_cones() {
                    for &rho in c {
                        let wall: Vec<usize> = c.iter().filter(|&&r| r != rho).cloned().collect();
                        let incident = self
                            .source
                            .max_cones()
                            .iter()
                            .filter(|mc| wall.iter().all(|i| mc.contains(i)))
                            .count();
                        if incident != 1 {
                            continue;
                        }
                        let mut base = vec![BigInt::zero(); n];
                        for &w in &wall {
                            for (i, v) in self.source.ray(w).iter().enumerate() {
                                base[i] += v;
                            }
                        }
                        let dir: IntVec = self.source.ray(rho).iter().map(|v| -v).collect();
                        let fb = self.map.mul_vec(&base);
                        let fd = self.map.mul_vec(&dir);
                        if systems.iter().any(|s| s.admits_direction(&fb, &fd)) {
                            return false;
                        }
                    }
                }
            }
            true
        })
    }

    fn target_preimage_systems(&self) -> Vec<ConeSystem> {
        let cones: Vec<Vec<usize>> = if self.target.max_cones().is_empty() {
            vec![vec![]]
        } else {
            self.target.max_cones().to_vec()
        };
        cones.iter().map(|c| ConeSystem::new(&self.target, c)).collect()
    }

    /// The fan of the generic fiber: the cones of the source fan lying in
    /// the kernel of the lattice map, written in kernel coordinates.
    pub fn generic_fiber_fan(&self) -> Result<Fan, FiberError> {
        if !self.check_reduced()? {
            return Err(FiberError::NotReduced);
        }
        if !self.check_proper() {
            return Err(FiberError::NotProper);
        }
        Ok(self.kernel_fan())
    }

    /// Kernel fan without the reducedness/properness gate (used for
    /// diagnostics).
    pub fn kernel_fan(&self) -> Fan {
        let k = kernel_basis(&self.map);
        let kq = QMatrix::from_int(&k);
        let mut ray_map: Vec<Option<usize>> = vec![None; self.source.rays().len()];
        let mut kernel_rays: Vec<IntVec> = Vec::new();
        for (i, r) in self.source.rays().iter().enumerate() {
            if self.is_vertical_ray(i) {
                continue;
            }
            let rhs: Vec<BigRational> = r.iter().map(|x| BigRational::from(x.clone())).collect();
            let coords = kq.solve(&rhs).expect("horizontal ray lies in the kernel lattice");
            debug_assert!(coords.iter().all(|c| c.denom().is_one()));
            let v: IntVec = coords.iter().map(|c| c.to_integer()).collect();
            ray_map[i] = Some(kernel_rays.len());
            kernel_rays.push(v);
        }
        let mut cones_in_kernel: Vec<Vec<usize>> = Vec::new();
        for c in self.source.cones() {
            if c.iter().all(|&r| !self.is_vertical_ray(r)) {
                let img: Vec<usize> = c.iter().map(|&r| ray_map[r].unwrap()).collect();
                cones_in_kernel.push(img);
            }
        }
        let maximal: Vec<Vec<usize>> = cones_in_kernel
            .iter()
            .filter(|s| {
                !cones_in_kernel
                    .iter()
                    .any(|t| t.len() > s.len() && s.iter().all(|i| t.contains(i)))
            })
            .cloned()
            .collect();
        Fan::assemble(k.cols(), kernel_rays, maximal)
    }

    /// Build the local fiber space of a chart model.
    pub fn from_chart(chart: &ChartModel) -> Result<ToricFiberSpace, FiberError> {
        chart.validate()?;
        let n = chart.n;
        let m = chart.m;
        let mut rays: Vec<IntVec> = Vec::new();
        for i in 0..chart.n_prime {
            let mut v = vec![BigInt::zero(); n];
            v[i] = BigInt::one();
            rays.push(v);
        }
        let max_cones = if chart.n_prime == 0 {
            vec![]
        } else {
            vec![(0..chart.n_prime).collect::<Vec<_>>()]
        };
        let source = Fan::assemble(n, rays, max_cones);
        let mut trays: Vec<IntVec> = Vec::new();
        for j in 0..chart.m_prime {
            let mut v = vec![BigInt::zero(); m];
            v[j] = BigInt::one();
            trays.push(v);
        }
        let tmax = if chart.m_prime == 0 {
            vec![]
        } else {
            vec![(0..chart.m_prime).collect::<Vec<_>>()]
        };
        let target = Fan::assemble(m, trays, tmax);
        let mut map = IntMatrix::zero(m, n);
        for j in 0..chart.m_prime {
            for i in chart.block_range(j) {
                map.set(j, i, chart.exponents[i].clone());
            }
        }
        for j in chart.m_prime..m {
            // f*(y_j) = x_{n'-m'+j} on the free coordinates
            let col = chart.n_prime - chart.m_prime + j;
            map.set(j, col, BigInt::one());
        }
        Ok(ToricFiberSpace::new(source, target, map))
    }

    /// Product of two fiber spaces.
    pub fn product(&self, other: &ToricFiberSpace) -> ToricFiberSpace {
        let source = self.source.product(&other.source);
        let target = self.target.product(&other.target);
        let mut map = IntMatrix::zero(target.rank(), source.rank());
        for i in 0..self.map.rows() {
            for j in 0..self.map.cols() {
                map.set(i, j, self.map.get(i, j).clone());
            }
        }
        for i in 0..other.map.rows() {
            for j in 0..other.map.cols() {
                map.set(self.map.rows() + i, self.map.cols() + j, other.map.get(i, j).clone());
            }
        }
        ToricFiberSpace::new(source, target, map)
    }

    /// The lex-first target cone of maximal dimension; the default base
    /// point for fiber computations.
    pub fn default_tau(&self) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        for c in self.target.cones() {
            if c.len() > best.len() {
                best = c.clone();
            }
        }
        best
    }
}

// basis of the lattice spanned by the columns, canonicalized by column-style
// HNF; None when the columns do not have full rank
fn column_hnf_basis(m: &IntMatrix, rank: usize) -> Option<IntMatrix> {
    let res = hnf(&m.transpose());
    let h = res.form.transpose(); // columns in HNF order, zeros at the right
    let mut cols: Vec<IntVec> = Vec::new();
    for j in 0..h.cols() {
        let col = h.column(j);
        if !col.iter().all(|v| v.is_zero()) {
            cols.push(col);
        }
    }
    if cols.len() != rank {
        return None;
    }
    Some(IntMatrix::from_columns(m.rows(), &cols))
}

struct ConeSystem {
    /// Equality rows: functionals vanishing on the cone's span.
    eq: Vec<Vec<BigRational>>,
    /// Inequality rows: coordinate functionals of the simplicial cone.
    ineq: Vec<Vec<BigRational>>,
}

impl ConeSystem {
    fn new(target: &Fan, cone: &[usize]) -> ConeSystem {
        let m = target.rank();
        let gens = target.cone_generators(cone);
        let w = IntMatrix::from_columns(m, &gens);
        // kernel of W^T gives the functionals vanishing on the span
        let wt = QMatrix::from_int(&w.transpose());
        let eq = wt.kernel();
        // coordinate functionals: rows L with L*W = I, via the Gram matrix
        let mut ineq = Vec::new();
        if !gens.is_empty() {
            let wq = QMatrix::from_int(&w);
            let mut wtw = QMatrix::zero(gens.len(), gens.len());
            for i in 0..gens.len() {
                for j in 0..gens.len() {
                    let mut acc = BigRational::zero();
                    for r in 0..m {
                        acc += wq.get(r, i) * wq.get(r, j);
                    }
                    wtw.set(i, j, acc);
                }
            }
            for i in 0..gens.len() {
                let mut e = vec![BigRational::zero(); gens.len()];
                e[i] = BigRational::one();
                let z = wtw.solve(&e).expect("independent generators");
                let row: Vec<BigRational> = (0..m)
                    .map(|r| (0..gens.len()).map(|j| &z[j] * wq.get(r, j)).sum())
                    .collect();
                ineq.push(row);
            }
        }
        ConeSystem { eq, ineq }
    }

    fn pair(row: &[BigRational], x: &[BigInt]) -> BigRational {
        row.iter().zip(x.iter()).map(|(a, b)| a * BigRational::from(b.clone())).sum()
    }

    fn contains(&self, x: &[BigInt]) -> bool {
        self.eq.iter().all(|r| Self::pair(r, x).is_zero())
            && self.ineq.iter().all(|r| !Self::pair(r, x).is_negative())
    }

    /// Is `base + eps * dir` in the cone for all small positive eps?
    fn admits_direction(&self, base: &[BigInt], dir: &[BigInt]) -> bool {
        if !self.contains(base) {
            return false;
        }
        for r in &self.eq {
            if !Self::pair(r, dir).is_zero() {
                return false;
            }
        }
        for r in &self.ineq {
            if Self::pair(r, base).is_zero() && Self::pair(r, dir).is_negative() {
                return false;
            }
        }
        true
    }
}

// is `target` a nonnegative integer combination of `gens` inside the
// simplicial cone spanned by `cone_gens`?
fn semigroup_member(gens: &[IntVec], cone_gens: &[IntVec], target: &[BigInt]) -> bool {
    use std::collections::BTreeSet;
    if target.iter().all(|v| v.is_zero()) {
        return true;
    }
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let mut stack: Vec<Vec<BigInt>> = vec![target.to_vec()];
    while let Some(t) = stack.pop() {
        if t.iter().all(|v| v.is_zero()) {
            return true;
        }
        if !seen.insert(t.clone()) {
            continue;
        }
        for g in gens {
            let rest: Vec<BigInt> = t.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
            if simplicial_cone_contains(cone_gens, &rest) {
                stack.push(rest);
            }
        }
    }
    false
}

/// Fixture library backing the tests, the CLI examples and the acceptance
/// suite.
pub mod fixtures {
    use super::*;
    use crate::fan_geometry::make_fan;

    fn halfline_fan() -> Fan {
        make_fan(1, vec![vec![BigInt::one()]], vec![vec![0]]).unwrap()
    }

    /// Two coordinates multiplying to the base coordinate: `y = x1 x2`.
    pub fn a1() -> ToricFiberSpace {
        let source = make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        ToricFiberSpace::new(source, halfline_fan(), IntMatrix::from_rows(&[vec![1, 1]]))
    }

    /// Non-reduced chart `y = x^2`.
    pub fn nonred() -> ToricFiberSpace {
        ToricFiberSpace::new(halfline_fan(), halfline_fan(), IntMatrix::from_rows(&[vec![2]]))
    }

    /// Mixed-exponent chart `y = x1^2 x2^3`.
    pub fn mixed23() -> ToricFiberSpace {
        let source = make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        ToricFiberSpace::new(source, halfline_fan(), IntMatrix::from_rows(&[vec![2, 3]]))
    }

    /// `y1 = x1 x2`, `y2 = x3 x4` over the plane.
    pub fn quad() -> ToricFiberSpace {
        let source = make_fan(
            4,
            vec![
                vec![BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one(), BigInt::zero(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::zero(), BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        let target = make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        ToricFiberSpace::new(
            source,
            target,
            IntMatrix::from_rows(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]),
        )
    }

    /// A chain of two projective lines degenerating out of one: rays (1,0),
    /// (0,1), (-1,1), (-1,0) over the half line.
    pub fn chain2() -> ToricFiberSpace {
        let source = make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
                vec![-BigInt::one(), BigInt::one()],
                vec![-BigInt::one(), BigInt::zero()],
            ],
            vec![vec![0, 1], vec![1, 2], vec![2, 3]],
        )
        .unwrap();
        ToricFiberSpace::new(source, halfline_fan(), IntMatrix::from_rows(&[vec![0, 1]]))
    }

    pub fn chain2_x_chain2() -> ToricFiberSpace {
        chain2().product(&chain2())
    }

    /// CHAIN2 times a constant projective line factor.
    pub fn chain2_x_p1() -> ToricFiberSpace {
        let p1_over_point = ToricFiberSpace::new(
            crate::fan_geometry::p1_fan(),
            make_fan(0, vec![], vec![]).unwrap(),
            IntMatrix::zero(0, 1),
        );
        chain2().product(&p1_over_point)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn a1_is_toric_equidimensional_reduced() {
        let fs = a1();
        assert!(fs.check_toric_morphism());
        assert!(fs.check_equidimensional());
        assert_eq!(fs.check_reduced(), Ok(true));
    }

    #[test]
    fn chain2_validity() {
        let fs = chain2();
        assert!(fs.check_toric_morphism());
        assert!(fs.check_equidimensional());
        assert_eq!(fs.check_reduced(), Ok(true));
        assert!(fs.check_proper());
    }

    #[test]
    fn chain2_with_wrong_map_is_not_toric() {
        let fs = chain2();
        let bad = ToricFiberSpace::new(
            fs.source().clone(),
            fs.target().clone(),
            IntMatrix::from_rows(&[vec![1, 0]]),
        );
        assert!(!bad.check_toric_morphism());
        // the first failing cone in (dim, lex) order is the ray (-1,1); the
        // cone <(0,1),(-1,1)> containing it has an image straddling zero
        let witness = bad.toric_morphism_witness().unwrap();
        assert_eq!(witness, vec![2]);
        let img = bad.ray_image(2);
        assert!(!bad.target().support_contains(&img));
    }

    #[test]
    fn non_equidimensional_witness() {
        // image of the quadrant is a cone not in the smooth orthant fan
        let quadrant = crate::fan_geometry::make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        let fs = ToricFiberSpace::new(
            quadrant.clone(),
            quadrant,
            IntMatrix::from_rows(&[vec![1, 0], vec![1, 1]]),
        );
        assert!(fs.check_toric_morphism());
        assert!(!fs.check_equidimensional());
        // already the first ray fails: its image ray through (1,1) is not a
        // cone of the target fan (the full quadrant witness contains it)
        assert_eq!(fs.equidimensional_witness().unwrap(), vec![0]);
    }

    #[test]
    fn chart_models_of_fixtures() {
        let chart = a1().chart_model(&[0, 1]).unwrap();
        assert_eq!(
            chart,
            ChartModel {
                n: 2,
                m: 1,
                n_prime: 2,
                m_prime: 1,
                blocks: vec![2],
                exponents: vec![BigInt::one(), BigInt::one()],
            }
        );

        let chart = nonred().chart_model(&[0]).unwrap();
        assert_eq!(chart.exponents, vec![BigInt::from(2)]);

        let chart = quad().chart_model(&[0, 1, 2, 3]).unwrap();
        assert_eq!(chart.m_prime, 2);
        assert_eq!(chart.blocks, vec![2, 4]);
        assert_eq!(chart.exponents.len(), 4);
        assert!(chart.exponents.iter().all(|l| l.is_one()));
    }

    #[test]
    fn chart_blocks_partition_the_vertical_rays() {
        let fs = quad();
        for c in fs.source().cones() {
            let chart = fs.chart_model(c).unwrap();
            let total: usize = (0..chart.m_prime).map(|j| chart.block_range(j).len()).sum();
            assert_eq!(total, chart.blocked());
        }
    }

    #[test]
    fn reducedness_flags() {
        assert_eq!(a1().check_reduced(), Ok(true));
        assert_eq!(nonred().check_reduced(), Ok(false));
        assert_eq!(quad().check_reduced(), Ok(true));
    }

    #[test]
    fn reduction_degrees_examples() {
        assert_eq!(nonred().reduction_degrees().unwrap(), vec![BigInt::from(2)]);
        assert_eq!(a1().reduction_degrees().unwrap(), vec![BigInt::one()]);
        assert_eq!(mixed23().reduction_degrees().unwrap(), vec![BigInt::from(6)]);
    }

    #[test]
    fn kummer_reduction_of_nonred() {
        let fs = nonred();
        let degrees = fs.reduction_degrees().unwrap();
        let reduced = fs.kummer_base_change(&degrees).unwrap();
        assert_eq!(reduced.map(), &IntMatrix::from_rows(&[vec![1]]), "chart becomes y' = x");
        assert_eq!(reduced.check_reduced(), Ok(true));
        assert_eq!(reduced.source_lattice_index(), Some(BigInt::one()));
    }

    #[test]
    fn kummer_reduction_of_mixed_chart() {
        let fs = mixed23();
        let degrees = fs.reduction_degrees().unwrap();
        assert_eq!(degrees, vec![BigInt::from(6)]);
        let reduced = fs.kummer_base_change(&degrees).unwrap();
        assert_eq!(reduced.check_reduced(), Ok(true));
        let idx = reduced.source_lattice_index().unwrap();
        assert!((BigInt::from(6) % &idx).is_zero());
    }

    #[test]
    fn kummer_identity_base_change() {
        let fs = a1();
        let reduced = fs.kummer_base_change(&[BigInt::one()]).unwrap();
        assert_eq!(reduced.map(), fs.map());
        assert_eq!(reduced.source(), fs.source());
    }

    #[test]
    fn kummer_squares_chart() {
        // y = x1^2 x2^2 with degree 2: the map image is already even, so the
        // preimage lattice is everything and the new chart is y' = x1 x2
        let source = crate::fan_geometry::make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        let target =
            crate::fan_geometry::make_fan(1, vec![vec![BigInt::one()]], vec![vec![0]]).unwrap();
        let fs = ToricFiberSpace::new(source, target, IntMatrix::from_rows(&[vec![2, 2]]));
        assert_eq!(fs.check_reduced(), Ok(false));
        let degrees = fs.reduction_degrees().unwrap();
        assert_eq!(degrees, vec![BigInt::from(2)]);
        let red = fs.kummer_base_change(&degrees).unwrap();
        assert_eq!(red.source_lattice_index(), Some(BigInt::one()));
        assert_eq!(red.map(), &IntMatrix::from_rows(&[vec![1, 1]]));
        assert_eq!(red.check_reduced(), Ok(true));
    }

    #[test]
    fn kummer_even_sublattice() {
        // A1 base-changed by degree 2: the preimage lattice is the even
        // coordinate-sum sublattice; the new cone acquires index 2 (a
        // quotient singularity) and the chart exponents are all 1
        let fs = a1();
        let red = fs.kummer_base_change(&[BigInt::from(2)]).unwrap();
        assert_eq!(red.source_lattice_index(), Some(BigInt::from(2)));
        // (1,1) and (2,0) are in the even lattice, (1,0) is not
        let c = red.source_embedding.as_ref().unwrap();
        let cq = QMatrix::from_int(c);
        let in_lattice = |v: &[i64]| -> bool {
            let rhs: Vec<BigRational> =
                v.iter().map(|&x| BigRational::from(BigInt::from(x))).collect();
            cq.solve(&rhs).map(|s| s.iter().all(|c| c.denom().is_one())).unwrap_or(false)
        };
        assert!(in_lattice(&[1, 1]));
        assert!(in_lattice(&[2, 0]));
        assert!(!in_lattice(&[1, 0]));
        assert!(!red.source().is_unimodular(), "quotient singularity appears");
        assert_eq!(red.check_reduced(), Ok(true));
        for r in 0..red.source().rays().len() {
            if let Some((_, l)) = red.ray_target(r) {
                assert!(l.is_one());
            }
        }
    }

    #[test]
    fn reduction_after_degrees_is_reduced() {
        for fs in [nonred(), mixed23()] {
            let degrees = fs.reduction_degrees().unwrap();
            let red = fs.kummer_base_change(&degrees).unwrap();
            assert_eq!(red.check_reduced(), Ok(true));
            // the lattice index divides the product of the degrees
            let idx = red.source_lattice_index().unwrap();
            let prod: BigInt = degrees.iter().product();
            assert!((prod % idx).is_zero());
        }
    }

    #[test]
    fn kummer_rejects_nonsmooth_target() {
        let fan = crate::fan_geometry::make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::from(1), BigInt::from(2)],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        let fs = ToricFiberSpace::new(fan.clone(), fan, IntMatrix::identity(2));
        assert_eq!(
            fs.kummer_base_change(&[BigInt::one(), BigInt::one()]).unwrap_err(),
            FiberError::TargetNotSmooth
        );
    }

    #[test]
    fn properness_cases() {
        assert!(chain2().check_proper(), "support is the preimage half-plane");
        // deleting the last cone leaves an uncovered region
        let broken = ToricFiberSpace::new(
            crate::fan_geometry::make_fan(
                2,
                vec![
                    vec![BigInt::one(), BigInt::zero()],
                    vec![BigInt::zero(), BigInt::one()],
                    vec![-BigInt::one(), BigInt::one()],
                ],
                vec![vec![0, 1], vec![1, 2]],
            )
            .unwrap(),
            crate::fan_geometry::make_fan(1, vec![vec![BigInt::one()]], vec![vec![0]]).unwrap(),
            IntMatrix::from_rows(&[vec![0, 1]]),
        );
        assert!(!broken.check_proper());
        // the affine chart y = x1 x2 is not proper: the preimage of the half
        // line is the half-plane x1 + x2 >= 0, strictly larger than the
        // quadrant
        assert!(!a1().check_proper());
        // products of proper spaces stay proper
        assert!(chain2_x_chain2().check_proper());
        assert!(chain2_x_p1().check_proper());
    }

    #[test]
    fn generic_fiber_fans() {
        let fan = chain2().generic_fiber_fan().unwrap();
        assert_eq!(fan.rank(), 1);
        assert_eq!(fan.rays().len(), 2);
        assert!(fan.is_complete(), "generic fiber of CHAIN2 is a projective line");

        let fan = chain2_x_chain2().generic_fiber_fan().unwrap();
        assert_eq!(fan.rank(), 2);
        assert!(fan.is_complete());
        assert_eq!(fan.max_cones().len(), 4, "P1 x P1");

        // A1 is rejected by the properness gate; its kernel fan has no rays
        assert_eq!(a1().generic_fiber_fan().unwrap_err(), FiberError::NotProper);
        let kf = a1().kernel_fan();
        assert_eq!(kf.rank(), 1);
        assert!(kf.rays().is_empty(), "no cone of the quadrant lies on x1 = -x2");
        assert!(!kf.is_complete());
    }

    #[test]
    fn chart_roundtrip_through_local_model() {
        let chart =
            ChartModel::new(2, 1, 2, 1, vec![2], vec![BigInt::one(), BigInt::one()]).unwrap();
        let fs = ToricFiberSpace::from_chart(&chart).unwrap();
        assert!(fs.check_equidimensional());
        let back = fs.chart_model(&[0, 1]).unwrap();
        assert_eq!(back, chart);
    }

    #[test]
    fn error_paths_require_equidimensionality() {
        let quadrant = crate::fan_geometry::make_fan(
            2,
            vec![
                vec![BigInt::one(), BigInt::zero()],
                vec![BigInt::zero(), BigInt::one()],
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        let fs = ToricFiberSpace::new(
            quadrant.clone(),
            quadrant,
            IntMatrix::from_rows(&[vec![1, 0], vec![1, 1]]),
        );
        assert_eq!(fs.chart_model(&[0, 1]).unwrap_err(), FiberError::NotEquidimensional);
        assert_eq!(fs.check_reduced().unwrap_err(), FiberError::NotEquidimensional);
        assert_eq!(fs.reduction_degrees().unwrap_err(), FiberError::NotEquidimensional);
    }

    #[test]
    fn chart_model_rejects_unknown_cone() {
        let fs = a1();
        assert_eq!(
            fs.chart_model(&[0, 5]).unwrap_err(),
            FiberError::ConeNotInFan(vec![0, 5])
        );
    }

    #[test]
    fn disconnected_cover_detection() {
        // NONRED base-changed by degree 2 has a disconnected fiber product;
        // the construction follows the identity component
        assert!(!nonred().cover_connected(&[BigInt::from(2)]));
        assert!(a1().cover_connected(&[BigInt::one()]));
    }
}
