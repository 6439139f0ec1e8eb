//! Exact integer and rational linear algebra.
//!
//! Everything downstream (fans, charts, cohomology, spectral sequences) sits
//! on top of this module. All integer computations use arbitrary-precision
//! integers and all rational computations use exact rationals; there is no
//! floating point anywhere in the crate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Errors produced by this module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    /// The ray generators handed to `hilbert_basis_simplicial` are linearly
    /// dependent.
    NonSimplicial,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NonSimplicial => write!(f, "cone rays are linearly dependent"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Dense row-major matrix over arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        IntMatrix { rows, cols, entries }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Convenience constructor from machine integers, row by row.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix::new(r, c, entries)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(dim: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = IntMatrix::zero(dim, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), dim, "column length mismatch");
            for i in 0..dim {
                m.set(i, j, col[i].clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        QMatrix::from_int(self).rank()
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.entries.clone();
        let at = |m: &Vec<BigInt>, i: usize, j: usize| m[i * n + j].clone();
        let mut prev = BigInt::one();
        let mut sign = BigInt::one();
        for k in 0..n - 1 {
            if at(&m, k, k).is_zero() {
                // pivot search
                let mut found = None;
                for i in k + 1..n {
                    if !at(&m, i, k).is_zero() {
                        found = Some(i);
                        break;
                    }
                }
                match found {
                    Some(i) => {
                        for j in 0..n {
                            m.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = at(&m, k, k) * at(&m, i, j) - at(&m, i, k) * at(&m, k, j);
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss exact division failed");
                    m[i * n + j] = q;
                }
            }
            prev = at(&m, k, k);
        }
        sign * at(&m, n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }
}

/// Result of a Hermite or Smith normal form computation.
///
/// For HNF, `form = U * A` with `U` unimodular and `right` unset.
/// For SNF, `form = U * A * V` with both transforms unimodular.
#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub form: IntMatrix,
    pub left: IntMatrix,
    pub right: Option<IntMatrix>,
}

// floor quotient, so that a - q*b lands in [0, |b|)
fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// Row Hermite normal form: pivots positive, entries above each pivot reduced
/// into `[0, pivot)`, zero rows at the bottom. Returns `H` and unimodular `U`
/// with `U * A = H`.
pub fn hnf(a: &IntMatrix) -> NormalFormResult {
    let rows = a.rows();
    let cols = a.cols();
    let mut h = a.clone();
    let mut u = IntMatrix::identity(rows);

    let row_sub = |m: &mut IntMatrix, dst: usize, src: usize, q: &BigInt| {
        for j in 0..m.cols() {
            let v = m.get(dst, j) - q * m.get(src, j);
            m.set(dst, j, v);
        }
    };
    let row_swap = |m: &mut IntMatrix, i: usize, j: usize| {
        for c in 0..m.cols() {
            let vi = m.get(i, c).clone();
            let vj = m.get(j, c).clone();
            m.set(i, c, vj);
            m.set(j, c, vi);
        }
    };
    let row_neg = |m: &mut IntMatrix, i: usize| {
        for c in 0..m.cols() {
            let v = -m.get(i, c);
            m.set(i, c, v);
        }
    };

    let mut pivot = 0usize;
    for col in 0..cols {
        if pivot >= rows {
            break;
        }
        // gcd elimination below the pivot row
        loop {
            let mut best: Option<usize> = None;
            for i in pivot..rows {
                if !h.get(i, col).is_zero() {
                    best = match best {
                        None => Some(i),
                        Some(b) => {
                            if h.get(i, col).abs() < h.get(b, col).abs() {
                                Some(i)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            if b != pivot {
                row_swap(&mut h, pivot, b);
                row_swap(&mut u, pivot, b);
            }
            let mut clean = true;
            for i in pivot + 1..rows {
                if !h.get(i, col).is_zero() {
                    let q = floor_div(h.get(i, col), h.get(pivot, col));
                    row_sub(&mut h, i, pivot, &q);
                    row_sub(&mut u, i, pivot, &q);
                    if !h.get(i, col).is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if h.get(pivot, col).is_zero() {
            continue;
        }
        if h.get(pivot, col).is_negative() {
            row_neg(&mut h, pivot);
            row_neg(&mut u, pivot);
        }
        for i in 0..pivot {
            let q = floor_div(h.get(i, col), h.get(pivot, col));
            if !q.is_zero() {
                row_sub(&mut h, i, pivot, &q);
                row_sub(&mut u, i, pivot, &q);
            }
        }
        pivot += 1;
    }

    NormalFormResult { form: h, left: u, right: None }
}

/// Smith normal form: `U * A * V = S` with `S` diagonal, entries nonnegative,
/// and each diagonal entry dividing the next.
pub fn snf(a: &IntMatrix) -> NormalFormResult {
    let rows = a.rows();
    let cols = a.cols();
    let mut s = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    fn row_sub(m: &mut IntMatrix, dst: usize, src: usize, q: &BigInt) {
        for j in 0..m.cols() {
            let val = m.get(dst, j) - q * m.get(src, j);
            m.set(dst, j, val);
        }
    }
    fn col_sub(m: &mut IntMatrix, dst: usize, src: usize, q: &BigInt) {
        for i in 0..m.rows() {
            let val = m.get(i, dst) - q * m.get(i, src);
            m.set(i, dst, val);
        }
    }
    fn row_swap(m: &mut IntMatrix, i: usize, j: usize) {
        for c in 0..m.cols() {
            let vi = m.get(i, c).clone();
            let vj = m.get(j, c).clone();
            m.set(i, c, vj);
            m.set(j, c, vi);
        }
    }
    fn col_swap(m: &mut IntMatrix, i: usize, j: usize) {
        for r in 0..m.rows() {
            let vi = m.get(r, i).clone();
            let vj = m.get(r, j).clone();
            m.set(r, i, vj);
            m.set(r, j, vi);
        }
    }
    fn row_neg(m: &mut IntMatrix, i: usize) {
        for c in 0..m.cols() {
            let val = -m.get(i, c);
            m.set(i, c, val);
        }
    }

    let n = rows.min(cols);
    for k in 0..n {
        // locate the smallest nonzero entry of the trailing block
        let find_min = |s: &IntMatrix| -> Option<(usize, usize)> {
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !s.get(i, j).is_zero() {
                        best = match best {
                            None => Some((i, j)),
                            Some((bi, bj)) => {
                                if s.get(i, j).abs() < s.get(bi, bj).abs() {
                                    Some((i, j))
                                } else {
                                    Some((bi, bj))
                                }
                            }
                        };
                    }
                }
            }
            best
        };

        loop {
            let Some((pi, pj)) = find_min(&s) else { break };
            if pi != k {
                row_swap(&mut s, k, pi);
                row_swap(&mut u, k, pi);
            }
            if pj != k {
                col_swap(&mut s, k, pj);
                col_swap(&mut v, k, pj);
            }
            let mut dirty = false;
            for i in k + 1..rows {
                if !s.get(i, k).is_zero() {
                    let q = floor_div(s.get(i, k), s.get(k, k));
                    row_sub(&mut s, i, k, &q);
                    row_sub(&mut u, i, k, &q);
                    if !s.get(i, k).is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in k + 1..cols {
                if !s.get(k, j).is_zero() {
                    let q = floor_div(s.get(k, j), s.get(k, k));
                    col_sub(&mut s, j, k, &q);
                    col_sub(&mut v, j, k, &q);
                    if !s.get(k, j).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // row and column are clear; enforce divisibility of the rest
            let pivot = s.get(k, k).clone();
            let mut offender = None;
            'scan: for i in k + 1..rows {
                for j in k + 1..cols {
                    if !(s.get(i, j) % &pivot).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    // fold the offending row into row k and start over
                    let minus_one = -BigInt::one();
                    row_sub(&mut s, k, i, &minus_one);
                    row_sub(&mut u, k, i, &minus_one);
                }
                None => break,
            }
        }
        if s.get(k, k).is_negative() {
            row_neg(&mut s, k);
            row_neg(&mut u, k);
        }
    }

    NormalFormResult { form: s, left: u, right: Some(v) }
}

/// Inverse of a unimodular integer matrix, computed via its HNF (which must
/// be the identity).
pub fn unimodular_inverse(u: &IntMatrix) -> IntMatrix {
    let res = hnf(u);
    assert!(
        res.form == IntMatrix::identity(u.rows()),
        "matrix is not unimodular"
    );
    res.left
}

/// Basis of the saturated integer kernel of `A` (kernel over `Q` intersected
/// with the integer lattice), returned as the columns of a matrix.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let res = snf(a);
    let s = &res.form;
    let v = res.right.as_ref().unwrap();
    let n = s.rows().min(s.cols());
    let mut rank = 0usize;
    for i in 0..n {
        if !s.get(i, i).is_zero() {
            rank = i + 1;
        }
    }
    let mut cols = Vec::new();
    for j in rank..a.cols() {
        cols.push(v.column(j));
    }
    IntMatrix::from_columns(a.cols(), &cols)
}

/// Index of the sublattice spanned by the columns of `b` inside `Z^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SublatticeIndex {
    Finite(BigInt),
    Infinite,
}

pub fn sublattice_index(b: &IntMatrix, ambient_rank: usize) -> SublatticeIndex {
    assert_eq!(b.rows(), ambient_rank, "columns must lie in Z^r");
    let res = snf(b);
    let s = &res.form;
    let n = s.rows().min(s.cols());
    let mut prod = BigInt::one();
    let mut rank = 0usize;
    for i in 0..n {
        if !s.get(i, i).is_zero() {
            prod *= s.get(i, i);
            rank += 1;
        }
    }
    if rank < ambient_rank {
        SublatticeIndex::Infinite
    } else {
        SublatticeIndex::Finite(prod)
    }
}

/// Divide a vector by the gcd of its entries. The zero vector is unchanged.
pub fn primitive_part(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

pub fn is_primitive(v: &[BigInt]) -> bool {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    g.is_one()
}

/// Hilbert basis of `cone(rays) ∩ lattice` for a simplicial cone, where the
/// lattice is `Z^d` intersected with the rational span of the rays.
///
/// Enumerates the lattice points of the half-open fundamental parallelepiped
/// of the rays and reduces the resulting generating set to the unique minimal
/// one by pairwise subtraction.
pub fn hilbert_basis_simplicial(rays: &IntMatrix) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    let d = rays.rows();
    let k = rays.cols();
    if k == 0 {
        return Ok(Vec::new());
    }
    if rays.rank() != k {
        return Err(LinalgError::NonSimplicial);
    }

    // basis of the saturated span lattice, as the first k columns of U^{-1}
    let res = snf(rays);
    let u_inv = unimodular_inverse(&res.left);
    let span_basis: Vec<Vec<BigInt>> = (0..k).map(|j| u_inv.column(j)).collect();

    // rays in span-lattice coordinates: first k rows of U * rays
    let ur = res.left.mul(rays);
    for i in k..d {
        for j in 0..k {
            assert!(ur.get(i, j).is_zero(), "span coordinates not flat");
        }
    }
    let mut rl = IntMatrix::zero(k, k);
    for i in 0..k {
        for j in 0..k {
            rl.set(i, j, ur.get(i, j).clone());
        }
    }

    let rl_q = QMatrix::from_int(&rl);
    let coords = |x: &[BigInt]| -> Vec<BigRational> {
        let b: Vec<BigRational> = x.iter().map(|e| BigRational::from(e.clone())).collect();
        rl_q.solve(&b).expect("full-rank solve")
    };

    // parallelepiped points via the cokernel of rl
    let res2 = snf(&rl);
    let u2_inv = unimodular_inverse(&res2.left);
    let diag: Vec<BigInt> = (0..k).map(|i| res2.form.get(i, i).clone()).collect();
    assert!(diag.iter().all(|v| !v.is_zero()));

    let mut points: Vec<Vec<BigInt>> = Vec::new();
    let mut tuple = vec![BigInt::zero(); k];
    loop {
        let x0 = u2_inv.mul_vec(&tuple);
        // shift the coset representative into the half-open parallelepiped
        let lam = coords(&x0);
        let mut x = x0.clone();
        for (i, l) in lam.iter().enumerate() {
            let fl = l.floor().to_integer();
            if !fl.is_zero() {
                for r in 0..k {
                    let v = &x[r] - &fl * rl.get(r, i);
                    x[r] = v;
                }
            }
        }
        if !x.iter().all(|e| e.is_zero()) {
            points.push(x);
        }
        // advance the mixed-radix tuple
        let mut carry = true;
        for i in 0..k {
            if carry {
                tuple[i] += 1;
                if tuple[i] == diag[i] {
                    tuple[i] = BigInt::zero();
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }

    let mut gens: Vec<Vec<BigInt>> = points;
    for j in 0..k {
        gens.push(rl.column(j));
    }
    gens.sort();
    gens.dedup();

    // keep the irreducible elements
    let in_cone = |x: &[BigInt]| -> bool { coords(x).iter().all(|c| !c.is_negative()) };
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    'outer: for g in &gens {
        for h in &gens {
            if h == g {
                continue;
            }
            let diff: Vec<BigInt> = g.iter().zip(h.iter()).map(|(a, b)| a - b).collect();
            if diff.iter().all(|e| e.is_zero()) {
                continue;
            }
            if in_cone(&diff) {
                continue 'outer;
            }
        }
        basis.push(g.clone());
    }

    // map back into Z^d
    let mut out: Vec<Vec<BigInt>> = basis
        .iter()
        .map(|x| {
            let mut v = vec![BigInt::zero(); d];
            for (i, c) in x.iter().enumerate() {
                for r in 0..d {
                    let t = &v[r] + c * &span_basis[i][r];
                    v[r] = t;
                }
            }
            v
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Dense matrix over exact rationals, used for cohomology and spectral
/// sequence computations.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, entries: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_int(a: &IntMatrix) -> Self {
        let mut m = QMatrix::zero(a.rows(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                m.set(i, j, BigRational::from(a.get(i, j).clone()));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigRational>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = QMatrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = QMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k).clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + &a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.cols {
            if r >= m.rows {
                break;
            }
            let mut sel = None;
            for i in r..m.rows {
                if !m.get(i, c).is_zero() {
                    sel = Some(i);
                    break;
                }
            }
            let Some(sel) = sel else { continue };
            if sel != r {
                for j in 0..m.cols {
                    let a = m.get(r, j).clone();
                    let b = m.get(sel, j).clone();
                    m.set(r, j, b);
                    m.set(sel, j, a);
                }
            }
            let inv = m.get(r, c).clone();
            for j in 0..m.cols {
                let v = m.get(r, j) / &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in 0..m.cols {
                        let v = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the rational kernel, as column vectors.
    pub fn kernel(&self) -> Vec<Vec<BigRational>> {
        let (r, pivots) = self.rref();
        let mut free: Vec<usize> = Vec::new();
        for c in 0..self.cols {
            if !pivots.contains(&c) {
                free.push(c);
            }
        }
        let mut basis = Vec::new();
        for &f in &free {
            let mut v = vec![BigRational::zero(); self.cols];
            v[f] = BigRational::one();
            for (pi, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(pi, f).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `A x = b`; `None` when inconsistent. When the solution is not
    /// unique the free variables are set to zero.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = QMatrix::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (pi, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(pi, self.cols).clone();
        }
        Some(x)
    }
}
