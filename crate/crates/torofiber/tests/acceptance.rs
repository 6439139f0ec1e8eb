//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime. All checks are exact; the stated time budgets are asserted.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use torofiber::exact_linalg::{
    hilbert_basis_simplicial, hnf, snf, IntMatrix, QMatrix,
};
use torofiber::fan_geometry::make_fan;
use torofiber::fiber_space::{fixtures, ToricFiberSpace};
use torofiber::log_sheaves::{
    circle_cohomology, monodromy_op, relative_pushforward_check, LogStalkModule,
};
use torofiber::rob_combinatorics::fiber_invariants;
use torofiber::special_fiber::strata;
use torofiber::weight_ss::{degeneration_check_f, degeneration_check_w, weight_d1, weight_e1};

fn report(criterion: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    println!("ACCEPTANCE {criterion}: PASS ({elapsed:.2?})");
    assert!(
        elapsed < budget,
        "{criterion} exceeded its time budget: {elapsed:.2?} > {budget:.2?}"
    );
}

#[test]
fn criterion_1_strata_identification_on_quad() {
    let start = Instant::now();
    let fs = fixtures::quad();
    let st = strata(&fs, &[0, 1]).unwrap();
    let classes = st.identification_classes();
    assert_eq!(classes.len(), 1, "exactly one identification class");
    let (cone, mut sets) = classes[0].clone();
    assert_eq!(cone, vec![0, 1, 2, 3], "the deepest stratum");
    sets.sort();
    // E14 = E23 = E234 = E134 = E124 = E123 = E1234 (1-based labels)
    let mut expected = vec![
        vec![0, 3],
        vec![1, 2],
        vec![1, 2, 3],
        vec![0, 2, 3],
        vec![0, 1, 3],
        vec![0, 1, 2],
        vec![0, 1, 2, 3],
    ];
    expected.sort();
    assert_eq!(sets, expected);
    report("criterion 1 (strata identification)", start, Duration::from_secs(1));
}

#[test]
fn criterion_2_weak_semistable_reduction() {
    let start = Instant::now();
    for (fs, expected_degrees) in
        [(fixtures::nonred(), vec![2i64]), (fixtures::mixed23(), vec![6i64])]
    {
        let degrees = fs.reduction_degrees().unwrap();
        let expected: Vec<BigInt> = expected_degrees.iter().map(|&d| BigInt::from(d)).collect();
        assert_eq!(degrees, expected);
        let reduced = fs.kummer_base_change(&degrees).unwrap();
        assert_eq!(reduced.check_reduced(), Ok(true));
    }
    report("criterion 2 (weak semistable reduction)", start, Duration::from_secs(1));
}

#[test]
fn criterion_3_fiber_type_formula() {
    let start = Instant::now();
    let chart = fixtures::a1().chart_model(&[0, 1]).unwrap();
    let inv = fiber_invariants(&chart).unwrap();
    assert_eq!((inv.interval, inv.circle, inv.disc), (1, 1, 0));
    let chart = fixtures::quad().chart_model(&[0, 1, 2, 3]).unwrap();
    let inv = fiber_invariants(&chart).unwrap();
    assert_eq!((inv.interval, inv.circle, inv.disc), (2, 2, 0));
    report("criterion 3 (fiber-type formula)", start, Duration::from_secs(1));
}

#[test]
fn criterion_4_log_poincare_stalks() {
    let start = Instant::now();
    for k in 3..=4 {
        let module = LogStalkModule::new(1, k);
        let m = monodromy_op(&module, 0).unwrap();
        let coh = circle_cohomology(&m.on_reduced_module()).unwrap();
        assert_eq!(coh.h0_basis.len(), 1, "H0 = span{{e1}}");
        let v = &coh.h0_basis[0];
        assert!(!v[0].is_zero() && v[1..].iter().all(|x| x.is_zero()));
        assert_eq!(coh.stable_h1_dim, 0, "H1 = 0 in the stable range");
    }
    for k in 2..=4 {
        let rep = relative_pushforward_check(k).unwrap();
        assert!(rep.all_pass(), "all four pushforward ranks at K = {k}");
    }
    report("criterion 4 (log Poincare stalks)", start, Duration::from_secs(1));
}

#[test]
fn criterion_5_weight_degeneration() {
    let start = Instant::now();
    let (_, rep) = degeneration_check_w(&fixtures::chain2(), &[0]).unwrap();
    assert_eq!(rep.totals, vec![1, 0, 1]);
    assert_eq!(rep.oracle, Some(vec![1, 0, 1]));
    assert_eq!(rep.matches, Some(true));
    let (_, rep) = degeneration_check_w(&fixtures::chain2_x_chain2(), &[0, 1]).unwrap();
    assert_eq!(rep.totals, vec![1, 0, 2, 0, 1]);
    assert_eq!(rep.oracle, Some(vec![1, 0, 2, 0, 1]));
    assert_eq!(rep.matches, Some(true));
    report("criterion 5 (weight degeneration at E2)", start, Duration::from_secs(5));
}

#[test]
fn criterion_6_hodge_degeneration() {
    let start = Instant::now();
    let (_, rep) = degeneration_check_f(&fixtures::chain2(), &[0]).unwrap();
    assert_eq!(rep.totals, vec![1, 0, 1]);
    assert_eq!(rep.matches, Some(true));
    let (_, rep) = degeneration_check_f(&fixtures::chain2_x_chain2(), &[0, 1]).unwrap();
    assert_eq!(rep.totals, vec![1, 0, 2, 0, 1]);
    assert_eq!(rep.matches, Some(true));
    report("criterion 6 (Hodge degeneration at E1)", start, Duration::from_secs(5));
}

// one chain factor: a degenerating family of projective lines with k
// components over the half line, conjugated by a random unimodular matrix
fn random_chain_factor(rng: &mut StdRng, k: usize) -> ToricFiberSpace {
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    rays.push(vec![BigInt::one(), BigInt::zero()]);
    for i in 1..=k {
        rays.push(vec![BigInt::from(1i64 - i as i64), BigInt::one()]);
    }
    rays.push(vec![-BigInt::one(), BigInt::zero()]);
    let max_cones: Vec<Vec<usize>> = (0..=k).map(|i| vec![i, i + 1]).collect();

    // random shear product in SL2(Z)
    let mut m = [[1i64, 0], [0, 1]];
    for _ in 0..rng.gen_range(0..4) {
        let a = rng.gen_range(-2i64..=2);
        let m2 = if rng.gen_bool(0.5) { [[1, a], [0, 1]] } else { [[1, 0], [a, 1]] };
        m = [
            [
                m[0][0] * m2[0][0] + m[0][1] * m2[1][0],
                m[0][0] * m2[0][1] + m[0][1] * m2[1][1],
            ],
            [
                m[1][0] * m2[0][0] + m[1][1] * m2[1][0],
                m[1][0] * m2[0][1] + m[1][1] * m2[1][1],
            ],
        ];
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert_eq!(det, 1);
    let transformed: Vec<Vec<BigInt>> = rays
        .iter()
        .map(|r| {
            vec![
                BigInt::from(m[0][0]) * &r[0] + BigInt::from(m[0][1]) * &r[1],
                BigInt::from(m[1][0]) * &r[0] + BigInt::from(m[1][1]) * &r[1],
            ]
        })
        .collect();
    let source = make_fan(2, transformed, max_cones).unwrap();
    let target = make_fan(1, vec![vec![BigInt::one()]], vec![vec![0]]).unwrap();
    // the vertical coordinate composed with the inverse shear:
    // phi = [0 1] * m^{-1} = [-m10, m00]
    let map = IntMatrix::from_rows(&[vec![-m[1][0], m[0][0]]]);
    ToricFiberSpace::new(source, target, map)
}

#[test]
fn criterion_7_d1_squared_zero_randomized() {
    let start = Instant::now();
    // fixtures with a defined weight spectral sequence
    for (fs, tau) in [
        (fixtures::chain2(), vec![0]),
        (fixtures::chain2_x_chain2(), vec![0, 1]),
        (fixtures::chain2_x_p1(), vec![0]),
    ] {
        let mut page = weight_e1(&fs, &tau).unwrap();
        weight_d1(&mut page).expect("d1 squared vanishes on the fixture");
    }
    // 50 randomized weakly semistable products over a base of rank <= 3
    let mut rng = StdRng::seed_from_u64(20260809);
    for instance in 0..50 {
        let factors = rng.gen_range(1..=3usize);
        // keep the total component count at desk scale
        let mut ks = Vec::new();
        let mut total = 1usize;
        for _ in 0..factors {
            let k = rng.gen_range(1..=3usize);
            if total * k > 6 {
                ks.push(1);
            } else {
                total *= k;
                ks.push(k);
            }
        }
        let mut factor = |rng: &mut StdRng, k: usize| -> ToricFiberSpace {
            let f = random_chain_factor(rng, k);
            if rng.gen_bool(0.3) {
                // a quasi-smooth variant via a degree-2 or 3 base change
                let d = BigInt::from(rng.gen_range(2..=3));
                f.kummer_base_change(&[d]).unwrap()
            } else {
                f
            }
        };
        let mut fs = factor(&mut rng, ks[0]);
        for &k in &ks[1..] {
            fs = fs.product(&factor(&mut rng, k));
        }
        assert!(fs.check_equidimensional(), "instance {instance}");
        assert_eq!(fs.check_reduced(), Ok(true), "instance {instance}");
        let tau = fs.default_tau();
        let mut page = weight_e1(&fs, &tau)
            .unwrap_or_else(|e| panic!("instance {instance}: {e:?}"));
        weight_d1(&mut page)
            .unwrap_or_else(|e| panic!("instance {instance}: d1^2 != 0: {e:?}"));
        // the oracle totals must match as well
        let (_, rep) = degeneration_check_w(&fs, &tau).unwrap();
        assert_eq!(rep.matches, Some(true), "instance {instance} oracle match");
    }
    report("criterion 7 (d1^2 = 0, randomized)", start, Duration::from_secs(30));
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect();
    IntMatrix::from_rows(&data)
}

// lattice points of the closed fundamental parallelepiped, by scanning the
// bounding box
fn brute_force_parallelepiped_points(rays: &IntMatrix) -> Vec<Vec<BigInt>> {
    let d = rays.rows();
    let k = rays.cols();
    let rq = QMatrix::from_int(rays);
    let mut bound = vec![0i64; d];
    for i in 0..d {
        let mut acc = 0i64;
        for j in 0..k {
            acc += rays.get(i, j).abs().to_string().parse::<i64>().unwrap();
        }
        bound[i] = acc;
    }
    let mut out = Vec::new();
    let mut cursor: Vec<i64> = bound.iter().map(|b| -b).collect();
    loop {
        let x: Vec<BigInt> = cursor.iter().map(|&v| BigInt::from(v)).collect();
        if !x.iter().all(|v| v.is_zero()) {
            let b: Vec<BigRational> = x.iter().map(|v| BigRational::from(v.clone())).collect();
            if let Some(sol) = rq.solve(&b) {
                if rq.mul_vec(&sol) == b {
                    let one = BigRational::one();
                    if sol.iter().all(|c| !c.is_negative() && *c <= one) {
                        out.push(x);
                    }
                }
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            cursor[i] += 1;
            if cursor[i] > bound[i] {
                cursor[i] = -bound[i];
                i += 1;
            } else {
                break;
            }
        }
    }
}

// brute-force Hilbert basis: lattice points of the closed fundamental
// parallelepiped, reduced by pairwise subtraction
fn brute_force_hilbert(rays: &IntMatrix) -> Vec<Vec<BigInt>> {
    let d = rays.rows();
    let k = rays.cols();
    let rq = QMatrix::from_int(rays);
    let lam = |x: &[BigInt]| -> Option<Vec<BigRational>> {
        let b: Vec<BigRational> = x.iter().map(|v| BigRational::from(v.clone())).collect();
        let sol = rq.solve(&b)?;
        if rq.mul_vec(&sol) == b {
            Some(sol)
        } else {
            None
        }
    };
    // bounding box of the closed parallelepiped
    let mut bound = vec![0i64; d];
    for i in 0..d {
        let mut acc = 0i64;
        for j in 0..k {
            acc += rays.get(i, j).abs().to_string().parse::<i64>().unwrap();
        }
        bound[i] = acc;
    }
    let mut candidates: Vec<Vec<BigInt>> = Vec::new();
    let mut cursor = vec![0i64; d];
    for i in 0..d {
        cursor[i] = -bound[i];
    }
    loop {
        let x: Vec<BigInt> = cursor.iter().map(|&v| BigInt::from(v)).collect();
        if !x.iter().all(|v| v.is_zero()) {
            if let Some(sol) = lam(&x) {
                let one = BigRational::one();
                if sol.iter().all(|c| !c.is_negative() && *c <= one) {
                    candidates.push(x);
                }
            }
        }
        // advance
        let mut i = 0;
        loop {
            if i == d {
                let mut out: Vec<Vec<BigInt>> = Vec::new();
                // irreducible elements
                'outer: for g in &candidates {
                    for h in &candidates {
                        if h == g {
                            continue;
                        }
                        let diff: Vec<BigInt> =
                            g.iter().zip(h.iter()).map(|(a, b)| a - b).collect();
                        if diff.iter().all(|v| v.is_zero()) {
                            continue;
                        }
                        if let Some(sol) = lam(&diff) {
                            if sol.iter().all(|c| !c.is_negative()) {
                                continue 'outer;
                            }
                        }
                    }
                    out.push(g.clone());
                }
                out.sort();
                return out;
            }
            cursor[i] += 1;
            if cursor[i] > bound[i] {
                cursor[i] = -bound[i];
                i += 1;
            } else {
                break;
            }
        }
    }
}

#[test]
fn criterion_8_exact_linalg_property_suite() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(42);
    for i in 0..200 {
        let rows = rng.gen_range(1..=4usize);
        let cols = rng.gen_range(1..=4usize);
        let a = random_matrix(&mut rng, rows, cols, 9);

        let h = hnf(&a);
        assert!(h.left.is_unimodular(), "instance {i}: U unimodular");
        assert_eq!(h.left.mul(&a), h.form, "instance {i}: U*A = H");

        let s = snf(&a);
        let v = s.right.as_ref().unwrap();
        assert!(s.left.is_unimodular(), "instance {i}: U unimodular");
        assert!(v.is_unimodular(), "instance {i}: V unimodular");
        assert_eq!(s.left.mul(&a).mul(v), s.form, "instance {i}: U*A*V = S");
        // diagonal, nonnegative, divisibility chain
        let n = rows.min(cols);
        let mut prev: Option<BigInt> = None;
        for r in 0..rows {
            for c in 0..cols {
                if r != c {
                    assert!(s.form.get(r, c).is_zero(), "instance {i}: off-diagonal");
                }
            }
        }
        for dpos in 0..n {
            let dval = s.form.get(dpos, dpos).clone();
            assert!(!dval.is_negative(), "instance {i}: nonnegative");
            if let Some(p) = prev {
                if !p.is_zero() {
                    assert!((&dval % &p).is_zero(), "instance {i}: divisibility");
                } else {
                    assert!(dval.is_zero(), "instance {i}: zeros stay zero");
                }
            }
            prev = Some(dval);
        }
    }

    // Hilbert bases against brute force
    let mut done = 0;
    while done < 20 {
        let d = if done % 2 == 0 { 2 } else { 3 };
        let cols: Vec<Vec<BigInt>> = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| BigInt::from(rng.gen_range(-5i64..=5)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let rays = IntMatrix::from_columns(d, &cols);
        if rays.rank() != d {
            continue;
        }
        let ours = hilbert_basis_simplicial(&rays).unwrap();
        let brute = brute_force_hilbert(&rays);
        assert_eq!(ours, brute, "cone {cols:?}");
        // generation: every parallelepiped point is a nonnegative integer
        // combination of the basis
        let rq = QMatrix::from_int(&rays);
        let in_cone = |x: &[BigInt]| -> bool {
            let b: Vec<BigRational> = x.iter().map(|v| BigRational::from(v.clone())).collect();
            match rq.solve(&b) {
                Some(sol) => rq.mul_vec(&sol) == b && sol.iter().all(|c| !c.is_negative()),
                None => false,
            }
        };
        fn generated(
            gens: &[Vec<BigInt>],
            in_cone: &dyn Fn(&[BigInt]) -> bool,
            target: &[BigInt],
            seen: &mut std::collections::BTreeSet<Vec<BigInt>>,
        ) -> bool {
            if target.iter().all(|v| v.is_zero()) {
                return true;
            }
            if !seen.insert(target.to_vec()) {
                return false;
            }
            for g in gens {
                let rest: Vec<BigInt> =
                    target.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
                if in_cone(&rest) && generated(gens, in_cone, &rest, seen) {
                    return true;
                }
            }
            false
        }
        for p in brute_force_parallelepiped_points(&rays) {
            let mut seen = std::collections::BTreeSet::new();
            assert!(
                generated(&ours, &in_cone, &p, &mut seen),
                "parallelepiped point {p:?} must be generated"
            );
        }
        done += 1;
    }
    report("criterion 8 (exact linear algebra suite)", start, Duration::from_secs(30));
}

#[test]
fn criterion_9_report_determinism() {
    let start = Instant::now();
    for (name, text) in torofiber::cli::fixture_documents() {
        let (a, code_a) = torofiber::cli::execute("report", &text, None, None, None, true, true);
        let (b, code_b) = torofiber::cli::execute("report", &text, None, None, None, true, true);
        assert_eq!(code_a, code_b, "{name}");
        assert_eq!(a, b, "{name}: byte-identical machine output");
    }
    report("criterion 9 (report determinism)", start, Duration::from_secs(60));
}
