use std::collections::{BTreeSet, HashMap};

use nonpolar::catalog::{build_catalog, CatalogEntry, Provenance};
use nonpolar::deteq::{determining_equations, is_parametric, verify};
use nonpolar::dsl::{parse_expr, parse_generator};
use nonpolar::jetspace::{Independent, JetRegistry};
use nonpolar::liegen::{prolong, GeneratorSpec};
use nonpolar::symcore::{normalize, rat, Atom, Expr, RawExpr, Rational};
use nonpolar::system::BalanceSystem;
use proptest::prelude::*;

/// Point coordinates of the 2D registry plus `G`.
fn pool(r: &JetRegistry) -> Vec<Atom> {
    let mut v = vec![r.t(), r.x(1), r.x(2), r.u(1), r.u(2), r.p(), r.rho()];
    v.push(r.g());
    v
}

fn raw(atoms: Vec<Atom>) -> impl Strategy<Value = RawExpr> {
    let leaf = prop_oneof![
        proptest::sample::select(atoms).prop_map(RawExpr::Atom),
        (-4i64..=4, 1i64..=3).prop_map(|(n, d)| RawExpr::Num(rat(n, d))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 1..3).prop_map(RawExpr::Add),
            proptest::collection::vec(inner.clone(), 1..3).prop_map(RawExpr::Mul),
            inner.clone().prop_map(|e| RawExpr::Neg(Box::new(e))),
            (inner, 0i64..3).prop_map(|(e, k)| e.pow(k)),
        ]
    })
}

fn expr_over(atoms: Vec<Atom>) -> impl Strategy<Value = Expr> {
    raw(atoms).prop_map(|r| normalize(&r).unwrap())
}

fn point_coords(r: &JetRegistry) -> Vec<Atom> {
    vec![r.t(), r.x(1), r.x(2), r.u(1), r.u(2), r.p(), r.rho()]
}

fn reg2() -> JetRegistry {
    JetRegistry::new(2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normalize_is_idempotent(e in raw(pool(&reg2()))) {
        let once = normalize(&e).unwrap();
        let twice = normalize(&once.to_raw()).unwrap();
        prop_assert_eq!(once, twice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in expr_over(pool(&reg2())), b in expr_over(pool(&reg2())), c in expr_over(pool(&reg2()))) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Expr::one(), a.clone());
    }

    #[test]
    fn leibniz_for_partials(a in expr_over(pool(&reg2())), b in expr_over(pool(&reg2())), i in 0usize..7) {
        let v = point_coords(&reg2())[i].clone();
        let lhs = (&a * &b).diff_partial(&v).unwrap();
        let rhs = &a.diff_partial(&v).unwrap() * &b + &a * &b.diff_partial(&v).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn partials_commute(a in expr_over(pool(&reg2())), i in 0usize..7, j in 0usize..7) {
        let cs = point_coords(&reg2());
        let (v, w) = (&cs[i], &cs[j]);
        let vw = a.diff_partial(v).unwrap().diff_partial(w).unwrap();
        let wv = a.diff_partial(w).unwrap().diff_partial(v).unwrap();
        prop_assert_eq!(vw, wv);
    }

    #[test]
    fn partials_match_finite_differences(
        a in expr_over(point_coords(&reg2())),
        i in 0usize..7,
        vals in proptest::collection::vec(-2.0f64..2.0, 7),
    ) {
        let cs = point_coords(&reg2());
        let mut pt: HashMap<Atom, f64> = cs.iter().cloned().zip(vals.iter().copied()).collect();
        let v = &cs[i];
        let d: f64 = a.diff_partial(v).unwrap().evaluate(&pt).unwrap();
        let h = 1e-5;
        let x0 = pt[v];
        pt.insert(v.clone(), x0 + h);
        let fp: f64 = a.evaluate(&pt).unwrap();
        pt.insert(v.clone(), x0 - h);
        let fm: f64 = a.evaluate(&pt).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        let scale = d.abs().max(fp.abs()).max(1.0);
        prop_assert!((fd - d).abs() <= 1e-6 * scale, "fd {} vs {}", fd, d);
    }

    #[test]
    fn total_derivatives_commute(a in expr_over(point_coords(&reg2())), i in 0usize..3, j in 0usize..3) {
        let r = reg2();
        let inds = r.independents();
        let ij = r.total_derivative(&r.total_derivative(&a, inds[i]).unwrap(), inds[j]);
        let ji = r.total_derivative(&r.total_derivative(&a, inds[j]).unwrap(), inds[i]);
        // both orders fail together when a needed jet is not registered
        match (ij, ji) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "one order failed: {:?} / {:?}", x.is_ok(), y.is_ok()),
        }
    }

    #[test]
    fn total_derivative_on_independents_is_partial(a in expr_over(vec![reg2().t(), reg2().x(1), reg2().x(2)]), i in 0usize..3) {
        let r = reg2();
        let w = r.independents()[i];
        prop_assert_eq!(r.total_derivative(&a, w).unwrap(), a.diff_partial(&r.independent(w)).unwrap());
    }

    #[test]
    fn total_derivative_is_a_derivation(a in expr_over(pool(&reg2())), b in expr_over(pool(&reg2())), i in 1usize..3, c in -3i64..3) {
        let r = reg2();
        let w = Independent::X(i);
        let d = |e: &Expr| r.total_derivative(e, w).unwrap();
        let k = rat(c, 1);
        prop_assert_eq!(d(&(&a.scale(&k) + &b)), &d(&a).scale(&k) + &d(&b));
        prop_assert_eq!(d(&(&a * &b)), &d(&a) * &b + &a * &d(&b));
    }

    #[test]
    fn expression_text_round_trips(a in expr_over(pool(&reg2()))) {
        let r = reg2();
        let text = a.to_text(&r);
        prop_assert_eq!(parse_expr(&text, &r, &BTreeSet::new()).unwrap(), a);
    }
}

fn catalog(n: usize) -> (JetRegistry, Vec<CatalogEntry>) {
    let r = JetRegistry::new(n).unwrap();
    let c = build_catalog(n, &r).unwrap();
    (r, c)
}

fn combination(c: &[CatalogEntry], weights: &[(usize, i64, i64)]) -> GeneratorSpec {
    let dim = c[0].generator.dim();
    let parts: Vec<(Rational, &GeneratorSpec)> =
        weights.iter().map(|&(i, n, d)| (rat(n, d), &c[i % c.len()].generator)).collect();
    GeneratorSpec::combine(dim, &parts)
}

fn weights() -> impl Strategy<Value = Vec<(usize, i64, i64)>> {
    proptest::collection::vec((0usize..64, -5i64..=5, 1i64..=4), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prolongation_is_linear(w1 in weights(), w2 in weights(), c1 in -3i64..=3, c2 in -3i64..=3) {
        let (r, c) = catalog(2);
        let (g1, g2) = (combination(&c, &w1), combination(&c, &w2));
        let (k1, k2) = (rat(c1, 1), rat(c2, 1));
        let sum = GeneratorSpec::combine(2, &[(k1.clone(), &g1), (k2.clone(), &g2)]);
        let (p1, p2, ps) = (prolong(&g1, &r).unwrap(), prolong(&g2, &r).unwrap(), prolong(&sum, &r).unwrap());
        let keys: BTreeSet<&Atom> = p1.coefficients().keys().chain(p2.coefficients().keys()).chain(ps.coefficients().keys()).collect();
        for a in keys {
            prop_assert_eq!(ps.coefficient(a), &p1.coefficient(a).scale(&k1) + &p2.coefficient(a).scale(&k2));
        }
    }

    #[test]
    fn generator_dsl_round_trips(w in weights()) {
        let (r, c) = catalog(3);
        let g = combination(&c, &w);
        let text = g.to_dsl(&r);
        let back = parse_generator(&text, &r, &BTreeSet::new()).unwrap();
        prop_assert_eq!(back.to_dsl(&r), text);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn determining_system_reconstructs(w in weights()) {
        let (r, c) = catalog(2);
        let s = BalanceSystem::new(2, &r).unwrap();
        let ds = determining_equations(&s, &combination(&c, &w)).unwrap();
        for b in &ds.blocks {
            prop_assert_eq!(b.reconstruct(), b.residual.clone());
            for (_, coeff) in &b.entries {
                prop_assert!(coeff.atoms().iter().all(|a| !is_parametric(&r, a)));
            }
        }
    }

    /// A nonzero witness coefficient is nonzero at one of five random
    /// rational points.
    #[test]
    fn witnesses_are_sound(w in weights(), k in 1i64..=3, seed in any::<u64>()) {
        let (r, c) = catalog(2);
        let s = BalanceSystem::new(2, &r).unwrap();
        let rot = c.iter().position(|e| e.name == "J12_naive").unwrap();
        let mut ws = w.clone();
        ws.push((rot, k, 1));
        let g = combination(&c, &ws);
        let v = verify(&s, "g", &g).unwrap();
        let (_, _, coeff) = v.witness().expect("rotation part breaks invariance");
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            rat((state % 19) as i64 - 9, (state / 19 % 5) as i64 + 1)
        };
        let nonzero = (0..5).any(|_| {
            let pt: HashMap<Atom, Rational> = coeff.atoms().into_iter().map(|a| (a, next())).collect();
            let val: Rational = coeff.evaluate(&pt).unwrap();
            val != rat(0, 1)
        });
        prop_assert!(nonzero, "{}", coeff.to_text(&r));
    }
}

#[test]
fn brackets_are_antisymmetric_and_satisfy_jacobi() {
    let (r, c) = catalog(2);
    let theorem: Vec<&GeneratorSpec> =
        c.iter().filter(|e| e.provenance == Provenance::Theorem).map(|e| &e.generator).collect();
    let br = |a: &GeneratorSpec, b: &GeneratorSpec| nonpolar::liegen::bracket(a, b, &r).unwrap();
    for a in &theorem {
        for b in &theorem {
            let ab = br(a, b);
            let ba = br(b, a);
            assert_eq!(GeneratorSpec::combine(2, &[(rat(1, 1), &ab), (rat(1, 1), &ba)]), GeneratorSpec::zero(2));
        }
    }
    for a in &theorem {
        for b in &theorem {
            for x in &theorem {
                let j = GeneratorSpec::combine(
                    2,
                    &[(rat(1, 1), &br(a, &br(b, x))), (rat(1, 1), &br(b, &br(x, a))), (rat(1, 1), &br(x, &br(a, b)))],
                );
                assert!(j.is_zero());
            }
        }
    }
}

#[test]
fn momentum_components_swap_under_axis_permutation() {
    for n in 2..=3 {
        let r = JetRegistry::new(n).unwrap();
        let s = BalanceSystem::new(n, &r).unwrap();
        let dump = s.dump();
        let swap = |text: &str| -> String {
            // exchange the digits 1 and 2 in every name, keeping second
            // jets in their canonical index order
            let s: String = text.chars().map(|c| match c { '1' => '2', '2' => '1', c => c }).collect();
            s.replace("x2x1", "x1x2")
        };
        let line = |i: usize| dump.lines().find(|l| l.starts_with(&format!("momentum_{i}:"))).unwrap().to_string();
        let m1 = line(1);
        let m2 = line(2);
        let e1 = parse_expr(m1.split_once(": ").unwrap().1.trim_end_matches(" = 0"), &r, &BTreeSet::new()).unwrap();
        let swapped = parse_expr(&swap(m2.split_once(": ").unwrap().1.trim_end_matches(" = 0")), &r, &BTreeSet::new()).unwrap();
        assert_eq!(e1, swapped, "N={n}");
    }
}

#[test]
fn naive_rotation_witness_matches_hand_computation() {
    // momentum_1 carries -1 from eliminating u2_t and -1 from the rotated
    // second jet u1_x1x2, both on u1_x1x1 * Pi12_d_u1x1
    let (r, c) = catalog(2);
    let s = BalanceSystem::new(2, &r).unwrap();
    let g = &c.iter().find(|e| e.name == "J12_naive").unwrap().generator;
    let ds = determining_equations(&s, g).unwrap();
    let m1 = &ds.blocks[1];
    let target = parse_expr("u1_x1x1*Pi12_d_u1x1", &r, &BTreeSet::new()).unwrap();
    let (mono, _) = target.leading_term().unwrap();
    let coeff = m1.entries.iter().find(|(m, _)| m == mono).map(|(_, c)| c.clone());
    assert_eq!(coeff, Some(Expr::int(-2)));
}
