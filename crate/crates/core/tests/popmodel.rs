use ctp_core::polycore::{parse_polynomial, Polynomial};
use ctp_core::popmodel::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(f: Family, n: usize) -> GeneratorSpec {
    GeneratorSpec::new(f, n)
}

#[test]
fn generators_are_deterministic() {
    for fam in Family::ALL {
        let s = spec(fam, 8).with_l(2).with_u(4).with_seed(17);
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a.pop, b.pop, "{}", fam);
        assert_eq!(a.planted, b.planted);
        let c = generate(&s.clone().with_seed(18)).unwrap();
        assert_ne!(a.pop.f, c.pop.f, "{}", fam);
    }
}

#[test]
fn planted_points_are_feasible() {
    for fam in Family::ALL {
        for seed in 0..5 {
            let g = generate(&spec(fam, 9).with_l(3).with_u(4).with_seed(seed)).unwrap();
            let rep = validate(&g.pop, &g.planted).unwrap();
            assert!(rep.feasible, "{} seed {}: {:?}", fam, seed, rep);
            assert_eq!(g.pop.l(), 3);
        }
    }
}

#[test]
fn family_shapes() {
    let b = generate(&spec(Family::Ball, 5)).unwrap().pop;
    assert_eq!(b.m(), 1);
    assert_eq!(b.g[0], parse_polynomial(5, "1 - x1^2 - x2^2 - x3^2 - x4^2 - x5^2").unwrap());
    assert_eq!(b.f.degree(), 2);
    let a = generate(&spec(Family::Annulus, 3)).unwrap().pop;
    assert_eq!(a.m(), 2);
    let bx = generate(&spec(Family::Box, 4)).unwrap().pop;
    assert_eq!(bx.m(), 4);
    assert_eq!(bx.g[0], parse_polynomial(4, "0.25 - x1^2").unwrap());
    let sx = generate(&spec(Family::Simplex, 3)).unwrap().pop;
    assert_eq!(sx.m(), 3 + 2);
    let ts = generate(&spec(Family::BallTs, 6).with_l(2)).unwrap().pop;
    for p in std::iter::once(&ts.f).chain(&ts.h) {
        for (m, _) in p.terms() {
            assert!(m.degree() == 2 || m.is_constant());
        }
    }
    assert!(ts.f.constant_term() == 0.0);
}

#[test]
fn default_equality_counts() {
    assert_eq!(Family::Ball.default_l(10), 3);
    assert_eq!(Family::Box.default_l(10), 2);
    assert_eq!(Family::CsBall.default_l(1000), 143);
    let g = generate(&GeneratorSpec { l: None, ..spec(Family::Annulus, 8) }).unwrap();
    assert_eq!(g.pop.l(), 2);
}

#[test]
fn sparse_generators_attach_chain_cliques() {
    let g = generate(&spec(Family::CsBall, 20).with_u(5).with_l(4).with_seed(2)).unwrap();
    let cs = g.pop.cliques.as_ref().unwrap();
    // 5 + 6 + 6 + 6 would overshoot; chain of width 5 overlapping by one
    assert_eq!(cs.cliques[0], (0..5).collect::<Vec<_>>());
    assert_eq!(cs.cliques[1], (4..10).collect::<Vec<_>>());
    assert_eq!(*cs.cliques.last().unwrap().last().unwrap(), 19);
    assert_eq!(cs.len(), 4);
    assert_eq!(g.pop.m(), cs.len());
    cs.validate(&g.pop).unwrap();
    for (j, cl) in cs.cliques.iter().enumerate() {
        assert_eq!(cs.ineq[j], vec![j]);
        let ball: Polynomial = g.pop.g[j].clone();
        assert_eq!(ball.variables(), cl.clone());
    }
}

#[test]
fn pop_text_round_trip() {
    for fam in Family::ALL {
        let g = generate(&spec(fam, 7).with_l(2).with_u(3).with_seed(5)).unwrap();
        let t = pop_to_text(&g.pop, Some(&g.planted));
        let back = parse_pop(&t).unwrap();
        assert_eq!(back.pop, g.pop, "{}", fam);
        assert_eq!(back.planted.unwrap(), g.planted);
        assert_eq!(pop_to_text(&back.pop, Some(&g.planted)), t);
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = parse_pop("pop n=2\nmin x1 + \n").unwrap_err();
    assert!(matches!(err, PopError::Parse { line: 2, .. }), "{:?}", err);
    assert!(parse_pop("min x1\n").is_err());
    assert!(parse_pop("pop n=2\nmin x3\n").is_err());
}

#[test]
fn triangle_reformulation_constant() {
    let p = PopInstance::new(
        parse_polynomial(2, "x1 + x2").unwrap(),
        vec![
            parse_polynomial(2, "x1").unwrap(),
            parse_polynomial(2, "x2").unwrap(),
            parse_polynomial(2, "1 - x1 - x2").unwrap(),
        ],
        vec![],
    )
    .unwrap();
    let r = reformulate_equivalent_degree(&p, 1.0).unwrap();
    assert_eq!(r.u, 1);
    assert!((r.l_const - 10.0).abs() < 1e-12);
    assert_eq!(r.pop.m(), 5);
    assert_eq!(r.pop.g[4], parse_polynomial(2, "1 - x1^2 - x2^2").unwrap());
    assert!(reformulate_equivalent_degree(&p, 0.0).is_err());
}

#[test]
fn reformulation_preserves_feasible_set() {
    let g = generate(&spec(Family::Simplex, 3).with_seed(4)).unwrap();
    let r = reformulate_equivalent_degree(&g.pop, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut inside = 0;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-0.2..1.0)).collect();
        let a = validate_tol(&g.pop, &x, 0.0).unwrap().feasible;
        let b = validate_tol(&r.pop, &x, 0.0).unwrap().feasible;
        assert_eq!(a, b, "{:?}", x);
        inside += a as usize;
    }
    assert!(inside > 50);
}

proptest! {
    #[test]
    fn generated_problem_kmin_is_one(fam in 0usize..10, n in 2usize..9, seed in 0u64..1000) {
        let fam = Family::ALL[fam];
        let g = generate(&spec(fam, n).with_l(1).with_u(3).with_seed(seed)).unwrap();
        prop_assert_eq!(g.pop.kmin(), 1);
        prop_assert!(validate(&g.pop, &g.planted).unwrap().feasible);
    }
}
