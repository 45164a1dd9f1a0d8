use std::collections::BTreeMap;

use ctp_core::cspattern::{assign_constraints, CliqueStructure};
use ctp_core::ctpcert::{certify, CertMethod, CtpCertificate, GroupCertificate};
use ctp_core::numerics::{dot, sym_eig, DenseSym};
use ctp_core::par::Parallelism;
use ctp_core::polycore::{build_basis, expand_one_plus_weighted_norm_pow, parse_polynomial, square_coefficients, Monomial, Polynomial};
use ctp_core::popmodel::{generate, Family, GeneratorSpec, PopInstance};
use ctp_core::sdpbuild::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEQ: Parallelism = Parallelism::Sequential;

fn lp_cert(pop: &PopInstance, k: usize, cs: Option<&CliqueStructure>) -> CtpCertificate {
    certify(pop, k, cs, CertMethod::Lp, SEQ).unwrap()
}

fn dense(fam: Family, n: usize, l: usize, k: usize, seed: u64) -> (PopInstance, Vec<f64>, StandardSdp) {
    let g = generate(&GeneratorSpec::new(fam, n).with_l(l).with_seed(seed)).unwrap();
    let cert = lp_cert(&g.pop, k, None);
    let sdp = assemble_dense(&g.pop, k, &cert).unwrap();
    (g.pop, g.planted, sdp)
}

fn ball_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random_range(-0.5..0.5)).collect()).collect()
}

#[test]
fn ball_dimensions_match_tables() {
    let (_, _, s10) = dense(Family::Ball, 10, 0, 2, 0);
    assert_eq!(s10.sizes(), vec![66, 11]);
    assert_eq!(s10.zeta(), 1277);
    assert_eq!(s10.max_block(), 66);
    let cert = closed_form_ball(20);
    let pop = generate(&GeneratorSpec::new(Family::Ball, 20)).unwrap().pop;
    let s20 = assemble_dense(&pop, 2, &cert).unwrap();
    assert_eq!(s20.max_block(), 231);
    assert_eq!(s20.zeta(), 16402);
}

fn closed_form_ball(n: usize) -> CtpCertificate {
    let pop = generate(&GeneratorSpec::new(Family::Ball, n)).unwrap().pop;
    certify(&pop, 2, None, CertMethod::ClosedForm, SEQ).unwrap()
}

#[test]
fn smallest_instance_by_hand() {
    let pop = PopInstance::new(parse_polynomial(1, "x1").unwrap(), vec![parse_polynomial(1, "1 - x1^2").unwrap()], vec![]).unwrap();
    let sdp = assemble_dense(&pop, 1, &lp_cert(&pop, 1, None)).unwrap();
    assert_eq!(sdp.sizes(), vec![2, 1]);
    assert_eq!(sdp.zeta(), 2);
    let c = sdp.row_counts();
    assert_eq!((c.hankel, c.localizing, c.ideal, c.normalization), (0, 1, 0, 1));
}

#[test]
fn rhs_is_unit_vector_at_last_row() {
    let (_, _, sdp) = dense(Family::Annulus, 4, 2, 2, 3);
    let nz: Vec<usize> = (0..sdp.zeta()).filter(|&r| sdp.b[r] != 0.0).collect();
    assert_eq!(nz, vec![sdp.zeta() - 1]);
    assert_eq!(sdp.b[sdp.zeta() - 1], 1.0);
    assert!(matches!(sdp.rows.last().unwrap(), RowKind::Normalization { .. }));
    // families appear in order
    let rank = |r: &RowKind| match r {
        RowKind::Hankel { .. } => 0,
        RowKind::Localizing { .. } => 1,
        RowKind::Ideal { .. } => 2,
        _ => 3,
    };
    assert!(sdp.rows.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])));
}

#[test]
fn zeta_matches_closed_form_everywhere() {
    for fam in [Family::Ball, Family::Annulus, Family::Box, Family::Simplex, Family::BallTs] {
        for n in 1..=5 {
            for k in 1..=2 {
                for l in [0, 1] {
                    let (pop, _, sdp) = dense(fam, n, l, k, 11);
                    assert_eq!(sdp.zeta(), dense_zeta(n, k, &pop.g, &pop.h).unwrap(), "{} n={} k={} l={}", fam, n, k, l);
                    assert!(sdp.row_norms_sq().iter().all(|&v| v > 0.0));
                }
            }
        }
    }
}

#[test]
fn dirac_points_are_feasible_with_constant_trace() {
    for fam in [Family::Ball, Family::Annulus, Family::Box, Family::Simplex] {
        for k in 1..=2 {
            let (pop, planted, sdp) = dense(fam, 4, 2, k, 5);
            let rep = trace_probe(&sdp, &pop, std::slice::from_ref(&planted)).unwrap();
            assert!(rep.feasibility < 1e-9, "{} k={}: {:?}", fam, k, rep);
            assert!(rep.objective_gap < 1e-9);
            // without equalities any point works for the trace
            let (pop0, _, sdp0) = dense(fam, 4, 0, k, 5);
            let rep = trace_probe(&sdp0, &pop0, &ball_points(4, 100, 1)).unwrap();
            assert_eq!(rep.probes, 100);
            assert!(rep.feasibility < 1e-9);
        }
    }
}

#[test]
fn ball_probe_has_trace_three() {
    let (pop, _, sdp) = dense(Family::Ball, 5, 0, 2, 0);
    assert!((sdp.total_trace() - 3.0).abs() < 1e-7);
    let rep = trace_probe(&sdp, &pop, &ball_points(5, 100, 2)).unwrap();
    assert!(rep.trace_residual <= 1e-8);
    // leaving out P breaks the trace
    let x = dirac_blocks(&sdp, &pop, &[0.3, -0.2, 0.1, 0.4, 0.0], false).unwrap();
    let t: f64 = x.iter().map(|m| m.trace()).sum();
    assert!((t - 3.0).abs() > 1e-3);
}

#[test]
fn sphere_identity_certificate_has_trace_r_plus_one_to_k() {
    // h = R − ‖x‖², P² = coefficients of (1+‖x‖²)^k
    for (n, k, r) in [(2usize, 2usize, 2.0f64), (3, 1, 1.5), (2, 3, 1.0)] {
        let h = Polynomial::constant(n, r).sub(&Polynomial::norm_sq(n)).unwrap();
        let pop = PopInstance::new(parse_polynomial(n, "x1").unwrap(), vec![], vec![h]).unwrap();
        let theta = expand_one_plus_weighted_norm_pow(&vec![1.0; n], k as u32);
        let basis = build_basis(n, k).unwrap();
        let p: Vec<f64> = square_coefficients(&theta, basis.monomials()).iter().map(|v| v.sqrt()).collect();
        let a = (r + 1.0).powi(k as i32);
        let cert = CtpCertificate {
            order: k,
            groups: vec![GroupCertificate {
                trace: a,
                variables: (0..n).collect(),
                ineq: vec![],
                eq: vec![0],
                scaling: vec![p],
                ideal: vec![vec![]],
            }],
        };
        let sdp = assemble_dense(&pop, k, &cert).unwrap();
        let pts: Vec<Vec<f64>> = ball_points(n, 20, 4)
            .into_iter()
            .map(|z| {
                let s = (r / dot(&z, &z)).sqrt();
                z.iter().map(|v| v * s).collect()
            })
            .collect();
        let rep = trace_probe(&sdp, &pop, &pts).unwrap();
        assert!(rep.trace_residual < 1e-10 && rep.feasibility < 1e-9);
    }
}

fn random_blocks(sdp: &StandardSdp, rng: &mut ChaCha8Rng) -> Vec<DenseSym> {
    sdp.sizes()
        .iter()
        .map(|&s| {
            let rows: Vec<Vec<f64>> = (0..s).map(|_| (0..s).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            DenseSym::from_rows(&rows)
        })
        .collect()
}

#[test]
fn rows_agree_with_their_generator_description() {
    let (pop, _, sdp) = dense(Family::Annulus, 3, 1, 2, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_blocks(&sdp, &mut rng);
    let ax = sdp.apply_a(&x, SEQ);
    // D = P⁻¹ X P⁻¹
    let d = |b: usize, i: usize, j: usize| {
        let p = &sdp.blocks[b].scaling;
        x[b].get(i, j) / (p[i] * p[j])
    };
    let map = MomentIndexMap::new(3, 2).unwrap();
    let y = |m: &Monomial| {
        let (i, j) = map.representative(m).unwrap();
        d(0, i, j)
    };
    for (r, kind) in sdp.rows.iter().enumerate() {
        let want = match kind {
            RowKind::Hankel { block, entry, rep } => d(*block, entry.0, entry.1) - d(*block, rep.0, rep.1),
            RowKind::Localizing { block, entry } => {
                let BlockKind::Localizing(gi) = sdp.blocks[*block].kind else { panic!() };
                let lb = build_basis(3, sdp.blocks[*block].degree).unwrap();
                let base = lb.get(entry.0).mul(lb.get(entry.1));
                -d(*block, entry.0, entry.1) + pop.g[gi].terms().map(|(m, c)| c * y(&base.mul(m))).sum::<f64>()
            }
            RowKind::Ideal { eq, gamma, .. } => pop.h[*eq].terms().map(|(m, c)| c * y(&gamma.mul(m))).sum(),
            RowKind::Normalization { .. } => d(0, 0, 0),
            other => panic!("unexpected row {:?}", other),
        };
        assert!((ax[r] - want).abs() <= 1e-12 * (1.0 + want.abs()), "row {} {:?}", r, kind);
    }
}

#[test]
fn objective_reproduces_f_on_dirac_points() {
    let (pop, _, sdp) = dense(Family::Box, 3, 0, 2, 2);
    for z in ball_points(3, 10, 9) {
        let x = dirac_blocks(&sdp, &pop, &z, true).unwrap();
        assert!((sdp.c.dot_dense(&x) - pop.f.eval(&z).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn scaling_invariants_and_round_trip() {
    let (pop, planted, sdp) = dense(Family::Annulus, 3, 1, 2, 1);
    let sc = scale(&sdp, SEQ).unwrap();
    assert!((sc.c.frobenius_sq().sqrt() - 1.0).abs() < 1e-12);
    let norms = sc.row_norms_sq();
    for v in &norms {
        assert!((v.sqrt() - norms[0].sqrt()).abs() < 1e-12);
    }
    assert!(sc.groups.iter().all(|g| g.trace == 1.0));
    // ‖A‖ ≤ 1 against a dense Gram oracle
    let rows: Vec<Vec<f64>> = (0..sc.zeta())
        .map(|r| {
            let m = sc.constraint(r);
            let mut v = Vec::new();
            for (b, es) in m.blocks.iter().enumerate() {
                let s = sc.blocks[b].size;
                let mut full = vec![0.0; s * s];
                for &(i, j, val) in es {
                    full[i as usize * s + j as usize] = val;
                    full[j as usize * s + i as usize] = val;
                }
                v.extend(full);
            }
            v
        })
        .collect();
    let gram: Vec<Vec<f64>> = rows.iter().map(|a| rows.iter().map(|b| dot(a, b)).collect()).collect();
    let top = sym_eig(&gram).0.last().copied().unwrap().sqrt();
    assert!(top <= 1.0 && top > 0.98, "‖A‖ = {}", top);

    // unscale(scale) on random X and on the planted Dirac point
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_blocks(&sdp, &mut rng);
    let a = sdp.groups[0].trace;
    let xs: Vec<DenseSym> = x.iter().map(|m| { let mut m = m.clone(); m.scale(1.0 / a); m }).collect();
    assert!((sc.unscale_objective(sc.c.dot_dense(&xs)) - sdp.c.dot_dense(&x)).abs() < 1e-10);
    let back = sc.unscale_primal(&xs);
    assert!((sdp.c.dot_dense(&back) - sdp.c.dot_dense(&x)).abs() < 1e-10);
    let rep = trace_probe(&sc, &pop, &[planted]).unwrap();
    assert!(rep.feasibility < 1e-12 && rep.objective_gap < 1e-9);
    assert!(scale(&sc, SEQ).is_err());
}

#[test]
fn zero_objective_is_rejected() {
    let pop = PopInstance::new(Polynomial::zero(2), vec![parse_polynomial(2, "1 - x1^2 - x2^2").unwrap()], vec![]).unwrap();
    let sdp = assemble_dense(&pop, 1, &lp_cert(&pop, 1, None)).unwrap();
    assert_eq!(scale(&sdp, SEQ).unwrap_err(), SdpError::DegenerateObjective);
}

#[test]
fn mismatched_certificates_are_rejected() {
    let (pop, _, _) = dense(Family::Ball, 3, 0, 2, 0);
    let cert = lp_cert(&pop, 2, None);
    assert!(matches!(assemble_dense(&pop, 1, &cert), Err(SdpError::Mismatch(_))));
    let mut bad = cert.clone();
    bad.groups[0].scaling[1].pop();
    assert!(matches!(assemble_dense(&pop, 2, &bad), Err(SdpError::Mismatch(_))));
    let other = generate(&GeneratorSpec::new(Family::Annulus, 3)).unwrap().pop;
    assert!(assemble_dense(&other, 2, &cert).is_err());
}

/// Number of overlap rows by brute force: every monomial of degree 1..=2k
/// in each clique's variables, counted per owning clique set.
fn overlap_oracle(n: usize, cliques: &[Vec<usize>], k: usize) -> usize {
    let mut owners: BTreeMap<Monomial, usize> = BTreeMap::new();
    for cl in cliques {
        for m in build_basis(cl.len(), 2 * k).unwrap().monomials().iter().skip(1) {
            *owners.entry(m.extend(n, cl)).or_insert(0) += 1;
        }
    }
    owners.values().filter(|&&c| c >= 2).map(|c| c - 1).sum()
}

#[test]
fn two_cliques_overlap_rows() {
    let pop = PopInstance::new(
        parse_polynomial(3, "x1*x2 + x2*x3").unwrap(),
        vec![parse_polynomial(3, "1 - x1^2 - x2^2").unwrap(), parse_polynomial(3, "1 - x2^2 - x3^2").unwrap()],
        vec![],
    )
    .unwrap();
    let cs = assign_constraints(&pop, &[vec![0, 1], vec![1, 2]]).unwrap();
    for k in 1..=2 {
        let sdp = assemble_cs(&pop, k, &lp_cert(&pop, k, Some(&cs)), &cs).unwrap();
        let rows = sdp.row_counts().overlap;
        assert_eq!(rows, 2 * k);
        assert_eq!(rows, overlap_oracle(3, &cs.cliques, k));
        assert_eq!(sdp.groups.len(), 2);
        assert!(trace_probe(&sdp, &pop, &ball_points(3, 20, 5)).unwrap().feasibility < 1e-9);
    }
}

#[test]
fn chain_overlaps_match_oracle_and_probes_pass() {
    for fam in [Family::CsBall, Family::CsBox] {
        let g = generate(&GeneratorSpec::new(fam, 14).with_u(4).with_l(2).with_seed(6)).unwrap();
        let cs = g.pop.cliques.clone().unwrap();
        let sdp = assemble_cs(&g.pop, 2, &lp_cert(&g.pop, 2, Some(&cs)), &cs).unwrap();
        assert_eq!(sdp.row_counts().overlap, overlap_oracle(14, &cs.cliques, 2));
        let rep = trace_probe(&sdp, &g.pop, std::slice::from_ref(&g.planted)).unwrap();
        assert!(rep.feasibility < 1e-9 && rep.objective_gap < 1e-9);
    }
}

fn canonical_rows(sdp: &StandardSdp) -> Vec<(Vec<(usize, u32, u32, u64)>, u64)> {
    let mut rows: Vec<(Vec<(usize, u32, u32, u64)>, u64)> = (0..sdp.zeta())
        .map(|r| {
            let m = sdp.constraint(r);
            let es = m.blocks.iter().enumerate().flat_map(|(b, es)| es.iter().map(move |&(i, j, v)| (b, i, j, v.to_bits()))).collect();
            (es, sdp.b[r].to_bits())
        })
        .collect();
    rows.sort();
    rows
}

#[test]
fn single_clique_equals_dense() {
    let g = generate(&GeneratorSpec::new(Family::Annulus, 3).with_l(1).with_seed(2)).unwrap();
    let cs = CliqueStructure::single(&g.pop);
    let cert = lp_cert(&g.pop, 2, Some(&cs));
    let a = assemble_cs(&g.pop, 2, &cert, &cs).unwrap();
    let b = assemble_dense(&g.pop, 2, &cert).unwrap();
    assert_eq!(canonical_rows(&a), canonical_rows(&b));
    assert_eq!(a.c, b.c);
}

#[test]
fn large_chain_zeta() {
    let g = generate(&GeneratorSpec::new(Family::CsBall, 1000).with_u(11).with_l(0).with_seed(1)).unwrap();
    let cs = g.pop.cliques.clone().unwrap();
    let cert = certify(&g.pop, 2, Some(&cs), CertMethod::Lp, Parallelism::default()).unwrap();
    let sdp = assemble_cs(&g.pop, 2, &cert, &cs).unwrap();
    assert_eq!(sdp.zeta(), 222712);
    assert_eq!(cs.len(), 91);
    assert_eq!(sdp.max_block(), 91);
}

#[test]
fn text_round_trip() {
    for sdp in [dense(Family::Simplex, 2, 1, 2, 4).2, {
        let g = generate(&GeneratorSpec::new(Family::CsBox, 8).with_u(4).with_l(1).with_seed(6)).unwrap();
        let cs = g.pop.cliques.clone().unwrap();
        assemble_cs(&g.pop, 1, &lp_cert(&g.pop, 1, Some(&cs)), &cs).unwrap()
    }] {
        let t = sdp_to_text(&sdp);
        let back = sdp_from_text(&t).unwrap();
        assert_eq!(back.c, sdp.c);
        assert_eq!(back.a, sdp.a);
        assert_eq!(back.b, sdp.b);
        assert_eq!(back.groups, sdp.groups);
        assert_eq!(sdp_to_text(&back), t);
    }
    assert!(sdp_from_text("C 0 0 0 1\n").is_err());
    assert!(sdp_from_text("sdp blocks=2 zeta=1 trace=1\ngroup 0 trace=1 blocks=0\nA 0 0 1 0 1\n").is_err());
}
