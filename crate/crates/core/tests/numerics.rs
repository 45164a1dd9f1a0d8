use ctp_core::numerics::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

fn residual(a: &[Vec<f64>], lam: f64, u: &[f64]) -> f64 {
    a.iter().zip(u).map(|(row, ui)| (dot(row, u) - lam * ui).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn small_diagonal_and_swap() {
    let d = DenseSym::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
    let r = smallest_eig(&d, &EigOptions::default());
    assert!((r.value() - 1.0).abs() < 1e-12);
    assert!((r.vector()[0] - 1.0).abs() < 1e-10);
    let s = DenseSym::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let r = smallest_eig(&s, &EigOptions::default());
    assert!((r.value() + 1.0).abs() < 1e-12);
    let h = 0.5f64.sqrt();
    assert!((r.vector()[0].abs() - h).abs() < 1e-10 && (r.vector()[0] + r.vector()[1]).abs() < 1e-10);
    let one = DenseSym::from_rows(&[vec![4.0]]);
    assert_eq!(smallest_eig(&one, &EigOptions::default()).value(), 4.0);
}

#[test]
fn dense_eig_matches_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1, 2, 7, 30] {
        let a = random_sym(&mut rng, n);
        let (vals, vecs) = sym_eig(&a);
        let oracle = jacobi_eigenvalues(&a);
        for (v, o) in vals.iter().zip(&oracle) {
            assert!((v - o).abs() < 1e-11);
        }
        for j in 0..n {
            let u: Vec<f64> = (0..n).map(|i| vecs[i][j]).collect();
            assert!(residual(&a, vals[j], &u) < 1e-10);
        }
    }
}

#[test]
fn lanczos_matches_dense_oracle_on_50x50() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..100 {
        let a = random_sym(&mut rng, 50);
        let oracle = jacobi_eigenvalues(&a)[0];
        let opts = EigOptions { seed: trial, krylov_dim: 20, ..EigOptions::default() };
        let r = smallest_eig(&DenseSym::from_rows(&a), &opts);
        assert!(r.converged);
        assert!((r.value() - oracle).abs() <= 1e-8, "trial {}: {} vs {}", trial, r.value(), oracle);
        let u = r.vector();
        assert!((norm(u) - 1.0).abs() < 1e-12);
        assert!(residual(&a, r.value(), u) <= 1e-9 * (1.0 + r.value().abs()));
        let big = u.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        assert!(big > 0.0);
    }
}

#[test]
fn lanczos_is_deterministic_and_warm_starts() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = DenseSym::from_rows(&random_sym(&mut rng, 80));
    let o = EigOptions::default();
    let r1 = smallest_eig(&a, &o);
    let r2 = smallest_eig(&a, &o);
    assert_eq!(r1.pairs, r2.pairs);
    let warm = smallest_eigs(&a, 1, &o, &[r1.vector().to_vec()]);
    assert!(warm.matvecs < r1.matvecs);
    assert!((warm.value() - r1.value()).abs() < 1e-10);
}

#[test]
fn clusters_are_resolved() {
    // eigenvalue −1 with multiplicity 6, then 0..
    let n = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = {
        let (_, v) = sym_eig(&random_sym(&mut rng, n));
        v
    };
    let diag: Vec<f64> = (0..n).map(|i| if i < 6 { -1.0 } else { i as f64 / 10.0 }).collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| q[i][k] * diag[k] * q[j][k]).sum();
        }
    }
    let r = smallest_cluster(&DenseSym::from_rows(&a), &EigOptions::default(), 1e-6, 15, &[]);
    assert_eq!(r.pairs.len(), 6);
    for p in &r.pairs {
        assert!((p.value + 1.0).abs() < 1e-9);
    }
    let capped = smallest_cluster(&DenseSym::from_rows(&a), &EigOptions::default(), 1e-6, 3, &[]);
    assert_eq!(capped.pairs.len(), 3);
}

fn gram_of(cols: &[Vec<f64>]) -> FnOperator<impl Fn(&[f64], &mut [f64]) + '_> {
    // A has the given columns; Gram operator y ↦ A Aᵀ y
    let rows = cols[0].len();
    FnOperator {
        dim: rows,
        f: move |y: &[f64], out: &mut [f64]| {
            for c in cols {
                let s = dot(c, y);
                for (o, ci) in out.iter_mut().zip(c) {
                    *o += s * ci;
                }
            }
        },
    }
}

#[test]
fn operator_norms() {
    // one constraint A₁ = I₃ written as a vector of its 9 entries
    let eye: Vec<f64> = (0..9).map(|i| if i % 4 == 0 { 1.0 } else { 0.0 }).collect();
    let rows: Vec<Vec<f64>> = (0..9).map(|e| vec![eye[e]]).collect();
    let est = operator_norm(&gram_of(&rows), 1e-6, 0);
    assert!((est.estimate - 3f64.sqrt()).abs() < 1e-9);
    assert!((est.upper - 1.01 * est.estimate).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let zeta = 12;
        let dim = 20;
        let a: Vec<Vec<f64>> = (0..zeta).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let aat: Vec<Vec<f64>> = a.iter().map(|r| a.iter().map(|s| dot(r, s)).collect()).collect();
        let oracle = jacobi_eigenvalues(&aat).last().unwrap().sqrt();
        let op = FnOperator {
            dim: zeta,
            f: |y: &[f64], out: &mut [f64]| {
                let mut aty = vec![0.0; dim];
                for (r, yi) in a.iter().zip(y) {
                    for (t, v) in aty.iter_mut().zip(r) {
                        *t += yi * v;
                    }
                }
                for (o, r) in out.iter_mut().zip(&a) {
                    *o = dot(r, &aty);
                }
            },
        };
        let est = operator_norm(&op, 1e-6, 1);
        assert!(((est.estimate - oracle) / oracle).abs() < 1e-6);
        assert!(est.upper >= oracle);
    }
}

#[test]
fn orthonormal_constraints_have_unit_norm() {
    let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
    let est = operator_norm(&gram_of(&cols), 1e-6, 0);
    assert!((est.estimate - 1.0).abs() < 1e-9);
}

#[test]
fn simplex_ls_trivial_cases() {
    let r = simplex_ls(&[vec![1.0, 2.0]], &[0.0, 0.0]);
    assert_eq!(r.weights, vec![1.0]);
    let r = simplex_ls(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 1.0]);
    assert!((r.weights[1] - 1.0).abs() < 1e-12 && r.weights[0].abs() < 1e-12);
    assert!(r.objective < 1e-20);
}

fn grid_oracle(d: &[Vec<f64>], b: &[f64]) -> f64 {
    let obj = |w: &[f64]| {
        let mut res = b.to_vec();
        for (wi, di) in w.iter().zip(d) {
            for (r, v) in res.iter_mut().zip(di) {
                *r -= wi * v;
            }
        }
        0.5 * dot(&res, &res)
    };
    let steps = 1000;
    let mut best = f64::INFINITY;
    match d.len() {
        1 => best = obj(&[1.0]),
        2 => {
            for i in 0..=steps {
                let t = i as f64 / steps as f64;
                best = best.min(obj(&[t, 1.0 - t]));
            }
        }
        _ => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let (a, c) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    best = best.min(obj(&[a, c, 1.0 - a - c]));
                }
            }
        }
    }
    best
}

#[test]
fn simplex_ls_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..100 {
        let r = 1 + trial % 3;
        let dim = 4;
        let d: Vec<Vec<f64>> = (0..r).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = simplex_ls(&d, &b);
        let oracle = grid_oracle(&d, &b);
        assert!(s.objective <= oracle + 1e-10, "trial {}: {} vs grid {}", trial, s.objective, oracle);
        assert!(oracle - s.objective <= 1e-6 || s.objective <= oracle);
        assert!(s.kkt_residual <= 1e-8, "kkt {}", s.kkt_residual);
    }
}

proptest! {
    #[test]
    fn simplex_ls_output_is_on_simplex(seed in 0u64..500, r in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<Vec<f64>> = (0..r).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let s = simplex_ls(&d, &b);
        prop_assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.weights.iter().all(|&w| w >= -1e-12));
        prop_assert!(s.kkt_residual <= 1e-8);
    }

    #[test]
    fn negation_duality(seed in 0u64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sym(&mut rng, 25);
        let m = DenseSym::from_rows(&a);
        let top = jacobi_eigenvalues(&a)[24];
        let r = smallest_eig(&Negated(&m), &EigOptions::default());
        prop_assert!((r.value() + top).abs() < 1e-8);
    }

    #[test]
    fn projection_is_idempotent(v in proptest::collection::vec(-3.0f64..3.0, 1..10)) {
        let p = project_simplex(&v);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let pp = project_simplex(&p);
        for (a, b) in p.iter().zip(&pp) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
