use ctp_core::cspattern::*;
use ctp_core::polycore::parse_polynomial;
use ctp_core::popmodel::{generate, Family, GeneratorSpec, PopInstance};
use proptest::prelude::*;

fn graph(n: usize, edges: &[(usize, usize)]) -> CspGraph {
    let mut g = CspGraph::new(n);
    for &(a, b) in edges {
        g.add_edge(a, b);
    }
    g
}

#[test]
fn path_graph_from_chain_objective() {
    let f = parse_polynomial(4, "x1*x2 + x2*x3 + x3*x4").unwrap();
    let p = PopInstance::new(f, vec![], vec![]).unwrap();
    let g = csp_graph(&p);
    assert_eq!(g.edge_count(), 3);
    let ext = chordal_cliques(&g);
    assert_eq!(ext.cliques, vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
}

#[test]
fn dense_quadratic_is_complete() {
    let g = generate(&GeneratorSpec::new(Family::Ball, 5)).unwrap().pop;
    let gr = csp_graph(&g);
    assert_eq!(gr.edge_count(), 10);
    assert_eq!(chordal_cliques(&gr).cliques, vec![(0..5).collect::<Vec<_>>()]);
}

#[test]
fn constraints_connect_their_variables() {
    let p = PopInstance::new(
        parse_polynomial(3, "x1 + x2 + x3").unwrap(),
        vec![parse_polynomial(3, "1 - x1^2 - x3^2").unwrap()],
        vec![],
    )
    .unwrap();
    let g = csp_graph(&p);
    assert!(g.has_edge(0, 2));
    assert!(!g.has_edge(0, 1));
}

#[test]
fn four_cycle_gets_one_chord() {
    let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    let ext = chordal_cliques(&g);
    assert_eq!(ext.filled.edge_count(), 5);
    assert_eq!(ext.cliques.len(), 2);
    assert!(ext.cliques.iter().all(|c| c.len() == 3));
    // vertex 0 goes first (all degrees tie), adding the chord 1–3
    assert!(ext.filled.has_edge(1, 3));
    assert!(ext.filled.is_perfect_elimination(&ext.order));
    assert!(has_running_intersection(&ext.cliques));
}

#[test]
fn generated_chain_recovers_its_cliques() {
    let g = generate(&GeneratorSpec::new(Family::CsBall, 30).with_u(6).with_seed(3)).unwrap();
    let ext = chordal_cliques(&csp_graph(&g.pop));
    assert_eq!(ext.cliques, g.pop.cliques.as_ref().unwrap().cliques);
}

#[test]
fn assignment_picks_first_clique_and_reports_misfits() {
    let p = PopInstance::new(
        parse_polynomial(3, "x1*x2 + x2*x3").unwrap(),
        vec![parse_polynomial(3, "1 - x2^2").unwrap(), parse_polynomial(3, "1 - x3^2").unwrap()],
        vec![parse_polynomial(3, "x1 - x2").unwrap()],
    )
    .unwrap();
    let cs = assign_constraints(&p, &[vec![0, 1], vec![1, 2]]).unwrap();
    assert_eq!(cs.ineq, vec![vec![0], vec![1]]);
    assert_eq!(cs.eq, vec![vec![0], vec![]]);
    cs.validate(&p).unwrap();
    let bad = PopInstance::new(p.f.clone(), vec![parse_polynomial(3, "1 - x1^2 - x3^2").unwrap()], vec![]).unwrap();
    assert!(matches!(assign_constraints(&bad, &[vec![0, 1], vec![1, 2]]), Err(SparsityError::Unassignable { .. })));
}

#[test]
fn single_structure_takes_everything() {
    let g = generate(&GeneratorSpec::new(Family::Annulus, 4).with_l(2)).unwrap().pop;
    let cs = CliqueStructure::single(&g);
    assert_eq!(cs.cliques, vec![vec![0, 1, 2, 3]]);
    assert_eq!(cs.ineq, vec![vec![0, 1]]);
    assert_eq!(cs.eq, vec![vec![0, 1]]);
}

#[test]
fn report_lists_sizes() {
    let g = generate(&GeneratorSpec::new(Family::CsBox, 12).with_u(4)).unwrap().pop;
    let cs = clique_structure(&g).unwrap();
    assert_eq!(cs.max_clique(), 5);
    assert!(cs.report().lines().count() >= cs.len());
}

fn arb_graph() -> impl Strategy<Value = CspGraph> {
    (2usize..12).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..30).prop_map(move |es| {
            let mut g = CspGraph::new(n);
            for (a, b) in es {
                if a != b {
                    g.add_edge(a, b);
                }
            }
            g
        })
    })
}

proptest! {
    #[test]
    fn extension_is_chordal_covering_and_deterministic(g in arb_graph()) {
        let ext = chordal_cliques(&g);
        prop_assert!(ext.filled.is_perfect_elimination(&ext.order));
        for a in 0..g.n() {
            for b in 0..g.n() {
                if g.has_edge(a, b) {
                    prop_assert!(ext.filled.has_edge(a, b));
                    prop_assert!(ext.cliques.iter().any(|c| c.contains(&a) && c.contains(&b)));
                }
            }
        }
        let mut covered: Vec<usize> = ext.cliques.concat();
        covered.sort();
        covered.dedup();
        prop_assert_eq!(covered, (0..g.n()).collect::<Vec<_>>());
        prop_assert!(has_running_intersection(&ext.cliques));
        for (i, c) in ext.cliques.iter().enumerate() {
            for (j, d) in ext.cliques.iter().enumerate() {
                prop_assert!(i == j || !c.iter().all(|v| d.contains(v)));
            }
        }
        prop_assert_eq!(chordal_cliques(&g).cliques, ext.cliques);
    }
}

#[test]
fn ball_assumption_per_clique() {
    for fam in [Family::CsBall, Family::CsBox] {
        let pop = generate(&GeneratorSpec::new(fam, 12).with_u(4).with_seed(3)).unwrap().pop;
        let cs = pop.cliques.clone().unwrap();
        assert!(cs.cliques_without_ball(&pop).is_empty(), "{}", fam);
    }
    // x3 is unbounded on the second clique
    let f = parse_polynomial(3, "x1*x2 + x2*x3").unwrap();
    let g = vec![parse_polynomial(3, "1 - x1^2 - x2^2").unwrap(), parse_polynomial(3, "1 - x2^2").unwrap()];
    let pop = PopInstance::new(f, g, vec![]).unwrap();
    let cs = assign_constraints(&pop, &[vec![0, 1], vec![1, 2]]).unwrap();
    assert_eq!(cs.cliques_without_ball(&pop), vec![1]);
}
