use lostfound::corrigibility::{classify_with_witnesses, AStatus, ClassifyOptions, QMethod};
use lostfound::zoo::zoo_entry;

fn run(name: &str) -> lostfound::corrigibility::ClassificationReport {
    let e = zoo_entry(name).unwrap();
    classify_with_witnesses(&e.channel, &ClassifyOptions::default(), &e.witnesses)
}

#[test]
fn depolarizing_is_q() {
    let rep = run("depolarizing-3");
    assert!(rep.q.holds && rep.ds.unwrap().holds);
    assert_eq!(rep.a.status, AStatus::Proved);
    assert!(rep.s.holds && !rep.n_only);
}

#[test]
fn von_neumann_is_q_after_recombination() {
    let rep = run("von-neumann-3");
    assert!(rep.q.holds);
    assert_eq!(rep.q.method, QMethod::Search);
}

#[test]
fn casimir_one_is_a_not_q() {
    let rep = run("casimir-1");
    assert!(!rep.q.holds && rep.q.certified);
    assert!(rep.q.residual > 1e-3, "{}", rep.q.residual);
    assert!(rep.ds.unwrap().holds);
    assert_eq!(rep.a.status, AStatus::SampledYes);
    assert_eq!(rep.a.bases_tested, 64);
    assert!(rep.s.holds);
}

#[test]
fn casimir_three_halves_is_s_not_a() {
    let rep = run("casimir-3/2");
    assert!(!rep.q.holds);
    assert!(rep.ds.unwrap().holds);
    assert_eq!(rep.a.status, AStatus::No);
    assert!(rep.a.worst_residual > 1e-4, "{}", rep.a.worst_residual);
    assert!(rep.s.holds);
    assert_eq!(rep.s.evidence, "witness basis");
}

#[test]
fn collapsing_is_a_not_q() {
    let rep = run("collapsing-3");
    assert!(!rep.q.holds);
    assert!(!rep.ds.unwrap().holds);
    assert_eq!(rep.a.status, AStatus::SampledYes);
    assert!(rep.s.holds);
}
