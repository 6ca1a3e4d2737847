//! End-to-end checks over the bundled model sources: every model must
//! compile to a structurally valid graph, survive a JSON round trip,
//! and — where the exact enumerator applies — reproduce known values.

use num::BigRational;
use ppg_core::{ppg_from_json, ppg_to_json_string, validate_ppg};
use ppg_dsl::{compile, model_zoo, parse, resolve_model};
use ppg_oracle::{enumerate, exact_semantics};

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn every_bundled_model_validates() {
    let mut checked = 0;
    for m in model_zoo() {
        let report = validate_ppg(&m.compiled.ppg, 400, 0xC0FFEE ^ checked);
        assert!(
            report.violations.is_empty(),
            "{}: {:?}",
            m.name,
            report.violations
        );
        checked += 1;
    }
    for fixture in ["fig1", "fig1_noobs", "brp_mini"] {
        let m = resolve_model(fixture).unwrap();
        let report = validate_ppg(&m.compiled.ppg, 400, 7);
        assert!(
            report.violations.is_empty(),
            "{fixture}: {:?}",
            report.violations
        );
        checked += 1;
    }
    assert_eq!(checked, 13);
}

#[test]
fn compiled_graphs_survive_a_json_round_trip() {
    for m in model_zoo() {
        let json = ppg_to_json_string(&m.compiled.ppg);
        let back = ppg_from_json(&json).unwrap();
        assert_eq!(back, m.compiled.ppg, "{} changed in transit", m.name);
    }
}

#[test]
fn recompiling_the_source_is_deterministic() {
    for m in model_zoo() {
        let again = compile(&parse(m.source).unwrap()).unwrap();
        assert_eq!(again.ppg, m.compiled.ppg, "{}", m.name);
        assert_eq!(again.target, m.compiled.target, "{}", m.name);
    }
}

#[test]
fn conditioned_coin_enumerates_to_exactly_one_third() {
    let m = resolve_model("fig1").unwrap();
    let table = enumerate(&m.compiled.ppg, m.compiled.start, m.horizon).unwrap();
    let exact = exact_semantics(&table, &m.target).unwrap();
    assert_eq!(exact.beta_l, rational(1, 3));
    assert_eq!(exact.beta_u, Some(rational(1, 3)));
    assert_eq!(exact.alpha_t, rational(1, 1));
}

#[test]
fn unconditioned_coin_enumerates_to_exactly_one_half() {
    let m = resolve_model("fig1_noobs").unwrap();
    let table = enumerate(&m.compiled.ppg, m.compiled.start, m.horizon).unwrap();
    let exact = exact_semantics(&table, &m.target).unwrap();
    assert_eq!(exact.beta_l, rational(1, 2));
    assert_eq!(exact.beta_u, Some(rational(1, 2)));
}

#[test]
fn discrete_retransmission_fixture_is_enumerable() {
    let m = resolve_model("brp_mini").unwrap();
    let table = enumerate(&m.compiled.ppg, m.compiled.start, m.horizon).unwrap();
    let exact = exact_semantics(&table, &m.target).unwrap();
    // All mass terminates within the horizon, so the interval is tight
    // and the success probability is a genuine probability.
    assert_eq!(exact.beta_u, Some(exact.beta_l.clone()));
    assert!(exact.beta_l > rational(0, 1) && exact.beta_l < rational(1, 1));
}

#[test]
fn continuous_models_are_rejected_by_the_enumerator() {
    let m = resolve_model("rw1").unwrap();
    let err = enumerate(&m.compiled.ppg, m.compiled.start, 5).unwrap_err();
    assert!(
        err.to_string().starts_with("model not enumerable"),
        "{err}"
    );
}
