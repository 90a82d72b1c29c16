mod common;

use std::time::Instant;

use common::oracle::{exhaustive_check, TREE_COUNT};

#[test]
fn exhaustive_agreement_with_reference() {
    let started = Instant::now();
    let (count, discrepancies) = exhaustive_check();
    assert_eq!(count, TREE_COUNT);
    assert_eq!(discrepancies, 0);
    assert!(started.elapsed().as_secs() < 10, "took {:?}", started.elapsed());
}
