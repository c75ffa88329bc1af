use ring_cdc::goldens::check_goldens;

#[test]
fn worked_examples_match_reference_tables() {
    for check in check_goldens().unwrap() {
        assert!(check.matches(), "{} differs:\n{}", check.name, check.diff());
    }
}
