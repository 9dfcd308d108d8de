mod common;

#[test]
fn search_matches_exhaustive_enumeration() {
    common::check_search_oracle(200).unwrap();
}

#[test]
fn oracle_enumerates_every_simple_path() {
    // K4: from one corner there are 3 + 6 + 6 simple paths of 1, 2 and 3 edges
    let g = siot_trust::SocialGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let paths = common::simple_paths(&g, siot_trust::NodeId(0), 3);
    assert_eq!(paths.len(), 15);
    assert_eq!(common::simple_paths(&g, siot_trust::NodeId(0), 1).len(), 3);
}
