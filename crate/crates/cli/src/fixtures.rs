//! Built-in inputs, addressed as `fixture:<name>` wherever a file path is
//! expected. These are the worked examples used throughout the tests.

use hodge_alloc_core::graph::MergerGraph;
use hodge_alloc_core::io::{to_json_string, GraphFile};

/// Three players; player 1 owns a left glove, players 2 and 3 each own a
/// right glove; a coalition is worth 1 exactly when it can pair them up.
pub const GLOVE: &str = r#"{"players":3,"values":{"0":0.0,"3":1.0,"5":1.0,"7":1.0}}"#;

/// Two-player pure bargaining: only the grand coalition produces anything.
pub const DELTA2: &str = r#"{"players":2,"values":{"0":0.0,"3":1.0}}"#;

/// Three-player pure bargaining.
pub const DELTA3: &str = r#"{"players":3,"values":{"0":0.0,"7":1.0}}"#;

/// Two single-action players with constant payoffs 3 and 1: the smallest
/// strategic game with an interesting threat-power sequence.
pub const KN_CONSTANT: &str = r#"{"players":2,"actions":[1,1],"payoffs":[[3.0],[1.0]]}"#;

pub const NAMES: &[&str] = &["delta2", "delta3", "glove", "kn_constant", "merger3"];

/// Text of the named fixture, or `None` for an unknown name.
pub fn fixture_text(name: &str) -> Option<String> {
    match name {
        "glove" => Some(GLOVE.to_string()),
        "delta2" => Some(DELTA2.to_string()),
        "delta3" => Some(DELTA3.to_string()),
        "kn_constant" => Some(KN_CONSTANT.to_string()),
        "merger3" => Some(merger3_text()),
        _ => None,
    }
}

/// The three-player merger graph: partitions of {1,2,3} with an edge for
/// each single merge, labeled by partition.
fn merger3_text() -> String {
    let mg = MergerGraph::new(3).expect("three players is in range");
    to_json_string(&GraphFile::from_graph(mg.graph()))
}
