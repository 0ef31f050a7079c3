//! JSON file formats for graphs, games, flows, and strategic games.
//!
//! Formats are kept minimal and deterministic: edge order defines edge ids,
//! game values are keyed by the coalition bitmask written in decimal and
//! serialized in ascending numeric order, and floats round-trip exactly
//! (serde_json emits the shortest representation that parses back to the
//! same double).

use crate::error::{Error, Result};
use crate::game::CoalitionGame;
use crate::graph::WeightedMultigraph;
use crate::hodge::EdgeFlow;
use crate::strategic::StrategicGame;
use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeMap;

/// Parses JSON, attributing failures (with line/column) to `what`.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|err| Error::Invalid(format!("{what}: {err}")))
}

/// Serializes any of the file types; infallible for the types in this
/// module.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("file types serialize without error")
}

/// `{"nodes": n, "labels": [...], "edges": [{"a":, "b":, "w":}...]}`;
/// `labels` is optional and `w` defaults to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub a: usize,
    pub b: usize,
    #[serde(default = "unit_weight")]
    pub w: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl GraphFile {
    pub fn into_graph(self) -> Result<WeightedMultigraph> {
        let edges: Vec<(usize, usize, f64)> =
            self.edges.iter().map(|edge| (edge.a, edge.b, edge.w)).collect();
        match self.labels {
            Some(labels) => {
                if labels.len() != self.nodes {
                    return Err(Error::LabelCountMismatch {
                        labels: labels.len(),
                        nodes: self.nodes,
                    });
                }
                WeightedMultigraph::with_labels(labels, edges)
            }
            None => WeightedMultigraph::new(self.nodes, edges),
        }
    }

    pub fn from_graph(g: &WeightedMultigraph) -> Self {
        // Labels matching the node indices are the constructor default;
        // omit them so label-free files round-trip unchanged.
        let default_labels = g
            .labels()
            .iter()
            .enumerate()
            .all(|(index, label)| label == &index.to_string());
        GraphFile {
            nodes: g.node_count(),
            labels: if default_labels {
                None
            } else {
                Some(g.labels().to_vec())
            },
            edges: g.edge_tuples().map(|(a, b, w)| EdgeEntry { a, b, w }).collect(),
        }
    }
}

/// `{"players": n, "values": {"<mask in decimal>": value, ...}}`. The key
/// `"0"` (empty coalition) is required and must map to 0; omitted masks are
/// worth 0. Values serialize in ascending mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct GameFile {
    pub players: usize,
    /// Ascending by mask.
    pub values: Vec<(u64, f64)>,
}

impl Serialize for GameFile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Shape<'a> {
            players: usize,
            values: NumericallyOrderedValues<'a>,
        }
        struct NumericallyOrderedValues<'a>(&'a [(u64, f64)]);
        impl Serialize for NumericallyOrderedValues<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (mask, value) in self.0 {
                    map.serialize_entry(&mask.to_string(), value)?;
                }
                map.end()
            }
        }
        Shape {
            players: self.players,
            values: NumericallyOrderedValues(&self.values),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GameFile {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Shape {
            players: usize,
            values: BTreeMap<String, f64>,
        }
        let raw = Shape::deserialize(deserializer)?;
        let mut values = Vec::with_capacity(raw.values.len());
        for (key, value) in raw.values {
            let mask: u64 = key.parse().map_err(|_| {
                serde::de::Error::custom(format!("coalition key {key:?} is not a decimal mask"))
            })?;
            values.push((mask, value));
        }
        values.sort_by_key(|&(mask, _)| mask);
        Ok(GameFile {
            players: raw.players,
            values,
        })
    }
}

impl GameFile {
    pub fn into_game(&self) -> Result<CoalitionGame> {
        match self.values.iter().find(|(mask, _)| *mask == 0) {
            None => {
                return Err(Error::Invalid(
                    "game file must list the empty coalition \"0\"".into(),
                ))
            }
            Some(&(_, value)) if value != 0.0 => {
                return Err(Error::NonzeroEmptyValue { value })
            }
            Some(_) => {}
        }
        CoalitionGame::from_sparse(self.players, &self.values)
    }

    /// Lists the empty coalition and every nonzero value.
    pub fn from_game(v: &CoalitionGame) -> Self {
        let mut values = vec![(0u64, 0.0)];
        for (mask, &value) in v.values().iter().enumerate() {
            if mask > 0 && value != 0.0 {
                values.push((mask as u64, value));
            }
        }
        GameFile {
            players: v.players(),
            values,
        }
    }
}

/// `{"edge_values": [...]}`, one value per edge id, forward orientation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowFile {
    pub edge_values: Vec<f64>,
}

impl FlowFile {
    pub fn into_flow(self, g: &WeightedMultigraph) -> Result<EdgeFlow> {
        if self.edge_values.len() != g.edge_count() {
            return Err(Error::LengthMismatch {
                context: "flow file edge values",
                expected: g.edge_count(),
                got: self.edge_values.len(),
            });
        }
        for (index, &value) in self.edge_values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { index, value });
            }
        }
        Ok(EdgeFlow::new(self.edge_values))
    }

    pub fn from_flow(f: &EdgeFlow) -> Self {
        FlowFile {
            edge_values: f.as_slice().to_vec(),
        }
    }
}

/// `{"players": n, "actions": [...], "payoffs": [[...] per player]}`;
/// payoff tensors are row-major with player 1's action slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategicGameFile {
    pub players: usize,
    pub actions: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

impl StrategicGameFile {
    pub fn into_game(self) -> Result<StrategicGame> {
        if self.players != self.actions.len() {
            return Err(Error::LengthMismatch {
                context: "strategic game action counts",
                expected: self.players,
                got: self.actions.len(),
            });
        }
        StrategicGame::new(self.actions, self.payoffs)
    }

    pub fn from_game(g: &StrategicGame) -> Self {
        StrategicGameFile {
            players: g.players(),
            actions: g.action_counts().to_vec(),
            payoffs: (0..g.players())
                .map(|player| {
                    (0..g.profile_count())
                        .map(|flat| {
                            // Rebuild per-profile to keep the accessor the
                            // single source of layout truth.
                            let mut profile = vec![0usize; g.players()];
                            let mut index = flat;
                            for slot in (0..g.players()).rev() {
                                profile[slot] = index % g.action_counts()[slot];
                                index /= g.action_counts()[slot];
                            }
                            g.payoff(player, &profile)
                        })
                        .collect()
                })
                .collect(),
        }
    }
}
