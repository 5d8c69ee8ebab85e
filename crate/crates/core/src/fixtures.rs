//! Bundled example graphs, measures and interval systems.

use crate::kgraph::KGraph;
use std::sync::Arc;

pub const G1: &str = include_str!("../fixtures/g1.json");
pub const G2: &str = include_str!("../fixtures/g2.json");
pub const G2_BROKEN: &str = include_str!("../fixtures/g2-broken.json");
pub const G3: &str = include_str!("../fixtures/g3.json");
pub const G3_BROKEN: &str = include_str!("../fixtures/g3-broken.json");
pub const G4: &str = include_str!("../fixtures/g4.json");
pub const G5: &str = include_str!("../fixtures/g5.json");

pub const MARKOV_1_4: &str = include_str!("../fixtures/markov14.json");
pub const MARKOV_1_3: &str = include_str!("../fixtures/markov13.json");
pub const MARKOV_1_2: &str = include_str!("../fixtures/markov12.json");
pub const MARKOV_3_4: &str = include_str!("../fixtures/markov34.json");
pub const BERNOULLI_G1: &str = include_str!("../fixtures/bernoulli-g1.json");
pub const BERNOULLI_G2: &str = include_str!("../fixtures/bernoulli-g2.json");
pub const UNIFORM_G3: &str = include_str!("../fixtures/uniform-g3.json");
pub const UNIFORM_G4: &str = include_str!("../fixtures/uniform-g4.json");
pub const PERRON_FROBENIUS: &str = include_str!("../fixtures/pf.json");

pub const G1_SBFS: &str = include_str!("../fixtures/g1-sbfs.json");
pub const G5_SBFS: &str = include_str!("../fixtures/g5-sbfs.json");

fn load(text: &str) -> Arc<KGraph> {
    Arc::new(KGraph::from_json(text).expect("bundled graph is valid"))
}

pub fn g1() -> Arc<KGraph> {
    load(G1)
}

pub fn g2() -> Arc<KGraph> {
    load(G2)
}

pub fn g3() -> Arc<KGraph> {
    load(G3)
}

pub fn g4() -> Arc<KGraph> {
    load(G4)
}

pub fn g5() -> Arc<KGraph> {
    load(G5)
}
