//! Per-modality domain graphs and their similarity-based merge.
//!
//! Two nodes from different graphs are scored by concept similarity plus the
//! mean sentence similarity of their one-hop contexts. Scores of one
//! pairwise merge are standardized together; pairs whose z-score reaches the
//! threshold are treated as the same node.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Modality;
use crate::kb::KnowledgeStore;
use crate::scorers::{ProviderError, SentenceEncoder};
use crate::svo::{self, Triplet};
use crate::text;

pub const DEFAULT_NODE_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub node_id: usize,
    /// Normalized concept key (`brass_instrument`).
    pub concept: String,
    /// Surface form used when realizing sentences (`brass instrument`).
    pub surface: String,
    pub modalities: BTreeSet<Modality>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: usize,
    pub predicate: String,
    pub target: usize,
    /// Modality of the statement the edge came from; survives merging.
    pub modality: Modality,
    pub source_sample: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGraph {
    pub modality: Modality,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeConfig {
    #[serde(default = "default_threshold")]
    pub node_threshold: f64,
    #[serde(default = "default_true")]
    pub zscore: bool,
}

fn default_threshold() -> f64 {
    DEFAULT_NODE_THRESHOLD
}

fn default_true() -> bool {
    true
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig { node_threshold: DEFAULT_NODE_THRESHOLD, zscore: true }
    }
}

/// One pairwise merge step (graph k folded into the accumulated graph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeBatch {
    pub batch: usize,
    pub modality: Modality,
    pub pairs: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// False when the batch was too small to standardize and raw scores were used.
    pub standardized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeLogEntry {
    pub batch: usize,
    pub kept: usize,
    pub kept_concept: String,
    pub absorbed_concept: String,
    pub absorbed_modality: Modality,
    pub raw: f64,
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodalGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub merge_log: Vec<MergeLogEntry>,
    pub batches: Vec<MergeBatch>,
    /// For input graph `g`, `node_maps[g][old_id]` is the node's id here.
    pub node_maps: Vec<Vec<usize>>,
}

/// Anything with nodes and edges can provide one-hop context.
pub trait TripletGraph {
    fn nodes(&self) -> &[GraphNode];
    fn edges(&self) -> &[GraphEdge];

    fn triplet(&self, e: &GraphEdge) -> Triplet {
        let nodes = self.nodes();
        Triplet::new(
            nodes[e.source].surface.clone(),
            e.predicate.clone(),
            nodes[e.target].surface.clone(),
            e.modality,
            e.source_sample.clone(),
        )
    }

    fn triplets(&self) -> Vec<Triplet> {
        self.edges().iter().map(|e| self.triplet(e)).collect()
    }

    /// Realized sentences of every edge touching `node`.
    fn context(&self, node: usize) -> Vec<String> {
        self.edges()
            .iter()
            .filter(|e| e.source == node || e.target == node)
            .map(|e| svo::realize(&self.triplet(e)).text)
            .collect()
    }
}

impl TripletGraph for DomainGraph {
    fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }
    fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }
}

impl TripletGraph for MultimodalGraph {
    fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }
    fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }
}

fn node_for(nodes: &mut Vec<GraphNode>, index: &mut HashMap<String, usize>, surface: &str, m: Modality) -> usize {
    let concept = text::normalize_concept(surface);
    *index.entry(concept.clone()).or_insert_with(|| {
        nodes.push(GraphNode {
            node_id: nodes.len(),
            concept,
            surface: text::collapse_ws(&text::display_concept(surface)),
            modalities: BTreeSet::from([m]),
        });
        nodes.len() - 1
    })
}

/// One node per distinct normalized concept, one edge per distinct triplet.
pub fn build_domain_graph(triplets: &[Triplet], modality: Modality) -> DomainGraph {
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    let mut edges: Vec<GraphEdge> = Vec::new();
    for t in triplets.iter().filter(|t| t.is_valid()) {
        if text::normalize_concept(&t.subject) == text::normalize_concept(&t.object) {
            continue;
        }
        let source = node_for(&mut nodes, &mut index, &t.subject, modality);
        let target = node_for(&mut nodes, &mut index, &t.object, modality);
        let edge = GraphEdge {
            source,
            predicate: text::collapse_ws(&t.predicate),
            target,
            modality,
            source_sample: t.source_sample.clone(),
        };
        if !edges.contains(&edge) {
            edges.push(edge);
        }
    }
    DomainGraph { modality, nodes, edges }
}

/// Scorers needed to compare nodes.
#[derive(Clone, Copy)]
pub struct NodeScorer<'a> {
    pub encoder: &'a dyn SentenceEncoder,
    pub kb: &'a KnowledgeStore,
}

impl NodeScorer<'_> {
    /// Concept similarity plus mean pairwise context-sentence similarity.
    /// The context term is 0 when either node has no edges.
    pub fn score(&self, concept_i: &str, ctx_i: &[String], concept_j: &str, ctx_j: &[String]) -> Result<f64, ProviderError> {
        let sim_c = self.kb.concept_similarity(concept_i, concept_j);
        let pq = ctx_i.len() * ctx_j.len();
        if pq == 0 {
            return Ok(sim_c);
        }
        let mut sum = 0.0;
        for s_l in ctx_i {
            for s_o in ctx_j {
                sum += self.encoder.similarity(s_l, s_o)?;
            }
        }
        Ok(sim_c + sum / pq as f64)
    }

    pub fn score_node_pair<A: TripletGraph, B: TripletGraph>(
        &self,
        g1: &A,
        v_i: usize,
        g2: &B,
        v_j: usize,
    ) -> Result<f64, ProviderError> {
        self.score(&g1.nodes()[v_i].concept, &g1.context(v_i), &g2.nodes()[v_j].concept, &g2.context(v_j))
    }
}

/// Population mean and standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Z-scores of `xs`; all zero when the spread is zero.
pub fn zscores(xs: &[f64]) -> Vec<f64> {
    let (mean, std) = mean_std(xs);
    if std == 0.0 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - mean) / std).collect()
}

impl MultimodalGraph {
    fn from_domain(g: &DomainGraph) -> Self {
        MultimodalGraph {
            nodes: g.nodes.clone(),
            edges: g.edges.clone(),
            merge_log: Vec::new(),
            batches: Vec::new(),
            node_maps: vec![(0..g.nodes.len()).collect()],
        }
    }

    /// Whether edge `e` of input graph `g` is present after redirection.
    pub fn contains_redirected(&self, g: usize, e: &GraphEdge) -> bool {
        let map = &self.node_maps[g];
        let want = GraphEdge { source: map[e.source], target: map[e.target], ..e.clone() };
        self.edges.contains(&want)
    }

    fn fold(&mut self, g: &DomainGraph, batch: usize, cfg: &MergeConfig, scorer: NodeScorer<'_>) -> Result<(), ProviderError> {
        let left_ctx: Vec<Vec<String>> = (0..self.nodes.len()).map(|i| self.context(i)).collect();
        let right_ctx: Vec<Vec<String>> = (0..g.nodes.len()).map(|j| g.context(j)).collect();
        let pairs: Vec<(usize, usize)> =
            (0..self.nodes.len()).flat_map(|i| (0..g.nodes.len()).map(move |j| (i, j))).collect();
        let raw: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| scorer.score(&self.nodes[i].concept, &left_ctx[i], &g.nodes[j].concept, &right_ctx[j]))
            .collect::<Result<_, _>>()?;

        let (mean, std_dev) = mean_std(&raw);
        let standardized = cfg.zscore && raw.len() >= 2;
        if cfg.zscore && !standardized && !raw.is_empty() {
            tracing::debug!(batch, pairs = raw.len(), "too few pairs to standardize; using raw scores");
        }
        let z: Option<Vec<f64>> = standardized.then(|| zscores(&raw));
        let value = |k: usize| z.as_ref().map_or(raw[k], |z| z[k]);
        self.batches.push(MergeBatch { batch, modality: g.modality, pairs: raw.len(), mean, std_dev, standardized });

        let mut order: Vec<usize> = (0..pairs.len()).filter(|&k| value(k) >= cfg.node_threshold).collect();
        order.sort_by(|&a, &b| value(b).total_cmp(&value(a)).then(pairs[a].cmp(&pairs[b])));

        let mut map: Vec<Option<usize>> = vec![None; g.nodes.len()];
        let mut kept_used = vec![false; self.nodes.len()];
        for k in order {
            let (i, j) = pairs[k];
            if kept_used[i] || map[j].is_some() {
                continue;
            }
            kept_used[i] = true;
            map[j] = Some(i);
            self.nodes[i].modalities.extend(g.nodes[j].modalities.iter().copied());
            self.merge_log.push(MergeLogEntry {
                batch,
                kept: i,
                kept_concept: self.nodes[i].concept.clone(),
                absorbed_concept: g.nodes[j].concept.clone(),
                absorbed_modality: g.modality,
                raw: raw[k],
                z: z.as_ref().map(|z| z[k]),
            });
        }
        let map: Vec<usize> = map
            .into_iter()
            .enumerate()
            .map(|(j, m)| {
                m.unwrap_or_else(|| {
                    let id = self.nodes.len();
                    self.nodes.push(GraphNode { node_id: id, ..g.nodes[j].clone() });
                    id
                })
            })
            .collect();
        for e in &g.edges {
            let e = GraphEdge { source: map[e.source], target: map[e.target], ..e.clone() };
            if e.source != e.target && !self.edges.contains(&e) {
                self.edges.push(e);
            }
        }
        self.node_maps.push(map);
        Ok(())
    }
}

/// Folds graphs left to right (vision, text, background knowledge).
pub fn merge(graphs: &[DomainGraph], cfg: &MergeConfig, scorer: NodeScorer<'_>) -> Result<MultimodalGraph, ProviderError> {
    let Some((first, rest)) = graphs.split_first() else {
        return Ok(MultimodalGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            merge_log: Vec::new(),
            batches: Vec::new(),
            node_maps: Vec::new(),
        });
    };
    let mut acc = MultimodalGraph::from_domain(first);
    for (k, g) in rest.iter().enumerate() {
        acc.fold(g, k, cfg, scorer)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::offline::HashedBow;

    fn t(s: &str, p: &str, o: &str, m: Modality) -> Triplet {
        Triplet::new(s, p, o, m, "s1")
    }

    #[test]
    fn node_and_edge_counts() {
        let g = build_domain_graph(&[t("boy", "plays", "trombone", Modality::Text)], Modality::Text);
        assert_eq!((g.nodes.len(), g.edges.len()), (2, 1));
        let g = build_domain_graph(
            &[t("boy", "plays", "trombone", Modality::Text), t("boy", "in front of", "people", Modality::Text)],
            Modality::Text,
        );
        assert_eq!((g.nodes.len(), g.edges.len()), (3, 2));
    }

    #[test]
    fn zscore_of_constant_batch_is_zero() {
        assert_eq!(zscores(&[2.0, 2.0, 2.0]), vec![0.0; 3]);
        let z = zscores(&[1.0, 3.0]);
        assert_eq!(z, vec![-1.0, 1.0]);
    }

    #[test]
    fn infinite_threshold_is_disjoint_union() {
        let kb = KnowledgeStore::default();
        let scorer = NodeScorer { encoder: &HashedBow, kb: &kb };
        let a = build_domain_graph(&[t("boy", "plays", "trombone", Modality::Vision)], Modality::Vision);
        let b = build_domain_graph(&[t("boy", "plays", "trombone", Modality::Text)], Modality::Text);
        let cfg = MergeConfig { node_threshold: f64::INFINITY, zscore: true };
        let m = merge(&[a, b], &cfg, scorer).unwrap();
        assert_eq!(m.nodes.len(), 4);
        assert_eq!(m.edges.len(), 2);
        assert!(m.merge_log.is_empty());
    }
}
