//! The branching space of words reachable from a prefix.
//!
//! Nodes are laid out on a grid of rows. A row grows greedily to the right
//! until it reaches the length limit. A new row starts with a down move:
//! some node is replaced by its next sibling, obtained by re-solving the
//! same step with every higher-ranked sibling penalized, and the row then
//! grows greedily from there. Among all pending down moves the one giving the
//! most probable word (product of next-sound probabilities from the prefix)
//! is taken first; ties go to the shorter word, then to the older node.
//! Building `rows` rows of length `L` costs `O(rows · L · d)` evaluations.

use crate::alphabet::Word;
use crate::model::InteractionModel;

use super::{grow_greedy, PenaltySet};

pub type NodeId = usize;

/// Inverse temperature used to rank pending down moves.
pub const BRANCH_BETA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Growth by one lowest-energy sound.
    Right,
    /// Next most likely word of the same length.
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchNode {
    pub word: Word,
    /// Energy of the full word, prefix included.
    pub energy: f64,
    /// Log-probability of the word given the prefix, as a product of
    /// next-sound probabilities at unit inverse temperature.
    pub log_prob: f64,
    /// Rank among siblings sharing the same parent word (0 = ground).
    pub depth_down: usize,
    /// Node whose word this one extends; `None` when it extends the prefix.
    pub parent: Option<NodeId>,
    pub right: Option<NodeId>,
    pub down: Option<NodeId>,
    /// Sibling ranked directly above this one.
    pub up: Option<NodeId>,
    /// Row in which the node was created.
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpace {
    pub prefix: Word,
    pub nodes: Vec<BranchNode>,
    pub rows: usize,
}

impl BranchSpace {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn find(&self, word: &[usize]) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.word.sounds() == word)
    }

    pub fn contains(&self, word: &[usize]) -> bool {
        self.find(word).is_some()
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId, EdgeKind)> {
        let mut edges = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Some(r) = node.right {
                edges.push((id, r, EdgeKind::Right));
            }
            if let Some(d) = node.down {
                edges.push((id, d, EdgeKind::Down));
            }
        }
        edges
    }
}

/// A down move waiting to be taken.
#[derive(Debug, Clone)]
struct Pending {
    from: NodeId,
    sound: usize,
    energy: f64,
    log_prob: f64,
}

/// Builds the branching space below `prefix` with at most `max_depth_right`
/// sounds appended and at most `max_depth_down` rows.
pub fn enumerate_branch_space(
    model: &InteractionModel,
    prefix: &[usize],
    max_depth_right: usize,
    max_depth_down: usize,
) -> BranchSpace {
    let mut builder = Builder {
        model,
        space: BranchSpace {
            prefix: Word::from(prefix),
            nodes: Vec::new(),
            rows: 0,
        },
        max_len: prefix.len() + max_depth_right,
        pending: Vec::new(),
    };
    if max_depth_right == 0 || max_depth_down == 0 {
        return builder.space;
    }

    let ground = grow_greedy(model, prefix, 1, &PenaltySet::new())
        .expect("no penalties, cannot exhaust")[prefix.len()];
    let energy = model.boundary_energy(prefix, &[ground]);
    let first = builder.push(None, None, ground, energy, 0);
    builder.grow_row(first);
    builder.space.rows = 1;

    while builder.space.rows < max_depth_down {
        let Some(next) = builder.take_best() else { break };
        let row = builder.space.rows;
        let parent = builder.space.nodes[next.from].parent;
        let id = builder.push(parent, Some(next.from), next.sound, next.energy, row);
        builder.grow_row(id);
        builder.space.rows += 1;
    }
    builder.space
}

struct Builder<'m> {
    model: &'m InteractionModel,
    space: BranchSpace,
    max_len: usize,
    pending: Vec<Pending>,
}

impl Builder<'_> {
    fn parent_word(&self, parent: Option<NodeId>) -> &Word {
        match parent {
            Some(p) => &self.space.nodes[p].word,
            None => &self.space.prefix,
        }
    }

    /// Adds a node extending `parent` by `sound`, ranked just below `up`
    /// when that is given.
    fn push(&mut self, parent: Option<NodeId>, up: Option<NodeId>, sound: usize, energy: f64, row: usize) -> NodeId {
        let parent_word = self.parent_word(parent);
        let log_prob = parent.map_or(0.0, |p| self.space.nodes[p].log_prob) + self.step_log_prob(parent_word, sound);
        let word = parent_word.extended(sound);
        let id = self.space.nodes.len();
        let depth_down = up.map_or(0, |u| self.space.nodes[u].depth_down + 1);
        self.space.nodes.push(BranchNode {
            word,
            energy,
            log_prob,
            depth_down,
            parent,
            right: None,
            down: None,
            up,
            row,
        });
        match up {
            Some(u) => self.space.nodes[u].down = Some(id),
            None => {
                if let Some(p) = parent {
                    self.space.nodes[p].right = Some(id);
                }
            }
        }
        self.queue_sibling(id);
        id
    }

    /// Extends the row ending at `id` greedily up to the length limit.
    fn grow_row(&mut self, mut id: NodeId) {
        while self.space.nodes[id].word.len() < self.max_len {
            let word = &self.space.nodes[id].word;
            let grown = grow_greedy(self.model, word, 1, &PenaltySet::new()).expect("no penalties, cannot exhaust");
            let sound = grown[grown.len() - 1];
            let energy = self.model.word_energy(&grown);
            let row = self.space.nodes[id].row;
            id = self.push(Some(id), None, sound, energy, row);
        }
    }

    /// Records the next sibling of `id`, found by penalizing it and every
    /// sibling ranked above it.
    fn queue_sibling(&mut self, id: NodeId) {
        let node = &self.space.nodes[id];
        let parent_word = self.parent_word(node.parent).clone();
        let mut penalties = PenaltySet::new();
        let base = node.parent.map_or(0.0, |p| self.space.nodes[p].log_prob);
        let mut cursor = Some(id);
        while let Some(c) = cursor {
            let sibling = &self.space.nodes[c];
            penalties.insert(sibling.word.clone());
            cursor = sibling.up;
        }
        if penalties.len() >= self.model.size() {
            return;
        }
        let Ok(next) = grow_greedy(self.model, &parent_word, 1, &penalties) else {
            return;
        };
        let sound = next[next.len() - 1];
        let energy = self.model.word_energy(&next);
        let log_prob = base + self.step_log_prob(&parent_word, sound);
        self.pending.push(Pending {
            from: id,
            sound,
            energy,
            log_prob,
        });
    }

    fn step_log_prob(&self, word: &[usize], sound: usize) -> f64 {
        self.model.next_sound_distribution(word, BRANCH_BETA).probabilities[sound].ln()
    }

    fn take_best(&mut self) -> Option<Pending> {
        let nodes = &self.space.nodes;
        let best = self
            .pending
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                b.log_prob
                    .total_cmp(&a.log_prob)
                    .then_with(|| nodes[a.from].word.len().cmp(&nodes[b.from].word.len()))
                    .then_with(|| a.from.cmp(&b.from))
            })
            .map(|(i, _)| i)?;
        Some(self.pending.swap_remove(best))
    }
}
