//! List assignments and partial colorings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Colors are positive integers drawn from the palette `1..=D+1`; some exact
/// instances also use 0 as an extra color.
pub type Color = u32;

/// A vertex-color pair, the ground element of the coloring hypergraph.
pub type Pair = (usize, Color);

/// The palette `1..=size`.
pub fn palette(size: usize) -> Vec<Color> {
    (1..=size as Color).collect()
}

/// Per-vertex color lists `S_v`. Lists are sorted, deduplicated and nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<usize, Vec<Color>>", into = "BTreeMap<usize, Vec<Color>>")]
pub struct ListAssignment {
    lists: Vec<Vec<Color>>,
}

impl ListAssignment {
    pub fn new(lists: Vec<Vec<Color>>) -> Result<Self> {
        let mut lists = lists;
        for (v, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.is_empty() {
                return Err(Error::InvalidParameter(format!("list of vertex {v} is empty")));
            }
        }
        Ok(Self { lists })
    }

    /// Every vertex gets the palette `1..=size`.
    pub fn uniform(n: usize, size: usize) -> Self {
        Self { lists: vec![palette(size.max(1)); n] }
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn list(&self, v: usize) -> &[Color] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<Color>] {
        &self.lists
    }

    pub fn contains(&self, v: usize, c: Color) -> bool {
        self.lists[v].binary_search(&c).is_ok()
    }

    /// Restricts every vertex named in `pairs` to its single prescribed color.
    /// Returns `None` when some prescription is outside the list or two pairs
    /// prescribe different colors to one vertex.
    pub fn pinned(&self, pairs: &[Pair]) -> Option<Self> {
        let mut lists = self.lists.clone();
        for &(v, c) in pairs {
            if v >= lists.len() || !self.contains(v, c) {
                return None;
            }
            if lists[v].len() == 1 && lists[v][0] != c {
                return None;
            }
            lists[v] = vec![c];
        }
        Some(Self { lists })
    }
}

impl TryFrom<BTreeMap<usize, Vec<Color>>> for ListAssignment {
    type Error = Error;

    fn try_from(map: BTreeMap<usize, Vec<Color>>) -> Result<Self> {
        let n = map.keys().next_back().map_or(0, |&v| v + 1);
        if map.len() != n {
            return Err(Error::Parse("list assignment must name every vertex 0..n".into()));
        }
        Self::new(map.into_values().collect())
    }
}

impl From<ListAssignment> for BTreeMap<usize, Vec<Color>> {
    fn from(lists: ListAssignment) -> Self {
        lists.lists.into_iter().enumerate().collect()
    }
}

/// A map from a subset of the vertices to colors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "BTreeMap<usize, Color>")]
pub struct PartialColoring {
    colors: Vec<Option<Color>>,
}

impl PartialColoring {
    pub fn new(n: usize) -> Self {
        Self { colors: vec![None; n] }
    }

    pub fn from_total(colors: &[Color]) -> Self {
        Self { colors: colors.iter().map(|&c| Some(c)).collect() }
    }

    pub fn from_pairs(n: usize, pairs: &[Pair]) -> Self {
        let mut out = Self::new(n);
        for &(v, c) in pairs {
            out.set(v, c);
        }
        out
    }

    /// Number of vertices of the underlying graph.
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<Color> {
        self.colors[v]
    }

    pub fn set(&mut self, v: usize, c: Color) {
        self.colors[v] = Some(c);
    }

    pub fn unset(&mut self, v: usize) {
        self.colors[v] = None;
    }

    pub fn colored_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    /// Colored vertices with their colors, in vertex order.
    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.colors
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|c| (v, c)))
    }

    pub fn as_slice(&self) -> &[Option<Color>] {
        &self.colors
    }

    pub fn to_total(&self) -> Option<Vec<Color>> {
        self.colors.iter().copied().collect()
    }

    /// Whether every pair of `set` is assigned.
    pub fn contains_all(&self, set: &[Pair]) -> bool {
        set.iter().all(|&(v, c)| self.colors.get(v).copied().flatten() == Some(c))
    }

    /// An edge whose endpoints are both colored with the same color.
    pub fn first_conflict(&self, g: &Graph) -> Option<(usize, usize)> {
        g.edges().find(|&(u, v)| {
            matches!((self.colors[u], self.colors[v]), (Some(a), Some(b)) if a == b)
        })
    }

    pub fn is_proper(&self, g: &Graph) -> bool {
        self.colors.len() == g.n() && self.first_conflict(g).is_none()
    }

    pub fn respects(&self, lists: &ListAssignment) -> bool {
        self.pairs().all(|(v, c)| v < lists.len() && lists.contains(v, c))
    }

    /// Copy keeping only the first `n` vertices.
    pub fn truncated(&self, n: usize) -> Self {
        Self { colors: self.colors[..n.min(self.colors.len())].to_vec() }
    }
}

impl From<PartialColoring> for BTreeMap<usize, Color> {
    fn from(c: PartialColoring) -> Self {
        c.pairs().collect()
    }
}
