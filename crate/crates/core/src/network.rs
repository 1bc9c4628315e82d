//! Wiretap networks: a directed acyclic multigraph with a source, a set of
//! users and a collection of wiretap sets, plus the cut queries the bounds need.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node subsets examined by [`WiretapNetwork::enumerate_minimal_cuts`] by default.
pub const DEFAULT_CUT_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("graph contains a directed cycle")]
    CyclicGraph,
    #[error("wiretap set {set} references unknown edge {edge:?}")]
    UnknownEdgeInWiretapSet { set: usize, edge: String },
    #[error("user {0:?} is not reachable from the source")]
    UnreachableUser(String),
    #[error("source {0:?} is also listed as a user")]
    SourceIsUser(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdgeId(String),
    #[error("duplicate user {0:?}")]
    DuplicateUser(String),
    #[error("wiretap sets {first} and {second} are equal")]
    DuplicateWiretapSet { first: usize, second: usize },
    #[error("network has no users")]
    NoUsers,
    #[error("instance too large: {count} candidates exceed the limit {limit}")]
    InstanceTooLarge { count: u128, limit: u64 },
    #[error("invalid network JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
}

/// The on-disk network description. Edge ids are unique strings; edge order
/// is significant and preserved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub source: String,
    pub users: Vec<String>,
    #[serde(default)]
    pub wiretap_sets: Vec<Vec<String>>,
}

impl NetworkSpec {
    pub fn from_json(s: &str) -> Result<Self, NetworkError> {
        serde_json::from_str(s).map_err(|e| NetworkError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network spec serializes")
    }

    /// Checks every structural invariant of a wiretap network.
    pub fn validate(&self) -> Result<(), NetworkError> {
        WiretapNetwork::build(self.clone()).map(|_| ())
    }

    /// `n` parallel edges `e1..en` from `s` to `u`.
    pub fn parallel(n: usize, wiretap_sets: Vec<Vec<String>>) -> Self {
        NetworkSpec {
            nodes: vec!["s".into(), "u".into()],
            edges: (1..=n)
                .map(|i| EdgeSpec {
                    id: format!("e{i}"),
                    tail: "s".into(),
                    head: "u".into(),
                })
                .collect(),
            source: "s".into(),
            users: vec!["u".into()],
            wiretap_sets,
        }
    }
}

/// Free-function form of [`NetworkSpec::validate`].
pub fn validate(spec: &NetworkSpec) -> Result<(), NetworkError> {
    spec.validate()
}

/// An inclusion-minimal set of edges separating the source from `user`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutEdgeSet {
    pub user: String,
    /// Sorted edge indices.
    pub edges: Vec<usize>,
}

/// A validated wiretap network. Edges and wiretap sets are addressed by edge
/// index (position in the input edge list).
#[derive(Debug, Clone)]
pub struct WiretapNetwork {
    spec: NetworkSpec,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    tails: Vec<usize>,
    heads: Vec<usize>,
    out_edges: Vec<Vec<usize>>,
    source: usize,
    users: Vec<usize>,
    wiretap: Vec<Vec<usize>>,
}

impl TryFrom<NetworkSpec> for WiretapNetwork {
    type Error = NetworkError;

    fn try_from(spec: NetworkSpec) -> Result<Self, Self::Error> {
        Self::build(spec)
    }
}

impl WiretapNetwork {
    pub fn from_json(s: &str) -> Result<Self, NetworkError> {
        NetworkSpec::from_json(s)?.try_into()
    }

    fn build(spec: NetworkSpec) -> Result<Self, NetworkError> {
        let mut node_index = HashMap::new();
        for (i, n) in spec.nodes.iter().enumerate() {
            if node_index.insert(n.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(n.clone()));
            }
        }
        let lookup = |name: &String| {
            node_index
                .get(name)
                .copied()
                .ok_or_else(|| NetworkError::UnknownNode(name.clone()))
        };
        let mut edge_index = HashMap::new();
        let mut tails = Vec::with_capacity(spec.edges.len());
        let mut heads = Vec::with_capacity(spec.edges.len());
        let mut out_edges = vec![Vec::new(); spec.nodes.len()];
        for (i, e) in spec.edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateEdgeId(e.id.clone()));
            }
            let (t, h) = (lookup(&e.tail)?, lookup(&e.head)?);
            tails.push(t);
            heads.push(h);
            out_edges[t].push(i);
        }
        let source = lookup(&spec.source)?;
        if spec.users.is_empty() {
            return Err(NetworkError::NoUsers);
        }
        let mut users = Vec::with_capacity(spec.users.len());
        for u in &spec.users {
            let idx = lookup(u)?;
            if idx == source {
                return Err(NetworkError::SourceIsUser(u.clone()));
            }
            if users.contains(&idx) {
                return Err(NetworkError::DuplicateUser(u.clone()));
            }
            users.push(idx);
        }
        let mut wiretap = Vec::with_capacity(spec.wiretap_sets.len());
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (si, set) in spec.wiretap_sets.iter().enumerate() {
            let mut idx = Vec::with_capacity(set.len());
            for id in set {
                let e = edge_index.get(id).copied().ok_or_else(|| {
                    NetworkError::UnknownEdgeInWiretapSet {
                        set: si,
                        edge: id.clone(),
                    }
                })?;
                idx.push(e);
            }
            idx.sort_unstable();
            idx.dedup();
            if let Some(&first) = seen.get(&idx) {
                return Err(NetworkError::DuplicateWiretapSet { first, second: si });
            }
            seen.insert(idx.clone(), si);
            wiretap.push(idx);
        }
        let net = WiretapNetwork {
            spec,
            node_index,
            edge_index,
            tails,
            heads,
            out_edges,
            source,
            users,
            wiretap,
        };
        if !net.is_acyclic() {
            return Err(NetworkError::CyclicGraph);
        }
        let reach = net.reachable(&[]);
        if let Some(&u) = net.users.iter().find(|&&u| !reach[u]) {
            return Err(NetworkError::UnreachableUser(net.spec.nodes[u].clone()));
        }
        Ok(net)
    }

    fn is_acyclic(&self) -> bool {
        let n = self.spec.nodes.len();
        let mut indeg = vec![0usize; n];
        for &h in &self.heads {
            indeg[h] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut visited = 0;
        while let Some(v) = queue.pop_front() {
            visited += 1;
            for &e in &self.out_edges[v] {
                let h = self.heads[e];
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    queue.push_back(h);
                }
            }
        }
        visited == n
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn num_nodes(&self) -> usize {
        self.spec.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.spec.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// User node indices, in input order.
    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn node_name(&self, v: usize) -> &str {
        &self.spec.nodes[v]
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.node_index.get(name).copied()
    }

    pub fn edge(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.spec.edges[e].id
    }

    pub fn edge_ids(&self, edges: &[usize]) -> Vec<String> {
        edges.iter().map(|&e| self.edge_id(e).to_string()).collect()
    }

    /// Resolves edge ids to sorted, deduplicated edge indices.
    pub fn resolve_edges<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>, NetworkError> {
        let mut out = ids
            .iter()
            .map(|id| {
                self.edge(id.as_ref())
                    .ok_or_else(|| NetworkError::UnknownEdge(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn tail(&self, e: usize) -> usize {
        self.tails[e]
    }

    pub fn head(&self, e: usize) -> usize {
        self.heads[e]
    }

    /// Wiretap sets as sorted edge-index sets, in input order.
    pub fn wiretap_sets(&self) -> &[Vec<usize>] {
        &self.wiretap
    }

    /// Same topology with a different wiretap collection.
    pub fn with_wiretap_sets(&self, sets: Vec<Vec<usize>>) -> Result<WiretapNetwork, NetworkError> {
        let mut spec = self.spec.clone();
        spec.wiretap_sets = sets.iter().map(|s| self.edge_ids(s)).collect();
        spec.try_into()
    }

    /// True when every edge runs from the source to one and the same user.
    pub fn is_point_to_point(&self) -> bool {
        self.users.len() == 1
            && self
                .tails
                .iter()
                .zip(&self.heads)
                .all(|(&t, &h)| t == self.source && h == self.users[0])
    }

    fn removal_mask(&self, removed: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.num_edges()];
        for &e in removed {
            mask[e] = true;
        }
        mask
    }

    fn check_edges(&self, edges: &[usize]) -> Result<(), NetworkError> {
        match edges.iter().find(|&&e| e >= self.num_edges()) {
            Some(e) => Err(NetworkError::UnknownEdge(format!("#{e}"))),
            None => Ok(()),
        }
    }

    /// Nodes reachable from the source once `removed` edges are deleted.
    pub fn reachable(&self, removed: &[usize]) -> Vec<bool> {
        self.reachable_masked(&self.removal_mask(removed))
    }

    fn reachable_masked(&self, removed: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.out_edges[v] {
                let h = self.heads[e];
                if !removed[e] && !seen[h] {
                    seen[h] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    fn user_node(&self, user: &str) -> Result<usize, NetworkError> {
        self.node(user)
            .filter(|v| self.users.contains(v))
            .ok_or_else(|| NetworkError::UnknownUser(user.to_string()))
    }

    /// Value of a minimum source–`user` edge cut after deleting `removed`.
    pub fn min_cut(&self, removed: &[usize], user: &str) -> Result<usize, NetworkError> {
        self.check_edges(removed)?;
        let u = self.user_node(user)?;
        Ok(self.max_flow(&self.removal_mask(removed), u))
    }

    /// `min_cut` addressed by user node index.
    pub fn min_cut_to(&self, removed: &[usize], user_node: usize) -> usize {
        self.max_flow(&self.removal_mask(removed), user_node)
    }

    /// Unit-capacity augmenting-path max flow from the source to `sink`.
    fn max_flow(&self, removed: &[bool], sink: usize) -> usize {
        debug_assert_eq!(removed.len(), self.num_edges());
        let n = self.num_nodes();
        // arc 2i is edge i forward, arc 2i+1 its residual twin
        let mut cap: Vec<u8> = Vec::with_capacity(2 * self.num_edges());
        let mut to = Vec::with_capacity(2 * self.num_edges());
        let mut adj = vec![Vec::new(); n];
        for (e, &gone) in removed.iter().enumerate() {
            let (t, h) = (self.tails[e], self.heads[e]);
            adj[t].push(to.len());
            to.push(h);
            cap.push(u8::from(!gone));
            adj[h].push(to.len());
            to.push(t);
            cap.push(0);
        }
        let mut flow = 0;
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(v) = queue.pop_front() {
                if v == sink {
                    break;
                }
                for &a in &adj[v] {
                    let w = to[a];
                    if cap[a] > 0 && !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(a);
                        queue.push_back(w);
                    }
                }
            }
            if !seen[sink] {
                return flow;
            }
            let mut v = sink;
            while let Some(a) = parent[v] {
                cap[a] -= 1;
                cap[a ^ 1] += 1;
                v = to[a ^ 1];
            }
            flow += 1;
        }
    }

    /// True iff deleting `edges` disconnects the source from at least one user.
    pub fn is_blocking_set(&self, edges: &[usize]) -> Result<bool, NetworkError> {
        self.check_edges(edges)?;
        let reach = self.reachable(edges);
        Ok(self.users.iter().any(|&u| !reach[u]))
    }

    /// True iff deleting `edges` disconnects the source from `user_node`.
    pub fn blocks_user(&self, edges: &[usize], user_node: usize) -> bool {
        !self.reachable(edges)[user_node]
    }

    /// All inclusion-minimal source–user edge cuts, each tagged with its user,
    /// ordered lexicographically by edge indices and then by user order.
    ///
    /// Candidates are the edge sets `E_W` for node sets `W ∋ s`; `limit` caps
    /// the number of node subsets examined.
    pub fn enumerate_minimal_cuts(&self, limit: u64) -> Result<Vec<CutEdgeSet>, NetworkError> {
        let others: Vec<usize> = (0..self.num_nodes())
            .filter(|&v| v != self.source)
            .collect();
        let count: u128 = if others.len() >= 127 {
            u128::MAX
        } else {
            1u128 << others.len()
        };
        if count > u128::from(limit) {
            return Err(NetworkError::InstanceTooLarge { count, limit });
        }
        let mut found: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
        let mut checked: HashSet<(Vec<usize>, usize)> = HashSet::new();
        let mut in_w = vec![false; self.num_nodes()];
        for bits in 0..count as u64 {
            in_w.iter_mut().for_each(|x| *x = false);
            in_w[self.source] = true;
            for (i, &v) in others.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    in_w[v] = true;
                }
            }
            let cut: Vec<usize> = (0..self.num_edges())
                .filter(|&e| in_w[self.tails[e]] && !in_w[self.heads[e]])
                .collect();
            for (ui, &u) in self.users.iter().enumerate() {
                if in_w[u] || !checked.insert((cut.clone(), ui)) {
                    continue;
                }
                if self.is_minimal_cut(&cut, u) {
                    found.insert((cut.clone(), ui));
                }
            }
        }
        Ok(found
            .into_iter()
            .map(|(edges, ui)| CutEdgeSet {
                user: self.node_name(self.users[ui]).to_string(),
                edges,
            })
            .collect())
    }

    fn is_minimal_cut(&self, cut: &[usize], user: usize) -> bool {
        if cut.is_empty() || !self.blocks_user(cut, user) {
            return false;
        }
        let mut mask = self.removal_mask(cut);
        cut.iter().all(|&e| {
            mask[e] = false;
            let reconnects = self.reachable_masked(&mask)[user];
            mask[e] = true;
            reconnects
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn edge(id: &str, t: &str, h: &str) -> EdgeSpec {
        EdgeSpec {
            id: id.into(),
            tail: t.into(),
            head: h.into(),
        }
    }

    fn sets(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|s| s.iter().map(|x| x.to_string()).collect())
            .collect()
    }

    /// Butterfly: S→A e1, S→B e2, A→U1 e3, A→C e4, B→C e5, B→U2 e6,
    /// C→D e7, D→U1 e8, D→U2 e9.
    pub(crate) fn butterfly(wiretap: Vec<Vec<String>>) -> NetworkSpec {
        NetworkSpec {
            nodes: ["S", "A", "B", "C", "D", "U1", "U2"]
                .map(String::from)
                .to_vec(),
            edges: vec![
                edge("e1", "S", "A"),
                edge("e2", "S", "B"),
                edge("e3", "A", "U1"),
                edge("e4", "A", "C"),
                edge("e5", "B", "C"),
                edge("e6", "B", "U2"),
                edge("e7", "C", "D"),
                edge("e8", "D", "U1"),
                edge("e9", "D", "U2"),
            ],
            source: "S".into(),
            users: vec!["U1".into(), "U2".into()],
            wiretap_sets: wiretap,
        }
    }

    #[test]
    fn validate_examples() {
        let ok = NetworkSpec::parallel(3, sets(&[&["e1"]]));
        assert_eq!(validate(&ok), Ok(()));

        let mut cyclic = ok.clone();
        cyclic.edges.push(edge("back", "u", "s"));
        assert_eq!(validate(&cyclic), Err(NetworkError::CyclicGraph));

        let unknown = NetworkSpec::parallel(3, sets(&[&["e9"]]));
        assert_eq!(
            validate(&unknown),
            Err(NetworkError::UnknownEdgeInWiretapSet {
                set: 0,
                edge: "e9".into()
            })
        );

        let mut unreachable = ok.clone();
        unreachable.nodes.push("v".into());
        unreachable.users.push("v".into());
        assert_eq!(
            validate(&unreachable),
            Err(NetworkError::UnreachableUser("v".into()))
        );

        let mut source_user = ok.clone();
        source_user.users = vec!["s".into()];
        assert_eq!(
            validate(&source_user),
            Err(NetworkError::SourceIsUser("s".into()))
        );

        let dup = NetworkSpec::parallel(3, sets(&[&["e1", "e2"], &["e2", "e1"]]));
        assert_eq!(
            validate(&dup),
            Err(NetworkError::DuplicateWiretapSet {
                first: 0,
                second: 1
            })
        );

        let mut dup_edge = ok;
        dup_edge.edges.push(edge("e1", "s", "u"));
        assert_eq!(
            validate(&dup_edge),
            Err(NetworkError::DuplicateEdgeId("e1".into()))
        );
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"nodes":["s","u"],"edges":[{"id":"e1","tail":"s","head":"u"}],
                       "source":"s","users":["u"],"wiretap_sets":[["e1"]]}"#;
        let spec = NetworkSpec::from_json(text).unwrap();
        assert_eq!(spec.edges[0].id, "e1");
        assert_eq!(NetworkSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(matches!(
            NetworkSpec::from_json("{"),
            Err(NetworkError::Json(_))
        ));
    }

    #[test]
    fn min_cut_examples() {
        let net = WiretapNetwork::try_from(NetworkSpec::parallel(3, vec![])).unwrap();
        assert_eq!(net.min_cut(&[], "u"), Ok(3));
        assert_eq!(net.min_cut(&[0], "u"), Ok(2));
        assert_eq!(net.min_cut(&[0, 1, 2], "u"), Ok(0));
        assert_eq!(
            net.min_cut(&[], "s"),
            Err(NetworkError::UnknownUser("s".into()))
        );

        let fly = WiretapNetwork::try_from(butterfly(vec![])).unwrap();
        assert_eq!(fly.min_cut(&[], "U1"), Ok(2));
        assert_eq!(fly.min_cut(&[], "U2"), Ok(2));
    }

    #[test]
    fn blocking_examples() {
        let net = WiretapNetwork::try_from(NetworkSpec::parallel(3, vec![])).unwrap();
        assert_eq!(net.is_blocking_set(&[0, 1, 2]), Ok(true));
        assert_eq!(net.is_blocking_set(&[0, 1]), Ok(false));
        assert!(net.is_blocking_set(&[7]).is_err());

        let fly = WiretapNetwork::try_from(butterfly(vec![])).unwrap();
        assert_eq!(fly.is_blocking_set(&[0, 1]), Ok(true));
        // e1, e5 isolate U1 only
        assert_eq!(fly.is_blocking_set(&[0, 4]), Ok(true));
        assert!(fly.blocks_user(&[0, 4], fly.node("U1").unwrap()));
        assert!(!fly.blocks_user(&[0, 4], fly.node("U2").unwrap()));
    }

    #[test]
    fn minimal_cut_examples() {
        let net = WiretapNetwork::try_from(NetworkSpec::parallel(3, vec![])).unwrap();
        let cuts = net.enumerate_minimal_cuts(DEFAULT_CUT_LIMIT).unwrap();
        assert_eq!(
            cuts,
            vec![CutEdgeSet {
                user: "u".into(),
                edges: vec![0, 1, 2]
            }]
        );

        let path = NetworkSpec {
            nodes: vec!["s".into(), "v".into(), "u".into()],
            edges: vec![edge("a", "s", "v"), edge("b", "v", "u")],
            source: "s".into(),
            users: vec!["u".into()],
            wiretap_sets: vec![],
        };
        let path = WiretapNetwork::try_from(path).unwrap();
        let cuts: Vec<Vec<usize>> = path
            .enumerate_minimal_cuts(DEFAULT_CUT_LIMIT)
            .unwrap()
            .into_iter()
            .map(|c| c.edges)
            .collect();
        assert_eq!(cuts, vec![vec![0], vec![1]]);

        let fly = WiretapNetwork::try_from(butterfly(vec![])).unwrap();
        let cuts = fly.enumerate_minimal_cuts(DEFAULT_CUT_LIMIT).unwrap();
        assert!(cuts.iter().any(|c| c.edges == vec![0, 1]));
        assert!(cuts.iter().any(|c| c.edges == vec![0, 4] && c.user == "U1"));
        assert!(cuts
            .windows(2)
            .all(|w| (&w[0].edges, &w[0].user) < (&w[1].edges, &w[1].user)));
    }

    #[test]
    fn cut_limit_enforced() {
        let fly = WiretapNetwork::try_from(butterfly(vec![])).unwrap();
        assert_eq!(
            fly.enumerate_minimal_cuts(8),
            Err(NetworkError::InstanceTooLarge {
                count: 64,
                limit: 8
            })
        );
    }

    #[test]
    fn point_to_point_detection() {
        let net = WiretapNetwork::try_from(NetworkSpec::parallel(2, vec![])).unwrap();
        assert!(net.is_point_to_point());
        let fly = WiretapNetwork::try_from(butterfly(vec![])).unwrap();
        assert!(!fly.is_point_to_point());
    }
}
