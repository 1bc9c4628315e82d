//! Seeded instance generators and brute-force oracles shared by the
//! integration tests. The oracles work on raw edge lists and bitmasks and use
//! nothing from the library beyond the input types.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wiretap_bounds::network::{EdgeSpec, NetworkSpec, WiretapNetwork};

pub const CORPUS_SEED: u64 = 0x005e_c0de_2024;
pub const CORPUS_SIZE: usize = 240;

/// A generated network plus its raw description.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: NetworkSpec,
    pub num_nodes: usize,
    /// `(tail, head)` per edge, node 0 is the source.
    pub edges: Vec<(usize, usize)>,
    pub users: Vec<usize>,
    /// Wiretap sets as edge bitmasks.
    pub wiretap: Vec<u32>,
}

impl Instance {
    pub fn network(&self) -> WiretapNetwork {
        self.spec
            .clone()
            .try_into()
            .expect("generated instances are valid")
    }

    pub fn all_edges(&self) -> u32 {
        (1u32 << self.edges.len()) - 1
    }
}

fn build(
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    users: Vec<usize>,
    wiretap: Vec<u32>,
) -> Instance {
    let name = |v: usize| {
        if v == 0 {
            "s".to_string()
        } else {
            format!("v{v}")
        }
    };
    let spec = NetworkSpec {
        nodes: (0..num_nodes).map(name).collect(),
        edges: edges
            .iter()
            .enumerate()
            .map(|(i, &(t, h))| EdgeSpec {
                id: format!("e{}", i + 1),
                tail: name(t),
                head: name(h),
            })
            .collect(),
        source: name(0),
        users: users.iter().map(|&u| name(u)).collect(),
        wiretap_sets: wiretap
            .iter()
            .map(|&m| {
                (0..edges.len())
                    .filter(|&e| m >> e & 1 == 1)
                    .map(|e| format!("e{}", e + 1))
                    .collect()
            })
            .collect(),
    };
    Instance {
        spec,
        num_nodes,
        edges,
        users,
        wiretap,
    }
}

fn random_wiretap(rng: &mut ChaCha8Rng, num_edges: usize, d: usize) -> Vec<u32> {
    let mut sets: Vec<u32> = Vec::new();
    let full = (1u32 << num_edges) - 1;
    let mut attempts = 0;
    while sets.len() < d && attempts < 100 {
        attempts += 1;
        // small sets dominate so that cuts are neither trivially covered nor free
        let size = rng.gen_range(1..=num_edges.min(3));
        let mut idx: Vec<usize> = (0..num_edges).collect();
        idx.shuffle(rng);
        let mask = idx[..size].iter().fold(0u32, |m, &e| m | 1 << e) & full;
        if !sets.contains(&mask) {
            sets.push(mask);
        }
    }
    sets
}

/// Random DAG with `|V| ≤ 7`, `|E| ≤ 10`, `d ≤ 3`, every user reachable.
pub fn random_dag(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let n = rng.gen_range(2..=7);
        let m = rng.gen_range(1..=10);
        let mut edges: Vec<(usize, usize)> = (0..m)
            .map(|_| {
                let t = rng.gen_range(0..n - 1);
                let h = rng.gen_range(t + 1..n);
                (t, h)
            })
            .collect();
        edges.sort();
        let reach = reachable(n, &edges, 0, 0);
        let candidates: Vec<usize> = (1..n).filter(|&v| reach[v]).collect();
        if candidates.is_empty() {
            continue;
        }
        let k = rng.gen_range(1..=candidates.len().min(2));
        let mut users: Vec<usize> = candidates.choose_multiple(rng, k).copied().collect();
        users.sort();
        let d = rng.gen_range(0..=3);
        let wiretap = random_wiretap(rng, edges.len(), d);
        return build(n, edges, users, wiretap);
    }
}

/// Like [`random_dag`], but the wiretap sets (2 or 3 of them) jointly cover
/// every edge and none of them alone is blocking, which is where `τ` is
/// finite and positive.
pub fn random_covered_dag(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let base = random_dag(rng);
        let m = base.edges.len();
        if m < 2 {
            continue;
        }
        let d = rng.gen_range(2..=m.min(3));
        let mut idx: Vec<usize> = (0..m).collect();
        idx.shuffle(rng);
        let mut sets = vec![0u32; d];
        for (pos, &e) in idx.iter().enumerate() {
            let s = if pos < d { pos } else { rng.gen_range(0..d) };
            sets[s] |= 1 << e;
        }
        // occasional overlap
        if rng.gen_bool(0.3) {
            let s = rng.gen_range(0..d);
            sets[s] |= 1 << rng.gen_range(0..m);
        }
        sets.sort();
        sets.dedup();
        let candidate = build(base.num_nodes, base.edges, base.users, sets);
        if candidate
            .wiretap
            .iter()
            .any(|&w| is_blocking(&candidate, w))
        {
            continue;
        }
        return candidate;
    }
}

/// `h` parallel source-to-user edges with `h ≤ 5`, `1 ≤ d ≤ 3`.
pub fn random_point_to_point(rng: &mut ChaCha8Rng) -> Instance {
    let h = rng.gen_range(2..=5);
    let d = rng.gen_range(1..=3);
    let wiretap = random_wiretap(rng, h, d);
    build(2, vec![(0, 1); h], vec![1], wiretap)
}

pub fn corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|i| {
            if i % 2 == 0 {
                random_dag(&mut rng)
            } else {
                random_covered_dag(&mut rng)
            }
        })
        .collect()
}

/// Nodes reachable from `from` using edges outside `removed`.
pub fn reachable(
    num_nodes: usize,
    edges: &[(usize, usize)],
    removed: u32,
    from: usize,
) -> Vec<bool> {
    let mut seen = vec![false; num_nodes];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for (e, &(t, h)) in edges.iter().enumerate() {
            if t == v && removed >> e & 1 == 0 && !seen[h] {
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    seen
}

/// Removing `mask` disconnects the source from at least one user.
pub fn is_blocking(inst: &Instance, mask: u32) -> bool {
    let r = reachable(inst.num_nodes, &inst.edges, mask, 0);
    inst.users.iter().any(|&u| !r[u])
}

/// Smallest number of further edges whose removal, together with `removed`,
/// disconnects `user`.
pub fn min_cut_bruteforce(inst: &Instance, removed: u32, user: usize) -> u32 {
    let free = inst.all_edges() & !removed;
    let mut best = u32::MAX;
    let mut sub = free;
    loop {
        let r = reachable(inst.num_nodes, &inst.edges, removed | sub, 0);
        if !r[user] {
            best = best.min(sub.count_ones());
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    best
}

/// `min_I min_{J ⊇ I blocking} |J ∖ I|`, with `I = ∅` when there are no wiretap sets.
pub fn cor2_bruteforce(inst: &Instance) -> u32 {
    let sets = if inst.wiretap.is_empty() {
        vec![0]
    } else {
        inst.wiretap.clone()
    };
    let all = inst.all_edges();
    let mut best = u32::MAX;
    for &i in &sets {
        for j in 0..=all {
            if j & i == i && is_blocking(inst, j) {
                best = best.min((j & !i).count_ones());
            }
        }
    }
    best
}

/// Every user is reachable using only edges outside every wiretap set.
pub fn wiretap_free_paths(inst: &Instance) -> bool {
    let tapped = inst.wiretap.iter().fold(0, |a, &m| a | m);
    let r = reachable(inst.num_nodes, &inst.edges, tapped, 0);
    inst.users.iter().all(|&u| r[u])
}

/// `n` parallel edges with every `r`-subset as a wiretap set.
pub fn threshold_family(n: usize, r: usize) -> Instance {
    let wiretap: Vec<u32> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == r)
        .collect();
    build(2, vec![(0, 1); n], vec![1], wiretap)
}

pub fn parallel(n: usize, wiretap: &[&[usize]]) -> Instance {
    let masks = wiretap
        .iter()
        .map(|s| s.iter().fold(0u32, |m, &e| m | 1 << (e - 1)))
        .collect();
    build(2, vec![(0, 1); n], vec![1], masks)
}

/// Butterfly: S→A (e1), S→B (e2), A→U1 (e3), A→C (e4), B→C (e5), B→U2 (e6),
/// C→D (e7), D→U1 (e8), D→U2 (e9). Wiretap sets use 1-based edge numbers.
pub fn butterfly(wiretap: &[&[usize]]) -> Instance {
    let edges = vec![
        (0, 1),
        (0, 2),
        (1, 5),
        (1, 3),
        (2, 3),
        (2, 6),
        (3, 4),
        (4, 5),
        (4, 6),
    ];
    let masks = wiretap
        .iter()
        .map(|s| s.iter().fold(0u32, |m, &e| m | 1 << (e - 1)))
        .collect();
    build(7, edges, vec![5, 6], masks)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
