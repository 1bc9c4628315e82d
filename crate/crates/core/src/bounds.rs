//! Upper bound on the message size and lower bound `τ` on `H(K)/H(M)`.
//!
//! `τ` is computed two ways: exhaustively over minimal cuts (solving the
//! covering and packing programs of every cut), and by enumerating the `d × d`
//! submatrices of the stacked global incidence matrix `[A_ℰ; I_d]`. Both
//! operate on the antichain of wiretap sets left after pruning subsets.
//!
//! For a blocking set `J` the incidence matrix `A_J` has one row per edge of
//! `J` and one column per wiretap set, so a wiretap set acts on `J` through its
//! intersection with `J`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lp::{self, Sense};
use crate::network::{CutEdgeSet, NetworkError, WiretapNetwork, DEFAULT_CUT_LIMIT};
use crate::rational::{rat, BigRational, RatMatrix, RatVector};

pub const DEFAULT_SUBMATRIX_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("instance too large: {count} candidates exceed the limit {limit}")]
    InstanceTooLarge { count: u128, limit: u128 },
    #[error("value {0} is outside the domain (must exceed 1)")]
    DomainError(String),
    #[error(transparent)]
    Network(NetworkError),
}

impl From<NetworkError> for BoundsError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::InstanceTooLarge { count, limit } => BoundsError::InstanceTooLarge {
                count,
                limit: u128::from(limit),
            },
            other => BoundsError::Network(other),
        }
    }
}

/// Enumeration caps for the exhaustive routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Node subsets examined during cut enumeration.
    pub max_cut_subsets: u64,
    /// Submatrices `C(|ℰ| + d, d)` examined by the submatrix route.
    pub max_submatrices: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cut_subsets: DEFAULT_CUT_LIMIT,
            max_submatrices: DEFAULT_SUBMATRIX_LIMIT,
        }
    }
}

/// A rational that may be `+∞`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Extended {
    Finite(BigRational),
    Infinite,
}

impl Extended {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// The key-to-message lower bound. `Unbounded` means no message can be sent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tau {
    Finite(BigRational),
    Unbounded,
}

impl Tau {
    pub fn zero() -> Self {
        Tau::Finite(BigRational::zero())
    }

    /// `τ = 1/(l_C − 1)`; `l_C = ∞` gives 0 and `l_C = 1` gives unbounded.
    pub fn from_covering(l_c: &Extended) -> Tau {
        match l_c {
            Extended::Infinite => Tau::zero(),
            Extended::Finite(v) if v.is_one() => Tau::Unbounded,
            Extended::Finite(v) => Tau::Finite((v - BigRational::one()).recip()),
        }
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Tau::Finite(v) => Some(v),
            Tau::Unbounded => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite().is_some_and(|v| v.is_zero())
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Finite(v) => write!(f, "{v}"),
            Tau::Unbounded => write!(f, "unbounded"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Algo1,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Algo1 => "algo1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    /// Weights `α` on wiretap sets.
    Covering,
    /// Weights `β` on complements `J ∖ I`.
    Packing,
}

/// Removes duplicates and every set contained in another set. Sets are
/// canonicalized (sorted, deduplicated) and returned in lexicographic order.
pub fn prune_wiretap_antichain<T: Ord + Clone>(sets: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut canon: Vec<Vec<T>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort();
            s.dedup();
            s
        })
        .collect();
    canon.sort();
    canon.dedup();
    let is_subset = |a: &[T], b: &[T]| a.iter().all(|x| b.binary_search(x).is_ok());
    canon
        .iter()
        .filter(|a| !canon.iter().any(|b| b.len() > a.len() && is_subset(a, b)))
        .cloned()
        .collect()
}

/// Pruned wiretap sets of `net`, each paired with the index of its first
/// occurrence in the network's collection.
pub fn pruned_wiretap_columns(net: &WiretapNetwork) -> (Vec<Vec<usize>>, Vec<usize>) {
    let pruned = prune_wiretap_antichain(net.wiretap_sets());
    let original = pruned
        .iter()
        .map(|p| {
            net.wiretap_sets()
                .iter()
                .position(|s| s == p)
                .expect("pruned sets come from the network")
        })
        .collect();
    (pruned, original)
}

/// 0/1 matrix with one row per edge and one column per wiretap set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub edge_order: Vec<usize>,
    pub wiretap_order: Vec<usize>,
    entries: Vec<bool>,
}

impl IncidenceMatrix {
    /// Rows for `edges`, columns for `sets` (labelled by `wiretap_order`).
    pub fn new(edges: &[usize], sets: &[Vec<usize>], wiretap_order: Vec<usize>) -> Self {
        assert_eq!(sets.len(), wiretap_order.len());
        let entries = edges
            .iter()
            .flat_map(|e| sets.iter().map(move |s| s.binary_search(e).is_ok()))
            .collect();
        IncidenceMatrix {
            edge_order: edges.to_vec(),
            wiretap_order,
            entries,
        }
    }

    /// `A_J` for the blocking set `J` over the pruned wiretap sets of `net`.
    pub fn for_blocking_set(net: &WiretapNetwork, j: &[usize]) -> Self {
        let (sets, original) = pruned_wiretap_columns(net);
        Self::new(j, &sets, original)
    }

    pub fn rows(&self) -> usize {
        self.edge_order.len()
    }

    pub fn cols(&self) -> usize {
        self.wiretap_order.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.entries[r * self.cols() + c]
    }

    pub fn to_rat(&self) -> RatMatrix {
        let entries = self.entries.iter().map(|&b| rat(i64::from(b))).collect();
        RatMatrix::new(self.rows(), self.cols(), entries).expect("shape")
    }

    /// Rows (edges) that no wiretap set touches.
    pub fn uncovered_rows(&self) -> Vec<usize> {
        (0..self.rows())
            .filter(|&r| (0..self.cols()).all(|c| !self.get(r, c)))
            .collect()
    }

    /// Columns whose wiretap set contains every row edge.
    fn full_columns(&self) -> Vec<usize> {
        (0..self.cols())
            .filter(|&c| (0..self.rows()).all(|r| self.get(r, c)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringSolution {
    pub l_c: Extended,
    /// Optimal `α`, one weight per column; empty when infeasible.
    pub alpha: RatVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingSolution {
    pub l_p: Extended,
    /// Optimal `β`, one weight per column; empty when unbounded or without columns.
    pub beta: RatVector,
}

/// `min 1ᵀα` subject to `A_J α ≥ 1`, `α ≥ 0`. Infinite when an edge of `J`
/// lies in no wiretap set.
pub fn covering_lp(aj: &IncidenceMatrix) -> CoveringSolution {
    if !aj.uncovered_rows().is_empty() {
        return CoveringSolution {
            l_c: Extended::Infinite,
            alpha: Vec::new(),
        };
    }
    let a = aj.to_rat();
    let ones = vec![BigRational::one(); aj.rows()];
    let cost = vec![BigRational::one(); aj.cols()];
    let v = lp::optimize(&a, &ones, &cost, Sense::Minimize)
        .expect("covering with every row touched is feasible");
    CoveringSolution {
        l_c: Extended::Finite(v.value),
        alpha: v.point,
    }
}

/// `max Σβ` over fractional packings of the complements `J ∖ I`: for each edge
/// of `J`, the `β` of complements containing it sum to at most 1.
///
/// With no columns the empty wiretap set still yields `β(J) = 1`, so `l_P = 1`.
/// A wiretap set covering all of `J` leaves an empty complement and the
/// program is unbounded.
pub fn packing_lp(aj: &IncidenceMatrix) -> PackingSolution {
    if aj.cols() == 0 {
        return PackingSolution {
            l_p: Extended::Finite(BigRational::one()),
            beta: Vec::new(),
        };
    }
    if !aj.full_columns().is_empty() {
        return PackingSolution {
            l_p: Extended::Infinite,
            beta: Vec::new(),
        };
    }
    // row e: −Σ_{I ∌ e} β_I ≥ −1
    let mut g = RatMatrix::zeros(aj.rows(), aj.cols());
    for r in 0..aj.rows() {
        for c in 0..aj.cols() {
            if !aj.get(r, c) {
                g.set(r, c, rat(-1));
            }
        }
    }
    let h = vec![rat(-1); aj.rows()];
    let cost = vec![BigRational::one(); aj.cols()];
    let v = lp::optimize(&g, &h, &cost, Sense::Maximize).expect("β = 0 is feasible");
    PackingSolution {
        l_p: Extended::Finite(v.value),
        beta: v.point,
    }
}

/// `l ↦ l/(l − 1)`, mapping between covering and packing optima.
pub fn duality_convert(l: &BigRational) -> Result<BigRational, BoundsError> {
    if *l <= BigRational::one() {
        return Err(BoundsError::DomainError(l.to_string()));
    }
    Ok(l / (l - BigRational::one()))
}

/// Residual min-cut after removing one wiretap set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiretapResidual {
    /// Index into the network's wiretap sets.
    pub wiretap: usize,
    pub residual_mincut: usize,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageBoundReport {
    /// `H(M) ≤ bound_logq · log q`.
    pub bound_logq: usize,
    pub witness_wiretap: Option<usize>,
    pub per_wiretap: Vec<WiretapResidual>,
}

/// `min` over wiretap sets `I` and users `u` of the min-cut of `(𝒱, ℰ ∖ I)`.
/// Without wiretap sets this is the plain multicast bound `min_u maxflow(u)`.
pub fn message_upper_bound(net: &WiretapNetwork) -> MessageBoundReport {
    let residual = |removed: &[usize]| {
        net.users()
            .iter()
            .map(|&u| (net.min_cut_to(removed, u), u))
            .min_by_key(|&(cut, _)| cut)
            .expect("validated networks have users")
    };
    if net.wiretap_sets().is_empty() {
        return MessageBoundReport {
            bound_logq: residual(&[]).0,
            witness_wiretap: None,
            per_wiretap: Vec::new(),
        };
    }
    let per_wiretap: Vec<WiretapResidual> = net
        .wiretap_sets()
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let (cut, u) = residual(set);
            WiretapResidual {
                wiretap: i,
                residual_mincut: cut,
                user: net.node_name(u).to_string(),
            }
        })
        .collect();
    let witness = per_wiretap
        .iter()
        .min_by_key(|r| r.residual_mincut)
        .expect("nonempty");
    MessageBoundReport {
        bound_logq: witness.residual_mincut,
        witness_wiretap: Some(witness.wiretap),
        per_wiretap,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBoundReport {
    pub tau: Tau,
    pub l_c: Extended,
    pub l_p: Extended,
    /// Sorted edge indices of the blocking set attaining `τ` (empty if none).
    pub witness_blocking_set: Vec<usize>,
    pub witness_solution: RatVector,
    pub solution_kind: SolutionKind,
    pub method: Method,
}

/// Covering and packing optima of one minimal cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutAnalysis {
    pub cut: CutEdgeSet,
    pub incidence: IncidenceMatrix,
    pub covering: CoveringSolution,
    pub packing: PackingSolution,
    pub tau: Tau,
}

/// Solves both programs for every minimal cut of `net`.
pub fn analyze_cuts(
    net: &WiretapNetwork,
    limits: &Limits,
) -> Result<Vec<CutAnalysis>, BoundsError> {
    let cuts = net.enumerate_minimal_cuts(limits.max_cut_subsets)?;
    let (sets, original) = pruned_wiretap_columns(net);
    Ok(cuts
        .into_iter()
        .map(|cut| {
            let incidence = IncidenceMatrix::new(&cut.edges, &sets, original.clone());
            let covering = covering_lp(&incidence);
            let packing = packing_lp(&incidence);
            let tau = Tau::from_covering(&covering.l_c);
            CutAnalysis {
                cut,
                incidence,
                covering,
                packing,
                tau,
            }
        })
        .collect())
}

/// `τ = max_J τ(J)` over all minimal cuts, by solving each cut's programs.
pub fn tau_bruteforce(
    net: &WiretapNetwork,
    limits: &Limits,
) -> Result<KeyBoundReport, BoundsError> {
    let analyses = analyze_cuts(net, limits)?;
    let best = analyses
        .iter()
        .reduce(|best, a| if a.tau > best.tau { a } else { best });
    Ok(match best {
        None => KeyBoundReport {
            tau: Tau::zero(),
            l_c: Extended::Infinite,
            l_p: Extended::Finite(BigRational::one()),
            witness_blocking_set: Vec::new(),
            witness_solution: Vec::new(),
            solution_kind: SolutionKind::Packing,
            method: Method::Brute,
        },
        Some(a) => {
            let (witness_solution, solution_kind) = match a.covering.l_c {
                Extended::Finite(_) => (a.covering.alpha.clone(), SolutionKind::Covering),
                Extended::Infinite => (a.packing.beta.clone(), SolutionKind::Packing),
            };
            KeyBoundReport {
                tau: a.tau.clone(),
                l_c: a.covering.l_c.clone(),
                l_p: a.packing.l_p.clone(),
                witness_blocking_set: a.cut.edges.clone(),
                witness_solution,
                solution_kind,
                method: Method::Brute,
            }
        }
    })
}

/// `τ` from the basic solutions of `[A_ℰ; I_d] x ≥ [1; 0]`: a nonnegative
/// basic solution `x_S` counts iff its tight edge set
/// `F(S) = {e : (aᵉ)ᵀ x_S ≥ 1}` is blocking, and `l_C = min 1ᵀ x_S`.
///
/// Ties go to the lexicographically smallest row set `S`.
pub fn tau_algorithm1(
    net: &WiretapNetwork,
    limits: &Limits,
) -> Result<KeyBoundReport, BoundsError> {
    let (sets, original) = pruned_wiretap_columns(net);
    let edges: Vec<usize> = (0..net.num_edges()).collect();
    let count = lp::basis_count(edges.len(), sets.len());
    if count > limits.max_submatrices {
        return Err(BoundsError::InstanceTooLarge {
            count,
            limit: limits.max_submatrices,
        });
    }
    let a = IncidenceMatrix::new(&edges, &sets, original).to_rat();
    let ones = vec![BigRational::one(); edges.len()];
    let one = BigRational::one();

    struct Best {
        val: BigRational,
        basis: Vec<usize>,
        x: RatVector,
        tight: Vec<usize>,
    }
    let mut best: Option<Best> = None;
    lp::for_each_nonnegative_basic_solution(&a, &ones, |basis, x| {
        let val: BigRational = x.iter().sum();
        if let Some(b) = &best {
            match val.cmp(&b.val) {
                Ordering::Greater => return,
                Ordering::Equal if basis >= b.basis.as_slice() => return,
                _ => {}
            }
        }
        let tight: Vec<usize> = (0..a.rows())
            .filter(|&e| crate::rational::dot(a.row(e), x) >= one)
            .collect();
        if net.is_blocking_set(&tight).expect("edge indices in range") {
            best = Some(Best {
                val,
                basis: basis.to_vec(),
                x: x.to_vec(),
                tight,
            });
        }
    });
    Ok(match best {
        None => KeyBoundReport {
            tau: Tau::zero(),
            l_c: Extended::Infinite,
            l_p: Extended::Finite(BigRational::one()),
            witness_blocking_set: Vec::new(),
            witness_solution: Vec::new(),
            solution_kind: SolutionKind::Covering,
            method: Method::Algo1,
        },
        Some(b) => {
            let l_c = Extended::Finite(b.val.clone());
            let l_p = match duality_convert(&b.val) {
                Ok(v) => Extended::Finite(v),
                Err(_) => Extended::Infinite,
            };
            KeyBoundReport {
                tau: Tau::from_covering(&l_c),
                l_c,
                l_p,
                witness_blocking_set: b.tight,
                witness_solution: b.x,
                solution_kind: SolutionKind::Covering,
                method: Method::Algo1,
            }
        }
    })
}

/// True iff both routes report the same `τ` and `l_C`.
pub fn reports_agree(a: &KeyBoundReport, b: &KeyBoundReport) -> bool {
    a.tau == b.tau && a.l_c == b.l_c
}
