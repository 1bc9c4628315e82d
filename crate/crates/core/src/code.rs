//! Optimal secure linear codes for point-to-point wiretap systems.
//!
//! All `h` edges run from the source to a single user. Rates come from an
//! exact optimum `y*` of `max 1ᵀy s.t. A_ℰᵀ y ≤ 1, y ≥ 0`: with
//! `g = lcm(denominators)` and `w_i = g·y*_i`, a key of `g` symbols protects a
//! message of `Σw_i − g` symbols. A wiretap set `I_d` whose rates sum to `g`
//! carries the key itself; every other edge `e_i` carries `m_i + B_i K`, with
//! the `B_i` chosen edge by edge so that the stacked key kernels of every
//! wiretap set keep full row rank.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{pruned_wiretap_columns, tau_bruteforce, BoundsError, Limits, Tau};
use crate::field::{
    add_mod, build_subspace, is_prime, smallest_prime_above, sub_mod, FieldError, FieldMatrix,
};
use crate::lp::{self, Sense};
use crate::network::WiretapNetwork;
use crate::rational::{lcm_of_denominators, BigRational, RatMatrix, RatVector};

/// Largest `q^(g + w_total)` the distribution oracle enumerates by default.
pub const DEFAULT_ORACLE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error(
        "network is not point-to-point (every edge must run from the source to the single user)"
    )]
    NotPointToPoint,
    #[error("key bound τ = {0} admits no secure code construction")]
    DegenerateTau(String),
    #[error("field size {q} must be a prime larger than the number of wiretap sets {d}")]
    FieldTooSmall { q: u64, d: usize },
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("codeword is not in the image of the code: {0}")]
    InconsistentCodeword(String),
    #[error("edge {0:?} is not part of the code")]
    UnknownEdge(String),
    #[error("instance too large: {count} outcomes exceed the limit {limit}")]
    InstanceTooLarge { count: u128, limit: u64 },
    #[error(
        "construction invariant failed after edge {edge:?}: wiretap set {wiretap} lost full rank"
    )]
    InductionViolated { edge: String, wiretap: usize },
    #[error("malformed code: {0}")]
    Malformed(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Exact rates of an optimal code, indexed by network edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateProfile {
    pub y_star: RatVector,
    pub g: usize,
    pub w: Vec<usize>,
    /// Message length `Σw_i − g`.
    pub w_total: usize,
    pub w_max: usize,
    /// Edge indices of the wiretap set whose rates sum to `g`.
    pub tight_set: Vec<usize>,
    /// Index of that set in the network's wiretap collection.
    pub tight_index: usize,
}

impl RateProfile {
    /// Achieved `H(K)/H(M) = g / w_total`.
    pub fn key_to_message_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.g), BigInt::from(self.w_total))
    }
}

fn to_usize(v: &BigInt, what: &str) -> Result<usize, CodeError> {
    v.to_usize()
        .ok_or_else(|| CodeError::Malformed(format!("{what} {v} does not fit in usize")))
}

/// Solves the dual program exactly and derives key length, per-edge rates and
/// the tight wiretap set.
pub fn derive_rates(net: &WiretapNetwork) -> Result<RateProfile, CodeError> {
    if !net.is_point_to_point() {
        return Err(CodeError::NotPointToPoint);
    }
    let report = tau_bruteforce(net, &Limits::default())?;
    match &report.tau {
        Tau::Finite(t) if !t.is_zero() => {}
        other => return Err(CodeError::DegenerateTau(other.to_string())),
    }
    let (sets, original) = pruned_wiretap_columns(net);
    let h = net.num_edges();
    // row per wiretap set: −Σ_{e∈I} y_e ≥ −1
    let mut g_mat = RatMatrix::zeros(sets.len(), h);
    for (r, set) in sets.iter().enumerate() {
        for &e in set {
            g_mat.set(r, e, crate::rational::rat(-1));
        }
    }
    let rhs = vec![crate::rational::rat(-1); sets.len()];
    let cost = vec![crate::rational::rat(1); h];
    let vertex = lp::optimize(&g_mat, &rhs, &cost, Sense::Maximize)
        .ok_or_else(|| CodeError::Malformed("dual program infeasible".into()))?;
    debug_assert_eq!(Some(&vertex.value), report.l_c.finite(), "strong duality");
    let y_star = vertex.point;
    let g_big = lcm_of_denominators(&y_star);
    let g = to_usize(&g_big, "key length")?;
    let w = y_star
        .iter()
        .map(|y| {
            to_usize(
                &(y * BigRational::from_integer(g_big.clone())).to_integer(),
                "rate",
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total: usize = w.iter().sum();
    let w_total = total - g;
    let w_max = w.iter().copied().max().unwrap_or(0);
    let (tight_pos, tight_set) = sets
        .iter()
        .enumerate()
        .find(|(_, s)| s.iter().map(|&e| w[e]).sum::<usize>() == g)
        .ok_or_else(|| CodeError::Malformed("no tight wiretap set at the optimum".into()))?;
    Ok(RateProfile {
        y_star,
        g,
        w,
        w_total,
        w_max,
        tight_set: tight_set.clone(),
        tight_index: original[tight_pos],
    })
}

/// A linear secure code. Per-edge vectors are aligned with `edge_order`:
/// message-bearing edges first (ascending network order), then the tight set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub q: u64,
    pub g: usize,
    pub w: Vec<usize>,
    pub edge_order: Vec<String>,
    pub tight_set: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<FieldMatrix>,
}

impl CodeSpec {
    pub fn from_json(s: &str) -> Result<Self, CodeError> {
        let code: CodeSpec =
            serde_json::from_str(s).map_err(|e| CodeError::Malformed(e.to_string()))?;
        code.check_shape()?;
        Ok(code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("code serializes")
    }

    pub fn w_total(&self) -> usize {
        (self.w.iter().sum::<usize>()).saturating_sub(self.g)
    }

    pub fn w_max(&self) -> usize {
        self.w.iter().copied().max().unwrap_or(0)
    }

    /// Positions in `edge_order` of edges outside the tight set.
    pub fn message_positions(&self) -> Vec<usize> {
        (0..self.edge_order.len())
            .filter(|&i| !self.tight_set.contains(&self.edge_order[i]))
            .collect()
    }

    pub fn tight_positions(&self) -> Vec<usize> {
        (0..self.edge_order.len())
            .filter(|&i| self.tight_set.contains(&self.edge_order[i]))
            .collect()
    }

    pub fn position(&self, edge: &str) -> Option<usize> {
        self.edge_order.iter().position(|e| e == edge)
    }

    fn check_shape(&self) -> Result<(), CodeError> {
        let h = self.edge_order.len();
        for (what, len) in [("w", self.w.len()), ("B", self.b.len())] {
            if len != h {
                return Err(CodeError::DimensionMismatch {
                    what: what.into(),
                    expected: h,
                    found: len,
                });
            }
        }
        if !is_prime(self.q) {
            return Err(FieldError::NotPrime(self.q).into());
        }
        for (i, b) in self.b.iter().enumerate() {
            if b.q() != self.q || b.rows() != self.w[i] || b.cols() != self.g {
                return Err(CodeError::Malformed(format!(
                    "B for edge {:?} must be {}x{} over GF({})",
                    self.edge_order[i], self.w[i], self.g, self.q
                )));
            }
        }
        if let Some(e) = self.tight_set.iter().find(|e| self.position(e).is_none()) {
            return Err(CodeError::UnknownEdge(e.clone()));
        }
        let tight = self.tight_positions();
        let key_rows: usize = tight.iter().map(|&i| self.w[i]).sum();
        if key_rows != self.g {
            return Err(CodeError::Malformed(format!(
                "tight set carries {key_rows} key symbols, expected {}",
                self.g
            )));
        }
        Ok(())
    }

    /// Stacked key kernel of the tight set, which should be invertible.
    fn key_kernel(&self) -> FieldMatrix {
        FieldMatrix::vstack(
            self.q,
            self.g,
            self.tight_positions().iter().map(|&i| &self.b[i]),
        )
        .expect("shape checked")
    }
}

/// Builds the code for `rate` over GF(q). Requires `q` prime and larger than
/// the number of (pruned) wiretap sets.
pub fn construct_code(
    net: &WiretapNetwork,
    rate: &RateProfile,
    q: u64,
) -> Result<CodeSpec, CodeError> {
    if !net.is_point_to_point() {
        return Err(CodeError::NotPointToPoint);
    }
    let (sets, _) = pruned_wiretap_columns(net);
    let d = sets.len();
    if !is_prime(q) || q <= d as u64 {
        return Err(CodeError::FieldTooSmall { q, d });
    }
    let h = net.num_edges();
    if rate.w.len() != h {
        return Err(CodeError::DimensionMismatch {
            what: "rates".into(),
            expected: h,
            found: rate.w.len(),
        });
    }
    let g = rate.g;
    let in_tight = |e: usize| rate.tight_set.binary_search(&e).is_ok();
    let message_edges: Vec<usize> = (0..h).filter(|&e| !in_tight(e)).collect();

    let mut kernels: Vec<Option<FieldMatrix>> = vec![None; h];
    let identity = FieldMatrix::identity(q, g);
    let mut offset = 0;
    for &e in &rate.tight_set {
        let mut b = FieldMatrix::zeros(q, 0, g);
        for r in offset..offset + rate.w[e] {
            b.push_row(identity.row(r))?;
        }
        offset += rate.w[e];
        kernels[e] = Some(b);
    }
    if offset != g {
        return Err(CodeError::Malformed(format!(
            "tight set rates sum to {offset}, expected {g}"
        )));
    }

    // wiretap sets other than the tight one, by pruned position
    let others: Vec<&Vec<usize>> = sets.iter().filter(|s| **s != rate.tight_set).collect();
    let stacked = |kernels: &[Option<FieldMatrix>], set: &[usize]| {
        FieldMatrix::vstack(q, g, set.iter().filter_map(|&e| kernels[e].as_ref()))
    };
    for &e in &message_edges {
        let mut bases = Vec::new();
        for set in others.iter().filter(|s| s.binary_search(&e).is_ok()) {
            bases.push(stacked(&kernels, set)?);
        }
        kernels[e] = Some(build_subspace(q, g, rate.w[e], &bases)?);
        for (i, set) in others.iter().enumerate() {
            let t = stacked(&kernels, set)?;
            if t.rank() != t.rows() {
                return Err(CodeError::InductionViolated {
                    edge: net.edge_id(e).to_string(),
                    wiretap: i,
                });
            }
        }
    }

    let order: Vec<usize> = message_edges
        .iter()
        .copied()
        .chain(rate.tight_set.iter().copied())
        .collect();
    let code = CodeSpec {
        q,
        g,
        w: order.iter().map(|&e| rate.w[e]).collect(),
        edge_order: net.edge_ids(&order),
        tight_set: net.edge_ids(&rate.tight_set),
        b: order
            .iter()
            .map(|&e| kernels[e].take().expect("every edge assigned"))
            .collect(),
    };
    code.check_shape()?;
    Ok(code)
}

/// Default field: the smallest prime exceeding the number of pruned wiretap sets.
pub fn default_field_size(net: &WiretapNetwork) -> u64 {
    smallest_prime_above(pruned_wiretap_columns(net).0.len() as u64)
}

fn check_symbols(code: &CodeSpec, what: &str, v: &[u64], len: usize) -> Result<(), CodeError> {
    if v.len() != len {
        return Err(CodeError::DimensionMismatch {
            what: what.into(),
            expected: len,
            found: v.len(),
        });
    }
    if let Some(&x) = v.iter().find(|&&x| x >= code.q) {
        return Err(FieldError::ValueOutOfRange {
            value: x,
            q: code.q,
        }
        .into());
    }
    Ok(())
}

/// Per-edge codewords, aligned with `edge_order` and zero-padded to `w_max`.
pub fn encode(code: &CodeSpec, m: &[u64], k: &[u64]) -> Result<Vec<Vec<u64>>, CodeError> {
    check_symbols(code, "message", m, code.w_total())?;
    check_symbols(code, "key", k, code.g)?;
    let w_max = code.w_max();
    let message_positions = code.message_positions();
    let mut blocks: HashMap<usize, &[u64]> = HashMap::new();
    let mut offset = 0;
    for &i in &message_positions {
        blocks.insert(i, &m[offset..offset + code.w[i]]);
        offset += code.w[i];
    }
    let mut out = Vec::with_capacity(code.edge_order.len());
    for (i, b) in code.b.iter().enumerate() {
        let mut y = b.mul_vec(k)?;
        if let Some(mi) = blocks.get(&i) {
            for (yj, &mj) in y.iter_mut().zip(mi.iter()) {
                *yj = add_mod(*yj, mj, code.q);
            }
        }
        y.resize(w_max, 0);
        out.push(y);
    }
    Ok(out)
}

/// Recovers the message: the key from the tight set, then `m_i = Y_i − B_i K`.
pub fn decode(code: &CodeSpec, y: &[Vec<u64>]) -> Result<Vec<u64>, CodeError> {
    if y.len() != code.edge_order.len() {
        return Err(CodeError::DimensionMismatch {
            what: "codewords".into(),
            expected: code.edge_order.len(),
            found: y.len(),
        });
    }
    let w_max = code.w_max();
    for (i, yi) in y.iter().enumerate() {
        check_symbols(code, "codeword", yi, w_max)?;
        if yi[code.w[i]..].iter().any(|&x| x != 0) {
            return Err(CodeError::InconsistentCodeword(format!(
                "nonzero padding on edge {:?}",
                code.edge_order[i]
            )));
        }
    }
    let key_obs: Vec<u64> = code
        .tight_positions()
        .iter()
        .flat_map(|&i| y[i][..code.w[i]].iter().copied())
        .collect();
    let k = code
        .key_kernel()
        .solve_square(&key_obs)
        .ok_or_else(|| CodeError::Malformed("tight-set key kernel is singular".into()))?;
    let mut m = Vec::with_capacity(code.w_total());
    for i in code.message_positions() {
        let bk = code.b[i].mul_vec(&k)?;
        m.extend(
            y[i][..code.w[i]]
                .iter()
                .zip(bk)
                .map(|(&a, b)| sub_mod(a, b, code.q)),
        );
    }
    Ok(m)
}

/// Rank check of one wiretap set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiretapRank {
    pub wiretap: Vec<String>,
    /// Rows observed: `Σ_{e∈I} w_e`.
    pub rows: usize,
    /// Rank of the stacked key kernel `T_I`.
    pub key_rank: usize,
    /// Rank of the combined generator rows `[A | B]`.
    pub combined_rank: usize,
}

impl WiretapRank {
    pub fn secure(&self) -> bool {
        self.combined_rank == self.rows && self.key_rank == self.rows
    }
}

/// Generator rows `[message part | key part]` observed on `edges`.
fn observed_generator(code: &CodeSpec, positions: &[usize]) -> (FieldMatrix, FieldMatrix) {
    let q = code.q;
    let wt = code.w_total();
    let mut msg_offset = HashMap::new();
    let mut off = 0;
    for i in code.message_positions() {
        msg_offset.insert(i, off);
        off += code.w[i];
    }
    let mut combined = FieldMatrix::zeros(q, 0, wt + code.g);
    let mut key = FieldMatrix::zeros(q, 0, code.g);
    for &i in positions {
        for r in 0..code.w[i] {
            let mut row = vec![0u64; wt + code.g];
            if let Some(&o) = msg_offset.get(&i) {
                row[o + r] = 1;
            }
            row[wt..].copy_from_slice(code.b[i].row(r));
            combined.push_row(&row).expect("width");
            key.push_row(code.b[i].row(r)).expect("width");
        }
    }
    (combined, key)
}

fn positions_of(code: &CodeSpec, wiretap: &[String]) -> Result<Vec<usize>, CodeError> {
    wiretap
        .iter()
        .map(|e| {
            code.position(e)
                .ok_or_else(|| CodeError::UnknownEdge(e.clone()))
        })
        .collect()
}

/// Per-wiretap-set rank data for every wiretap set of `net`.
pub fn security_ranks(
    code: &CodeSpec,
    net: &WiretapNetwork,
) -> Result<Vec<WiretapRank>, CodeError> {
    net.wiretap_sets()
        .iter()
        .map(|set| {
            let ids = net.edge_ids(set);
            let positions = positions_of(code, &ids)?;
            let (combined, key) = observed_generator(code, &positions);
            Ok(WiretapRank {
                wiretap: ids,
                rows: key.rows(),
                key_rank: key.rank(),
                combined_rank: combined.rank(),
            })
        })
        .collect()
}

/// True iff every wiretap set observes a key kernel of full row rank (and the
/// combined generator rows are independent).
pub fn verify_security_rank(code: &CodeSpec, net: &WiretapNetwork) -> Result<bool, CodeError> {
    Ok(security_ranks(code, net)?.iter().all(WiretapRank::secure))
}

/// Result of the exhaustive distribution check for one wiretap set.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `max_m TV(P(Y | m), P(Y))`, exact. Zero iff `Y` and `M` are independent.
    pub distance: BigRational,
    /// `I(Y; M)` in bits for uniform `M`, floating point.
    pub mutual_information_bits: f64,
}

impl OracleResult {
    pub fn independent(&self) -> bool {
        self.distance.is_zero()
    }
}

/// Enumerates all `(m, k)` with `M`, `K` uniform and compares the conditional
/// distributions of the symbols seen on `wiretap`.
pub fn mutual_information_oracle(
    code: &CodeSpec,
    wiretap: &[String],
    limit: u64,
) -> Result<OracleResult, CodeError> {
    let positions = positions_of(code, wiretap)?;
    let (wt, g, q) = (code.w_total(), code.g, code.q);
    let count = (q as u128)
        .checked_pow((wt + g) as u32)
        .unwrap_or(u128::MAX);
    if count > u128::from(limit) {
        return Err(CodeError::InstanceTooLarge { count, limit });
    }
    let (combined, _) = observed_generator(code, &positions);
    let n_m = q.pow(wt as u32);
    let n_k = q.pow(g as u32);
    let mut per_message: Vec<HashMap<Vec<u64>, u64>> = Vec::with_capacity(n_m as usize);
    let mut marginal: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut mk = vec![0u64; wt + g];
    let mut m = vec![0u64; wt];
    loop {
        let mut hist = HashMap::new();
        let mut k = vec![0u64; g];
        loop {
            mk[..wt].copy_from_slice(&m);
            mk[wt..].copy_from_slice(&k);
            let y = combined.mul_vec(&mk)?;
            *marginal.entry(y.clone()).or_insert(0) += 1;
            *hist.entry(y).or_insert(0) += 1;
            if !odometer(&mut k, q) {
                break;
            }
        }
        per_message.push(hist);
        if !odometer(&mut m, q) {
            break;
        }
    }
    // P(y|m) = c_m(y)/n_k, P(y) = c(y)/(n_m n_k); TV scaled by n_m n_k
    let total = BigInt::from(n_m) * BigInt::from(n_k);
    let mut worst = BigInt::zero();
    let mut mi = 0.0f64;
    for hist in &per_message {
        let mut diff = BigInt::zero();
        for (y, &c) in &marginal {
            let cm = hist.get(y).copied().unwrap_or(0);
            let d = BigInt::from(cm) * BigInt::from(n_m) - BigInt::from(c);
            diff += if d < BigInt::zero() { -d } else { d };
            if cm > 0 {
                let p_cond = cm as f64 / n_k as f64;
                let p_y = c as f64 / (n_m as f64 * n_k as f64);
                mi += (p_cond / n_m as f64) * (p_cond / p_y).log2();
            }
        }
        if diff > worst {
            worst = diff;
        }
    }
    Ok(OracleResult {
        distance: BigRational::new(worst, total * BigInt::from(2)),
        mutual_information_bits: mi.max(0.0),
    })
}

fn odometer(v: &mut [u64], q: u64) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < q {
            return true;
        }
        *x = 0;
    }
    false
}
