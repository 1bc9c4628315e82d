//! Command-line frontend. Every command emits one JSON document; exact values
//! are rendered as rational strings.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{
    message_upper_bound, reports_agree, tau_algorithm1, tau_bruteforce, BoundsError, Extended,
    KeyBoundReport, Limits, Tau, DEFAULT_SUBMATRIX_LIMIT,
};
use crate::code::{
    construct_code, decode, default_field_size, derive_rates, encode, mutual_information_oracle,
    security_ranks, CodeError, CodeSpec, DEFAULT_ORACLE_LIMIT,
};
use crate::field::{is_prime, FieldError};
use crate::network::{NetworkError, WiretapNetwork, DEFAULT_CUT_LIMIT};
use crate::rational::{format_rational, to_f64, BigRational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INSECURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;
pub const EXIT_DISAGREEMENT: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "wiretap",
    version,
    about = "Secure network coding bounds and codes for wiretap networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Add decimal approximations next to exact values.
    #[arg(long, global = true)]
    pub approx: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Brute,
    Algo1,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file against the schema and graph invariants.
    Validate { network: PathBuf },
    /// Upper bound on the message entropy in units of log q.
    BoundMessage { network: PathBuf },
    /// Lower bound τ on H(K)/H(M).
    BoundKey {
        network: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Node subsets examined by cut enumeration.
        #[arg(long, default_value_t = DEFAULT_CUT_LIMIT)]
        cap_cuts: u64,
        /// Basic solutions examined by the submatrix route.
        #[arg(long, default_value_t = DEFAULT_SUBMATRIX_LIMIT)]
        cap_submatrices: u128,
    },
    /// Build an optimal code for a point-to-point network.
    Construct {
        network: PathBuf,
        /// Prime field size; defaults to the smallest prime above d.
        #[arg(long)]
        q: Option<u64>,
    },
    /// Encode a message under a key.
    Encode {
        code: PathBuf,
        #[arg(long, value_delimiter = ',')]
        message: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        key: Vec<u64>,
    },
    /// Recover the message from per-edge codewords.
    Decode { code: PathBuf, codewords: PathBuf },
    /// Check a code against every wiretap set of a network.
    Verify {
        code: PathBuf,
        network: PathBuf,
        /// Largest q^(g + w_total) the distribution check enumerates.
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        cap_oracle: u64,
    },
    /// Exhaustive independence check of one wiretap set.
    OracleMi {
        code: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        wiretap: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        cap_oracle: u64,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    report: Option<Value>,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
            report: None,
        }
    }
}

fn network_code(e: &NetworkError) -> i32 {
    match e {
        NetworkError::InstanceTooLarge { .. } => EXIT_TOO_LARGE,
        _ => EXIT_INVALID,
    }
}

impl From<NetworkError> for Failure {
    fn from(e: NetworkError) -> Self {
        Failure::new(network_code(&e), e.to_string())
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        let code = match &e {
            BoundsError::InstanceTooLarge { .. } => EXIT_TOO_LARGE,
            BoundsError::DomainError(_) => EXIT_DEGENERATE,
            BoundsError::Network(n) => network_code(n),
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CodeError> for Failure {
    fn from(e: CodeError) -> Self {
        let code = match &e {
            CodeError::NotPointToPoint
            | CodeError::DegenerateTau(_)
            | CodeError::InductionViolated { .. } => EXIT_DEGENERATE,
            CodeError::InstanceTooLarge { .. } => EXIT_TOO_LARGE,
            CodeError::Bounds(b) => return b.clone().into(),
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        Failure::new(EXIT_INVALID, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<WiretapNetwork, Failure> {
    Ok(WiretapNetwork::from_json(&read(path)?)?)
}

fn load_code(path: &Path) -> Result<CodeSpec, Failure> {
    Ok(CodeSpec::from_json(&read(path)?)?)
}

fn rat_str(r: &BigRational) -> Value {
    Value::String(format_rational(r))
}

fn rat_list(v: &[BigRational]) -> Value {
    Value::Array(v.iter().map(rat_str).collect())
}

fn extended(v: &Extended) -> Value {
    Value::String(v.to_string())
}

fn extended_f64(v: &Extended) -> Value {
    match v {
        Extended::Finite(r) => json!(to_f64(r)),
        Extended::Infinite => json!("inf"),
    }
}

fn tau_f64(t: &Tau) -> Value {
    match t {
        Tau::Finite(r) => json!(to_f64(r)),
        Tau::Unbounded => json!("unbounded"),
    }
}

/// Parses argv-style arguments and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let exit_code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            Outcome {
                exit_code,
                stdout,
                stderr,
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let mut warnings = Vec::new();
    let (exit_code, report, error) = match dispatch(cli, &mut warnings) {
        Ok((code, report)) => (code, Some(report), None),
        Err(f) => (f.code, f.report, Some(f.message)),
    };
    let mut stderr = String::new();
    for w in &warnings {
        stderr.push_str(&format!("warning: {w}\n"));
    }
    if let Some(e) = error {
        stderr.push_str(&format!("error: {e}\n"));
    }
    let mut stdout = String::new();
    if let Some(report) = report {
        let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
        match &cli.output {
            Some(path) => {
                if let Err(e) = fs::write(path, text) {
                    stderr.push_str(&format!("error: {}: {e}\n", path.display()));
                    return Outcome {
                        exit_code: EXIT_INVALID,
                        stdout,
                        stderr,
                    };
                }
            }
            None => stdout = text,
        }
    }
    Outcome {
        exit_code,
        stdout,
        stderr,
    }
}

fn dispatch(cli: &Cli, warnings: &mut Vec<String>) -> Result<(i32, Value), Failure> {
    match &cli.command {
        Command::Validate { network } => {
            let net = load_network(network)?;
            Ok((
                EXIT_OK,
                json!({
                    "valid": true,
                    "nodes": net.num_nodes(),
                    "edges": net.num_edges(),
                    "users": net.users().len(),
                    "wiretap_sets": net.wiretap_sets().len(),
                    "point_to_point": net.is_point_to_point(),
                }),
            ))
        }
        Command::BoundMessage { network } => {
            let net = load_network(network)?;
            let rep = message_upper_bound(&net);
            if rep.bound_logq == 0 {
                warnings
                    .push("message bound is 0: the source cannot send any message securely".into());
            }
            let per: Vec<Value> = rep
                .per_wiretap
                .iter()
                .map(|r| {
                    json!({
                        "wiretap": net.edge_ids(&net.wiretap_sets()[r.wiretap]),
                        "residual_mincut": r.residual_mincut,
                        "user": r.user,
                    })
                })
                .collect();
            Ok((
                EXIT_OK,
                json!({
                    "message_bound_logq": rep.bound_logq,
                    "witness_wiretap": rep.witness_wiretap.map(|i| net.edge_ids(&net.wiretap_sets()[i])),
                    "per_wiretap": per,
                    "statement": format!("H(M) <= {} log q", rep.bound_logq),
                }),
            ))
        }
        Command::BoundKey {
            network,
            method,
            cap_cuts,
            cap_submatrices,
        } => bound_key(cli, network, *method, *cap_cuts, *cap_submatrices),
        Command::Construct { network, q } => {
            let net = load_network(network)?;
            let rate = derive_rates(&net)?;
            let q = match q {
                Some(q) => {
                    if !is_prime(*q) {
                        return Err(FieldError::NotPrime(*q).into());
                    }
                    *q
                }
                None => default_field_size(&net),
            };
            let code = construct_code(&net, &rate, q)?;
            Ok((
                EXIT_OK,
                serde_json::to_value(&code).expect("code serializes"),
            ))
        }
        Command::Encode { code, message, key } => {
            let code = load_code(code)?;
            let y = encode(&code, message, key)?;
            Ok((EXIT_OK, json!(y)))
        }
        Command::Decode { code, codewords } => {
            let code = load_code(code)?;
            let y: Vec<Vec<u64>> = serde_json::from_str(&read(codewords)?)
                .map_err(|e| Failure::new(EXIT_INVALID, format!("invalid codeword JSON: {e}")))?;
            Ok((EXIT_OK, json!(decode(&code, &y)?)))
        }
        Command::Verify {
            code,
            network,
            cap_oracle,
        } => verify(cli, code, network, *cap_oracle),
        Command::OracleMi {
            code,
            wiretap,
            cap_oracle,
        } => {
            let code = load_code(code)?;
            let r = mutual_information_oracle(&code, wiretap, *cap_oracle)?;
            Ok((
                EXIT_OK,
                json!({
                    "wiretap": wiretap,
                    "distance": rat_str(&r.distance),
                    "independent": r.independent(),
                    "mutual_information_bits_approx": r.mutual_information_bits,
                }),
            ))
        }
    }
}

fn key_report(net: &WiretapNetwork, rep: &KeyBoundReport, approx: bool) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tau".into(), Value::String(rep.tau.to_string()));
    m.insert("l_C".into(), extended(&rep.l_c));
    m.insert("l_P".into(), extended(&rep.l_p));
    m.insert(
        "witness_cut".into(),
        json!(net.edge_ids(&rep.witness_blocking_set)),
    );
    m.insert("witness_solution".into(), rat_list(&rep.witness_solution));
    m.insert("solution_kind".into(), json!(rep.solution_kind));
    m.insert("method".into(), json!(rep.method));
    let statement = match &rep.tau {
        Tau::Finite(t) => format!("H(K) >= {t} H(M)"),
        Tau::Unbounded => "H(M) = 0: no message can be sent securely".to_string(),
    };
    m.insert("statement".into(), Value::String(statement));
    if approx {
        m.insert(
            "approx".into(),
            json!({
                "tau": tau_f64(&rep.tau),
                "l_C": extended_f64(&rep.l_c),
                "l_P": extended_f64(&rep.l_p),
            }),
        );
    }
    m
}

fn bound_key(
    cli: &Cli,
    network: &Path,
    method: Option<MethodArg>,
    cap_cuts: u64,
    cap_submatrices: u128,
) -> Result<(i32, Value), Failure> {
    if cap_cuts == 0 || cap_submatrices == 0 {
        return Err(Failure::new(
            EXIT_INVALID,
            "enumeration caps must be positive",
        ));
    }
    let net = load_network(network)?;
    let limits = Limits {
        max_cut_subsets: cap_cuts,
        max_submatrices: cap_submatrices,
    };
    let method = method.unwrap_or_else(|| {
        let subsets = 1u128
            .checked_shl((net.num_nodes() - 1) as u32)
            .unwrap_or(u128::MAX);
        if subsets <= u128::from(cap_cuts) {
            MethodArg::Both
        } else {
            MethodArg::Algo1
        }
    });
    let (primary, cross) = match method {
        MethodArg::Brute => (tau_bruteforce(&net, &limits)?, None),
        MethodArg::Algo1 => (tau_algorithm1(&net, &limits)?, None),
        MethodArg::Both => {
            let brute = tau_bruteforce(&net, &limits)?;
            let algo = tau_algorithm1(&net, &limits)?;
            (brute, Some(algo))
        }
    };
    let mut report = key_report(&net, &primary, cli.approx);
    let mut code = match primary.tau {
        Tau::Unbounded => EXIT_DEGENERATE,
        Tau::Finite(_) => EXIT_OK,
    };
    if let Some(other) = cross {
        let agree = reports_agree(&primary, &other);
        report.insert(
            "cross_check".into(),
            json!({
                "agree": agree,
                "algo1": Value::Object(key_report(&net, &other, cli.approx)),
            }),
        );
        if !agree {
            code = EXIT_DISAGREEMENT;
        }
    }
    if code != EXIT_OK {
        let message = if code == EXIT_DISAGREEMENT {
            "brute force and algo1 disagree"
        } else {
            "τ is unbounded: every cut is covered by a single wiretap set"
        };
        return Err(Failure {
            code,
            message: message.into(),
            report: Some(Value::Object(report)),
        });
    }
    Ok((code, Value::Object(report)))
}

fn verify(
    cli: &Cli,
    code_path: &Path,
    network: &Path,
    cap_oracle: u64,
) -> Result<(i32, Value), Failure> {
    let code = load_code(code_path)?;
    let net = load_network(network)?;
    let ranks = security_ranks(&code, &net)?;
    let mut entries = Vec::new();
    let mut rank_secure = true;
    let mut oracle_secure = Some(true);
    for r in &ranks {
        let mut entry = Map::new();
        entry.insert("wiretap".into(), json!(r.wiretap));
        entry.insert("rows".into(), json!(r.rows));
        entry.insert("key_rank".into(), json!(r.key_rank));
        entry.insert("combined_rank".into(), json!(r.combined_rank));
        entry.insert("rank_secure".into(), json!(r.secure()));
        rank_secure &= r.secure();
        match mutual_information_oracle(&code, &r.wiretap, cap_oracle) {
            Ok(o) => {
                entry.insert("oracle_distance".into(), rat_str(&o.distance));
                if cli.approx {
                    entry.insert(
                        "mutual_information_bits_approx".into(),
                        json!(o.mutual_information_bits),
                    );
                }
                if let Some(s) = oracle_secure.as_mut() {
                    *s &= o.independent();
                }
            }
            Err(CodeError::InstanceTooLarge { .. }) => {
                entry.insert("oracle_distance".into(), Value::Null);
                oracle_secure = None;
            }
            Err(e) => return Err(e.into()),
        }
        entries.push(Value::Object(entry));
    }
    let report = json!({
        "secure": rank_secure,
        "rank_check": rank_secure,
        "oracle_check": oracle_secure,
        "wiretap_sets": entries,
    });
    if oracle_secure.is_some_and(|o| o != rank_secure) {
        return Err(Failure {
            code: EXIT_DISAGREEMENT,
            message: "rank check and distribution oracle disagree".into(),
            report: Some(report),
        });
    }
    if !rank_secure {
        return Err(Failure {
            code: EXIT_INSECURE,
            message: "code leaks information to a wiretap set".into(),
            report: Some(report),
        });
    }
    Ok((EXIT_OK, report))
}
