//! Numerical predicates: relations on word positions that depend only on the
//! length of the word, never on its letters.
//!
//! A predicate is *uniform* when every length sees a truncation of one fixed
//! relation on ℕ. Binary uniform predicates of finite degree additionally carry
//! a neighbour oracle listing, for a position `k`, every `j` related to `k` in
//! either direction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

pub type Membership = Arc<dyn Fn(&[usize], usize) -> bool + Send + Sync>;
pub type NeighborOracle = Arc<dyn Fn(usize) -> Vec<usize> + Send + Sync>;

#[derive(Debug, Error)]
pub enum PredicateError {
    #[error("unknown predicate `{0}`")]
    Unknown(String),
    #[error("invalid parameter for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("predicate `{0}` has no neighbour oracle (not a uniform finite-degree predicate)")]
    NoOracle(String),
    #[error("predicate `{0}` is not binary")]
    NotBinary(String),
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("predicate `{0}` appears twice in the signature")]
    Duplicate(String),
}

/// Truth of a binary predicate that only looks at how its two arguments
/// compare, indexed by `x < y`, `x = y`, `x > y`.
pub type OrderRule = [bool; 3];

/// An evaluable numerical predicate.
#[derive(Clone)]
pub struct Predicate {
    name: String,
    arity: usize,
    uniform: bool,
    membership: Membership,
    neighbors: Option<NeighborOracle>,
    order_rule: Option<OrderRule>,
    monotone_reach: bool,
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Predicate")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("uniform", &self.uniform)
            .field("oracle", &self.neighbors.is_some())
            .finish()
    }
}

impl Predicate {
    /// A uniform predicate of the given arity.
    pub fn uniform(
        name: impl Into<String>,
        arity: usize,
        f: impl Fn(&[usize]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Predicate {
            name: name.into(),
            arity,
            uniform: true,
            membership: Arc::new(move |args, _| f(args)),
            neighbors: None,
            order_rule: None,
            monotone_reach: false,
        }
    }

    /// A length-indexed predicate: `f(args, n)` decides membership in `P_n`.
    pub fn length_indexed(
        name: impl Into<String>,
        arity: usize,
        f: impl Fn(&[usize], usize) -> bool + Send + Sync + 'static,
    ) -> Self {
        Predicate {
            name: name.into(),
            arity,
            uniform: false,
            membership: Arc::new(f),
            neighbors: None,
            order_rule: None,
            monotone_reach: false,
        }
    }

    pub fn binary(
        name: impl Into<String>,
        f: impl Fn(usize, usize) -> bool + Send + Sync + 'static,
    ) -> Self {
        Predicate::uniform(name, 2, move |a| f(a[0], a[1]))
    }

    /// Attaches a neighbour oracle. The oracle's output is sorted and
    /// deduplicated on every call.
    pub fn with_neighbors(mut self, oracle: impl Fn(usize) -> Vec<usize> + Send + Sync + 'static) -> Self {
        self.neighbors = Some(Arc::new(move |k| {
            let mut out = oracle(k);
            out.sort_unstable();
            out.dedup();
            out
        }));
        self
    }

    pub fn with_order_rule(mut self, rule: OrderRule) -> Self {
        self.order_rule = Some(rule);
        self
    }

    /// Declares that the largest neighbour of `k` (or `k` itself) never
    /// decreases as `k` grows, which lets neighbourhood computations skip a
    /// prefix maximum.
    pub fn with_monotone_reach(mut self) -> Self {
        self.monotone_reach = true;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn has_oracle(&self) -> bool {
        self.neighbors.is_some()
    }

    pub fn order_rule(&self) -> Option<OrderRule> {
        self.order_rule
    }

    pub fn has_monotone_reach(&self) -> bool {
        self.monotone_reach
    }

    /// Membership of `args` in `P_n`.
    pub fn holds(&self, args: &[usize], n: usize) -> bool {
        debug_assert_eq!(args.len(), self.arity, "arity mismatch for {}", self.name);
        (self.membership)(args, n)
    }

    pub fn holds2(&self, x: usize, y: usize, n: usize) -> bool {
        self.holds(&[x, y], n)
    }

    /// All `j` with `P(k, j)` or `P(j, k)`, sorted.
    pub fn neighbors(&self, k: usize) -> Result<Vec<usize>, PredicateError> {
        match &self.neighbors {
            Some(oracle) => Ok(oracle(k)),
            None => Err(PredicateError::NoOracle(self.name.clone())),
        }
    }

    pub fn degree(&self, k: usize) -> Result<usize, PredicateError> {
        if self.arity != 2 {
            return Err(PredicateError::NotBinary(self.name.clone()));
        }
        self.neighbors(k).map(|n| n.len())
    }

    /// `max({k} ∪ neighbours(k))`.
    pub fn reach(&self, k: usize) -> Result<usize, PredicateError> {
        Ok(self.neighbors(k)?.last().copied().unwrap_or(k).max(k))
    }
}

fn floor_log2(x: usize) -> u32 {
    usize::BITS - 1 - x.leading_zeros()
}

pub fn msb0(x: usize) -> Option<usize> {
    (x > 0).then(|| x - (1 << floor_log2(x)))
}

pub fn msb10(x: usize) -> Option<usize> {
    if x == 0 {
        return None;
    }
    x.checked_add(1 << floor_log2(x))
}

pub fn msb11(x: usize) -> Option<usize> {
    if x == 0 {
        return None;
    }
    let i = floor_log2(x) + 1;
    if i >= usize::BITS {
        return None;
    }
    x.checked_add(1 << i)
}

/// Preimage of `msb10`: the top two bits of `y` are `10`.
fn msb10_inverse(y: usize) -> Option<usize> {
    if y < 2 {
        return None;
    }
    let i = floor_log2(y) - 1;
    (y >> i == 0b10).then(|| y - (1 << i))
}

/// Preimage of `msb11`: the top two bits of `y` are `11`.
fn msb11_inverse(y: usize) -> Option<usize> {
    if y < 3 {
        return None;
    }
    let i = floor_log2(y) - 1;
    (y >> i == 0b11).then(|| y - (1 << (i + 1)))
}

fn bit(x: usize, y: usize) -> bool {
    y < usize::BITS as usize && (x >> y) & 1 == 1
}

fn tbit(x: usize, y: usize) -> bool {
    y >= x && bit(x, y - x)
}

fn integer_root(x: usize, k: u32) -> Option<usize> {
    if k == 1 {
        return Some(x);
    }
    let guess = (x as f64).powf(1.0 / k as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|r| r.checked_pow(k) == Some(x))
}

pub fn is_power_of_two(x: usize) -> bool {
    x.is_power_of_two()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A pseudorandom uniform binary relation: each pair is in with probability
/// `density`, decided by a hash of `(seed, x, y)`.
pub fn random_relation(name: impl Into<String>, seed: u64, density: f64) -> Predicate {
    let threshold = (density.clamp(0.0, 1.0) * (u64::MAX as f64)) as u64;
    let full = density >= 1.0;
    Predicate::binary(name, move |x, y| {
        let h = splitmix64(splitmix64(splitmix64(seed) ^ x as u64) ^ (y as u64).rotate_left(32));
        full || h < threshold
    })
}

/// Diagonal encoding of a monadic predicate: `{(x, x) | x ∈ q}`.
pub fn encode_monadic(
    name: impl Into<String>,
    q: impl Fn(usize) -> bool + Send + Sync + 'static,
) -> Predicate {
    let q = Arc::new(q);
    let q2 = q.clone();
    Predicate::binary(name, move |x, y| x == y && q(x))
        .with_neighbors(move |k| if q2(k) { vec![k] } else { vec![] })
        .with_monotone_reach()
}

/// A uniform binary predicate given by an explicit finite list of pairs.
pub fn from_pairs(name: impl Into<String>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Predicate {
    let set: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(x, y) in &set {
        adj.entry(x).or_default().push(y);
        adj.entry(y).or_default().push(x);
    }
    let set = Arc::new(set);
    let adj = Arc::new(adj);
    Predicate::binary(name, move |x, y| set.contains(&(x, y)))
        .with_neighbors(move |k| adj.get(&k).cloned().unwrap_or_default())
}

fn read(path: &str) -> Result<String, PredicateError> {
    std::fs::read_to_string(Path::new(path)).map_err(|source| PredicateError::Io {
        path: path.to_string(),
        source,
    })
}

fn parse_numbers(path: &str, text: &str, per_line: usize) -> Result<Vec<Vec<usize>>, PredicateError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: String| PredicateError::Malformed {
            path: path.to_string(),
            line: idx + 1,
            reason,
        };
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| malformed(format!("`{t}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() != per_line {
            return Err(malformed(format!("expected {per_line} number(s), found {}", nums.len())));
        }
        rows.push(nums);
    }
    Ok(rows)
}

/// Reads a relation file: one `x y` pair of decimals per line. Blank lines
/// and `#` comments are ignored; repeated pairs are harmless.
pub fn from_relation_file(name: impl Into<String>, path: &str) -> Result<Predicate, PredicateError> {
    let rows = parse_numbers(path, &read(path)?, 2)?;
    Ok(from_pairs(name, rows.into_iter().map(|r| (r[0], r[1]))))
}

/// Reads a set file (one natural per line) and encodes it on the diagonal.
pub fn from_set_file(name: impl Into<String>, path: &str) -> Result<Predicate, PredicateError> {
    let rows = parse_numbers(path, &read(path)?, 1)?;
    let set: BTreeSet<usize> = rows.into_iter().map(|r| r[0]).collect();
    Ok(encode_monadic(name, move |x| set.contains(&x)))
}

fn parse_param<T: std::str::FromStr>(id: &str, raw: &str) -> Result<T, PredicateError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e: T::Err| PredicateError::InvalidParameter {
        name: id.to_string(),
        reason: format!("`{raw}`: {e}"),
    })
}

fn positive(id: &str, raw: &str) -> Result<usize, PredicateError> {
    let k: usize = parse_param(id, raw)?;
    if k == 0 {
        return Err(PredicateError::InvalidParameter {
            name: id.to_string(),
            reason: "k must be at least 1".into(),
        });
    }
    Ok(k)
}

/// Builds a catalogue predicate from its identifier, e.g. `less`,
/// `linmul:2`, `rand:7:0.3` or `rel:edges.txt`. The predicate is named by the
/// full identifier so formulas can refer to it verbatim.
///
/// A neighbour too large for `usize` is reported as `usize::MAX`, so that
/// neighbourhood computations hit their budget instead of silently losing
/// the edge.
pub fn builtin(id: &str) -> Result<Predicate, PredicateError> {
    let (head, rest) = match id.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (id, None),
    };
    let no_params = |p: Predicate| match rest {
        None => Ok(p),
        Some(_) => Err(PredicateError::InvalidParameter {
            name: id.to_string(),
            reason: "takes no parameters".into(),
        }),
    };
    let need = |what: &str| {
        rest.ok_or_else(|| PredicateError::InvalidParameter {
            name: id.to_string(),
            reason: format!("missing {what}"),
        })
    };
    let p = match head {
        "less" => no_params(
            Predicate::binary(id, |x, y| x < y).with_order_rule([true, false, false]),
        )?,
        "eq" => no_params(
            Predicate::binary(id, |x, y| x == y)
                .with_order_rule([false, true, false])
                .with_neighbors(|k| vec![k])
                .with_monotone_reach(),
        )?,
        "succ" => no_params(
            Predicate::binary(id, |x, y| x.checked_add(1) == Some(y))
                .with_neighbors(|k| {
                    let mut v = vec![k + 1];
                    if k > 0 {
                        v.push(k - 1);
                    }
                    v
                })
                .with_monotone_reach(),
        )?,
        "plus3" => no_params(
            Predicate::binary(id, |x, y| x.checked_add(3) == Some(y))
                .with_neighbors(|k| {
                    let mut v = vec![k + 3];
                    if k >= 3 {
                        v.push(k - 3);
                    }
                    v
                })
                .with_monotone_reach(),
        )?,
        "bit" => no_params(Predicate::binary(id, bit))?,
        "tbit" => no_params(
            Predicate::binary(id, tbit)
                .with_neighbors(|k| {
                    let mut v: Vec<usize> = (0..usize::BITS as usize)
                        .filter(|&b| bit(k, b))
                        .filter_map(|b| k.checked_add(b))
                        .collect();
                    // P(x, k) needs bit k - x of x, so k - x <= log x < 64
                    v.extend((k.saturating_sub(usize::BITS as usize)..=k).filter(|&x| tbit(x, k)));
                    v
                })
                .with_monotone_reach(),
        )?,
        "msb0" => no_params(Predicate::binary(id, |x, y| msb0(x) == Some(y)))?,
        "msb10" => no_params(
            Predicate::binary(id, |x, y| msb10(x) == Some(y))
                .with_neighbors(|k| msb10(k).into_iter().chain(msb10_inverse(k)).collect())
                .with_monotone_reach(),
        )?,
        "msb11" => no_params(
            Predicate::binary(id, |x, y| msb11(x) == Some(y))
                .with_neighbors(|k| msb11(k).into_iter().chain(msb11_inverse(k)).collect())
                .with_monotone_reach(),
        )?,
        "linmul" => {
            let k = positive(id, need("factor k")?)?;
            Predicate::binary(id, move |x, y| x.checked_mul(k) == Some(y))
                .with_neighbors(move |j| {
                    let mut v = vec![j.saturating_mul(k)];
                    if j % k == 0 {
                        v.push(j / k);
                    }
                    v
                })
                .with_monotone_reach()
        }
        "power" => {
            let k = positive(id, need("exponent k")?)?;
            let k = u32::try_from(k).map_err(|_| PredicateError::InvalidParameter {
                name: id.to_string(),
                reason: "exponent too large".into(),
            })?;
            Predicate::binary(id, move |x, y| x.checked_pow(k) == Some(y))
                .with_neighbors(move |j| [j.saturating_pow(k)].into_iter().chain(integer_root(j, k)).collect())
                .with_monotone_reach()
        }
        "pow2diag" => no_params(encode_monadic(id, is_power_of_two))?,
        "diag" => from_set_file(id, need("file")?)?,
        "rel" => from_relation_file(id, need("file")?)?,
        "rand" => {
            let params = need("seed and density")?;
            let (seed, density) = params.split_once(':').ok_or_else(|| PredicateError::InvalidParameter {
                name: id.to_string(),
                reason: "expected rand:<seed>:<density>".into(),
            })?;
            let seed: u64 = parse_param(id, seed)?;
            let density: f64 = parse_param(id, density)?;
            if !(0.0..=1.0).contains(&density) {
                return Err(PredicateError::InvalidParameter {
                    name: id.to_string(),
                    reason: "density must lie in [0, 1]".into(),
                });
            }
            random_relation(id, seed, density)
        }
        "maxsum" => no_params(Predicate::length_indexed(id, 2, |a, n| a[0] + a[1] + 1 == n))?,
        _ => return Err(PredicateError::Unknown(id.to_string())),
    };
    Ok(p)
}

/// Ordered list of predicates with unique names.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    preds: Vec<Predicate>,
}

impl Signature {
    pub fn new(preds: impl IntoIterator<Item = Predicate>) -> Result<Self, PredicateError> {
        let mut sig = Signature::default();
        for p in preds {
            sig.push(p)?;
        }
        Ok(sig)
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    /// Parses catalogue identifiers joined by `+`, e.g. `less+linmul:2`.
    /// The empty string gives the empty signature.
    pub fn parse(spec: &str) -> Result<Self, PredicateError> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(Signature::empty());
        }
        Signature::new(
            spec.split('+')
                .map(|id| builtin(id.trim()))
                .collect::<Result<Vec<_>, _>>()?,
        )
    }

    pub fn push(&mut self, p: Predicate) -> Result<(), PredicateError> {
        if self.get(p.name()).is_some() {
            return Err(PredicateError::Duplicate(p.name().to_string()));
        }
        self.preds.push(p);
        Ok(())
    }

    /// A copy with `p` added unless a predicate of that name is present.
    pub fn with(&self, p: Predicate) -> Self {
        let mut out = self.clone();
        if out.get(p.name()).is_none() {
            out.preds.push(p);
        }
        out
    }

    pub fn get(&self, name: &str) -> Option<&Predicate> {
        self.preds.iter().find(|p| p.name() == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Predicate> {
        self.preds.iter()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.preds.iter().map(Predicate::name).collect()
    }

    /// A copy without the named predicates.
    pub fn without(&self, names: &[&str]) -> Self {
        Signature {
            preds: self.preds.iter().filter(|p| !names.contains(&p.name())).cloned().collect(),
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join("+"))
    }
}
