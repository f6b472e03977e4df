//! Weighted word-level edit distance and the similarity family built on it.
//!
//! The distance Δ(example, query) is the cheapest script of per-token
//! deletions (cost `d`), insertions (cost `a`) and replacements (cost `r`)
//! that rewrites the example into the query; copying an equal token is
//! free. Three cost presets matter in practice:
//!
//! * `LED`  = (1, 1, 1): plain Levenshtein, normalized by the longer length;
//! * `LCS`  = (0, 1, 1): similarity collapses to |lcs| / |query|;
//! * `δ-LCS` = (δ, 1, 1): deletions are nearly free, which favors long
//!   memory sentences that embed the query, at a small per-token rent δ.
//!
//! Costs are exact decimals scaled to integers internally, so two candidate
//! scores are never separated by floating-point noise in the DP itself.

use crate::error::{Error, Result};
use crate::ratio::{lcm, Ratio};
use crate::text::{Sentence, Token};

/// Per-operation costs for [`edit_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditCosts {
    delete: Ratio,
    insert: Ratio,
    replace: Ratio,
    scaled: ScaledCosts,
}

/// Integer view of the costs: every cost multiplied by a common `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledCosts {
    pub delete: u64,
    pub insert: u64,
    pub replace: u64,
    pub scale: u64,
}

/// Caps that keep `cost * sentence_length` comfortably inside `u64`.
const MAX_SCALE: u64 = 1_000_000_000;
const MAX_SCALED_COST: u64 = 1_000_000_000_000;

impl EditCosts {
    /// Builds a cost table. At least one of insert/replace must be positive
    /// (otherwise any sentence rewrites into any other for free and the
    /// normalized similarity is meaningless), and decimal precision is
    /// bounded so the scaled integer arithmetic cannot overflow.
    pub fn new(delete: Ratio, insert: Ratio, replace: Ratio) -> Result<Self> {
        if insert.is_zero() && replace.is_zero() {
            return Err(Error::Config(
                "edit costs: insert and replace cannot both be zero".into(),
            ));
        }
        let scale = lcm(delete.denom(), lcm(insert.denom(), replace.denom()));
        if scale > MAX_SCALE {
            return Err(Error::Config(
                "edit costs: decimal precision too fine for exact arithmetic".into(),
            ));
        }
        let up = |r: Ratio| r.numer() * (scale / r.denom());
        let scaled = ScaledCosts {
            delete: up(delete),
            insert: up(insert),
            replace: up(replace),
            scale,
        };
        if scaled.delete > MAX_SCALED_COST
            || scaled.insert > MAX_SCALED_COST
            || scaled.replace > MAX_SCALED_COST
        {
            return Err(Error::Config("edit costs: cost magnitude too large".into()));
        }
        Ok(EditCosts {
            delete,
            insert,
            replace,
            scaled,
        })
    }

    /// Levenshtein costs (1, 1, 1).
    pub fn led() -> Self {
        Self::new(Ratio::ONE, Ratio::ONE, Ratio::ONE).expect("static costs")
    }

    /// Longest-common-subsequence costs (0, 1, 1).
    pub fn lcs() -> Self {
        Self::new(Ratio::ZERO, Ratio::ONE, Ratio::ONE).expect("static costs")
    }

    /// δ-LCS costs (δ, 1, 1).
    pub fn delta_lcs(delta: Ratio) -> Result<Self> {
        Self::new(delta, Ratio::ONE, Ratio::ONE)
    }

    pub fn delete(&self) -> Ratio {
        self.delete
    }

    pub fn insert(&self) -> Ratio {
        self.insert
    }

    pub fn replace(&self) -> Ratio {
        self.replace
    }

    pub fn scaled(&self) -> ScaledCosts {
        self.scaled
    }

    /// True when insert + delete ≤ replace, the regime where optimal
    /// scripts never replace and the copied tokens form an LCS.
    pub fn indel_dominates(&self) -> bool {
        let s = self.scaled;
        s.insert + s.delete <= s.replace
    }
}

/// Outcome of one weighted edit-distance computation.
#[derive(Debug, Clone, PartialEq)]
pub struct EditResult {
    /// Minimal total edit cost, exact.
    pub delta: Ratio,
    /// Normalizing cost `N` (the price of rewriting with zero copies),
    /// exact; reported as 1 when both sentences are empty.
    pub normalizer: Ratio,
    /// `1 − delta / normalizer`, in `[0, 1]`.
    pub similarity: f64,
    /// Copied tokens along one optimal script. Ties between optimal
    /// scripts are broken toward fewest insert/delete operations, then
    /// most copies. With costs (0, 1, 1) this is exactly the LCS length;
    /// under unit costs it brackets the distance via
    /// `(min − ecs) + gap ≤ Δ ≤ 2·(min − ecs) + gap`, with equality on
    /// the left whenever some optimal script spends indels only on the
    /// length gap (not guaranteed: scripts may trade a replacement for an
    /// extra delete/insert pair to free up more copies).
    pub ecs_length: usize,
    delta_scaled: u64,
    normalizer_scaled: u64,
    scale: u64,
}

impl EditResult {
    /// Exact integer view `(delta, normalizer, scale)` with
    /// `delta = delta_scaled / scale` etc. Lets callers do exact checks.
    pub fn scaled_parts(&self) -> (u64, u64, u64) {
        (self.delta_scaled, self.normalizer_scaled, self.scale)
    }
}

/// Normalizer `N(|x̃|, |x|)`: the cost of a zero-copy rewrite, scaled.
///
/// * insert + delete ≤ replace: delete everything, insert everything.
/// * otherwise: replace the overlap pairwise and pay the length gap.
///
/// The replace-branch values `(r − d)·n + d·m` and `(r − a)·m + a·n` are
/// computed as `r·n + d·(m − n)` and `r·m + a·(n − m)`: same numbers, but
/// the length difference is the only subtraction, so cost tables with
/// `d > r` or `a > r` cannot underflow the unsigned arithmetic.
pub(crate) fn normalizer_scaled(example_len: usize, query_len: usize, sc: &ScaledCosts) -> u64 {
    let (m, n) = (example_len as u64, query_len as u64);
    if sc.insert + sc.delete <= sc.replace {
        sc.insert * n + sc.delete * m
    } else if n <= m {
        sc.replace * n + sc.delete * (m - n)
    } else {
        sc.replace * m + sc.insert * (n - m)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Cell {
    cost: u64,
    indels: u32,
    copies: u32,
}

impl Cell {
    const START: Cell = Cell {
        cost: 0,
        indels: 0,
        copies: 0,
    };

    /// Lexicographic preference: cheaper, then fewer indels, then more
    /// copies. All three measures are additive along a script, so the
    /// tuple order is compatible with dynamic programming.
    fn better_than(&self, other: &Cell) -> bool {
        (self.cost, self.indels, u32::MAX - self.copies)
            < (other.cost, other.indels, u32::MAX - other.copies)
    }
}

/// Full weighted edit distance between an example sentence `x̃` and a query
/// `x`, with exact delta/normalizer and the canonical copy count.
pub fn edit_distance(example: &Sentence, query: &Sentence, costs: &EditCosts) -> EditResult {
    let sc = costs.scaled();
    let xt = example.tokens();
    let x = query.tokens();
    let cell = dp_full(xt, x, &sc);
    finish_result(xt.len(), x.len(), cell.cost, cell.copies as usize, &sc)
}

fn finish_result(
    example_len: usize,
    query_len: usize,
    delta_scaled: u64,
    ecs_length: usize,
    sc: &ScaledCosts,
) -> EditResult {
    let n_scaled = normalizer_scaled(example_len, query_len, sc);
    let both_empty = example_len == 0 && query_len == 0;
    let one_empty = !both_empty && (example_len == 0 || query_len == 0);
    // Both-empty is defined as a perfect match with the normalizer treated
    // as 1; everywhere else the exact formula value is reported.
    let (normalizer, normalizer_scaled) = if both_empty {
        (Ratio::ONE, sc.scale)
    } else {
        (Ratio::new(n_scaled, sc.scale), n_scaled)
    };
    let similarity = if both_empty {
        1.0
    } else if one_empty {
        // An empty side shares nothing with a non-empty one; pinned to 0
        // even for cost tables whose normalizer formula degenerates to 0.
        0.0
    } else if n_scaled == 0 {
        // Normalizer 0 with both sides non-empty means every edit was
        // free, so the distance is 0 too.
        1.0
    } else {
        (n_scaled - delta_scaled) as f64 / n_scaled as f64
    };
    EditResult {
        delta: Ratio::new(delta_scaled, sc.scale),
        normalizer,
        similarity,
        ecs_length,
        delta_scaled,
        normalizer_scaled,
        scale: sc.scale,
    }
}

fn dp_full(xt: &[Token], x: &[Token], sc: &ScaledCosts) -> Cell {
    let n = x.len();
    let mut prev: Vec<Cell> = Vec::with_capacity(n + 1);
    prev.push(Cell::START);
    for j in 1..=n {
        prev.push(Cell {
            cost: sc.insert * j as u64,
            indels: j as u32,
            copies: 0,
        });
    }
    let mut cur = prev.clone();
    for (i, &ti) in xt.iter().enumerate() {
        cur[0] = Cell {
            cost: sc.delete * (i as u64 + 1),
            indels: i as u32 + 1,
            copies: 0,
        };
        for j in 1..=n {
            let mut best = Cell {
                cost: prev[j].cost + sc.delete,
                indels: prev[j].indels + 1,
                copies: prev[j].copies,
            };
            let ins = Cell {
                cost: cur[j - 1].cost + sc.insert,
                indels: cur[j - 1].indels + 1,
                copies: cur[j - 1].copies,
            };
            if ins.better_than(&best) {
                best = ins;
            }
            let diag = &prev[j - 1];
            let sub = if ti == x[j - 1] {
                Cell {
                    cost: diag.cost,
                    indels: diag.indels,
                    copies: diag.copies + 1,
                }
            } else {
                Cell {
                    cost: diag.cost + sc.replace,
                    indels: diag.indels,
                    copies: diag.copies,
                }
            };
            if sub.better_than(&best) {
                best = sub;
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Delta-only DP on raw token slices; the ranking hot path. Produces the
/// identical scaled delta as [`edit_distance`], without tie tracking.
pub(crate) fn dp_delta_scaled(
    xt: &[Token],
    x: &[Token],
    sc: &ScaledCosts,
    prev: &mut Vec<u64>,
    cur: &mut Vec<u64>,
) -> u64 {
    let n = x.len();
    prev.clear();
    prev.extend((0..=n as u64).map(|j| sc.insert * j));
    cur.clear();
    cur.resize(n + 1, 0);
    for (i, &ti) in xt.iter().enumerate() {
        cur[0] = sc.delete * (i as u64 + 1);
        for j in 1..=n {
            let del = prev[j] + sc.delete;
            let ins = cur[j - 1] + sc.insert;
            let sub = prev[j - 1] + if ti == x[j - 1] { 0 } else { sc.replace };
            cur[j] = del.min(ins).min(sub);
        }
        std::mem::swap(prev, cur);
    }
    prev[n]
}

/// Similarity under given costs, computed through the fast delta-only DP;
/// bit-identical to `edit_distance(..).similarity`.
pub(crate) fn similarity_scaled(delta_scaled: u64, n_scaled: u64) -> f64 {
    if n_scaled == 0 {
        // Degenerate normalizer: see `finish_result`.
        return 1.0;
    }
    (n_scaled - delta_scaled) as f64 / n_scaled as f64
}

/// Word-level longest common subsequence length.
pub fn lcs_length(a: &Sentence, b: &Sentence) -> usize {
    let (xa, xb) = (a.tokens(), b.tokens());
    if xa.is_empty() || xb.is_empty() {
        return 0;
    }
    let mut prev = vec![0u32; xb.len() + 1];
    let mut cur = vec![0u32; xb.len() + 1];
    for &ta in xa {
        for (j, &tb) in xb.iter().enumerate() {
            cur[j + 1] = if ta == tb {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[xb.len()] as usize
}

/// Levenshtein similarity `1 − Δ(a, b) / max(|a|, |b|)`, the measure used
/// for contrastive penalties and similarity-graph edges.
pub fn led_similarity(a: &Sentence, b: &Sentence) -> f64 {
    let (delta, max_len) = led_delta(a, b);
    if max_len == 0 {
        return 1.0;
    }
    (max_len - delta) as f64 / max_len as f64
}

/// Unit-cost delta plus `max(|a|, |b|)`; exact integer form of
/// [`led_similarity`] for threshold comparisons without rounding.
pub(crate) fn led_delta(a: &Sentence, b: &Sentence) -> (u64, u64) {
    let sc = ScaledCosts {
        delete: 1,
        insert: 1,
        replace: 1,
        scale: 1,
    };
    let mut prev = Vec::new();
    let mut cur = Vec::new();
    let delta = dp_delta_scaled(a.tokens(), b.tokens(), &sc, &mut prev, &mut cur);
    (delta, a.len().max(b.len()) as u64)
}
