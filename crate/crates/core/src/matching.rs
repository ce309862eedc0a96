//! Maximum-weight bipartite matching between agents (rows) and items or
//! bundles (columns), with absent edges kept symbolic rather than encoded as
//! large negative numbers.

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::scalar::Scalar;

/// Rectangular table of extended-real scores. `NegInfinity` means the edge is
/// absent.
#[derive(Clone, Debug)]
pub struct ScoreTable<T> {
    rows: usize,
    cols: usize,
    scores: Vec<ExtendedReal<T>>,
}

impl<T: Scalar> ScoreTable<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            scores: vec![ExtendedReal::NegInfinity; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExtendedReal<T>) -> Self {
        let mut scores = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                scores.push(f(r, c));
            }
        }
        Self { rows, cols, scores }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> ExtendedReal<T> {
        self.scores[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, score: ExtendedReal<T>) {
        self.scores[row * self.cols + col] = score;
    }

    /// Sum of scores of a matching; `NegInfinity` if any row is unmatched or
    /// uses an absent edge.
    pub fn total(&self, matching: &[Option<usize>]) -> ExtendedReal<T> {
        matching.iter().enumerate().fold(ExtendedReal::Finite(T::zero()), |acc, (r, c)| match c {
            Some(c) => acc + self.get(r, *c),
            None => ExtendedReal::NegInfinity,
        })
    }
}

/// Row → column assignment (`None` = unmatched) with its total score.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<T> {
    pub matching: Vec<Option<usize>>,
    pub total: ExtendedReal<T>,
}

impl<T> Assignment<T> {
    pub fn is_perfect(&self) -> bool {
        self.matching.iter().all(Option::is_some)
    }
}

/// Maximum-score matching covering every row.
///
/// When no finite-score matching covers all rows, returns total
/// `NegInfinity` together with a maximum-cardinality matching over present
/// edges. With `require_all`, more rows than columns is an error.
pub fn solve_assignment<T: Scalar>(table: &ScoreTable<T>, require_all: bool) -> Result<Assignment<T>> {
    let (n, m) = (table.rows, table.cols);
    if require_all && n > m {
        return Err(Error::Infeasible { rows: n, cols: m });
    }
    let present = |r: usize, c: usize| table.get(r, c).is_finite();
    let cardinality = max_cardinality(n, m, present);
    if cardinality.iter().any(Option::is_none) {
        return Ok(Assignment {
            matching: cardinality,
            total: ExtendedReal::NegInfinity,
        });
    }
    let rows_to_cols = hungarian_min(n, m, |r, c| table.get(r, c).finite().map(|s| -s))
        .ok_or_else(|| Error::Internal("augmentation failed despite a perfect matching".into()))?;
    let matching: Vec<Option<usize>> = rows_to_cols.into_iter().map(Some).collect();
    let total = table.total(&matching);
    Ok(Assignment { matching, total })
}

/// Boolean agent × bundle edge set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    rows: usize,
    cols: usize,
    present: Vec<bool>,
}

impl EdgeSet {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, present: vec![false; rows * cols] }
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(usize, usize)]) -> Self {
        let mut e = Self::new(rows, cols);
        for &(r, c) in pairs {
            e.insert(r, c);
        }
        e
    }

    pub fn insert(&mut self, row: usize, col: usize) {
        self.present[row * self.cols + col] = true;
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.present[row * self.cols + col]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn degree(&self, row: usize) -> usize {
        (0..self.cols).filter(|&c| self.contains(row, c)).count()
    }
}

/// Matching in `edges` that (a) matches every column in `must_match`,
/// (b) then maximizes the number of rows matched to `prefer[row]`,
/// (c) then maximizes cardinality.
///
/// The priorities are folded into integer edge weights
/// `A·[col ∈ must_match] + B·[col = prefer(row)] + 1` with `B = n + 1` and
/// `A = (n + 1)(B·n + n + 1)`, so one extra must-match edge outweighs every
/// possible gain in (b) and (c) combined.
pub fn solve_lex_assignment<T: Scalar>(edges: &EdgeSet, must_match: &[bool], prefer: &[Option<usize>]) -> Result<Vec<Option<usize>>> {
    let (n, m) = (edges.rows, edges.cols);
    assert_eq!(must_match.len(), m, "must_match has one flag per column");
    assert_eq!(prefer.len(), n, "prefer has one entry per row");
    let nf = n as u64;
    let b = nf + 1;
    let a = (nf + 1) * (b * nf + nf + 1);
    let weight = |r: usize, c: usize| -> u64 {
        let mut w = 1;
        if must_match[c] {
            w += a;
        }
        if prefer[r] == Some(c) {
            w += b;
        }
        w
    };
    // Column m + r is a zero-weight "unmatched" slot private to row r.
    let rows_to_cols = hungarian_min(n, m + n, |r, c| {
        if c < m {
            edges.contains(r, c).then(|| -T::of(weight(r, c) as f64))
        } else {
            (c - m == r).then(T::zero)
        }
    })
    .ok_or_else(|| Error::Internal("padded matching problem is always feasible".into()))?;
    let matching: Vec<Option<usize>> = rows_to_cols.into_iter().map(|c| (c < m).then_some(c)).collect();
    for (c, &must) in must_match.iter().enumerate() {
        if must && !matching.contains(&Some(c)) {
            return Err(Error::LemmaViolation(format!(
                "trimmed bundle {c} cannot be matched in the feasibility graph"
            )));
        }
    }
    Ok(matching)
}

/// Kuhn's augmenting-path maximum-cardinality matching; rows and columns are
/// scanned in index order.
fn max_cardinality(n: usize, m: usize, present: impl Fn(usize, usize) -> bool) -> Vec<Option<usize>> {
    fn augment(r: usize, m: usize, present: &dyn Fn(usize, usize) -> bool, seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for c in 0..m {
            if present(r, c) && !seen[c] {
                seen[c] = true;
                if col_owner[c].is_none_or(|o| augment(o, m, present, seen, col_owner)) {
                    col_owner[c] = Some(r);
                    return true;
                }
            }
        }
        false
    }
    let mut col_owner = vec![None; m];
    for r in 0..n {
        let mut seen = vec![false; m];
        augment(r, m, &present, &mut seen, &mut col_owner);
    }
    let mut rows = vec![None; n];
    for (c, owner) in col_owner.iter().enumerate() {
        if let Some(r) = owner {
            rows[*r] = Some(c);
        }
    }
    rows
}

/// Shortest-augmenting-path Hungarian method for a rectangular `n × m`
/// minimum-cost assignment (`n ≤ m`) where `cost` returns `None` for absent
/// edges. Returns the column of each row, or `None` if some row cannot be
/// matched.
fn hungarian_min<T: Scalar>(n: usize, m: usize, cost: impl Fn(usize, usize) -> Option<T>) -> Option<Vec<usize>> {
    if n > m {
        return None;
    }
    let inf = T::infinity();
    // 1-based, index 0 is the virtual source column.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                if let Some(c) = cost(i0 - 1, j - 1) {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if delta == inf {
                return None;
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else if minv[j] != inf {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    Some(out)
}
