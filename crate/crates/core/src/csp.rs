//! Constraint satisfaction problems over `n` bits.
//!
//! A clause is stored as an explicit truth table over 1–3 variables, which
//! covers MAX-CUT edges, CNF clauses and the single- and two-bit pattern
//! clauses emitted by the circuit compiler with one representation. Clause
//! lists are multisets: a clause repeated `k` times contributes `k` to the
//! cost.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::bits;
use crate::error::{Error, Result};

/// Default ceiling for exhaustive enumeration over `2^n` strings.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// A 0/1-valued constraint on up to three variables.
///
/// Pattern `p` (an index into the truth table) assigns `vars[i]` the bit `i`
/// of `p`. In text, patterns are written in variable order, so over
/// `vars = [a, j]` the pattern `"01"` means `z_a = 0, z_j = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    vars: Vec<usize>,
    table: u8,
}

impl Clause {
    /// Builds a clause from its variables and the bit mask of satisfying
    /// patterns.
    pub fn new(vars: Vec<usize>, table: u8) -> Result<Self> {
        let k = vars.len();
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidClause(format!("{k} variables, expected 1 to 3")));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidClause(format!("variable {v} repeated")));
            }
        }
        let full = Self::full_mask(k);
        if table == 0 {
            return Err(Error::InvalidClause("no satisfying pattern".into()));
        }
        if table & !full != 0 {
            return Err(Error::InvalidClause(format!("mask {table:#b} too wide for {k} variables")));
        }
        Ok(Clause { vars, table })
    }

    /// Builds a clause from satisfying patterns written in variable order.
    pub fn from_patterns<S: AsRef<str>>(vars: Vec<usize>, patterns: &[S]) -> Result<Self> {
        let k = vars.len();
        let mut table = 0u8;
        for p in patterns {
            let p = p.as_ref();
            if p.len() != k {
                return Err(Error::InvalidClause(format!("pattern {p:?} has {} bits, expected {k}", p.len())));
            }
            let idx = bits::parse(p).map_err(|_| Error::InvalidClause(format!("bad pattern {p:?}")))?;
            table |= 1 << idx;
        }
        Clause::new(vars, table)
    }

    /// The MAX-CUT clause `(z_i - z_j)^2`: satisfied when the endpoints disagree.
    pub fn disagree(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Clause::new(vec![i, j], 0b0110)
    }

    /// `[z_var = value]`.
    pub fn fixed(var: usize, value: bool) -> Self {
        Clause { vars: vec![var], table: if value { 0b10 } else { 0b01 } }
    }

    /// Satisfied by exactly one pattern over `vars`.
    pub fn pattern(vars: Vec<usize>, pattern: &str) -> Result<Self> {
        Clause::from_patterns(vars, &[pattern])
    }

    /// Disjunction of literals `(var, negated)`; duplicate literals merge and
    /// complementary literals give the always-true clause.
    pub fn or(literals: &[(usize, bool)]) -> Result<Self> {
        let mut vars: Vec<usize> = Vec::new();
        let mut falsifying: Vec<Option<bool>> = Vec::new();
        let mut tautology = false;
        for &(v, negated) in literals {
            // the literal is false when z_v == negated
            match vars.iter().position(|&u| u == v) {
                Some(pos) => {
                    if falsifying[pos] != Some(negated) {
                        tautology = true;
                    }
                }
                None => {
                    vars.push(v);
                    falsifying.push(Some(negated));
                }
            }
        }
        let full = Self::full_mask(vars.len());
        if tautology {
            return Clause::new(vars, full);
        }
        let bad = falsifying.iter().enumerate().fold(0usize, |acc, (i, f)| acc | ((f.unwrap_or(false) as usize) << i));
        Clause::new(vars, full & !(1u8 << bad))
    }

    fn full_mask(k: usize) -> u8 {
        ((1u16 << (1 << k)) - 1) as u8
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    /// Bit mask of satisfying patterns.
    pub fn table(&self) -> u8 {
        self.table
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Satisfying patterns as strings in variable order.
    pub fn satisfying_patterns(&self) -> Vec<String> {
        let k = self.arity();
        (0..1u64 << k).filter(|p| self.table >> p & 1 == 1).map(|p| bits::format(p, k)).collect()
    }

    pub fn satisfying_count(&self) -> usize {
        self.table.count_ones() as usize
    }

    /// True for the always-satisfied clause, which is allowed but contributes
    /// a constant to the cost.
    pub fn is_tautology(&self) -> bool {
        self.table == Self::full_mask(self.arity())
    }

    /// Index of the pattern `z` induces on this clause's variables.
    #[inline]
    pub fn pattern_index(&self, z: u64) -> usize {
        self.vars.iter().enumerate().fold(0usize, |acc, (i, &v)| acc | ((bits::bit(z, v) as usize) << i))
    }

    /// `C_a(z)`. Variables outside the clause are ignored.
    #[inline]
    pub fn evaluate(&self, z: u64) -> bool {
        self.table >> self.pattern_index(z) & 1 == 1
    }

    fn max_var(&self) -> usize {
        self.vars.iter().copied().max().unwrap_or(0)
    }
}

/// Evaluates `clause` on `z` after checking its variables fit in `n` bits.
pub fn evaluate_clause(clause: &Clause, z: u64, n: usize) -> Result<u8> {
    if let Some(&v) = clause.vars.iter().find(|&&v| v >= n) {
        return Err(Error::IndexOutOfRange { index: v, len: n });
    }
    if n < 64 && z >> n != 0 {
        return Err(Error::LengthMismatch { expected: n, got: 64 - z.leading_zeros() as usize });
    }
    Ok(clause.evaluate(z) as u8)
}

/// `n` variables and a clause multiset defining `C(z) = sum_a C_a(z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    n: usize,
    clauses: Vec<Clause>,
}

impl CspInstance {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidInstance(format!("{n} variables, expected 1 to 64")));
        }
        if clauses.is_empty() {
            return Err(Error::InvalidInstance("no clauses".into()));
        }
        if let Some(c) = clauses.iter().find(|c| c.max_var() >= n) {
            return Err(Error::IndexOutOfRange { index: c.max_var(), len: n });
        }
        Ok(CspInstance { n, clauses })
    }

    /// One disagree clause per edge.
    pub fn maxcut(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let clauses = edges.iter().map(|&(i, j)| Clause::disagree(i, j)).collect::<Result<Vec<_>>>()?;
        CspInstance::new(n, clauses)
    }

    /// MAX-CUT on the `n`-cycle.
    pub fn ring(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        CspInstance::maxcut(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Clause count with multiplicity.
    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn tautology_count(&self) -> usize {
        self.clauses.iter().filter(|c| c.is_tautology()).count()
    }

    /// `C(z)`; checks that `z` fits in `n` bits.
    pub fn cost(&self, z: u64) -> Result<usize> {
        if self.n < 64 && z >> self.n != 0 {
            return Err(Error::LengthMismatch { expected: self.n, got: 64 - z.leading_zeros() as usize });
        }
        Ok(self.cost_of(z))
    }

    /// `C(z)` without the width check; bits above `n` are ignored.
    #[inline]
    pub fn cost_of(&self, z: u64) -> usize {
        self.clauses.iter().filter(|c| c.evaluate(z)).count()
    }

    /// `C(z)` for every `z < 2^n`.
    pub fn cost_table(&self) -> Result<Vec<u32>> {
        self.check_exhaustive(EXHAUSTIVE_LIMIT)?;
        Ok((0..1u64 << self.n).into_par_iter().map(|z| self.cost_of(z) as u32).collect())
    }

    /// Mean of `C` under the uniform distribution, `sum_a |sat_a| / 2^k_a`.
    pub fn uniform_mean(&self) -> f64 {
        self.clauses.iter().map(|c| c.satisfying_count() as f64 / (1u64 << c.arity()) as f64).sum()
    }

    fn check_exhaustive(&self, limit: usize) -> Result<()> {
        if self.n > limit {
            Err(Error::ExhaustiveLimit { n: self.n, limit })
        } else {
            Ok(())
        }
    }

    /// Exact histogram of `C` by enumerating all strings.
    pub fn brute_force_histogram(&self) -> Result<CostHistogram> {
        self.brute_force_histogram_with_limit(EXHAUSTIVE_LIMIT)
    }

    pub fn brute_force_histogram_with_limit(&self, limit: usize) -> Result<CostHistogram> {
        self.check_exhaustive(limit)?;
        let m = self.m();
        let counts = (0..1u64 << self.n)
            .into_par_iter()
            .fold(
                || vec![0u64; m + 1],
                |mut acc, z| {
                    acc[self.cost_of(z)] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; m + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        CostHistogram::from_counts(self.n, counts)
    }

    /// `C_max`, the largest cost attained.
    pub fn c_max(&self) -> Result<usize> {
        Ok(self.brute_force_histogram()?.max_value())
    }

    /// Number of strings satisfying every clause.
    pub fn count_satisfying(&self) -> Result<u64> {
        Ok(self.brute_force_histogram()?.count(self.m()))
    }

    /// Strings attaining `C_max`.
    pub fn maximizers(&self) -> Result<Vec<u64>> {
        self.check_exhaustive(EXHAUSTIVE_LIMIT)?;
        let table = self.cost_table()?;
        let best = table.iter().copied().max().unwrap_or(0);
        Ok((0..table.len() as u64).filter(|&z| table[z as usize] == best).collect())
    }

    /// Serializes in the line-oriented `csp` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("csp {} {}\n", self.n, self.m());
        for c in &self.clauses {
            let vars: Vec<String> = c.vars.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{} {} {}\n", c.arity(), vars.join(" "), c.satisfying_patterns().join(",")));
        }
        out
    }

    /// Parses the `csp` text format: a `csp <n> <m>` header followed by one
    /// `<k> <v_1..v_k> <pattern,...>` line per clause; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let perr = |message: String| Error::Parse { line, message };
            match header {
                None => {
                    if toks.len() != 3 || toks[0] != "csp" {
                        return Err(perr("expected header `csp <n> <m>`".into()));
                    }
                    let n = toks[1].parse().map_err(|_| perr(format!("bad n {:?}", toks[1])))?;
                    let m = toks[2].parse().map_err(|_| perr(format!("bad m {:?}", toks[2])))?;
                    header = Some((n, m));
                }
                Some((n, _)) => {
                    let k: usize = toks[0].parse().map_err(|_| perr(format!("bad arity {:?}", toks[0])))?;
                    if toks.len() != k + 2 {
                        return Err(perr(format!("expected {} fields, got {}", k + 2, toks.len())));
                    }
                    let vars = toks[1..=k]
                        .iter()
                        .map(|t| t.parse::<usize>().map_err(|_| perr(format!("bad variable {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    if let Some(&v) = vars.iter().find(|&&v| v >= n) {
                        return Err(perr(format!("variable {v} out of range for n={n}")));
                    }
                    let patterns: Vec<&str> = toks[k + 1].split(',').collect();
                    let clause = Clause::from_patterns(vars, &patterns).map_err(|e| perr(e.to_string()))?;
                    clauses.push(clause);
                }
            }
        }
        let (n, m) = header.ok_or(Error::Parse { line: 0, message: "missing header".into() })?;
        if clauses.len() != m {
            return Err(Error::Parse {
                line: 0,
                message: format!("header declares {m} clauses, found {}", clauses.len()),
            });
        }
        CspInstance::new(n, clauses)
    }

    /// Reads DIMACS CNF; each clause becomes an OR truth table.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut declared = 0usize;
        let mut clauses = Vec::new();
        let mut pending: Vec<(usize, bool)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('c') || body.starts_with('%') {
                continue;
            }
            let perr = |message: String| Error::Parse { line, message };
            if body.starts_with('p') {
                let toks: Vec<&str> = body.split_whitespace().collect();
                if toks.len() != 4 || toks[1] != "cnf" {
                    return Err(perr("expected `p cnf <vars> <clauses>`".into()));
                }
                n = Some(toks[2].parse().map_err(|_| perr("bad variable count".into()))?);
                declared = toks[3].parse().map_err(|_| perr("bad clause count".into()))?;
                continue;
            }
            let nv = n.ok_or_else(|| perr("clause before `p cnf` line".into()))?;
            for tok in body.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| perr(format!("bad literal {tok:?}")))?;
                if lit == 0 {
                    if pending.len() > 3 {
                        return Err(perr(format!("clause width {} exceeds 3", pending.len())));
                    }
                    if pending.is_empty() {
                        return Err(perr("empty clause".into()));
                    }
                    clauses.push(Clause::or(&pending).map_err(|e| perr(e.to_string()))?);
                    pending.clear();
                } else {
                    let v = lit.unsigned_abs() as usize - 1;
                    if v >= nv {
                        return Err(perr(format!("literal {lit} out of range")));
                    }
                    pending.push((v, lit < 0));
                }
            }
        }
        if !pending.is_empty() {
            return Err(Error::Parse { line: 0, message: "unterminated clause".into() });
        }
        if clauses.len() != declared {
            return Err(Error::Parse {
                line: 0,
                message: format!("header declares {declared} clauses, found {}", clauses.len()),
            });
        }
        CspInstance::new(n.unwrap_or(0), clauses)
    }
}

impl fmt::Display for CspInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Distribution `p_v` of cost values over all `2^n` strings, stored as exact
/// counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostHistogram {
    n: usize,
    counts: Vec<u64>,
}

impl CostHistogram {
    /// `counts[v]` is the number of strings with cost `v`; must sum to `2^n`.
    pub fn from_counts(n: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidInstance("histogram has no bins".into()));
        }
        let total: u64 = counts.iter().sum();
        if n >= 64 || total != 1u64 << n {
            return Err(Error::InvalidInstance(format!("counts sum to {total}, expected 2^{n}")));
        }
        Ok(CostHistogram { n, counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest representable value, i.e. the clause count.
    pub fn m(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, v: usize) -> u64 {
        self.counts.get(v).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `p_v`.
    pub fn probability(&self, v: usize) -> f64 {
        self.count(v) as f64 / (1u64 << self.n) as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|v| self.probability(v)).collect()
    }

    pub fn max_value(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.probabilities().iter().enumerate().map(|(v, p)| v as f64 * p).sum()
    }
}

/// Random `k`-SAT: `m` clauses on `k` distinct variables with random signs.
pub fn random_ksat<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Result<CspInstance> {
    if k == 0 || k > 3 || k > n {
        return Err(crate::error::invalid("k", format!("{k} not in 1..=min(3, n)")));
    }
    let clauses = (0..m)
        .map(|_| {
            let lits: Vec<(usize, bool)> = sample(rng, n, k).into_iter().map(|v| (v, rng.random_bool(0.5))).collect();
            Clause::or(&lits)
        })
        .collect::<Result<Vec<_>>>()?;
    CspInstance::new(n, clauses)
}

/// Erdős–Rényi MAX-CUT with edge probability `p`; retries until at least one
/// edge exists.
pub fn random_maxcut<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<CspInstance> {
    if n < 2 {
        return Err(crate::error::invalid("n", "MAX-CUT needs at least two vertices"));
    }
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        if !edges.is_empty() {
            return CspInstance::maxcut(n, &edges);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> CspInstance {
        CspInstance::maxcut(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn maxcut_clause_is_disagreement() {
        let c = Clause::disagree(0, 1).unwrap();
        assert_eq!(evaluate_clause(&c, bits::parse("01").unwrap(), 2).unwrap(), 1);
        assert_eq!(evaluate_clause(&c, bits::parse("11").unwrap(), 2).unwrap(), 0);
        assert_eq!(c.satisfying_patterns(), vec!["10", "01"]);
    }

    #[test]
    fn or_clause_falsified_only_by_all_false() {
        let c = Clause::or(&[(0, false), (1, false), (2, false)]).unwrap();
        assert_eq!(evaluate_clause(&c, 0, 3).unwrap(), 0);
        assert_eq!(c.satisfying_count(), 7);
        let neg = Clause::or(&[(0, true), (1, false)]).unwrap();
        // falsified by z_0 = 1, z_1 = 0
        assert!(!neg.evaluate(bits::parse("10").unwrap()));
        assert!(neg.evaluate(bits::parse("00").unwrap()));
        let taut = Clause::or(&[(0, true), (0, false)]).unwrap();
        assert!(taut.is_tautology());
    }

    #[test]
    fn evaluate_rejects_out_of_range_variable() {
        let c = Clause::disagree(0, 5).unwrap();
        assert!(matches!(evaluate_clause(&c, 0, 3), Err(Error::IndexOutOfRange { index: 5, len: 3 })));
    }

    #[test]
    fn clause_validation() {
        assert!(Clause::new(vec![], 1).is_err());
        assert!(Clause::new(vec![0, 0], 1).is_err());
        assert!(Clause::new(vec![0], 0).is_err());
        assert!(Clause::new(vec![0], 0b100).is_err());
        assert!(matches!(Clause::disagree(2, 2), Err(Error::SelfLoop(2))));
        assert!(Clause::from_patterns(vec![0, 1], &["0"]).is_err());
    }

    #[test]
    fn cost_examples() {
        let t = triangle();
        assert_eq!(t.cost(bits::parse("001").unwrap()).unwrap(), 2);
        assert_eq!(t.cost(0).unwrap(), 0);
        assert!(t.cost(8).is_err());
        let dup = CspInstance::new(1, vec![Clause::fixed(0, true); 4]).unwrap();
        assert_eq!(dup.m(), 4);
        assert_eq!(dup.cost(1).unwrap(), 4);
    }

    #[test]
    fn maxcut_examples() {
        assert_eq!(CspInstance::maxcut(2, &[(0, 1)]).unwrap().m(), 1);
        let square = CspInstance::ring(4).unwrap();
        assert_eq!(square.m(), 4);
        assert_eq!(square.c_max().unwrap(), 4);
        assert_eq!(square.count_satisfying().unwrap(), 2);
        assert_eq!(triangle().c_max().unwrap(), 2);
        assert_eq!(triangle().count_satisfying().unwrap(), 0);
        assert!(CspInstance::maxcut(3, &[(1, 1)]).is_err());
        assert!(CspInstance::maxcut(3, &[(1, 3)]).is_err());
    }

    #[test]
    fn histograms() {
        let edge = CspInstance::maxcut(2, &[(0, 1)]).unwrap().brute_force_histogram().unwrap();
        assert_eq!(edge.probabilities(), vec![0.5, 0.5]);
        let tri = triangle().brute_force_histogram().unwrap();
        assert_eq!(tri.counts(), &[2, 0, 6, 0]);
        assert_eq!(tri.mean(), 1.5);
        let contradiction = CspInstance::new(1, vec![Clause::fixed(0, true), Clause::fixed(0, false)]).unwrap();
        let h = contradiction.brute_force_histogram().unwrap();
        assert_eq!(h.probability(2), 0.0);
        let one = CspInstance::new(1, vec![Clause::fixed(0, true)]).unwrap();
        assert_eq!(one.count_satisfying().unwrap(), 1);
    }

    #[test]
    fn exhaustive_limit_enforced() {
        let big = CspInstance::maxcut(30, &[(0, 29)]).unwrap();
        assert!(matches!(big.brute_force_histogram(), Err(Error::ExhaustiveLimit { n: 30, limit: 24 })));
        let small = CspInstance::maxcut(5, &[(0, 4)]).unwrap();
        assert!(small.brute_force_histogram_with_limit(4).is_err());
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let text = "# triangle\ncsp 3 3\n2 0 1 01,10\n2 1 2 01,10 # edge\n2 0 2 10,01\n";
        let inst = CspInstance::parse(text).unwrap();
        assert_eq!(inst, triangle());
        assert_eq!(CspInstance::parse(&inst.to_text()).unwrap(), inst);
        assert!(CspInstance::parse("csp 3 2\n2 0 1 01,10\n").is_err());
        assert!(matches!(CspInstance::parse("csp 2 1\n2 0 5 01\n"), Err(Error::Parse { line: 2, .. })));
        assert!(CspInstance::parse("cnf 2 1\n").is_err());
    }

    #[test]
    fn dimacs_reader() {
        let text = "c example\np cnf 3 2\n1 -2 0\n2 3 -1 0\n";
        let inst = CspInstance::parse_dimacs(text).unwrap();
        assert_eq!(inst.m(), 2);
        // brute-force count: clause1 = x1 or !x2, clause2 = x2 or x3 or !x1
        let expected = (0..8u64)
            .filter(|&z| {
                let x = |i| bits::bit(z, i) == 1;
                (x(0) || !x(1)) && (x(1) || x(2) || !x(0))
            })
            .count() as u64;
        assert_eq!(inst.count_satisfying().unwrap(), expected);
        assert!(CspInstance::parse_dimacs("p cnf 4 1\n1 2 3 4 0\n").is_err());
    }
}
