//! Truncated Fock bases over a block partial order.
//!
//! Modes are `0..num_modes`, stored grouped by block so that the block index
//! is non-decreasing in the mode index. Two modes compare under the partial
//! order iff they live in different blocks; the block index decides which is
//! smaller. Singleton blocks give the usual total order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeOrder {
    block_of: Vec<usize>,
    /// `block_start[b]..block_start[b+1]` are the modes of block `b`.
    block_start: Vec<usize>,
}

impl ModeOrder {
    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be >= 1".into()));
        }
        let total: usize = sizes.iter().sum();
        let mut block_of = Vec::with_capacity(total);
        let mut block_start = Vec::with_capacity(sizes.len() + 1);
        for (b, &size) in sizes.iter().enumerate() {
            block_start.push(block_of.len());
            block_of.extend(std::iter::repeat_n(b, size));
        }
        block_start.push(block_of.len());
        Ok(Self { block_of, block_start })
    }

    /// Total order on `num_modes` modes (every block a singleton).
    pub fn total(num_modes: usize) -> Self {
        Self { block_of: (0..num_modes).collect(), block_start: (0..=num_modes).collect() }
    }

    /// Block order induced by the level degeneracies of `spectrum`,
    /// restricted to the first `mode_cutoff` modes.
    pub fn from_spectrum(spectrum: &Spectrum, mode_cutoff: usize) -> Result<Self> {
        let levels = spectrum.mode_levels(mode_cutoff)?;
        let mut sizes: Vec<usize> = Vec::new();
        let mut current = None;
        for (level, _) in levels {
            if current == Some(level) {
                *sizes.last_mut().unwrap() += 1;
            } else {
                sizes.push(1);
                current = Some(level);
            }
        }
        Self::from_block_sizes(&sizes)
    }

    pub fn num_modes(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_start.len() - 1
    }

    pub fn block(&self, mode: usize) -> usize {
        self.block_of[mode]
    }

    pub fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        self.block_start[block]..self.block_start[block + 1]
    }

    pub fn is_total(&self) -> bool {
        self.num_blocks() == self.num_modes()
    }

    /// `a ≺ b` in the block partial order.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.block_of[a] < self.block_of[b]
    }

    /// Sizes of the blocks restricted to modes `< mode_cutoff`.
    pub fn block_sizes_below(&self, mode_cutoff: usize) -> Vec<usize> {
        (0..self.num_blocks())
            .map(|b| {
                let r = self.block_range(b);
                r.end.min(mode_cutoff).saturating_sub(r.start)
            })
            .take_while(|&s| s > 0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticsKind {
    /// Every sequence of modes (full Fock space, no Gibbs correction).
    FullDistinguishable,
    /// Strictly increasing modes under a total order.
    Monotone,
    /// Non-decreasing modes under a total order.
    WeaklyMonotoneTotal,
    /// Strictly increasing blocks.
    BlockMonotone,
    /// No consecutive pair with a strict block descent.
    BlockWeaklyMonotone,
}

impl StatisticsKind {
    pub const ALL: [StatisticsKind; 5] = [
        StatisticsKind::FullDistinguishable,
        StatisticsKind::Monotone,
        StatisticsKind::WeaklyMonotoneTotal,
        StatisticsKind::BlockMonotone,
        StatisticsKind::BlockWeaklyMonotone,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StatisticsKind::FullDistinguishable => "full",
            StatisticsKind::Monotone => "monotone",
            StatisticsKind::WeaklyMonotoneTotal => "weakly-monotone",
            StatisticsKind::BlockMonotone => "block-monotone",
            StatisticsKind::BlockWeaklyMonotone => "block-weakly-monotone",
        }
    }

    pub fn requires_total_order(&self) -> bool {
        matches!(self, StatisticsKind::Monotone | StatisticsKind::WeaklyMonotoneTotal)
    }

    /// Whether the occupation of the mode sequence is strictly increasing in
    /// the relevant order, which caps the particle number.
    fn is_exclusive(&self) -> bool {
        matches!(self, StatisticsKind::Monotone | StatisticsKind::BlockMonotone)
    }

    fn check_order(&self, order: &ModeOrder) -> Result<()> {
        if self.requires_total_order() && !order.is_total() {
            return Err(Error::KindOrderMismatch { kind: self.name().into() });
        }
        Ok(())
    }

    /// First admissible successor mode after `prev`.
    fn next_start(&self, order: &ModeOrder, prev: usize) -> usize {
        match self {
            StatisticsKind::FullDistinguishable => 0,
            StatisticsKind::Monotone => prev + 1,
            StatisticsKind::WeaklyMonotoneTotal => prev,
            StatisticsKind::BlockMonotone => order.block_range(order.block(prev)).end,
            StatisticsKind::BlockWeaklyMonotone => order.block_range(order.block(prev)).start,
        }
    }
}

impl fmt::Display for StatisticsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown statistics kind '{s}'")))
    }
}

/// An `n`-particle basis vector `e_{k₁}⊗⋯⊗e_{kₙ}`; empty is the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisState(pub Vec<usize>);

impl BasisState {
    pub fn vacuum() -> Self {
        Self(Vec::new())
    }

    pub fn modes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for BasisState {
    fn from(modes: Vec<usize>) -> Self {
        Self(modes)
    }
}

impl fmt::Display for BasisState {
    /// Semicolon-joined mode indices; the vacuum prints as an empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

pub fn admissible(state: &BasisState, kind: StatisticsKind, order: &ModeOrder) -> Result<bool> {
    if let Some(&bad) = state.0.iter().find(|&&m| m >= order.num_modes()) {
        return Err(Error::InvalidArgument(format!(
            "mode {bad} does not exist in an order with {} modes",
            order.num_modes()
        )));
    }
    kind.check_order(order)?;
    Ok(state.0.windows(2).all(|w| w[1] >= kind.next_start(order, w[0])))
}

/// Number of admissible `n`-particle states on modes `< mode_cutoff`,
/// saturating at `u128::MAX`.
pub fn count_states(order: &ModeOrder, kind: StatisticsKind, n_particles: usize, mode_cutoff: usize) -> u128 {
    let sizes: Vec<u128> = match kind {
        StatisticsKind::FullDistinguishable | StatisticsKind::Monotone | StatisticsKind::WeaklyMonotoneTotal => {
            vec![1; mode_cutoff.min(order.num_modes())]
        }
        _ => order.block_sizes_below(mode_cutoff).into_iter().map(|s| s as u128).collect(),
    };
    if kind == StatisticsKind::FullDistinguishable {
        let m = sizes.len() as u128;
        return (0..n_particles).fold(1u128, |acc, _| acc.saturating_mul(m));
    }
    // counts[k] after processing a prefix of blocks: elementary (exclusive
    // kinds) or complete homogeneous symmetric polynomial of the block sizes.
    let mut counts = vec![0u128; n_particles + 1];
    counts[0] = 1;
    for &g in &sizes {
        if kind.is_exclusive() {
            for k in (1..=n_particles).rev() {
                counts[k] = counts[k].saturating_add(counts[k - 1].saturating_mul(g));
            }
        } else {
            for k in 1..=n_particles {
                counts[k] = counts[k].saturating_add(counts[k - 1].saturating_mul(g));
            }
        }
    }
    counts[n_particles]
}

pub(crate) fn check_capacity(
    order: &ModeOrder,
    kind: StatisticsKind,
    n_particles: usize,
    mode_cutoff: usize,
    capacity: u64,
) -> Result<u128> {
    kind.check_order(order)?;
    if mode_cutoff > order.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "mode cutoff {mode_cutoff} exceeds the {} modes of the order",
            order.num_modes()
        )));
    }
    let count = count_states(order, kind, n_particles, mode_cutoff);
    if count > capacity as u128 {
        return Err(Error::Capacity { kind: kind.name().into(), n_particles, mode_cutoff, count, capacity });
    }
    Ok(count)
}

/// Calls `visit` on every admissible `n`-particle state with modes below
/// `mode_cutoff`, in lexicographic order. Fails before visiting anything if
/// the state count exceeds `capacity`.
pub fn for_each_state<F: FnMut(&[usize])>(
    order: &ModeOrder,
    kind: StatisticsKind,
    n_particles: usize,
    mode_cutoff: usize,
    capacity: u64,
    mut visit: F,
) -> Result<u128> {
    let count = check_capacity(order, kind, n_particles, mode_cutoff, capacity)?;
    let mut stack = Vec::with_capacity(n_particles);
    walk(order, kind, n_particles, mode_cutoff, &mut stack, &mut visit);
    Ok(count)
}

fn walk<F: FnMut(&[usize])>(
    order: &ModeOrder,
    kind: StatisticsKind,
    n_particles: usize,
    mode_cutoff: usize,
    stack: &mut Vec<usize>,
    visit: &mut F,
) {
    if stack.len() == n_particles {
        visit(stack);
        return;
    }
    let start = stack.last().map_or(0, |&prev| kind.next_start(order, prev));
    for mode in start..mode_cutoff {
        stack.push(mode);
        walk(order, kind, n_particles, mode_cutoff, stack, visit);
        stack.pop();
    }
}

/// The admissible `n`-particle states below `mode_cutoff`, lexicographic.
pub fn enumerate_basis(
    order: &ModeOrder,
    kind: StatisticsKind,
    n_particles: usize,
    mode_cutoff: usize,
    capacity: u64,
) -> Result<Vec<BasisState>> {
    let count = check_capacity(order, kind, n_particles, mode_cutoff, capacity)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut stack = Vec::with_capacity(n_particles);
    walk(order, kind, n_particles, mode_cutoff, &mut stack, &mut |s: &[usize]| out.push(BasisState(s.to_vec())));
    Ok(out)
}

/// One-particle energies of the modes of an order, checked against a
/// spectrum: every block must sit inside a single level, and blocks must
/// follow the level order.
#[derive(Debug, Clone)]
pub struct AlignedModes {
    energies: Vec<f64>,
}

impl AlignedModes {
    pub fn new(spectrum: &Spectrum, order: &ModeOrder) -> Result<Self> {
        let levels = spectrum.mode_levels(order.num_modes()).map_err(|e| Error::Alignment(e.to_string()))?;
        let mut prev_level = None;
        for b in 0..order.num_blocks() {
            let range = order.block_range(b);
            let level = levels[range.start].0;
            if let Some(m) = range.clone().find(|&m| levels[m].0 != level) {
                return Err(Error::Alignment(format!("block {b} mixes levels {level} and {} (mode {m})", levels[m].0)));
            }
            if prev_level.is_some_and(|p| p > level) {
                return Err(Error::Alignment(format!("block {b} lies below its predecessor")));
            }
            prev_level = Some(level);
        }
        Ok(Self { energies: levels.into_iter().map(|(_, e)| e).collect() })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, state: &BasisState) -> Result<f64> {
        state
            .0
            .iter()
            .map(|&m| {
                self.energies.get(m).copied().ok_or_else(|| Error::InvalidArgument(format!("mode {m} out of range")))
            })
            // An empty f64 sum is −0.0; the vacuum has energy +0.
            .sum::<Result<f64>>()
            .map(|e| e + 0.0)
    }
}

/// `dΓ(H)` eigenvalue of a basis state: the sum of its mode energies.
pub fn state_energy(state: &BasisState, spectrum: &Spectrum, order: &ModeOrder) -> Result<f64> {
    AlignedModes::new(spectrum, order)?.energy(state)
}

/// A 0/1 matrix between two enumerated bases with at most one nonzero entry
/// per column.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub domain: Vec<BasisState>,
    pub codomain: Vec<BasisState>,
    /// Row index of the single unit entry of each column, if any.
    pub targets: Vec<Option<usize>>,
}

impl OperatorMatrix {
    fn build<F: Fn(&BasisState) -> Option<BasisState>>(
        domain: Vec<BasisState>,
        codomain: Vec<BasisState>,
        action: F,
    ) -> Self {
        let index: BTreeMap<&BasisState, usize> = codomain.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let targets = domain.iter().map(|s| action(s).and_then(|t| index.get(&t).copied())).collect();
        Self { domain, codomain, targets }
    }

    pub fn apply(&self, state: &BasisState) -> Option<&BasisState> {
        let col = self.domain.iter().position(|s| s == state)?;
        self.targets[col].map(|r| &self.codomain[r])
    }

    pub fn nnz(&self) -> usize {
        self.targets.iter().flatten().count()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Entries `(row, col)` equal to one.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        self.targets.iter().enumerate().filter_map(|(c, r)| r.map(|r| (r, c))).collect()
    }

    /// A 0/1 matrix with at most one unit per column has operator norm 1
    /// iff no row holds two units (and it is nonzero).
    pub fn operator_norm(&self) -> f64 {
        let mut per_row = vec![0usize; self.codomain.len()];
        for r in self.targets.iter().flatten() {
            per_row[*r] += 1;
        }
        per_row.iter().map(|&c| (c as f64).sqrt()).fold(0.0, f64::max)
    }

    /// `self` equals the transpose of `other` (same bases swapped).
    pub fn is_transpose_of(&self, other: &OperatorMatrix) -> bool {
        if self.domain != other.codomain || self.codomain != other.domain {
            return false;
        }
        let mut mine = self.entries();
        let mut theirs: Vec<_> = other.entries().into_iter().map(|(r, c)| (c, r)).collect();
        mine.sort_unstable();
        theirs.sort_unstable();
        mine == theirs
    }

    fn to_sparse(&self) -> SparseInt {
        let mut m = SparseInt::zeros(self.codomain.len(), self.domain.len());
        for (r, c) in self.entries() {
            m.entries.insert((r, c), 1);
        }
        m
    }
}

fn check_operator_kind(kind: StatisticsKind) -> Result<()> {
    match kind {
        StatisticsKind::Monotone | StatisticsKind::BlockMonotone => Ok(()),
        other => Err(Error::InvalidArgument(format!(
            "creation/annihilation operators are defined for monotone kinds, not {other}"
        ))),
    }
}

/// `a_i†` from the `n`-particle to the `(n+1)`-particle truncated space:
/// `e_α ↦ e_{(i,α)}` when `{i} < α`, else 0; `Ω ↦ e_{(i)}`.
pub fn creation(
    mode: usize,
    n_particles: usize,
    order: &ModeOrder,
    kind: StatisticsKind,
    mode_cutoff: usize,
    capacity: u64,
) -> Result<OperatorMatrix> {
    check_operator_kind(kind)?;
    if mode >= mode_cutoff {
        return Err(Error::InvalidArgument(format!("mode {mode} is not below the cutoff {mode_cutoff}")));
    }
    let domain = enumerate_basis(order, kind, n_particles, mode_cutoff, capacity)?;
    let codomain = enumerate_basis(order, kind, n_particles + 1, mode_cutoff, capacity)?;
    Ok(OperatorMatrix::build(domain, codomain, |s| match s.0.first() {
        Some(&first) if !lies_before(order, kind, mode, first) => None,
        _ => {
            let mut modes = Vec::with_capacity(s.len() + 1);
            modes.push(mode);
            modes.extend_from_slice(&s.0);
            Some(BasisState(modes))
        }
    }))
}

fn lies_before(order: &ModeOrder, kind: StatisticsKind, a: usize, b: usize) -> bool {
    match kind {
        StatisticsKind::Monotone => a < b,
        _ => order.precedes(a, b),
    }
}

/// `a_i` from the `n`-particle to the `(n−1)`-particle truncated space:
/// `e_{(i₁,…,iₖ)} ↦ e_{(i₂,…,iₖ)}` iff `i = i₁`, else 0. `n = 0` gives the
/// zero map onto an empty codomain.
pub fn annihilation(
    mode: usize,
    n_particles: usize,
    order: &ModeOrder,
    kind: StatisticsKind,
    mode_cutoff: usize,
    capacity: u64,
) -> Result<OperatorMatrix> {
    check_operator_kind(kind)?;
    if mode >= mode_cutoff {
        return Err(Error::InvalidArgument(format!("mode {mode} is not below the cutoff {mode_cutoff}")));
    }
    let domain = enumerate_basis(order, kind, n_particles, mode_cutoff, capacity)?;
    let codomain = match n_particles {
        0 => Vec::new(),
        n => enumerate_basis(order, kind, n - 1, mode_cutoff, capacity)?,
    };
    Ok(OperatorMatrix::build(domain, codomain, |s| match s.0.split_first() {
        Some((&first, rest)) if first == mode => Some(BasisState(rest.to_vec())),
        _ => None,
    }))
}

/// Exact integer sparse matrix used to compose operators.
#[derive(Debug, Clone, PartialEq)]
struct SparseInt {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), i64>,
}

impl SparseInt {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: BTreeMap::new() }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries.insert((i, i), 1);
        }
        m
    }

    fn mul(&self, rhs: &SparseInt) -> SparseInt {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut by_row: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
        for (&(r, c), &v) in &rhs.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out = SparseInt::zeros(self.rows, rhs.cols);
        for (&(r, k), &v) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, w) in row {
                    *out.entries.entry((r, c)).or_insert(0) += v * w;
                }
            }
        }
        out
    }

    fn add_scaled(&mut self, rhs: &SparseInt, scale: i64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in sum");
        for (&k, &v) in &rhs.entries {
            *self.entries.entry(k).or_insert(0) += scale * v;
        }
    }

    /// Largest `|entry|` split by whether the column is interior.
    fn max_abs_split(&self, interior: &[bool]) -> (i64, i64) {
        let mut inner = 0;
        let mut boundary = 0;
        for (&(_, c), &v) in &self.entries {
            if interior[c] {
                inner = inner.max(v.abs());
            } else {
                boundary = boundary.max(v.abs());
            }
        }
        (inner, boundary)
    }
}

/// Maximum absolute deviation of one relation family, interior columns
/// (asserted) and boundary columns (reported only).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RelationDeviation {
    pub interior: i64,
    pub boundary: i64,
    pub checked: usize,
}

impl RelationDeviation {
    fn absorb(&mut self, (interior, boundary): (i64, i64)) {
        self.interior = self.interior.max(interior);
        self.boundary = self.boundary.max(boundary);
        self.checked += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub mode_cutoff: usize,
    pub n_max: usize,
    /// `a_i†a_j† = 0` for `i ≥ j`.
    pub creation_pairs: RelationDeviation,
    /// `a_j a_i = 0` for `i ≥ j`.
    pub annihilation_pairs: RelationDeviation,
    /// `a_i a_j† = 0` for `i ≠ j`.
    pub mixed_pairs: RelationDeviation,
    /// `a_i a_i† = 1 − Σ_{k≤i} a_k†a_k`.
    pub commutation: RelationDeviation,
    /// Every `a_i` is the transpose of `a_i†` on the truncated bases.
    pub adjoint_ok: bool,
    /// Every nonzero `a_i†`, `a_i` has operator norm 1.
    pub norms_ok: bool,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.creation_pairs.interior == 0
            && self.annihilation_pairs.interior == 0
            && self.mixed_pairs.interior == 0
            && self.commutation.interior == 0
            && self.adjoint_ok
            && self.norms_ok
    }
}

/// Checks the monotone operator relations on `n = 0..=n_max` particle
/// spaces. Identities are asserted on interior states, whose modes all lie
/// below `mode_cutoff − n_max`.
pub fn verify_relations(
    order: &ModeOrder,
    kind: StatisticsKind,
    mode_cutoff: usize,
    n_max: usize,
    capacity: u64,
) -> Result<RelationReport> {
    if kind != StatisticsKind::Monotone {
        return Err(Error::InvalidArgument(format!("relation checks need the monotone kind, got {kind}")));
    }
    kind.check_order(order)?;
    if mode_cutoff < 2 {
        return Err(Error::InvalidArgument("mode cutoff must be >= 2".into()));
    }
    let interior_limit = mode_cutoff.saturating_sub(n_max);

    // create[n][i]: n → n+1, destroy[n][i]: n → n−1, for n = 0..=n_max+2.
    let top = n_max + 2;
    let mut create = Vec::with_capacity(top + 1);
    let mut destroy = Vec::with_capacity(top + 1);
    let mut adjoint_ok = true;
    let mut norms_ok = true;
    for n in 0..=top {
        let mut cs = Vec::with_capacity(mode_cutoff);
        let mut ds = Vec::with_capacity(mode_cutoff);
        for i in 0..mode_cutoff {
            let c = creation(i, n, order, kind, mode_cutoff, capacity)?;
            let d = annihilation(i, n, order, kind, mode_cutoff, capacity)?;
            for op in [&c, &d] {
                if !op.is_zero() && op.operator_norm() != 1.0 {
                    norms_ok = false;
                }
            }
            cs.push(c);
            ds.push(d);
        }
        create.push(cs);
        destroy.push(ds);
    }
    // a_i on n+1 particles is the transpose of a_i† on n particles.
    for n in 0..top {
        for i in 0..mode_cutoff {
            adjoint_ok &= destroy[n + 1][i].is_transpose_of(&create[n][i]);
        }
    }

    let sparse_c: Vec<Vec<SparseInt>> = create.iter().map(|v| v.iter().map(|m| m.to_sparse()).collect()).collect();
    let sparse_d: Vec<Vec<SparseInt>> = destroy.iter().map(|v| v.iter().map(|m| m.to_sparse()).collect()).collect();

    let mut report = RelationReport {
        mode_cutoff,
        n_max,
        creation_pairs: RelationDeviation::default(),
        annihilation_pairs: RelationDeviation::default(),
        mixed_pairs: RelationDeviation::default(),
        commutation: RelationDeviation::default(),
        adjoint_ok,
        norms_ok,
    };

    for n in 0..=n_max {
        let interior: Vec<bool> = create[n][0].domain.iter().map(|s| s.0.iter().all(|&m| m < interior_limit)).collect();
        for i in 0..mode_cutoff {
            for j in 0..mode_cutoff {
                if i >= j {
                    let cc = sparse_c[n + 1][i].mul(&sparse_c[n][j]);
                    report.creation_pairs.absorb(cc.max_abs_split(&interior));
                    if n >= 2 {
                        let dd = sparse_d[n - 1][j].mul(&sparse_d[n][i]);
                        report.annihilation_pairs.absorb(dd.max_abs_split(&interior));
                    }
                }
                if i != j {
                    let dc = sparse_d[n + 1][i].mul(&sparse_c[n][j]);
                    report.mixed_pairs.absorb(dc.max_abs_split(&interior));
                }
            }
            // a_i a_i† − 1 + Σ_{k≤i} a_k† a_k
            let dim = interior.len();
            let mut lhs = sparse_d[n + 1][i].mul(&sparse_c[n][i]);
            lhs.add_scaled(&SparseInt::identity(dim), -1);
            if n >= 1 {
                for k in 0..=i {
                    lhs.add_scaled(&sparse_c[n - 1][k].mul(&sparse_d[n][k]), 1);
                }
            }
            lhs.entries.retain(|_, v| *v != 0);
            report.commutation.absorb(lhs.max_abs_split(&interior));
        }
    }
    Ok(report)
}
