//! Nondeterministic Turing machines and bounded halting oracles.
//!
//! Machines always start on the empty tape. Two halting notions are
//! supported: `halts_exists_within` asks whether *some* computation path
//! reaches a final state within the step budget, `halts_all_within` whether
//! *every* path does. A configuration with no applicable transition (either
//! because the transition relation is silent or because every move would
//! cross the left end of a semi-infinite tape) is stuck and counts as
//! non-halting: halting means reaching a final state, nothing else.
//!
//! Witness paths are canonical: minimal length first, then lexicographically
//! smallest by declared transition index, independent of evaluation order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Head movement of a single transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Left,
    Right,
}

/// Whether the tape extends in both directions or has a left end at cell 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TapeModel {
    SemiInfinite,
    TwoWayInfinite,
}

pub type StateId = u16;
pub type SymId = u16;

/// One entry of the transition relation: `(state, symbol, direction)`.
pub type Tuple = (StateId, SymId, Dir);

/// A named transition entry as used at construction time:
/// `((state, symbol), [(state, symbol, direction)])`.
pub type NamedTransition = ((String, String), Vec<(String, String, Dir)>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TuringError {
    #[error("blank symbol {0:?} is not in the alphabet")]
    BlankNotInAlphabet(String),
    #[error("initial state {0:?} is not declared")]
    InitialNotDeclared(String),
    #[error("final state {0:?} is not declared")]
    FinalNotDeclared(String),
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("transition references undeclared state {0:?}")]
    UnknownState(String),
    #[error("transition references undeclared symbol {0:?}")]
    UnknownSymbol(String),
    #[error("transition declared from final state {0:?}")]
    TransitionFromFinal(String),
    #[error("configuration is not legal for this machine: {0}")]
    IllegalConfiguration(String),
    #[error("input symbol {0:?} is not in the machine alphabet")]
    InputSymbolUnknown(String),
    #[error("haltify: accepting and rejecting sets overlap on {0:?}")]
    HaltifyOverlap(String),
    #[error("haltify: state {0:?} is not a final state of the machine")]
    HaltifyNotFinal(String),
    #[error("machine already has a semi-infinite tape")]
    AlreadySemiInfinite,
    #[error("path replay failed at step {step}: {reason}")]
    BadPath { step: usize, reason: String },
    #[error("corpus parameters out of range: {0}")]
    CorpusParams(String),
}

/// A nondeterministic Turing machine over named states and symbols.
///
/// Internally states and symbols are dense indices; the name tables are kept
/// for serialization and diagnostics. The transition relation maps
/// `(state, symbol)` to an ordered list of tuples; the list order is the
/// canonical transition index used by every witness path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ntm {
    symbols: Vec<String>,
    blank: SymId,
    states: Vec<String>,
    initial: StateId,
    finals: BTreeSet<StateId>,
    tape: TapeModel,
    delta: BTreeMap<(StateId, SymId), Vec<Tuple>>,
}

/// Instantaneous description: state, head position and the written cells.
///
/// The sparse tape map never stores the blank symbol; semi-infinite
/// configurations have no negative cells and a non-negative head.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub head: i64,
    pub tape: BTreeMap<i64, SymId>,
}

/// A computation path: the chosen transition index (within the declared
/// list for the current `(state, symbol)` key) at every step, starting from
/// the empty-tape configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ComputationPath(pub Vec<usize>);

/// Outcome of the universal bounded halting oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllPathsOutcome {
    AllHalt,
    /// A non-halted path prefix: either `n` live steps, or a shorter prefix
    /// ending in a stuck non-final configuration.
    Offending(ComputationPath),
}

impl Ntm {
    /// Builds a machine from name tables, validating every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        symbols: Vec<String>,
        blank: &str,
        states: Vec<String>,
        initial: &str,
        finals: &[String],
        tape: TapeModel,
        transitions: &[NamedTransition],
    ) -> Result<Self, TuringError> {
        let mut sym_ids = HashMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if sym_ids.insert(s.clone(), i as SymId).is_some() {
                return Err(TuringError::DuplicateSymbol(s.clone()));
            }
        }
        let mut state_ids = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if state_ids.insert(s.clone(), i as StateId).is_some() {
                return Err(TuringError::DuplicateState(s.clone()));
            }
        }
        let blank_id = *sym_ids
            .get(blank)
            .ok_or_else(|| TuringError::BlankNotInAlphabet(blank.to_string()))?;
        let initial_id = *state_ids
            .get(initial)
            .ok_or_else(|| TuringError::InitialNotDeclared(initial.to_string()))?;
        let mut final_ids = BTreeSet::new();
        for f in finals {
            let id = *state_ids
                .get(f)
                .ok_or_else(|| TuringError::FinalNotDeclared(f.clone()))?;
            final_ids.insert(id);
        }
        let mut delta: BTreeMap<(StateId, SymId), Vec<Tuple>> = BTreeMap::new();
        for ((q, x), tuples) in transitions {
            let q_id = *state_ids
                .get(q)
                .ok_or_else(|| TuringError::UnknownState(q.clone()))?;
            let x_id = *sym_ids
                .get(x)
                .ok_or_else(|| TuringError::UnknownSymbol(x.clone()))?;
            if final_ids.contains(&q_id) {
                return Err(TuringError::TransitionFromFinal(q.clone()));
            }
            let entry = delta.entry((q_id, x_id)).or_default();
            for (q2, y, d) in tuples {
                let q2_id = *state_ids
                    .get(q2)
                    .ok_or_else(|| TuringError::UnknownState(q2.clone()))?;
                let y_id = *sym_ids
                    .get(y)
                    .ok_or_else(|| TuringError::UnknownSymbol(y.clone()))?;
                entry.push((q2_id, y_id, *d));
            }
        }
        Ok(Ntm {
            symbols,
            blank: blank_id,
            states,
            initial: initial_id,
            finals: final_ids,
            tape,
            delta,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
    pub fn states(&self) -> &[String] {
        &self.states
    }
    pub fn blank(&self) -> SymId {
        self.blank
    }
    pub fn initial(&self) -> StateId {
        self.initial
    }
    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }
    pub fn tape_model(&self) -> TapeModel {
        self.tape
    }
    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.contains(&q)
    }
    pub fn delta(&self) -> &BTreeMap<(StateId, SymId), Vec<Tuple>> {
        &self.delta
    }

    /// Returns a copy with the tape-model flag replaced. The transition
    /// relation is unchanged; this switches edge semantics only.
    pub fn with_tape_model(&self, tape: TapeModel) -> Ntm {
        let mut m = self.clone();
        m.tape = tape;
        m
    }

    /// The empty-tape starting configuration.
    pub fn initial_config(&self) -> Configuration {
        Configuration {
            state: self.initial,
            head: 0,
            tape: BTreeMap::new(),
        }
    }

    fn symbol_at(&self, c: &Configuration, pos: i64) -> SymId {
        *c.tape.get(&pos).unwrap_or(&self.blank)
    }

    fn validate_config(&self, c: &Configuration) -> Result<(), TuringError> {
        if c.state as usize >= self.states.len() {
            return Err(TuringError::IllegalConfiguration(format!(
                "state id {} out of range",
                c.state
            )));
        }
        for (&pos, &sym) in &c.tape {
            if sym as usize >= self.symbols.len() {
                return Err(TuringError::IllegalConfiguration(format!(
                    "symbol id {sym} out of range"
                )));
            }
            if sym == self.blank {
                return Err(TuringError::IllegalConfiguration(format!(
                    "blank stored explicitly at cell {pos}"
                )));
            }
            if self.tape == TapeModel::SemiInfinite && pos < 0 {
                return Err(TuringError::IllegalConfiguration(format!(
                    "written cell {pos} left of the tape end"
                )));
            }
        }
        if self.tape == TapeModel::SemiInfinite && c.head < 0 {
            return Err(TuringError::IllegalConfiguration(
                "head left of the tape end".into(),
            ));
        }
        Ok(())
    }

    fn apply(&self, c: &Configuration, t: Tuple) -> Configuration {
        let (q2, y, d) = t;
        let mut tape = c.tape.clone();
        if y == self.blank {
            tape.remove(&c.head);
        } else {
            tape.insert(c.head, y);
        }
        let head = match d {
            Dir::Left => c.head - 1,
            Dir::Right => c.head + 1,
        };
        Configuration {
            state: q2,
            head,
            tape,
        }
    }

    /// All successor configurations of `c`, paired with the declared index
    /// of the transition that produced them, in declaration order.
    ///
    /// The list is empty exactly when `c` is final or stuck (no declared
    /// transition, or a semi-infinite tape where every applicable move would
    /// cross the left end).
    pub fn step_all(&self, c: &Configuration) -> Result<Vec<(usize, Configuration)>, TuringError> {
        self.validate_config(c)?;
        if self.is_final(c.state) {
            return Ok(Vec::new());
        }
        let sym = self.symbol_at(c, c.head);
        let mut out = Vec::new();
        if let Some(tuples) = self.delta.get(&(c.state, sym)) {
            for (i, &t) in tuples.iter().enumerate() {
                if self.tape == TapeModel::SemiInfinite && t.2 == Dir::Left && c.head == 0 {
                    continue;
                }
                out.push((i, self.apply(c, t)));
            }
        }
        Ok(out)
    }

    /// Replays a path from the empty tape, validating every choice.
    pub fn replay(&self, path: &ComputationPath) -> Result<Configuration, TuringError> {
        let mut c = self.initial_config();
        for (step, &choice) in path.0.iter().enumerate() {
            let succs = self.step_all(&c).map_err(|e| TuringError::BadPath {
                step,
                reason: e.to_string(),
            })?;
            let next = succs
                .into_iter()
                .find(|(i, _)| *i == choice)
                .map(|(_, c)| c)
                .ok_or_else(|| TuringError::BadPath {
                    step,
                    reason: format!("transition index {choice} not applicable"),
                })?;
            c = next;
        }
        Ok(c)
    }

    /// Existential bounded halting: does some path from the empty tape reach
    /// a final state within `n` steps? Returns the minimal-length,
    /// lexicographically smallest witness path.
    pub fn halts_exists_within(&self, n: u64) -> Option<ComputationPath> {
        // Layered BFS with first-visit dedup. Layers are expanded in path-lex
        // order and successors generated in declared index order, so the
        // first final configuration seen carries the canonical witness.
        struct Node {
            config: Configuration,
            parent: usize,
            choice: usize,
        }
        let init = self.initial_config();
        if self.is_final(init.state) {
            return Some(ComputationPath(Vec::new()));
        }
        let mut arena = vec![Node {
            config: init.clone(),
            parent: usize::MAX,
            choice: 0,
        }];
        let mut seen: HashSet<Configuration> = HashSet::new();
        seen.insert(init);
        let mut frontier = vec![0usize];
        for _depth in 1..=n {
            let mut next = Vec::new();
            for &idx in &frontier {
                let succs = self
                    .step_all(&arena[idx].config)
                    .expect("internally generated configurations are legal");
                for (choice, succ) in succs {
                    if self.is_final(succ.state) {
                        let mut path = vec![choice];
                        let mut at = idx;
                        while arena[at].parent != usize::MAX {
                            path.push(arena[at].choice);
                            at = arena[at].parent;
                        }
                        path.reverse();
                        return Some(ComputationPath(path));
                    }
                    if seen.insert(succ.clone()) {
                        arena.push(Node {
                            config: succ,
                            parent: idx,
                            choice,
                        });
                        next.push(arena.len() - 1);
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            frontier = next;
        }
        None
    }

    /// Universal bounded halting: does every path from the empty tape reach
    /// a final state within `n` steps?
    ///
    /// Unlike the existential oracle this must respect path semantics, so
    /// configurations are not deduplicated across the tree; instead
    /// "all paths from `c` halt within `r` steps" is memoized on `(c, r)`.
    pub fn halts_all_within(&self, n: u64) -> AllPathsOutcome {
        let mut memo: HashMap<(Configuration, u64), bool> = HashMap::new();
        let init = self.initial_config();
        if self.all_halt(&init, n, &mut memo) {
            return AllPathsOutcome::AllHalt;
        }
        // Reconstruct the lexicographically smallest offending prefix by
        // walking the memo table greedily.
        let mut path = Vec::new();
        let mut c = init;
        let mut budget = n;
        loop {
            if self.is_final(c.state) {
                unreachable!("final configurations halt");
            }
            if budget == 0 {
                break;
            }
            let succs = self
                .step_all(&c)
                .expect("internally generated configurations are legal");
            if succs.is_empty() {
                break; // stuck non-final: a (shorter) dead prefix
            }
            let mut advanced = false;
            for (choice, succ) in succs {
                if !self.all_halt(&succ, budget - 1, &mut memo) {
                    path.push(choice);
                    c = succ;
                    budget -= 1;
                    advanced = true;
                    break;
                }
            }
            debug_assert!(advanced, "some successor must fail when the parent does");
        }
        AllPathsOutcome::Offending(ComputationPath(path))
    }

    fn all_halt(
        &self,
        c: &Configuration,
        budget: u64,
        memo: &mut HashMap<(Configuration, u64), bool>,
    ) -> bool {
        if self.is_final(c.state) {
            return true;
        }
        if budget == 0 {
            return false;
        }
        if let Some(&v) = memo.get(&(c.clone(), budget)) {
            return v;
        }
        let succs = self
            .step_all(c)
            .expect("internally generated configurations are legal");
        // Stuck non-final configurations never halt.
        let v = !succs.is_empty()
            && succs
                .iter()
                .all(|(_, s)| self.all_halt(s, budget - 1, memo));
        memo.insert((c.clone(), budget), v);
        v
    }

    /// Smallest `n <= horizon` with an accepting path, if any.
    pub fn min_halting_time(&self, horizon: u64) -> Option<u64> {
        self.halts_exists_within(horizon)
            .map(|p| p.0.len() as u64)
    }

    /// If every path halts within `horizon` steps, the maximum halting depth
    /// over all paths; otherwise `None` (exceeds the horizon).
    pub fn max_halting_time_all_paths(&self, horizon: u64) -> Option<u64> {
        let mut memo: HashMap<(Configuration, u64), Option<u64>> = HashMap::new();
        self.max_depth(&self.initial_config(), horizon, &mut memo)
    }

    fn max_depth(
        &self,
        c: &Configuration,
        budget: u64,
        memo: &mut HashMap<(Configuration, u64), Option<u64>>,
    ) -> Option<u64> {
        if self.is_final(c.state) {
            return Some(0);
        }
        if budget == 0 {
            return None;
        }
        if let Some(v) = memo.get(&(c.clone(), budget)) {
            return *v;
        }
        let succs = self
            .step_all(c)
            .expect("internally generated configurations are legal");
        let mut worst = 0u64;
        let mut v = Some(());
        if succs.is_empty() {
            v = None;
        }
        for (_, s) in &succs {
            match self.max_depth(s, budget - 1, memo) {
                Some(d) => worst = worst.max(d + 1),
                None => {
                    v = None;
                    break;
                }
            }
        }
        let out = v.map(|_| worst);
        memo.insert((c.clone(), budget), out);
        out
    }

    /// Prefixes every run with a prologue that writes `x` on the tape and
    /// returns the head to cell 0, then behaves exactly like `self`.
    ///
    /// The prologue costs exactly `2 * |x|` steps (`|x|` writes moving right,
    /// then `|x|` moves back left), so the halting time of the result on the
    /// empty tape is the halting time of `self` on input `x` plus `2 * |x|`.
    pub fn embed_input(&self, x: &[String]) -> Result<Ntm, TuringError> {
        let mut sym_ids = HashMap::new();
        for (i, s) in self.symbols.iter().enumerate() {
            sym_ids.insert(s.as_str(), i as SymId);
        }
        let mut input = Vec::with_capacity(x.len());
        for s in x {
            input.push(
                *sym_ids
                    .get(s.as_str())
                    .ok_or_else(|| TuringError::InputSymbolUnknown(s.clone()))?,
            );
        }
        if input.is_empty() {
            return Ok(self.clone());
        }
        let l = input.len();
        let mut m = self.clone();
        let taken: HashSet<String> = m.states.iter().cloned().collect();
        let fresh = |base: String, taken: &HashSet<String>| -> String {
            let mut name = base;
            while taken.contains(&name) {
                name.insert(0, '_');
            }
            name
        };
        // Write states w0..w{l-1}, return states r{l}..r1.
        let mut write_ids = Vec::new();
        for i in 0..l {
            let name = fresh(format!("w{i}"), &taken);
            m.states.push(name);
            write_ids.push((m.states.len() - 1) as StateId);
        }
        let mut ret_ids = Vec::new();
        for i in (1..=l).rev() {
            let name = fresh(format!("r{i}"), &taken);
            m.states.push(name);
            ret_ids.push((m.states.len() - 1) as StateId); // ret_ids[0] = r{l}
        }
        for i in 0..l {
            let next: StateId = if i + 1 < l { write_ids[i + 1] } else { ret_ids[0] };
            m.delta
                .insert((write_ids[i], m.blank), vec![(next, input[i], Dir::Right)]);
        }
        // r{k} means k more left moves; the last one hands over to the
        // original initial state while landing on cell 0.
        for (j, &rid) in ret_ids.iter().enumerate() {
            let next: StateId = if j + 1 < l { ret_ids[j + 1] } else { m.initial };
            for sym in 0..m.symbols.len() as SymId {
                m.delta.insert((rid, sym), vec![(next, sym, Dir::Left)]);
            }
        }
        m.initial = write_ids[0];
        Ok(m)
    }

    /// Turns a machine with designated accepting / rejecting final states
    /// into one that halts exactly on accepting paths: accepting states stay
    /// final, rejecting states lose finality and gain a self-loop.
    pub fn haltify(&self, accepting: &[String], rejecting: &[String]) -> Result<Ntm, TuringError> {
        let mut state_ids = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            state_ids.insert(s.as_str(), i as StateId);
        }
        let mut acc = BTreeSet::new();
        for s in accepting {
            let id = *state_ids
                .get(s.as_str())
                .ok_or_else(|| TuringError::UnknownState(s.clone()))?;
            if !self.finals.contains(&id) {
                return Err(TuringError::HaltifyNotFinal(s.clone()));
            }
            acc.insert(id);
        }
        let mut rej = BTreeSet::new();
        for s in rejecting {
            let id = *state_ids
                .get(s.as_str())
                .ok_or_else(|| TuringError::UnknownState(s.clone()))?;
            if !self.finals.contains(&id) {
                return Err(TuringError::HaltifyNotFinal(s.clone()));
            }
            if acc.contains(&id) {
                return Err(TuringError::HaltifyOverlap(s.clone()));
            }
            rej.insert(id);
        }
        let mut m = self.clone();
        for r in &rej {
            m.finals.remove(r);
            for sym in 0..m.symbols.len() as SymId {
                m.delta.insert((*r, sym), vec![(*r, sym, Dir::Right)]);
            }
        }
        Ok(m)
    }

    /// Folds a two-way-infinite machine onto a semi-infinite tape with the
    /// usual two-track construction: semi cell `p` stores the pair of
    /// original cells `(p, -p-1)`.
    ///
    /// For empty-tape runs the step overhead is exact and is returned
    /// alongside the machine: every original step costs one folded step,
    /// plus one extra step each time the head crosses the origin leftwards
    /// or returns from the negative half. A run that never leaves the
    /// non-negative half is reproduced step for step.
    pub fn to_semi_infinite(&self) -> Result<(Ntm, FoldOverhead), TuringError> {
        if self.tape == TapeModel::SemiInfinite {
            return Err(TuringError::AlreadySemiInfinite);
        }
        let ns = self.symbols.len();
        // Symbols: originals (unvisited cells), then pair(a,b), then
        // origin-marked pair0(a,b).
        let mut symbols = self.symbols.clone();
        let pair = |a: usize, b: usize| -> usize { ns + a * ns + b };
        let pair0 = |a: usize, b: usize| -> usize { ns + ns * ns + a * ns + b };
        for tag in ["p", "p0"] {
            for a in 0..ns {
                for b in 0..ns {
                    symbols.push(format!(
                        "[{}:{}|{}]",
                        tag, self.symbols[a], self.symbols[b]
                    ));
                }
            }
        }
        // States: (q, Upper), (q, Lower), pending bounce variants of each,
        // plus a fresh start state that knows it sits on cell 0.
        let nq = self.states.len();
        let mut states = Vec::new();
        let upper = |q: usize| q;
        let lower = |q: usize| nq + q;
        let pend_to_lower = |q: usize| 2 * nq + q; // move right, then re-enter 0 on the lower track
        let pend_to_upper = |q: usize| 3 * nq + q;
        let start = 4 * nq;
        for tag in ["u", "l", "bl", "bu"] {
            for q in &self.states {
                states.push(format!("{q}~{tag}"));
            }
        }
        states.push("start~0".into());

        let mut finals = BTreeSet::new();
        for &f in &self.finals {
            finals.insert(upper(f as usize) as StateId);
            finals.insert(lower(f as usize) as StateId);
        }
        if self.finals.contains(&self.initial) {
            finals.insert(start as StateId);
        }

        let mut delta: BTreeMap<(StateId, SymId), Vec<Tuple>> = BTreeMap::new();
        let mut push = |key: (usize, usize), t: (usize, usize, Dir)| {
            delta
                .entry((key.0 as StateId, key.1 as SymId))
                .or_default()
                .push((t.0 as StateId, t.1 as SymId, t.2));
        };

        // Reading an original symbol `a` in the upper track means the cell
        // was never rewritten: it stands for the pair (a, blank).
        let blank = self.blank as usize;
        for ((q, x), tuples) in &self.delta {
            let q = *q as usize;
            let x = *x as usize;
            for &(q2, y, d) in tuples {
                let q2 = q2 as usize;
                let y = y as usize;
                // Upper track. A plain symbol means the cell was never
                // rewritten (lower content blank); the start state handles
                // the true first step at cell 0, so plain cells here are at
                // position >= 1 and both directions are safe.
                push((upper(q), x), (upper(q2), pair(y, blank), d));
                for b in 0..ns {
                    push((upper(q), pair(x, b)), (upper(q2), pair(y, b), d));
                    // Marked origin cell: bounce on left moves.
                    match d {
                        Dir::Right => {
                            push((upper(q), pair0(x, b)), (upper(q2), pair0(y, b), Dir::Right))
                        }
                        Dir::Left => {
                            push((upper(q), pair0(x, b)), (pend_to_lower(q2), pair0(y, b), Dir::Right))
                        }
                    }
                }
                // Lower track: directions are mirrored; cells are always
                // pairs by the time the lower track is visited, except the
                // cells right of the deepest excursion which read as plain
                // (lower content blank).
                for a in 0..ns {
                    // original left move = semi right move
                    // original right move at p >= 1 = semi left move
                    // original right move at p == 0 (marked) = bounce to upper
                    match d {
                        Dir::Left => {
                            push((lower(q), pair(a, x)), (lower(q2), pair(a, y), Dir::Right));
                            push((lower(q), pair0(a, x)), (lower(q2), pair0(a, y), Dir::Right));
                        }
                        Dir::Right => {
                            push((lower(q), pair(a, x)), (lower(q2), pair(a, y), Dir::Left));
                            push((lower(q), pair0(a, x)), (pend_to_upper(q2), pair0(a, y), Dir::Right));
                        }
                    }
                }
                if x == blank {
                    // Unvisited (plain blank) cell seen from the lower
                    // track; position >= 1, so no bounce can occur here.
                    let semi_dir = match d {
                        Dir::Left => Dir::Right,
                        Dir::Right => Dir::Left,
                    };
                    push((lower(q), blank), (lower(q2), pair(blank, y), semi_dir));
                }
                // The very first step: head on cell 0, everything blank. The
                // written cell becomes the marked origin pair.
                if q == self.initial as usize && x == blank {
                    match d {
                        Dir::Right => push((start, blank), (upper(q2), pair0(y, blank), Dir::Right)),
                        Dir::Left => push((start, blank), (pend_to_lower(q2), pair0(y, blank), Dir::Right)),
                    }
                }
            }
        }
        // Bounce completions: one extra step that walks back to cell 0 and
        // lands on the other track. They must not disturb the visited cell.
        for q in 0..nq {
            for sym in 0..symbols.len() {
                push((pend_to_lower(q), sym), (lower(q), sym, Dir::Left));
                push((pend_to_upper(q), sym), (upper(q), sym, Dir::Left));
            }
        }

        let m = Ntm {
            symbols,
            blank: self.blank,
            states,
            initial: start as StateId,
            finals,
            tape: TapeModel::SemiInfinite,
            delta,
        };
        Ok((
            m,
            FoldOverhead {
                per_step_factor: 2,
                constant: 0,
            },
        ))
    }
}

/// Exact bookkeeping for the tape-folding construction: a halting time of
/// `t` on the two-way machine becomes at most `per_step_factor * t +
/// constant` on the folded machine (and at least `t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldOverhead {
    pub per_step_factor: u64,
    pub constant: u64,
}

// ---------------------------------------------------------------------------
// Deterministic machine corpus enumeration
// ---------------------------------------------------------------------------

/// Parameters for the deterministic corpus enumerator.
///
/// Machines have exactly `states` non-final states (`q0` initial) plus one
/// final state `halt`, exactly `symbols` tape symbols (`_` is the blank),
/// and a total transition relation with 1..=`branching` tuples per
/// `(state, symbol)` key. Totality means no path ever gets stuck for lack of
/// a declared transition; on a semi-infinite tape a left move at cell 0 can
/// still strand a branch.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub states: u32,
    pub symbols: u32,
    pub branching: u32,
    pub limit: usize,
    pub seed: u64,
    pub tape: TapeModel,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            states: 2,
            symbols: 2,
            branching: 2,
            limit: 100,
            seed: 0x5eed_cafe_f00d_0001,
            tape: TapeModel::SemiInfinite,
        }
    }
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Unranks the `idx`-th size-`k` combination of `0..n` in colex order.
fn unrank_combination(n: u128, k: u128, mut idx: u128) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = k;
    let mut n = n;
    while k > 0 {
        // Largest element first (combinatorial number system).
        let mut c = k - 1;
        while binom(c + 1, k) <= idx && c + 1 < n {
            c += 1;
        }
        idx -= binom(c, k);
        out.push(c as usize);
        n = c;
        k -= 1;
    }
    out.reverse();
    out
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A keyed bijection on `[0, 2^(2*half))` (balanced Feistel, 4 rounds), used
/// to walk the machine index space in a shuffled but deterministic order.
fn feistel(half: u32, key: u64, x: u128) -> u128 {
    let mask: u128 = (1u128 << half) - 1;
    let (mut l, mut r) = (x >> half, x & mask);
    for round in 0..4u64 {
        let mut s = key ^ round.wrapping_mul(0xA24B_AED4_963E_E407) ^ (r as u64);
        let f = (splitmix64(&mut s) as u128) & mask;
        let (nl, nr) = (r, (l ^ f) & mask);
        l = nl;
        r = nr;
    }
    (l << half) | r
}

/// Enumerates machines deterministically, pruning state-relabeling
/// isomorphs, until `limit` machines are collected or the space is
/// exhausted.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<Ntm>, TuringError> {
    if spec.states == 0 || spec.symbols == 0 || spec.branching == 0 {
        return Err(TuringError::CorpusParams(
            "states, symbols and branching must all be >= 1".into(),
        ));
    }
    let a = spec.states as u128; // non-final states
    let b = spec.symbols as u128;
    let c = spec.branching as u128;
    let targets = a + 1; // halt is the extra target
    let options = targets * b * 2; // (target, written symbol, direction)
    let per_key: u128 = (1..=c.min(options)).map(|s| binom(options, s)).sum();
    let keys = (a * b) as u32;
    let mut space: u128 = 1;
    for _ in 0..keys {
        space = space.checked_mul(per_key).ok_or_else(|| {
            TuringError::CorpusParams("machine space exceeds 2^128".into())
        })?;
    }
    let half = (128 - space.leading_zeros()) / 2 + 1;
    if half > 62 {
        return Err(TuringError::CorpusParams(
            "machine space too large to shuffle".into(),
        ));
    }
    let domain: u128 = 1u128 << (2 * half);

    let symbols: Vec<String> = (0..spec.symbols)
        .map(|i| if i == 0 { "_".into() } else { format!("{i}") })
        .collect();
    let mut states: Vec<String> = (0..spec.states).map(|i| format!("q{i}")).collect();
    states.push("halt".into());
    let halt_id = spec.states as usize;

    let decode_option = |o: usize| -> Tuple {
        let dir = if o.is_multiple_of(2) { Dir::Left } else { Dir::Right };
        let rest = o / 2;
        let sym = (rest % b as usize) as SymId;
        let st = (rest / b as usize) as StateId;
        (st, sym, dir)
    };

    let mut out = Vec::new();
    let mut seen_canon: HashSet<Vec<u8>> = HashSet::new();
    let mut walked: u128 = 0;
    let mut cursor: u128 = 0;
    while walked < space && out.len() < spec.limit {
        // Cycle-walk the Feistel permutation into [0, space).
        let mut idx;
        loop {
            if cursor >= domain {
                // Domain exhausted; cannot happen before space is walked.
                return Ok(out);
            }
            idx = feistel(half, spec.seed, cursor);
            cursor += 1;
            if idx < space {
                break;
            }
        }
        walked += 1;

        // Decode the machine index: one subset choice per (state, symbol).
        let mut rem = idx;
        let mut delta: BTreeMap<(StateId, SymId), Vec<Tuple>> = BTreeMap::new();
        for q in 0..a as usize {
            for x in 0..b as usize {
                let choice = rem % per_key;
                rem /= per_key;
                // First find the subset size, then unrank the combination.
                let mut size = 1u128;
                let mut off = choice;
                loop {
                    let cnt = binom(options, size);
                    if off < cnt {
                        break;
                    }
                    off -= cnt;
                    size += 1;
                }
                let combo = unrank_combination(options, size, off);
                let tuples: Vec<Tuple> = combo.into_iter().map(decode_option).collect();
                delta.insert((q as StateId, x as SymId), tuples);
            }
        }

        // Canonical form under relabeling of non-initial, non-final states.
        let canon = canonical_signature(&delta, a as usize, b as usize);
        if !seen_canon.insert(canon) {
            continue;
        }

        let m = Ntm {
            symbols: symbols.clone(),
            blank: 0,
            states: states.clone(),
            initial: 0,
            finals: BTreeSet::from([halt_id as StateId]),
            tape: spec.tape,
            delta,
        };
        out.push(m);
    }
    Ok(out)
}

fn canonical_signature(
    delta: &BTreeMap<(StateId, SymId), Vec<Tuple>>,
    nonfinal: usize,
    _symbols: usize,
) -> Vec<u8> {
    // Permute states 1..nonfinal (q0 and halt are pinned), serialize, take
    // the minimum image.
    let free: Vec<StateId> = (1..nonfinal as StateId).collect();
    let mut best: Option<Vec<u8>> = None;
    let mut perms = Vec::new();
    permutations(&free, &mut Vec::new(), &mut perms);
    for perm in &perms {
        let map = |q: StateId| -> StateId {
            if q == 0 || q as usize >= nonfinal {
                q
            } else {
                perm[q as usize - 1]
            }
        };
        let mut img: BTreeMap<(StateId, SymId), Vec<Tuple>> = BTreeMap::new();
        for ((q, x), tuples) in delta {
            let mut ts: Vec<Tuple> = tuples
                .iter()
                .map(|&(q2, y, d)| (map(q2), y, d))
                .collect();
            ts.sort();
            img.insert((map(*q), *x), ts);
        }
        let mut bytes = Vec::new();
        for ((q, x), tuples) in &img {
            bytes.extend_from_slice(&q.to_le_bytes());
            bytes.extend_from_slice(&x.to_le_bytes());
            bytes.push(b'=');
            for (q2, y, d) in tuples {
                bytes.extend_from_slice(&q2.to_le_bytes());
                bytes.extend_from_slice(&y.to_le_bytes());
                bytes.push(match d {
                    Dir::Left => b'L',
                    Dir::Right => b'R',
                });
            }
            bytes.push(b';');
        }
        if best.as_ref().is_none_or(|b| bytes < *b) {
            best = Some(bytes);
        }
    }
    best.unwrap_or_default()
}

fn permutations(rest: &[StateId], acc: &mut Vec<StateId>, out: &mut Vec<Vec<StateId>>) {
    if rest.is_empty() {
        out.push(acc.clone());
        return;
    }
    for (i, &x) in rest.iter().enumerate() {
        let mut r = rest.to_vec();
        r.remove(i);
        acc.push(x);
        permutations(&r, acc, out);
        acc.pop();
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct NtmJson {
    pub alphabet: Vec<String>,
    pub blank: String,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: Vec<String>,
    pub tape: String,
    pub delta: Vec<DeltaJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeltaJson {
    pub from: (String, String),
    pub to: Vec<(String, String, String)>,
}

impl Ntm {
    pub fn to_json(&self) -> NtmJson {
        NtmJson {
            alphabet: self.symbols.clone(),
            blank: self.symbols[self.blank as usize].clone(),
            states: self.states.clone(),
            initial: self.states[self.initial as usize].clone(),
            finals: self
                .finals
                .iter()
                .map(|&f| self.states[f as usize].clone())
                .collect(),
            tape: match self.tape {
                TapeModel::SemiInfinite => "semi".into(),
                TapeModel::TwoWayInfinite => "two-way".into(),
            },
            delta: self
                .delta
                .iter()
                .map(|((q, x), tuples)| DeltaJson {
                    from: (
                        self.states[*q as usize].clone(),
                        self.symbols[*x as usize].clone(),
                    ),
                    to: tuples
                        .iter()
                        .map(|(q2, y, d)| {
                            (
                                self.states[*q2 as usize].clone(),
                                self.symbols[*y as usize].clone(),
                                match d {
                                    Dir::Left => "L".into(),
                                    Dir::Right => "R".into(),
                                },
                            )
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &NtmJson) -> Result<Ntm, TuringError> {
        let tape = match j.tape.as_str() {
            "semi" => TapeModel::SemiInfinite,
            _ => TapeModel::TwoWayInfinite,
        };
        let transitions: Vec<NamedTransition> = j
            .delta
            .iter()
            .map(|d| {
                (
                    d.from.clone(),
                    d.to
                        .iter()
                        .map(|(q, y, dir)| {
                            (
                                q.clone(),
                                y.clone(),
                                if dir == "L" { Dir::Left } else { Dir::Right },
                            )
                        })
                        .collect(),
                )
            })
            .collect();
        Ntm::new(
            j.alphabet.clone(),
            &j.blank,
            j.states.clone(),
            &j.initial,
            &j.finals,
            tape,
            &transitions,
        )
    }
}
