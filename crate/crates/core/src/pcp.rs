//! Post correspondence instances, the bounded match solver, and the
//! machine-to-domino reduction.
//!
//! Words are sequences of tokens over a declared alphabet. The bounded
//! solver searches for the minimal-length, lexicographically smallest index
//! sequence whose concatenated tops equal the concatenated bottoms; the
//! empty sequence is never a match.
//!
//! The reduction encodes machine runs as separator-delimited instantaneous
//! descriptions. A machine halting in `n` steps produces an instance whose
//! minimal match length lies in `(n*(n+1), (n+1)*(n+2)]`, and the bounded
//! problems translate exactly along `p(n) = (n+1)*(n+2)`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::turing::{Dir, Ntm, TapeModel};

pub type TokenId = u16;

/// A word as token indices into the instance alphabet.
pub type Word = Vec<TokenId>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PcpError {
    #[error("instance must declare at least one domino")]
    NoDominoes,
    #[error("domino {0} has two empty words")]
    EmptyDomino(usize),
    #[error("word uses token {0:?} outside the declared alphabet")]
    UnknownToken(String),
    #[error("duplicate alphabet token {0:?}")]
    DuplicateToken(String),
    #[error("witness index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("witness must contain at least one index")]
    EmptyWitness,
    #[error("the machine-to-domino reduction needs a semi-infinite tape machine; fold it first")]
    NeedsSemiInfinite,
}

/// A domino: a top word over the instance alphabet and a bottom word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domino {
    pub top: Word,
    pub bottom: Word,
}

/// An ordered list of dominoes over a shared token alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcpInstance {
    alphabet: Vec<String>,
    dominoes: Vec<Domino>,
}

/// A 1-based-on-the-wire index sequence certifying a match; internally the
/// indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchWitness(pub Vec<usize>);

impl MatchWitness {
    pub fn new(indices: Vec<usize>) -> Result<Self, PcpError> {
        if indices.is_empty() {
            return Err(PcpError::EmptyWitness);
        }
        Ok(MatchWitness(indices))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl PcpInstance {
    pub fn new(alphabet: Vec<String>, dominoes: Vec<Domino>) -> Result<Self, PcpError> {
        if dominoes.is_empty() {
            return Err(PcpError::NoDominoes);
        }
        let mut seen = HashSet::new();
        for t in &alphabet {
            if !seen.insert(t.clone()) {
                return Err(PcpError::DuplicateToken(t.clone()));
            }
        }
        for (i, d) in dominoes.iter().enumerate() {
            if d.top.is_empty() && d.bottom.is_empty() {
                return Err(PcpError::EmptyDomino(i));
            }
            for t in d.top.iter().chain(d.bottom.iter()) {
                if *t as usize >= alphabet.len() {
                    return Err(PcpError::UnknownToken(format!("#{t}")));
                }
            }
        }
        Ok(PcpInstance { alphabet, dominoes })
    }

    /// Convenience constructor from token strings.
    pub fn from_tokens(
        alphabet: &[&str],
        dominoes: &[(&[&str], &[&str])],
    ) -> Result<Self, PcpError> {
        let alpha: Vec<String> = alphabet.iter().map(|s| s.to_string()).collect();
        let ids: HashMap<&str, TokenId> = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as TokenId))
            .collect();
        let mut ds = Vec::new();
        for (top, bottom) in dominoes {
            let enc = |w: &[&str]| -> Result<Word, PcpError> {
                w.iter()
                    .map(|t| {
                        ids.get(t)
                            .copied()
                            .ok_or_else(|| PcpError::UnknownToken(t.to_string()))
                    })
                    .collect()
            };
            ds.push(Domino {
                top: enc(top)?,
                bottom: enc(bottom)?,
            });
        }
        PcpInstance::new(alpha, ds)
    }

    /// Single-character words, e.g. `("a", "ab")`.
    pub fn from_strs(alphabet: &[&str], dominoes: &[(&str, &str)]) -> Result<Self, PcpError> {
        let toks: Vec<(Vec<&str>, Vec<&str>)> = dominoes
            .iter()
            .map(|(t, b)| {
                (
                    t.split("").filter(|s| !s.is_empty()).collect(),
                    b.split("").filter(|s| !s.is_empty()).collect(),
                )
            })
            .collect();
        let borrowed: Vec<(&[&str], &[&str])> = toks
            .iter()
            .map(|(t, b)| (t.as_slice(), b.as_slice()))
            .collect();
        PcpInstance::from_tokens(alphabet, &borrowed)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn dominoes(&self) -> &[Domino] {
        &self.dominoes
    }

    pub fn len(&self) -> usize {
        self.dominoes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dominoes.is_empty()
    }

    /// True iff the concatenated top words equal the concatenated bottoms.
    pub fn verify_match(&self, w: &MatchWitness) -> Result<bool, PcpError> {
        if w.0.is_empty() {
            return Err(PcpError::EmptyWitness);
        }
        let mut top = Vec::new();
        let mut bottom = Vec::new();
        for &i in &w.0 {
            let d = self
                .dominoes
                .get(i)
                .ok_or(PcpError::IndexOutOfRange(i + 1, self.dominoes.len()))?;
            top.extend_from_slice(&d.top);
            bottom.extend_from_slice(&d.bottom);
        }
        Ok(top == bottom)
    }

    /// Exhaustive bounded match search.
    ///
    /// Search states are signed overhangs (which side currently leads and
    /// the leading suffix). A branch dies when neither concatenation is a
    /// prefix of the other. BFS over depth with first-visit dedup on the
    /// overhang guarantees the returned witness has minimal length and is
    /// lexicographically smallest among the minimal ones.
    pub fn solve_bpcp(&self, n: u64) -> Option<MatchWitness> {
        #[derive(Clone, PartialEq, Eq, Hash)]
        struct Overhang {
            bottom_leads: bool,
            suffix: Word,
        }
        struct Node {
            over: Overhang,
            parent: usize,
            choice: usize,
        }

        if n == 0 {
            return None;
        }
        // Largest single-step shrink of the leading suffix, per side.
        let shrink_top_lead = self
            .dominoes
            .iter()
            .map(|d| d.bottom.len().saturating_sub(d.top.len()))
            .max()
            .unwrap_or(0);
        let shrink_bottom_lead = self
            .dominoes
            .iter()
            .map(|d| d.top.len().saturating_sub(d.bottom.len()))
            .max()
            .unwrap_or(0);

        let mut arena: Vec<Node> = Vec::new();
        let mut seen: HashSet<Overhang> = HashSet::new();
        let mut frontier: Vec<usize> = Vec::new();

        // Place the first domino.
        for (i, d) in self.dominoes.iter().enumerate() {
            match residual(&d.top, &[], &d.bottom) {
                Residual::Match => return Some(MatchWitness(vec![i])),
                Residual::Lead(bottom_leads, suffix) => {
                    let over = Overhang {
                        bottom_leads,
                        suffix,
                    };
                    if seen.insert(over.clone()) {
                        arena.push(Node {
                            over,
                            parent: usize::MAX,
                            choice: i,
                        });
                        frontier.push(arena.len() - 1);
                    }
                }
                Residual::Dead => {}
            }
        }

        for depth in 2..=n {
            let mut next = Vec::new();
            for &id in &frontier {
                for (i, d) in self.dominoes.iter().enumerate() {
                    let node = &arena[id];
                    let r = if node.over.bottom_leads {
                        residual(&d.top, &node.over.suffix, &d.bottom)
                    } else {
                        // top leads: roles swap
                        residual(&d.bottom, &node.over.suffix, &d.top)
                    };
                    let r = match (r, node.over.bottom_leads) {
                        (Residual::Lead(flip, s), false) => Residual::Lead(!flip, s),
                        (other, _) => other,
                    };
                    match r {
                        Residual::Match => {
                            let mut path = vec![i];
                            let mut at = id;
                            loop {
                                path.push(arena[at].choice);
                                if arena[at].parent == usize::MAX {
                                    break;
                                }
                                at = arena[at].parent;
                            }
                            path.reverse();
                            return Some(MatchWitness(path));
                        }
                        Residual::Lead(bottom_leads, suffix) => {
                            // Prune overhangs that cannot be consumed in the
                            // remaining steps.
                            let max_shrink = if bottom_leads {
                                shrink_bottom_lead
                            } else {
                                shrink_top_lead
                            };
                            let remaining = (n - depth) as usize;
                            if suffix.len() > remaining.saturating_mul(max_shrink) {
                                continue;
                            }
                            let over = Overhang {
                                bottom_leads,
                                suffix,
                            };
                            if seen.insert(over.clone()) {
                                arena.push(Node {
                                    over,
                                    parent: id,
                                    choice: i,
                                });
                                next.push(arena.len() - 1);
                            }
                        }
                        Residual::Dead => {}
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
}

enum Residual {
    /// Both sides equal: a match.
    Match,
    /// One side leads: `true` means the bottom side leads by `suffix`.
    Lead(bool, Word),
    Dead,
}

/// Consumes `advance` against `lead_suffix ++ extend` and classifies the
/// leftover. `advance` is the word added to the trailing side, `extend` the
/// word added to the leading side.
fn residual(advance: &[TokenId], lead_suffix: &[TokenId], extend: &[TokenId]) -> Residual {
    let total = lead_suffix.len() + extend.len();
    let common = advance.len().min(total);
    for i in 0..common {
        let lead_tok = if i < lead_suffix.len() {
            lead_suffix[i]
        } else {
            extend[i - lead_suffix.len()]
        };
        if advance[i] != lead_tok {
            return Residual::Dead;
        }
    }
    if advance.len() == total {
        return Residual::Match;
    }
    if advance.len() < total {
        // The leading side still leads.
        let mut suffix = Vec::with_capacity(total - advance.len());
        for i in advance.len()..total {
            suffix.push(if i < lead_suffix.len() {
                lead_suffix[i]
            } else {
                extend[i - lead_suffix.len()]
            });
        }
        Residual::Lead(true, suffix)
    } else {
        // The trailing side overtook: flip the lead.
        Residual::Lead(false, advance[total..].to_vec())
    }
}

// ---------------------------------------------------------------------------
// Machine-to-domino reduction
// ---------------------------------------------------------------------------

/// The separator tokens reserved by the reduction.
pub const SEP_BANG: &str = "!";
pub const SEP_STAR: &str = "\u{22c6}"; // ⋆

/// Maps a semi-infinite machine to a domino set whose matches are exactly
/// the halting runs, rendered as separator-delimited instantaneous
/// descriptions.
///
/// Emitted families, in order: the initial domino; one copy domino per
/// symbol; transition dominoes (left movers get one domino per possible
/// left-neighbour symbol, right movers one each); the tape expander; two
/// state-merge dominoes per `(final, y1, y2)` triple; one final domino per
/// final state. Machine symbol and state names colliding with the reserved
/// separators (or with each other) are escaped by prefixing underscores.
pub fn reduce_nhalt_to_pcp(m: &Ntm) -> Result<PcpInstance, PcpError> {
    if m.tape_model() != TapeModel::SemiInfinite {
        return Err(PcpError::NeedsSemiInfinite);
    }
    let mut alphabet: Vec<String> = vec![SEP_BANG.into(), SEP_STAR.into()];
    let mut taken: HashSet<String> = alphabet.iter().cloned().collect();
    let mut escape = |name: &str| -> String {
        let mut n = name.to_string();
        while taken.contains(&n) {
            n.insert(0, '_');
        }
        taken.insert(n.clone());
        n
    };
    let sym_tok: Vec<TokenId> = m
        .symbols()
        .iter()
        .map(|s| {
            alphabet.push(escape(s));
            (alphabet.len() - 1) as TokenId
        })
        .collect();
    let state_tok: Vec<TokenId> = m
        .states()
        .iter()
        .map(|s| {
            alphabet.push(escape(s));
            (alphabet.len() - 1) as TokenId
        })
        .collect();

    const BANG: TokenId = 0;
    const STAR: TokenId = 1;
    let blank = sym_tok[m.blank() as usize];
    let q0 = state_tok[m.initial() as usize];

    let mut dominoes = Vec::new();
    // Initial domino: the only one whose first top and bottom tokens agree.
    dominoes.push(Domino {
        top: vec![BANG],
        bottom: vec![BANG, STAR, q0, STAR, blank, STAR, BANG, STAR],
    });
    // Copy dominoes.
    for &x in &sym_tok {
        dominoes.push(Domino {
            top: vec![STAR, x],
            bottom: vec![x, STAR],
        });
    }
    // Transition dominoes, in declared key and tuple order.
    for ((q, x), tuples) in m.delta() {
        let qt = state_tok[*q as usize];
        let xt = sym_tok[*x as usize];
        for &(q2, y, d) in tuples {
            let q2t = state_tok[q2 as usize];
            let yt = sym_tok[y as usize];
            match d {
                Dir::Right => dominoes.push(Domino {
                    top: vec![STAR, qt, STAR, xt],
                    bottom: vec![yt, STAR, q2t, STAR],
                }),
                Dir::Left => {
                    // One domino per possible left-neighbour symbol; a left
                    // move at the tape end then has no applicable domino,
                    // matching the stuck-equals-non-halting rule.
                    for &ct in &sym_tok {
                        dominoes.push(Domino {
                            top: vec![STAR, ct, STAR, qt, STAR, xt],
                            bottom: vec![q2t, STAR, ct, STAR, yt, STAR],
                        });
                    }
                }
            }
        }
    }
    // Tape expander: every description gains one fresh blank per line.
    dominoes.push(Domino {
        top: vec![STAR, BANG],
        bottom: vec![blank, STAR, BANG, STAR],
    });
    // State-merge dominoes: each removal line swallows two tape cells.
    for &f in m.finals() {
        let ft = state_tok[f as usize];
        for &y1 in &sym_tok {
            for &y2 in &sym_tok {
                dominoes.push(Domino {
                    top: vec![STAR, y1, STAR, ft, STAR, y2],
                    bottom: vec![ft, STAR],
                });
                dominoes.push(Domino {
                    top: vec![STAR, ft, STAR, y1, STAR, y2],
                    bottom: vec![ft, STAR],
                });
            }
        }
    }
    // Final dominoes.
    for &f in m.finals() {
        let ft = state_tok[f as usize];
        dominoes.push(Domino {
            top: vec![STAR, ft, STAR, blank, STAR, BANG, STAR, BANG],
            bottom: vec![BANG],
        });
    }
    PcpInstance::new(alphabet, dominoes)
}

/// The threshold polynomial of the machine-to-domino reduction.
pub fn pcp_threshold(n: u64) -> u64 {
    (n + 1) * (n + 2)
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// Words serialize as plain strings when every token is a single character
/// and as token arrays otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordJson {
    Chars(String),
    Tokens(Vec<String>),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DominoJson {
    pub top: WordJson,
    pub bottom: WordJson,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PcpJson {
    pub alphabet: Vec<String>,
    pub dominoes: Vec<DominoJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessJson {
    pub indices: Vec<usize>,
}

impl PcpInstance {
    pub fn to_json(&self) -> PcpJson {
        let single = self.alphabet.iter().all(|t| t.chars().count() == 1);
        let render = |w: &Word| -> WordJson {
            if single {
                WordJson::Chars(
                    w.iter()
                        .map(|&t| self.alphabet[t as usize].as_str())
                        .collect(),
                )
            } else {
                WordJson::Tokens(
                    w.iter()
                        .map(|&t| self.alphabet[t as usize].clone())
                        .collect(),
                )
            }
        };
        PcpJson {
            alphabet: self.alphabet.clone(),
            dominoes: self
                .dominoes
                .iter()
                .map(|d| DominoJson {
                    top: render(&d.top),
                    bottom: render(&d.bottom),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PcpJson) -> Result<Self, PcpError> {
        let ids: HashMap<&str, TokenId> = j
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as TokenId))
            .collect();
        let decode = |w: &WordJson| -> Result<Word, PcpError> {
            let toks: Vec<String> = match w {
                WordJson::Chars(s) => s.chars().map(|c| c.to_string()).collect(),
                WordJson::Tokens(v) => v.clone(),
            };
            toks.iter()
                .map(|t| {
                    ids.get(t.as_str())
                        .copied()
                        .ok_or_else(|| PcpError::UnknownToken(t.clone()))
                })
                .collect()
        };
        let mut ds = Vec::new();
        for d in &j.dominoes {
            ds.push(Domino {
                top: decode(&d.top)?,
                bottom: decode(&d.bottom)?,
            });
        }
        PcpInstance::new(j.alphabet.clone(), ds)
    }
}

impl MatchWitness {
    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            indices: self.0.iter().map(|i| i + 1).collect(),
        }
    }

    pub fn from_json(j: &WitnessJson) -> Result<Self, PcpError> {
        if j.indices.is_empty() {
            return Err(PcpError::EmptyWitness);
        }
        let mut out = Vec::with_capacity(j.indices.len());
        for &i in &j.indices {
            if i == 0 {
                return Err(PcpError::IndexOutOfRange(0, 0));
            }
            out.push(i - 1);
        }
        Ok(MatchWitness(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turing::{CorpusSpec, generate_corpus};

    fn ab_instance() -> PcpInstance {
        PcpInstance::from_strs(&["a", "b"], &[("a", "ab"), ("ba", "a")]).unwrap()
    }

    fn one_step_halter() -> Ntm {
        Ntm::new(
            vec!["_".into()],
            "_",
            vec!["q0".into(), "qf".into()],
            "q0",
            &["qf".into()],
            TapeModel::SemiInfinite,
            &[(
                ("q0".into(), "_".into()),
                vec![("qf".into(), "_".into(), Dir::Right)],
            )],
        )
        .unwrap()
    }

    #[test]
    fn verify_match_examples() {
        let inst = ab_instance();
        assert!(inst
            .verify_match(&MatchWitness(vec![0, 1]))
            .unwrap());
        let single = PcpInstance::from_strs(&["a", "b"], &[("a", "ab")]).unwrap();
        assert!(!single.verify_match(&MatchWitness(vec![0])).unwrap());
        let identical = PcpInstance::from_strs(&["a"], &[("a", "a")]).unwrap();
        assert!(identical.verify_match(&MatchWitness(vec![0])).unwrap());
        assert_eq!(
            inst.verify_match(&MatchWitness(vec![5])),
            Err(PcpError::IndexOutOfRange(6, 2))
        );
    }

    #[test]
    fn solve_bpcp_examples() {
        let inst = ab_instance();
        assert_eq!(inst.solve_bpcp(2), Some(MatchWitness(vec![0, 1])));
        assert_eq!(inst.solve_bpcp(1), None);
        // The bottom can never catch up: overhang grows monotonically.
        let hopeless = PcpInstance::from_strs(&["a", "b"], &[("ab", "a")]).unwrap();
        assert_eq!(hopeless.solve_bpcp(10), None);
    }

    /// Brute-force oracle: enumerate index sequences in length-then-lex
    /// order, so the first match found is the canonical witness.
    fn brute_min_match(inst: &PcpInstance, n: u64) -> Option<MatchWitness> {
        let k = inst.len();
        for len in 1..=(n as usize) {
            let mut idx = vec![0usize; len];
            'seq: loop {
                if inst.verify_match(&MatchWitness(idx.clone())).unwrap() {
                    return Some(MatchWitness(idx));
                }
                let mut pos = len;
                loop {
                    if pos == 0 {
                        break 'seq;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < k {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        }
        None
    }

    #[test]
    fn solver_agrees_with_brute_force_on_small_instances() {
        let mut seed = 0xfeed_beefu64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 33) as usize
        };
        for _ in 0..40 {
            let k = 1 + next() % 3;
            let mut dominoes = Vec::new();
            for _ in 0..k {
                let mut top = Vec::new();
                let mut bottom = Vec::new();
                let tl = next() % 3;
                let bl = if tl == 0 { 1 + next() % 2 } else { next() % 3 };
                for _ in 0..tl {
                    top.push((next() % 2) as TokenId);
                }
                for _ in 0..bl {
                    bottom.push((next() % 2) as TokenId);
                }
                dominoes.push(Domino { top, bottom });
            }
            let inst = PcpInstance::new(vec!["a".into(), "b".into()], dominoes).unwrap();
            let solver = inst.solve_bpcp(5);
            let brute = brute_min_match(&inst, 5);
            // Not just the length: the canonical (shortest, then
            // lexicographically smallest) witness itself must agree.
            assert_eq!(solver, brute, "instance {:?}", inst);
            if let Some(w) = solver {
                assert!(inst.verify_match(&w).unwrap(), "witness must verify");
            }
        }
    }

    #[test]
    fn reduction_one_step_halter_matches_at_six() {
        let m = one_step_halter();
        let inst = reduce_nhalt_to_pcp(&m).unwrap();
        let w = inst.solve_bpcp(6).expect("halting machine must match");
        assert_eq!(w.len(), 6);
        assert!(inst.verify_match(&w).unwrap());
        assert_eq!(inst.solve_bpcp(5), None, "no match shorter than p(1)");
    }

    #[test]
    fn reduction_immediate_halter_matches_in_two() {
        // A machine whose initial state is already final halts in zero
        // steps; the instance matches with the seed and closing dominoes.
        let m = Ntm::new(
            vec!["_".into()],
            "_",
            vec!["q0".into()],
            "q0",
            &["q0".into()],
            TapeModel::SemiInfinite,
            &[],
        )
        .unwrap();
        assert_eq!(m.min_halting_time(2), Some(0));
        let inst = reduce_nhalt_to_pcp(&m).unwrap();
        let w = inst.solve_bpcp(2).expect("immediate halter matches");
        assert_eq!(w.len(), 2);
        assert!(inst.verify_match(&w).unwrap());
        assert_eq!(inst.solve_bpcp(1), None);
    }

    #[test]
    fn reduction_looper_never_matches() {
        let m = Ntm::new(
            vec!["_".into()],
            "_",
            vec!["q0".into(), "qf".into()],
            "q0",
            &["qf".into()],
            TapeModel::SemiInfinite,
            &[(
                ("q0".into(), "_".into()),
                vec![("q0".into(), "_".into(), Dir::Right)],
            )],
        )
        .unwrap();
        let inst = reduce_nhalt_to_pcp(&m).unwrap();
        assert_eq!(inst.solve_bpcp(20), None);
    }

    #[test]
    fn reduction_has_unique_seed_domino() {
        for m in generate_corpus(&CorpusSpec {
            limit: 30,
            ..CorpusSpec::default()
        })
        .unwrap()
        {
            let inst = reduce_nhalt_to_pcp(&m).unwrap();
            let seeds = inst
                .dominoes()
                .iter()
                .filter(|d| match (d.top.first(), d.bottom.first()) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                })
                .count();
            assert_eq!(seeds, 1, "exactly the initial domino seeds a match");
        }
    }

    #[test]
    fn reduction_iff_law_on_a_small_corpus() {
        let corpus = generate_corpus(&CorpusSpec {
            limit: 25,
            seed: 0xabcdef,
            ..CorpusSpec::default()
        })
        .unwrap();
        for m in &corpus {
            let inst = reduce_nhalt_to_pcp(m).unwrap();
            let min_match = inst.solve_bpcp(pcp_threshold(3)).map(|w| w.len() as u64);
            for n in 0..=3u64 {
                let halts = m.halts_exists_within(n).is_some();
                let matched = min_match.is_some_and(|l| l <= pcp_threshold(n));
                assert_eq!(
                    halts, matched,
                    "halting within {n} must equal matching within {}",
                    pcp_threshold(n)
                );
            }
            // Sandwich: a machine halting at n* has its minimal match inside
            // (n*(n*+1), (n*+1)(n*+2)].
            if let Some(nstar) = m.min_halting_time(3) {
                let l = min_match.expect("halting machines match");
                assert!(l > nstar * (nstar + 1), "match {l} too short for {nstar}");
                assert!(l <= pcp_threshold(nstar));
            }
        }
    }

    #[test]
    fn bounded_match_is_monotone() {
        let inst = ab_instance();
        let mut prev = false;
        for n in 0..=6 {
            let now = inst.solve_bpcp(n).is_some();
            assert!(!prev || now);
            prev = now;
        }
    }

    #[test]
    fn separator_collisions_are_escaped() {
        let m = Ntm::new(
            vec!["!".into()],
            "!",
            vec!["\u{22c6}".into(), "qf".into()],
            "\u{22c6}",
            &["qf".into()],
            TapeModel::SemiInfinite,
            &[(
                ("\u{22c6}".into(), "!".into()),
                vec![("qf".into(), "!".into(), Dir::Right)],
            )],
        )
        .unwrap();
        let inst = reduce_nhalt_to_pcp(&m).unwrap();
        // Escaped names joined the alphabet; the reserved separators stay.
        assert!(inst.alphabet().contains(&"_!".to_string()));
        assert!(inst.alphabet().contains(&"_\u{22c6}".to_string()));
        let w = inst.solve_bpcp(6).unwrap();
        assert_eq!(w.len(), 6);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn instance_strategy() -> impl Strategy<Value = PcpInstance> {
            let word = proptest::collection::vec(0u16..2, 0..3);
            let domino = (word.clone(), word).prop_filter_map("both words empty", |(t, b)| {
                if t.is_empty() && b.is_empty() {
                    None
                } else {
                    Some(Domino { top: t, bottom: b })
                }
            });
            proptest::collection::vec(domino, 1..4).prop_map(|dominoes| {
                PcpInstance::new(vec!["a".into(), "b".into()], dominoes).unwrap()
            })
        }

        proptest! {
            /// Every witness the solver returns passes the verifier, and
            /// acceptance is monotone in the bound.
            #[test]
            fn solver_witnesses_verify_and_acceptance_is_monotone(
                inst in instance_strategy(),
            ) {
                let mut prev = false;
                for n in 0..=5u64 {
                    let found = inst.solve_bpcp(n);
                    if let Some(w) = &found {
                        prop_assert!(inst.verify_match(w).unwrap());
                        prop_assert!(w.len() as u64 <= n);
                    }
                    let now = found.is_some();
                    prop_assert!(!prev || now);
                    prev = now;
                }
            }
        }
    }

    #[test]
    fn json_round_trip_and_witness_indices_are_one_based() {
        let inst = ab_instance();
        let j = inst.to_json();
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains("\"ab\""), "single-char words render as strings");
        let back = PcpInstance::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(inst, back);

        let w = MatchWitness(vec![0, 1]);
        let wj = w.to_json();
        assert_eq!(wj.indices, vec![1, 2]);
        assert_eq!(MatchWitness::from_json(&wj).unwrap(), w);

        let reduced = reduce_nhalt_to_pcp(&one_step_halter()).unwrap();
        let rj = serde_json::to_string(&reduced.to_json()).unwrap();
        let back = PcpInstance::from_json(&serde_json::from_str(&rj).unwrap()).unwrap();
        assert_eq!(reduced, back);
    }
}
