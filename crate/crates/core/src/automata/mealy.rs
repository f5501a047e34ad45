use std::collections::{HashMap, VecDeque};

use super::{Alphabet, AutomataError, Symbol, Word};

/// Dense state identifier.
pub type StateId = usize;

/// Outcome of an exact equivalence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence<I> {
    Equal,
    /// Shortest distinguishing word; ties broken lexicographically by the
    /// input ordering of the left-hand machine.
    Counterexample(Word<I>),
}

impl<I> Equivalence<I> {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equivalence::Equal)
    }
}

/// Deterministic, input-complete Mealy machine.
///
/// Outputs are stored as indices into the output alphabet; the transition
/// table is indexed by `[state][input index]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine<I: Symbol, O: Symbol> {
    inputs: Alphabet<I>,
    outputs: Alphabet<O>,
    initial: StateId,
    delta: Vec<Vec<(StateId, usize)>>,
}

impl<I: Symbol, O: Symbol> MealyMachine<I, O> {
    /// Builds a machine from one row per state, each row holding one
    /// `(successor, output)` pair per input symbol in alphabet order.
    pub fn new(
        inputs: Vec<I>,
        initial: StateId,
        rows: Vec<Vec<(StateId, O)>>,
    ) -> Result<Self, AutomataError> {
        let inputs = Alphabet::new(inputs)?;
        let count = rows.len();
        if initial >= count {
            return Err(AutomataError::UnknownState {
                state: initial,
                count,
            });
        }
        for (state, row) in rows.iter().enumerate() {
            if row.len() != inputs.len() {
                return Err(AutomataError::Incomplete {
                    state,
                    found: row.len(),
                    expected: inputs.len(),
                });
            }
            if let Some(&(dst, _)) = row.iter().find(|(dst, _)| *dst >= count) {
                return Err(AutomataError::UnknownState { state: dst, count });
            }
        }
        let outputs = Alphabet::dedup(rows.iter().flatten().map(|(_, o)| o.clone()))?;
        let delta = rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(dst, o)| (dst, outputs.index_of(&o).expect("collected above")))
                    .collect()
            })
            .collect();
        Ok(Self {
            inputs,
            outputs,
            initial,
            delta,
        })
    }

    pub fn inputs(&self) -> &Alphabet<I> {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet<O> {
        &self.outputs
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    fn check_state(&self, state: StateId) -> Result<(), AutomataError> {
        if state < self.delta.len() {
            Ok(())
        } else {
            Err(AutomataError::UnknownState {
                state,
                count: self.delta.len(),
            })
        }
    }

    pub fn step(&self, state: StateId, input: &I) -> Result<(StateId, &O), AutomataError> {
        self.check_state(state)?;
        let i = self.inputs.index_of(input)?;
        Ok(self.step_index(state, i))
    }

    pub(crate) fn step_index(&self, state: StateId, input: usize) -> (StateId, &O) {
        let (dst, out) = self.delta[state][input];
        (dst, self.outputs.get(out))
    }

    /// Output sequence produced from the initial state.
    pub fn run(&self, word: &[I]) -> Result<Vec<O>, AutomataError> {
        self.run_from(self.initial, word).map(|(_, out)| out)
    }

    /// Runs `word` from `state`, returning the reached state and the outputs.
    pub fn run_from(&self, state: StateId, word: &[I]) -> Result<(StateId, Vec<O>), AutomataError> {
        self.check_state(state)?;
        let mut cur = state;
        let mut out = Vec::with_capacity(word.len());
        for a in word {
            let (next, o) = self.step(cur, a)?;
            out.push(o.clone());
            cur = next;
        }
        Ok((cur, out))
    }

    /// All transitions as `(src, input, dst, output)` in state/input order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &I, StateId, &O)> + '_ {
        self.delta.iter().enumerate().flat_map(move |(src, row)| {
            row.iter().enumerate().map(move |(i, &(dst, o))| {
                (src, self.inputs.get(i), dst, self.outputs.get(o))
            })
        })
    }

    /// Renumbers states in BFS order from the initial state (inputs in
    /// alphabet order) and drops unreachable states. The output alphabet is
    /// re-derived in order of first use, so equal behaviour yields equal text.
    pub fn canonical(&self) -> Self {
        let order = self.bfs_order();
        let mut renum = vec![usize::MAX; self.delta.len()];
        for (new, &old) in order.iter().enumerate() {
            renum[old] = new;
        }
        let rows = order
            .iter()
            .map(|&old| {
                (0..self.inputs.len())
                    .map(|i| {
                        let (dst, o) = self.step_index(old, i);
                        (renum[dst], o.clone())
                    })
                    .collect()
            })
            .collect();
        Self::new(self.inputs.as_slice().to_vec(), 0, rows).expect("canonical form of a valid machine")
    }

    fn bfs_order(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.delta.len()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for &(dst, _) in &self.delta[s] {
                if !seen[dst] {
                    seen[dst] = true;
                    order.push(dst);
                }
            }
        }
        order
    }

    /// Shortest (then lexicographically least) access word for every state
    /// reachable from the initial state; `None` for unreachable states.
    pub fn access_words(&self) -> Vec<Option<Word<I>>> {
        let mut words: Vec<Option<Word<I>>> = vec![None; self.delta.len()];
        words[self.initial] = Some(Vec::new());
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for i in 0..self.inputs.len() {
                let (dst, _) = self.step_index(s, i);
                if words[dst].is_none() {
                    let mut w = words[s].clone().expect("visited");
                    w.push(self.inputs.get(i).clone());
                    words[dst] = Some(w);
                    queue.push_back(dst);
                }
            }
        }
        words
    }

    /// Minimal equivalent machine, by partition refinement on
    /// output-then-successor signatures. Result is in canonical form.
    pub fn minimize(&self) -> Self {
        let m = self.canonical();
        let n = m.num_states();
        let k = m.inputs.len();

        let mut class = renumber((0..n).map(|s| m.delta[s].iter().map(|&(_, o)| o).collect::<Vec<_>>()));
        let mut classes = class.iter().max().map_or(0, |c| c + 1);
        loop {
            let next = renumber((0..n).map(|s| {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(class[s]);
                sig.extend(m.delta[s].iter().map(|&(dst, _)| class[dst]));
                sig
            }));
            let next_classes = next.iter().max().map_or(0, |c| c + 1);
            class = next;
            if next_classes == classes {
                break;
            }
            classes = next_classes;
        }

        let mut rep = vec![usize::MAX; classes];
        for s in (0..n).rev() {
            rep[class[s]] = s;
        }
        let rows = rep
            .iter()
            .map(|&s| {
                (0..k)
                    .map(|i| {
                        let (dst, o) = m.step_index(s, i);
                        (class[dst], o.clone())
                    })
                    .collect()
            })
            .collect();
        Self::new(m.inputs.as_slice().to_vec(), class[m.initial], rows)
            .expect("quotient of a valid machine")
            .canonical()
    }

    /// Exact equivalence by breadth-first search over the product machine.
    pub fn equivalent(&self, other: &Self) -> Result<Equivalence<I>, AutomataError> {
        if !self.inputs.same_set(&other.inputs) {
            return Err(AutomataError::AlphabetMismatch);
        }
        let map: Vec<usize> = self
            .inputs
            .iter()
            .map(|a| other.inputs.index_of(a).expect("same input set"))
            .collect();
        Ok(
            match product_search(self, self.initial, other, other.initial, &map) {
                Some(w) => Equivalence::Counterexample(w),
                None => Equivalence::Equal,
            },
        )
    }

    /// Shortest word on which states `a` and `b` of this machine produce
    /// different outputs, or `None` if they are equivalent.
    pub fn distinguish(&self, a: StateId, b: StateId) -> Result<Option<Word<I>>, AutomataError> {
        self.check_state(a)?;
        self.check_state(b)?;
        let map: Vec<usize> = (0..self.inputs.len()).collect();
        Ok(product_search(self, a, self, b, &map))
    }
}

fn renumber<K: Eq + std::hash::Hash>(keys: impl Iterator<Item = K>) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.map(|key| {
        let next = ids.len();
        *ids.entry(key).or_insert(next)
    })
    .collect()
}

fn product_search<I: Symbol, O: Symbol>(
    left: &MealyMachine<I, O>,
    start_left: StateId,
    right: &MealyMachine<I, O>,
    start_right: StateId,
    input_map: &[usize],
) -> Option<Word<I>> {
    let start = (start_left, start_right);
    type Pair = (StateId, StateId);
    let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);

    let path_to = |parent: &HashMap<_, Option<((StateId, StateId), usize)>>, mut node, last: usize| {
        let mut idx = vec![last];
        while let Some(Some((prev, i))) = parent.get(&node) {
            idx.push(*i);
            node = *prev;
        }
        idx.reverse();
        idx.into_iter().map(|i| left.inputs.get(i).clone()).collect::<Vec<_>>()
    };

    while let Some(node @ (l, r)) = queue.pop_front() {
        for (i, &j) in input_map.iter().enumerate() {
            let (ld, lo) = left.step_index(l, i);
            let (rd, ro) = right.step_index(r, j);
            if lo != ro {
                return Some(path_to(&parent, node, i));
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry((ld, rd)) {
                e.insert(Some((node, i)));
                queue.push_back((ld, rd));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two states; output is the id of the current state.
    fn toggle() -> MealyMachine<char, String> {
        MealyMachine::new(
            vec!['a'],
            0,
            vec![vec![(1, "0".to_string())], vec![(0, "1".to_string())]],
        )
        .unwrap()
    }

    fn constant() -> MealyMachine<char, String> {
        MealyMachine::new(vec!['a'], 0, vec![vec![(0, "0".to_string())]]).unwrap()
    }

    #[test]
    fn step_toggle() {
        let m = toggle();
        let (dst, out) = m.step(0, &'a').unwrap();
        assert_eq!((dst, out.as_str()), (1, "0"));
    }

    #[test]
    fn step_identity_machine() {
        let m = MealyMachine::new(vec!['x', 'y'], 0, vec![vec![(0, 'x'), (0, 'y')]]).unwrap();
        assert_eq!(m.step(0, &'x').unwrap(), (0, &'x'));
    }

    #[test]
    fn step_rejects_unknown_symbol_and_state() {
        let m = toggle();
        assert_eq!(
            m.step(0, &'z').unwrap_err(),
            AutomataError::UnknownSymbol("z".into())
        );
        assert!(matches!(
            m.step(7, &'a').unwrap_err(),
            AutomataError::UnknownState { state: 7, count: 2 }
        ));
        assert!(m.run(&['a', 'b']).is_err());
    }

    #[test]
    fn run_toggle() {
        let m = toggle();
        assert!(m.run(&[]).unwrap().is_empty());
        assert_eq!(m.run(&['a', 'a', 'a']).unwrap(), vec!["0", "1", "0"]);
    }

    #[test]
    fn run_agrees_with_step() {
        let m = toggle();
        let word = ['a'; 5];
        let mut s = m.initial();
        let mut outs = Vec::new();
        for a in &word {
            let (n, o) = m.step(s, a).unwrap();
            outs.push(o.clone());
            s = n;
        }
        assert_eq!(m.run(&word).unwrap(), outs);
    }

    #[test]
    fn construction_rejects_incomplete_rows() {
        let err = MealyMachine::new(vec!['a', 'b'], 0, vec![vec![(0, 1u8)]]).unwrap_err();
        assert!(matches!(err, AutomataError::Incomplete { .. }));
        let err = MealyMachine::new(vec!['a'], 0, vec![vec![(3, 1u8)]]).unwrap_err();
        assert!(matches!(err, AutomataError::UnknownState { .. }));
    }

    #[test]
    fn minimize_merges_identical_states() {
        // States 0 and 1 both output "x" and loop between each other.
        let m = MealyMachine::new(vec!['a'], 0, vec![vec![(1, 'x')], vec![(0, 'x')]]).unwrap();
        let min = m.minimize();
        assert_eq!(min.num_states(), 1);
        assert!(m.equivalent(&min).unwrap().is_equal());
    }

    #[test]
    fn minimize_keeps_toggle() {
        let m = toggle();
        assert_eq!(m.minimize().num_states(), 2);
        assert_eq!(m.minimize().minimize().num_states(), 2);
    }

    #[test]
    fn equivalent_toggle_vs_constant() {
        let v = toggle().equivalent(&constant()).unwrap();
        // outputs agree on "a" (both "0") and differ on "aa".
        assert_eq!(v, Equivalence::Counterexample(vec!['a', 'a']));
        assert!(toggle().equivalent(&toggle()).unwrap().is_equal());
    }

    #[test]
    fn equivalent_rejects_alphabet_mismatch() {
        let other = MealyMachine::new(vec!['b'], 0, vec![vec![(0, "0".to_string())]]).unwrap();
        assert_eq!(
            toggle().equivalent(&other).unwrap_err(),
            AutomataError::AlphabetMismatch
        );
    }

    #[test]
    fn counterexample_is_lexicographically_least() {
        // Outputs differ only on 'b' after any first symbol.
        let left = MealyMachine::new(
            vec!['a', 'b'],
            0,
            vec![vec![(1, 0u8), (1, 0)], vec![(1, 0), (1, 1)]],
        )
        .unwrap();
        let right = MealyMachine::new(vec!['a', 'b'], 0, vec![vec![(0, 0u8), (0, 0)]]).unwrap();
        assert_eq!(
            left.equivalent(&right).unwrap(),
            Equivalence::Counterexample(vec!['a', 'b'])
        );
    }

    #[test]
    fn canonical_prunes_unreachable_states() {
        let m = MealyMachine::new(
            vec!['a'],
            1,
            vec![vec![(0, 'q')], vec![(2, 'x')], vec![(1, 'y')]],
        )
        .unwrap();
        let c = m.canonical();
        assert_eq!(c.num_states(), 2);
        assert_eq!(c.initial(), 0);
        assert_eq!(c.outputs().as_slice(), &['x', 'y']);
        assert!(c.equivalent(&m).unwrap().is_equal());
    }

    #[test]
    fn access_words_follow_bfs() {
        let m = toggle();
        let words = m.access_words();
        assert_eq!(words, vec![Some(vec![]), Some(vec!['a'])]);
    }
}
