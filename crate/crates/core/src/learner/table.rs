use std::collections::{HashMap, HashSet};

use crate::automata::{MealyMachine, Symbol, Word};

use super::{LearnError, Sul};

/// Output suffixes recorded for one prefix, one entry per suffix in `E`.
pub type Row<O> = Vec<Vec<O>>;

/// L* observation table over prefixes `S`, suffixes `E` and cell map `T`.
///
/// Cells are cached by the full query word, so a membership query is issued
/// only once per distinct `prefix · suffix`.
#[derive(Clone, Debug)]
pub struct ObservationTable<I: Symbol, O: Symbol> {
    inputs: Vec<I>,
    prefixes: Vec<Word<I>>,
    prefix_set: HashSet<Word<I>>,
    suffixes: Vec<Word<I>>,
    cache: HashMap<Word<I>, Vec<O>>,
    membership_queries: u64,
}

impl<I: Symbol, O: Symbol> ObservationTable<I, O> {
    /// `S = {ε}`, `E` = every single-symbol suffix.
    pub fn new(inputs: Vec<I>) -> Self {
        let suffixes = inputs.iter().map(|a| vec![a.clone()]).collect();
        Self {
            inputs,
            prefixes: vec![Vec::new()],
            prefix_set: HashSet::from([Vec::new()]),
            suffixes,
            cache: HashMap::new(),
            membership_queries: 0,
        }
    }

    pub fn inputs(&self) -> &[I] {
        &self.inputs
    }

    pub fn prefixes(&self) -> &[Word<I>] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[Word<I>] {
        &self.suffixes
    }

    pub fn membership_queries(&self) -> u64 {
        self.membership_queries
    }

    fn concat(a: &[I], b: &[I]) -> Word<I> {
        let mut w = Vec::with_capacity(a.len() + b.len());
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        w
    }

    /// Every word of `S ∪ S·Σ`, in table order.
    fn extended_prefixes(&self) -> Vec<Word<I>> {
        let mut out = self.prefixes.clone();
        for s in &self.prefixes {
            for a in &self.inputs {
                let w = Self::concat(s, std::slice::from_ref(a));
                if !self.prefix_set.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Answers every missing `(prefix, suffix)` cell with a membership query.
    pub fn fill<S>(&mut self, sul: &mut S) -> Result<(), LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        for p in self.extended_prefixes() {
            for e in &self.suffixes {
                let w = Self::concat(&p, e);
                if !self.cache.contains_key(&w) {
                    let out = sul.query(&w)?;
                    self.membership_queries += 1;
                    self.cache.insert(w, out);
                }
            }
        }
        Ok(())
    }

    /// `T(prefix, suffix)`; `None` while the cell is unfilled.
    pub fn cell(&self, prefix: &[I], suffix: &[I]) -> Option<&[O]> {
        self.cache
            .get(&Self::concat(prefix, suffix))
            .map(|out| &out[prefix.len()..])
    }

    pub fn row(&self, prefix: &[I]) -> Option<Row<O>> {
        self.suffixes
            .iter()
            .map(|e| self.cell(prefix, e).map(<[O]>::to_vec))
            .collect()
    }

    fn filled_row(&self, prefix: &[I]) -> Result<Row<O>, LearnError> {
        self.row(prefix).ok_or(LearnError::Unfilled)
    }

    fn add_prefix(&mut self, w: Word<I>) -> bool {
        if self.prefix_set.insert(w.clone()) {
            self.prefixes.push(w);
            true
        } else {
            false
        }
    }

    /// First `s·a` whose row has no representative in `S`.
    pub fn find_unclosed(&self) -> Result<Option<Word<I>>, LearnError> {
        let rows: HashSet<Row<O>> = self
            .prefixes
            .iter()
            .map(|s| self.filled_row(s))
            .collect::<Result<_, _>>()?;
        for s in &self.prefixes {
            for a in &self.inputs {
                let w = Self::concat(s, std::slice::from_ref(a));
                if !rows.contains(&self.filled_row(&w)?) {
                    return Ok(Some(w));
                }
            }
        }
        Ok(None)
    }

    /// First suffix `a·e` separating two prefixes with equal rows.
    pub fn find_inconsistency(&self) -> Result<Option<Word<I>>, LearnError> {
        let rows: Vec<Row<O>> = self
            .prefixes
            .iter()
            .map(|s| self.filled_row(s))
            .collect::<Result<_, _>>()?;
        for i in 0..self.prefixes.len() {
            for j in i + 1..self.prefixes.len() {
                if rows[i] != rows[j] {
                    continue;
                }
                let (s1, s2) = (&self.prefixes[i], &self.prefixes[j]);
                for a in &self.inputs {
                    for e in &self.suffixes {
                        let ae = Self::concat(std::slice::from_ref(a), e);
                        let o1 = self.cell(s1, &ae).ok_or(LearnError::Unfilled)?;
                        let o2 = self.cell(s2, &ae).ok_or(LearnError::Unfilled)?;
                        if o1 != o2 && !self.suffixes.contains(&ae) {
                            return Ok(Some(ae));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Moves unclosed rows into `S` until the table is closed. Returns the
    /// number of prefixes added.
    pub fn close<S>(&mut self, sul: &mut S) -> Result<usize, LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        self.fill(sul)?;
        let mut added = 0;
        while let Some(w) = self.find_unclosed()? {
            self.add_prefix(w);
            added += 1;
            self.fill(sul)?;
        }
        Ok(added)
    }

    /// Adds separating suffixes until the table is consistent. Returns the
    /// number of suffixes added.
    pub fn make_consistent<S>(&mut self, sul: &mut S) -> Result<usize, LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        self.fill(sul)?;
        let mut added = 0;
        while let Some(e) = self.find_inconsistency()? {
            self.suffixes.push(e);
            added += 1;
            self.fill(sul)?;
        }
        Ok(added)
    }

    /// Alternates closing and consistency repair until both hold.
    pub fn stabilize<S>(&mut self, sul: &mut S) -> Result<(), LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        loop {
            let grew = self.close(sul)? + self.make_consistent(sul)?;
            if grew == 0 {
                return Ok(());
            }
        }
    }

    /// Hypothesis whose states are the distinct rows of `S`.
    pub fn build_hypothesis(&self) -> Result<MealyMachine<I, O>, LearnError> {
        if self.find_unclosed()?.is_some() {
            return Err(LearnError::NotClosed);
        }
        if self.find_inconsistency()?.is_some() {
            return Err(LearnError::Inconsistent);
        }
        let mut ids: HashMap<Row<O>, usize> = HashMap::new();
        let mut reps: Vec<&Word<I>> = Vec::new();
        for s in &self.prefixes {
            let row = self.filled_row(s)?;
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(row) {
                e.insert(reps.len());
                reps.push(s);
            }
        }
        let mut rows = Vec::with_capacity(reps.len());
        for s in reps {
            let mut out = Vec::with_capacity(self.inputs.len());
            for a in &self.inputs {
                let sa = Self::concat(s, std::slice::from_ref(a));
                let dst = ids[&self.filled_row(&sa)?];
                let o = self
                    .cell(s, std::slice::from_ref(a))
                    .ok_or(LearnError::Unfilled)?[0]
                    .clone();
                out.push((dst, o));
            }
            rows.push(out);
        }
        Ok(MealyMachine::new(self.inputs.clone(), 0, rows)?)
    }

    /// Classic L* counterexample handling: every prefix of `ce` joins `S`.
    ///
    /// Fails if `ce` does not actually separate `hypothesis` from the SUL.
    pub fn process_counterexample<S>(
        &mut self,
        hypothesis: &MealyMachine<I, O>,
        ce: &[I],
        sul: &mut S,
    ) -> Result<usize, LearnError>
    where
        S: Sul<Input = I, Output = O>,
    {
        let expected = sul.query(ce)?;
        self.membership_queries += 1;
        let got = hypothesis.run(ce)?;
        if got == expected {
            return Err(LearnError::NotACounterexample(
                ce.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
            ));
        }
        self.cache.insert(ce.to_vec(), expected);
        let mut added = 0;
        for n in 1..=ce.len() {
            if self.add_prefix(ce[..n].to_vec()) {
                added += 1;
            }
        }
        self.fill(sul)?;
        Ok(added)
    }

    /// Fixed-width text dump in the usual table layout, outputs rendered by
    /// `render`.
    pub fn render(&self, render: impl Fn(&O) -> String) -> String {
        let word = |w: &[I]| {
            let inner: Vec<String> = w.iter().map(|a| a.to_string()).collect();
            format!("({})", inner.join(","))
        };
        let mut out = String::from("prefix");
        for e in &self.suffixes {
            out.push('\t');
            out.push_str(&word(e));
        }
        out.push('\n');
        for p in self.extended_prefixes() {
            out.push_str(&word(&p));
            for e in &self.suffixes {
                out.push('\t');
                match self.cell(&p, e) {
                    Some(o) => {
                        let cells: Vec<String> = o.iter().map(&render).collect();
                        out.push_str(&cells.join(" "));
                    }
                    None => out.push('?'),
                }
            }
            out.push('\n');
        }
        out
    }
}
