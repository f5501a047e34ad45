use std::collections::HashMap;

use super::{AutomataError, Symbol};

/// Ordered finite set of symbols. The order is the insertion order and is
/// used for every tie-break that depends on "input ordering".
#[derive(Clone, Debug)]
pub struct Alphabet<T: Symbol> {
    symbols: Vec<T>,
    index: HashMap<T, usize>,
}

impl<T: Symbol> Alphabet<T> {
    pub fn new<It: IntoIterator<Item = T>>(symbols: It) -> Result<Self, AutomataError> {
        let mut out = Self {
            symbols: Vec::new(),
            index: HashMap::new(),
        };
        for s in symbols {
            if out.index.contains_key(&s) {
                return Err(AutomataError::DuplicateSymbol(s.to_string()));
            }
            out.index.insert(s.clone(), out.symbols.len());
            out.symbols.push(s);
        }
        if out.symbols.is_empty() {
            return Err(AutomataError::EmptyAlphabet);
        }
        Ok(out)
    }

    /// Builds an alphabet from possibly repeated symbols, keeping first occurrences.
    pub(crate) fn dedup<It: IntoIterator<Item = T>>(symbols: It) -> Result<Self, AutomataError> {
        let mut seen = Vec::new();
        let mut index = HashMap::new();
        for s in symbols {
            if !index.contains_key(&s) {
                index.insert(s.clone(), seen.len());
                seen.push(s);
            }
        }
        Self::new(seen)
    }

    pub fn index_of(&self, symbol: &T) -> Result<usize, AutomataError> {
        self.index
            .get(symbol)
            .copied()
            .ok_or_else(|| AutomataError::UnknownSymbol(symbol.to_string()))
    }

    pub fn contains(&self, symbol: &T) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn get(&self, idx: usize) -> &T {
        &self.symbols[idx]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.symbols.iter()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.symbols
    }

    /// Same symbols, ignoring order.
    pub fn same_set(&self, other: &Self) -> bool {
        self.len() == other.len() && self.symbols.iter().all(|s| other.contains(s))
    }
}

impl<T: Symbol> PartialEq for Alphabet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl<T: Symbol> Eq for Alphabet<T> {}
