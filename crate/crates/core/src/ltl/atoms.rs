use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of atomic propositions; label sets are `u32` bitmasks
/// and products enumerate alphabets of size `2^M`.
pub const MAX_ATOMS: usize = 16;

/// A set of atomic propositions, stored as a bitmask over an [`AtomSet`] ordering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub u32);

impl Label {
    pub const EMPTY: Label = Label(0);

    pub fn contains(self, atom: usize) -> bool {
        self.0 >> atom & 1 == 1
    }

    pub fn with(self, atom: usize) -> Label {
        Label(self.0 | 1 << atom)
    }

    pub fn without(self, atom: usize) -> Label {
        Label(self.0 & !(1 << atom))
    }

    /// Hamming distance between the characteristic vectors.
    pub fn distance(self, other: Label) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

/// Ordered, duplicate-free list of proposition names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl AtomSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = AtomSet::default();
        for name in names {
            let name = name.into();
            if set.index.contains_key(&name) {
                return Err(Error::DuplicateAtom(name));
            }
            set.index.insert(name.clone(), set.names.len());
            set.names.push(name);
        }
        if set.names.len() > MAX_ATOMS {
            return Err(Error::TooManyAtoms(set.names.len()));
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownAtom(name.to_string()))
    }

    /// Number of letters in the alphabet `2^atoms`.
    pub fn alphabet_size(&self) -> u32 {
        1 << self.names.len()
    }

    /// Mask with one bit per declared atom.
    pub fn full_mask(&self) -> u32 {
        (1u64 << self.names.len()).wrapping_sub(1) as u32
    }

    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> Result<Label> {
        let mut label = Label::EMPTY;
        for n in names {
            label = label.with(self.require(n.as_ref())?);
        }
        Ok(label)
    }

    pub fn label_names(&self, label: Label) -> Vec<String> {
        (0..self.len())
            .filter(|&i| label.contains(i))
            .map(|i| self.names[i].clone())
            .collect()
    }

    /// Characteristic 0/1 vector of `atoms` under this ordering.
    pub fn eval<S: AsRef<str>>(&self, atoms: &[S]) -> Result<Vec<u8>> {
        let label = self.label(atoms)?;
        Ok((0..self.len()).map(|i| label.contains(i) as u8).collect())
    }

    pub fn display(&self, label: Label) -> LabelDisplay<'_> {
        LabelDisplay { atoms: self, label }
    }
}

pub struct LabelDisplay<'a> {
    atoms: &'a AtomSet,
    label: Label,
}

impl fmt::Display for LabelDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.atoms.label_names(self.label).join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_vectors() {
        let atoms = AtomSet::new(["a", "b", "Obs"]).unwrap();
        assert_eq!(atoms.eval(&["a"]).unwrap(), vec![1, 0, 0]);
        assert_eq!(atoms.eval::<&str>(&[]).unwrap(), vec![0, 0, 0]);
        assert_eq!(atoms.eval(&["a", "Obs"]).unwrap(), vec![1, 0, 1]);
        assert!(matches!(atoms.eval(&["c"]), Err(Error::UnknownAtom(_))));
    }

    #[test]
    fn hamming() {
        let atoms = AtomSet::new(["a", "b"]).unwrap();
        let a = atoms.label(&["a"]).unwrap();
        let b = atoms.label(&["b"]).unwrap();
        let ab = atoms.label(&["a", "b"]).unwrap();
        assert_eq!(a.distance(a), 0);
        assert_eq!(a.distance(b), 2);
        assert_eq!(a.distance(ab), 1);
    }

    #[test]
    fn rejects_duplicates_and_overflow() {
        assert!(AtomSet::new(["a", "a"]).is_err());
        let many: Vec<String> = (0..17).map(|i| format!("p{i}")).collect();
        assert!(matches!(AtomSet::new(many), Err(Error::TooManyAtoms(17))));
    }
}
