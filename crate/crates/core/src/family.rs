//! Canonically ordered sets of double graphs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graphs::{Cursor, DoubleGraph};

/// A finite set of double graphs kept in canonical `(pos, neg)` order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Family(BTreeSet<DoubleGraph>);

impl Family {
    pub fn new() -> Family {
        Family(BTreeSet::new())
    }

    pub fn singleton(d: DoubleGraph) -> Family {
        Family(BTreeSet::from([d]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insert(&mut self, d: DoubleGraph) -> bool {
        self.0.insert(d)
    }

    pub fn remove(&mut self, d: &DoubleGraph) -> bool {
        self.0.remove(d)
    }

    pub fn contains(&self, d: &DoubleGraph) -> bool {
        self.0.contains(d)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &DoubleGraph> + ExactSizeIterator {
        self.0.iter()
    }

    pub fn union(&self, other: &Family) -> Family {
        Family(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &Family) -> Family {
        Family(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &Family) -> Family {
        Family(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Family) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<DoubleGraph> {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<DoubleGraph> {
        self.0.iter().copied().collect()
    }

    /// Largest vertex mentioned by any member, 0 for the empty family.
    pub fn max_vertex(&self) -> u32 {
        self.0.iter().map(|d| d.max_vertex()).max().unwrap_or(0)
    }

    /// Whether every member has at most `ell` vertices on each side.
    pub fn within_ell(&self, ell: usize) -> bool {
        self.0.iter().all(|d| d.vertex_norm() <= ell)
    }

    /// Parses one double graph per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Family> {
        let mut fam = Family::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let mut c = Cursor::new(line, i + 1);
            let d = c.double_graph()?;
            if !c.at_end() {
                return Err(c.error("trailing input after double graph"));
            }
            fam.insert(d);
        }
        Ok(fam)
    }
}

impl FromIterator<DoubleGraph> for Family {
    fn from_iter<I: IntoIterator<Item = DoubleGraph>>(iter: I) -> Self {
        Family(iter.into_iter().collect())
    }
}

impl IntoIterator for Family {
    type Item = DoubleGraph;
    type IntoIter = std::collections::btree_set::IntoIter<DoubleGraph>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Family {
    type Item = &'a DoubleGraph;
    type IntoIter = std::collections::btree_set::Iter<'a, DoubleGraph>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl Extend<DoubleGraph> for Family {
    fn extend<I: IntoIterator<Item = DoubleGraph>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::parse(s)
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// One member per line, no trailing newline after the last.
impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments_and_blank_lines() {
        let text = "# a family\n+[(1,2)] -[]\n\n+[] -[(3,4)]   # trailing\n+[(1,2)] -[]\n";
        let fam = Family::parse(text).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.to_string(), "+[] -[(3,4)]\n+[(1,2)] -[]");
        assert_eq!(Family::parse(&fam.to_string()).unwrap(), fam);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Family::parse("+[] -[]\n+[(1,2] -[]").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(Family::parse("+[] -[] extra").is_err());
    }

    #[test]
    fn set_operations() {
        let a: Family = "+[(1,2)] -[]\n+[(1,3)] -[]".parse().unwrap();
        let b: Family = "+[(1,3)] -[]\n+[(1,4)] -[]".parse().unwrap();
        assert_eq!(a.union(&b).len(), 3);
        assert_eq!(a.intersection(&b).len(), 1);
        assert_eq!(a.difference(&b).len(), 1);
        assert!(a.intersection(&b).is_subset(&a));
    }
}
