use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// A variable name shared by the AST, the condition language and polynomials.
///
/// Ordering is "natural": a trailing run of digits compares numerically, so
/// `p2 < p10`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn split_key(&self) -> (&str, Option<u64>) {
        let s: &str = &self.0;
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 || digits > 18 {
            return (s, None);
        }
        let (stem, num) = s.split_at(s.len() - digits);
        (stem, num.parse().ok())
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a_stem, a_num) = self.split_key();
        let (b_stem, b_num) = other.split_key();
        a_stem
            .cmp(b_stem)
            .then(a_num.cmp(&b_num))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}
