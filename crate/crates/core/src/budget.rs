use crate::error::{Error, Result};

/// Default cap on enumerated nodes (patterns, DFS nodes, marginal terms).
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Hard cap on exhaustive work. Every enumeration checks it up front when the size is known,
/// and counts visited nodes otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: DEFAULT_BUDGET,
        }
    }
}

impl Budget {
    pub fn new(max_nodes: u64) -> Result<Self> {
        if max_nodes == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(Budget { max_nodes })
    }

    pub fn unlimited() -> Self {
        Budget {
            max_nodes: u64::MAX,
        }
    }

    /// `base^exp` if it fits under the cap, otherwise a budget error naming `what`.
    pub fn power(&self, base: usize, exp: usize, what: &str) -> Result<u64> {
        match checked_pow(base as u64, exp) {
            Some(v) if v <= self.max_nodes => Ok(v),
            Some(v) => Err(Error::budget(what, v, self.max_nodes)),
            None => Err(Error::budget(
                what,
                format!("{base}^{exp}"),
                self.max_nodes,
            )),
        }
    }

    pub fn check(&self, needed: u128, what: &str) -> Result<()> {
        if needed > self.max_nodes as u128 {
            Err(Error::budget(what, needed, self.max_nodes))
        } else {
            Ok(())
        }
    }
}

pub(crate) fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Node counter for searches whose size is only known after the fact.
#[derive(Debug)]
pub(crate) struct Meter {
    pub visited: u64,
    limit: u64,
    what: &'static str,
}

impl Meter {
    pub fn new(budget: Budget, what: &'static str) -> Self {
        Meter {
            visited: 0,
            limit: budget.max_nodes,
            what,
        }
    }

    #[inline]
    pub fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.limit {
            Err(Error::budget(
                self.what,
                format!("more than {}", self.limit),
                self.limit,
            ))
        } else {
            Ok(())
        }
    }
}
