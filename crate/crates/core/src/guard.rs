use crate::error::{Error, Result};

/// Size limits for the exhaustive constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    pub poset: usize,
    pub group: usize,
    pub names: u128,
    pub rank: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { poset: 64, group: 1024, names: 1 << 20, rank: 4 }
    }
}

impl Guards {
    pub fn check_poset(&self, size: usize) -> Result<()> {
        check("poset size", size as u128, self.poset as u128)
    }

    pub fn check_group(&self, size: usize) -> Result<()> {
        check("group order", size as u128, self.group as u128)
    }

    pub fn check_names(&self, size: u128) -> Result<()> {
        check("name universe", size, self.names)
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        check("rank", rank as u128, self.rank as u128)
    }
}

fn check(what: &'static str, size: u128, limit: u128) -> Result<()> {
    if size > limit {
        Err(Error::GuardExceeded { what, size, limit })
    } else {
        Ok(())
    }
}

/// `2^exp`, saturating, for guard arithmetic.
pub(crate) fn pow2(exp: usize) -> u128 {
    if exp >= 127 {
        u128::MAX
    } else {
        1u128 << exp
    }
}
