/// Work limits for the exact (enumerating) code paths.
///
/// Exceeding a limit is a hard [`crate::Error::BudgetExceeded`]; nothing is
/// silently coarsened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of atoms a spectrum may hold after merging.
    pub atoms: usize,
    /// Maximum number of `(codeword, output sequence)` terms an exact
    /// enumeration may visit.
    pub enumeration: u64,
    /// Maximum number of matrix cells `|X|^k * |Y|^k` of a product extension.
    pub cells: usize,
    /// Maximum input alphabet size handled by the input optimizer.
    pub simplex: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            atoms: 1 << 22,
            enumeration: 100_000_000,
            cells: 1 << 24,
            simplex: 1 << 12,
        }
    }
}

impl Budget {
    /// Default budget with the atom and enumeration limits replaced by `limit`.
    pub fn with_limit(limit: u64) -> Self {
        Budget {
            atoms: usize::try_from(limit).unwrap_or(usize::MAX),
            enumeration: limit,
            ..Budget::default()
        }
    }

    pub fn check(&self, what: &'static str, needed: u128, limit: u128) -> crate::Result<()> {
        if needed > limit {
            Err(crate::Error::BudgetExceeded {
                what,
                needed,
                limit,
            })
        } else {
            Ok(())
        }
    }

    pub fn check_enumeration(&self, needed: u128) -> crate::Result<()> {
        self.check("enumeration", needed, self.enumeration as u128)
    }
}
