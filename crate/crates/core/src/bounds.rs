/// Resource limits shared by every closure computation.
///
/// Exceeding a limit yields [`Error::ResourceExhausted`](crate::Error); no
/// computation silently truncates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Bounds {
    /// Maximum number of vectors a subpower closure may generate.
    pub max_closure: usize,
    /// Maximum number of operation applications one closure may perform.
    /// Binary operations make the work quadratic in the closure size.
    pub max_steps: u64,
    /// Largest universe for which all tolerances are enumerated.
    pub max_tolerance_size: usize,
    /// Largest table (entries per operation) a materialized power may have.
    pub max_power_table: usize,
    /// Largest congruence lattice that is materialized with its tables.
    pub max_lattice: usize,
}

pub const DEFAULT_MAX_STEPS: u64 = 50_000_000;

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_closure: 1_000_000,
            max_steps: DEFAULT_MAX_STEPS,
            max_tolerance_size: 6,
            max_power_table: 1 << 24,
            max_lattice: 4096,
        }
    }
}

/// Size and work limits for one closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosureLimit {
    pub vectors: usize,
    pub steps: u64,
}

impl From<usize> for ClosureLimit {
    fn from(vectors: usize) -> Self {
        ClosureLimit {
            vectors,
            steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl From<&Bounds> for ClosureLimit {
    fn from(b: &Bounds) -> Self {
        ClosureLimit {
            vectors: b.max_closure,
            steps: b.max_steps,
        }
    }
}
