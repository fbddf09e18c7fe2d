use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::Error;
use crate::model::RecourseKind;

/// Solver enhancements, written as a string over `{B, E, G, I}`:
/// bound-based strengthening, enumerative strengthening, greedy integer
/// separation and strengthened interdiction cuts. `-` means none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Settings {
    pub bound: bool,
    pub enumerative: bool,
    pub greedy: bool,
    pub lifted: bool,
}

impl Settings {
    pub const NONE: Settings = Settings {
        bound: false,
        enumerative: false,
        greedy: false,
        lifted: false,
    };

    /// `BEG` for knapsack games, `IBEG` for shortest-path games.
    pub fn default_for(kind: RecourseKind) -> Self {
        Settings {
            bound: true,
            enumerative: true,
            greedy: true,
            lifted: kind == RecourseKind::ShortestPath,
        }
    }

    /// All 16 combinations.
    pub fn all() -> Vec<Settings> {
        (0u8..16)
            .map(|m| Settings {
                bound: m & 1 != 0,
                enumerative: m & 2 != 0,
                greedy: m & 4 != 0,
                lifted: m & 8 != 0,
            })
            .collect()
    }
}

impl FromStr for Settings {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "-" {
            return Ok(Settings::NONE);
        }
        if s.is_empty() {
            return Err(Error::Settings(s.to_string()));
        }
        let mut out = Settings::NONE;
        for ch in s.chars() {
            let flag = match ch.to_ascii_uppercase() {
                'B' => &mut out.bound,
                'E' => &mut out.enumerative,
                'G' => &mut out.greedy,
                'I' => &mut out.lifted,
                _ => return Err(Error::Settings(s.to_string())),
            };
            if *flag {
                return Err(Error::Settings(s.to_string()));
            }
            *flag = true;
        }
        Ok(out)
    }
}

impl fmt::Display for Settings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Settings::NONE {
            return f.write_str("-");
        }
        for (on, ch) in [
            (self.lifted, 'I'),
            (self.bound, 'B'),
            (self.enumerative, 'E'),
            (self.greedy, 'G'),
        ] {
            if on {
                write!(f, "{ch}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub settings: Settings,
    /// Cutoff offset for separation; any value in (0, 1) is exact on
    /// integer data.
    pub epsilon: f64,
    /// Separation stops after this many improving attacker solutions.
    pub solution_limit: usize,
    pub seed: u64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Capacity of the stored recourse-solution pool (FIFO eviction).
    pub pool_capacity: usize,
    /// How many of the most recent pool entries seed each separation model.
    pub pool_seed_rows: usize,
    /// Enumerative strengthening is skipped when the attack interdicts more
    /// assets than this...
    pub enum_max_support: usize,
    /// ...or has more affordable subsets than this.
    pub enum_max_subsets: usize,
    /// Consecutive non-improving enumerative trials before the feature is
    /// turned off for the rest of the run.
    pub enum_disable_after: usize,
    /// Keep every cut and separated candidate in the result.
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn new(settings: Settings) -> Self {
        SolverConfig {
            settings,
            epsilon: 1e-4,
            solution_limit: 1,
            seed: 0,
            time_limit: None,
            node_limit: None,
            pool_capacity: 10_000,
            pool_seed_rows: 200,
            enum_max_support: 20,
            enum_max_subsets: 4096,
            enum_disable_after: 10,
            record_trace: false,
        }
    }

    pub fn for_kind(kind: RecourseKind) -> Self {
        Self::new(Settings::default_for(kind))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["-", "B", "E", "G", "I", "BE", "BEG", "IBEG", "IB", "IE"] {
            let parsed: Settings = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        assert_eq!("GEB".parse::<Settings>().unwrap().to_string(), "BEG");
        assert!("BB".parse::<Settings>().is_err());
        assert!("X".parse::<Settings>().is_err());
        assert!("".parse::<Settings>().is_err());
        assert_eq!(Settings::all().len(), 16);
    }

    #[test]
    fn defaults_per_application() {
        assert_eq!(Settings::default_for(RecourseKind::Knapsack).to_string(), "BEG");
        assert_eq!(Settings::default_for(RecourseKind::ShortestPath).to_string(), "IBEG");
    }
}
