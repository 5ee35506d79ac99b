use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::DifficultyClass;
use crate::pddl::{parse_domain, Domain};

/// The six built-in benchmark domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainId {
    Ferry,
    Blocksworld,
    Miconic,
    Hanoi,
    Grippers,
    Driverlog,
}

impl DomainId {
    pub const ALL: [DomainId; 6] = [
        DomainId::Ferry,
        DomainId::Blocksworld,
        DomainId::Miconic,
        DomainId::Hanoi,
        DomainId::Grippers,
        DomainId::Driverlog,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainId::Ferry => "ferry",
            DomainId::Blocksworld => "blocksworld",
            DomainId::Miconic => "miconic",
            DomainId::Hanoi => "hanoi",
            DomainId::Grippers => "grippers",
            DomainId::Driverlog => "driverlog",
        }
    }

    /// Human-readable name used in prompts and reports.
    pub fn display_name(self) -> &'static str {
        match self {
            DomainId::Ferry => "Ferry",
            DomainId::Blocksworld => "Blocksworld",
            DomainId::Miconic => "Miconic",
            DomainId::Hanoi => "Tower of Hanoi",
            DomainId::Grippers => "Grippers",
            DomainId::Driverlog => "Driverlog",
        }
    }

    /// Difficulty class assigned to the domain by its state space and
    /// branching factor.
    pub fn difficulty(self) -> DifficultyClass {
        match self {
            DomainId::Ferry | DomainId::Blocksworld => DifficultyClass::Easy,
            DomainId::Miconic | DomainId::Hanoi => DifficultyClass::Medium,
            DomainId::Grippers | DomainId::Driverlog => DifficultyClass::Hard,
        }
    }

    /// PDDL source of the domain definition.
    pub fn domain_text(self) -> &'static str {
        match self {
            DomainId::Ferry => include_str!("../../data/ferry-domain.pddl"),
            DomainId::Blocksworld => include_str!("../../data/blocksworld-domain.pddl"),
            DomainId::Miconic => include_str!("../../data/miconic-domain.pddl"),
            DomainId::Hanoi => include_str!("../../data/hanoi-domain.pddl"),
            DomainId::Grippers => include_str!("../../data/grippers-domain.pddl"),
            DomainId::Driverlog => include_str!("../../data/driverlog-domain.pddl"),
        }
    }

    /// Parsed domain, shared process-wide.
    pub fn domain(self) -> &'static Domain {
        static CACHE: [OnceLock<Domain>; 6] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        CACHE[self as usize]
            .get_or_init(|| parse_domain(self.domain_text()).expect("built-in domain parses"))
    }

    /// Matches a parsed domain name against the built-in set.
    pub fn from_domain_name(name: &str) -> Option<DomainId> {
        DomainId::ALL.into_iter().find(|d| d.domain().name == name)
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        DomainId::ALL
            .into_iter()
            .find(|d| d.as_str() == lower)
            .ok_or_else(|| format!("unknown domain `{s}`"))
    }
}
