//! Symbolic atomic-event and complex-event classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} class '{name}'")]
pub struct ParseClassError {
    pub kind: &'static str,
    pub name: String,
}

/// One of the nine multimodal actions observed per window.
///
/// Declaration order is the canonical index order, used wherever a class
/// needs an integer index (confusion-matrix rows and columns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionClass {
    Walk,
    Sit,
    BrushTeeth,
    ClickMouse,
    Drink,
    Eat,
    Type,
    FlushToilet,
    Wash,
}

impl ActionClass {
    pub const COUNT: usize = 9;

    pub const ALL: [ActionClass; Self::COUNT] = [
        ActionClass::Walk,
        ActionClass::Sit,
        ActionClass::BrushTeeth,
        ActionClass::ClickMouse,
        ActionClass::Drink,
        ActionClass::Eat,
        ActionClass::Type,
        ActionClass::FlushToilet,
        ActionClass::Wash,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub const fn name(self) -> &'static str {
        match self {
            ActionClass::Walk => "walk",
            ActionClass::Sit => "sit",
            ActionClass::BrushTeeth => "brush_teeth",
            ActionClass::ClickMouse => "click_mouse",
            ActionClass::Drink => "drink",
            ActionClass::Eat => "eat",
            ActionClass::Type => "type",
            ActionClass::FlushToilet => "flush_toilet",
            ActionClass::Wash => "wash",
        }
    }
}

impl fmt::Display for ActionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionClass {
    type Err = ParseClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ParseClassError {
                kind: "action",
                name: s.to_owned(),
            })
    }
}

impl Serialize for ActionClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ActionClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Complex-event classes. `E0` means "none of the rules fired" and is never
/// stored inside a [`CeSet`]; an empty set is how a window says `E0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CeClass {
    E0,
    /// Unsanitary restroom usage.
    E1,
    /// Unsanitary diet habit.
    E2,
    /// Bad brushing habit.
    E3,
}

impl CeClass {
    pub const COUNT: usize = 4;
    pub const ALL: [CeClass; 4] = [CeClass::E0, CeClass::E1, CeClass::E2, CeClass::E3];
    pub const POSITIVE: [CeClass; 3] = [CeClass::E1, CeClass::E2, CeClass::E3];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            CeClass::E0 => "e0",
            CeClass::E1 => "e1",
            CeClass::E2 => "e2",
            CeClass::E3 => "e3",
        }
    }

    pub const fn description(self) -> &'static str {
        match self {
            CeClass::E0 => "no complex event",
            CeClass::E1 => "unsanitary restroom usage",
            CeClass::E2 => "unsanitary diet habit",
            CeClass::E3 => "bad brushing habit",
        }
    }
}

impl fmt::Display for CeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CeClass {
    type Err = ParseClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ParseClassError {
                kind: "complex event",
                name: s.to_owned(),
            })
    }
}

/// Set of positive CE classes active at one window. The empty set is `e0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CeSet(u8);

impl CeSet {
    pub const EMPTY: CeSet = CeSet(0);

    const fn bit(class: CeClass) -> u8 {
        match class {
            CeClass::E0 => 0,
            CeClass::E1 => 1,
            CeClass::E2 => 2,
            CeClass::E3 => 4,
        }
    }

    /// Inserting `E0` is a no-op.
    pub fn insert(&mut self, class: CeClass) {
        self.0 |= Self::bit(class);
    }

    pub fn with(mut self, class: CeClass) -> Self {
        self.insert(class);
        self
    }

    pub fn union(self, other: CeSet) -> CeSet {
        CeSet(self.0 | other.0)
    }

    /// `contains(E0)` is true exactly when the set is empty.
    pub fn contains(self, class: CeClass) -> bool {
        match class {
            CeClass::E0 => self.is_empty(),
            c => self.0 & Self::bit(c) != 0,
        }
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Positive classes in ascending order.
    pub fn iter(self) -> impl Iterator<Item = CeClass> {
        CeClass::POSITIVE.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<CeClass> for CeSet {
    fn from_iter<I: IntoIterator<Item = CeClass>>(iter: I) -> Self {
        let mut set = CeSet::EMPTY;
        for c in iter {
            set.insert(c);
        }
        set
    }
}

impl fmt::Display for CeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(c.name())?;
        }
        f.write_str("}")
    }
}

impl Serialize for CeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(CeClass::name))
    }
}
