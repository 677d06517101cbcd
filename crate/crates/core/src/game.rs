//! Transferable-utility games and their cores.
//!
//! Coalitions are bitmasks over player indices `0..n`. Core constraint rows
//! are always emitted in increasing bitmask order.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{find_feasible_point, Polyhedron, Row};

pub const DEFAULT_MAX_PLAYERS: usize = 16;
const MASK_BITS: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u32);

impl Coalition {
    pub fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    pub fn from_members(members: &[usize]) -> Self {
        Coalition(members.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn grand(n: usize) -> Self {
        Coalition(if n >= MASK_BITS {
            u32::MAX
        } else {
            (1 << n) - 1
        })
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn contains(self, player: usize) -> bool {
        player < MASK_BITS && self.0 & (1 << player) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> Vec<usize> {
        (0..MASK_BITS).filter(|&i| self.contains(i)).collect()
    }

    /// 0/1 indicator vector of length `n`.
    pub fn indicator(self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| if self.contains(i) { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn payoff(self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .filter(|(i, _)| self.contains(*i))
            .map(|(_, v)| v)
            .sum()
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.members().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, "}}")
    }
}

/// The coalition-value map of a TU game. The empty coalition is worth zero
/// and never stored; the grand coalition's value is held separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFunction {
    n_players: usize,
    grand_value: f64,
    values: BTreeMap<Coalition, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MissingValue {
    /// Unlisted coalitions are worth this much.
    Floor(f64),
    /// Unlisted coalitions are an error.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreOptions {
    pub max_players: usize,
    pub missing: MissingValue,
}

impl Default for CoreOptions {
    fn default() -> Self {
        CoreOptions {
            max_players: DEFAULT_MAX_PLAYERS,
            missing: MissingValue::Floor(0.0),
        }
    }
}

impl CharacteristicFunction {
    pub fn new(n_players: usize, grand_value: f64) -> Result<Self> {
        if n_players < 2 {
            return Err(Error::TooFewPlayers(n_players));
        }
        if n_players >= MASK_BITS {
            return Err(Error::TooManyPlayers {
                players: n_players,
                max: MASK_BITS - 1,
            });
        }
        if !grand_value.is_finite() {
            return Err(Error::NonFiniteInput("grand coalition value".into()));
        }
        Ok(CharacteristicFunction {
            n_players,
            grand_value,
            values: BTreeMap::new(),
        })
    }

    /// Sets the value of a nonempty proper coalition given by 0-based members.
    pub fn with_value(mut self, members: &[usize], value: f64) -> Result<Self> {
        self.set(members, value)?;
        Ok(self)
    }

    pub fn set(&mut self, members: &[usize], value: f64) -> Result<()> {
        if let Some(&index) = members.iter().find(|&&i| i >= self.n_players) {
            return Err(Error::PlayerOutOfRange {
                index,
                players: self.n_players,
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFiniteInput(format!("value of {members:?}")));
        }
        let c = Coalition::from_members(members);
        if c.is_empty() {
            return Err(Error::Config(
                "the empty coalition always has value 0".into(),
            ));
        }
        if c == self.grand() {
            self.grand_value = value;
        } else {
            self.values.insert(c, value);
        }
        Ok(())
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n_players)
    }

    pub fn grand_value(&self) -> f64 {
        self.grand_value
    }

    /// Explicitly listed proper coalitions, in bitmask order.
    pub fn listed(&self) -> impl Iterator<Item = (Coalition, f64)> + '_ {
        self.values.iter().map(|(c, v)| (*c, *v))
    }

    /// Value of a coalition; `None` when a proper coalition is not listed.
    pub fn value(&self, c: Coalition) -> Option<f64> {
        if c.is_empty() {
            Some(0.0)
        } else if c == self.grand() {
            Some(self.grand_value)
        } else {
            self.values.get(&c).copied()
        }
    }

    fn resolved_value(&self, c: Coalition, missing: MissingValue) -> Result<f64> {
        match (self.value(c), missing) {
            (Some(v), _) => Ok(v),
            (None, MissingValue::Floor(f)) => Ok(f),
            (None, MissingValue::Strict) => Err(Error::MissingCoalition(
                c.members().iter().map(|m| m + 1).collect(),
            )),
        }
    }

    fn proper_coalitions(&self) -> impl Iterator<Item = Coalition> {
        (1..self.grand().mask()).map(Coalition::from_mask)
    }
}

pub fn build_core(cf: &CharacteristicFunction) -> Result<Polyhedron> {
    build_core_with(cf, &CoreOptions::default())
}

/// `{ x : Σx = η_N, Σ_{j∈S} x_j ≥ η_S for every nonempty proper S }`.
pub fn build_core_with(cf: &CharacteristicFunction, opts: &CoreOptions) -> Result<Polyhedron> {
    let n = cf.n_players();
    if n > opts.max_players {
        return Err(Error::TooManyPlayers {
            players: n,
            max: opts.max_players,
        });
    }
    let eq = vec![Row::new(vec![1.0; n], cf.grand_value())];
    let ineq = cf
        .proper_coalitions()
        .map(|c| {
            Ok(Row::new(
                c.indicator(n),
                cf.resolved_value(c, opts.missing)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Polyhedron::new(n, eq, ineq)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoreStatus {
    Nonempty { witness: Vec<f64> },
    Empty,
}

impl CoreStatus {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, CoreStatus::Nonempty { .. })
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            CoreStatus::Nonempty { witness } => Some(witness),
            CoreStatus::Empty => None,
        }
    }
}

/// LP feasibility of the core. Solver failures surface as `Err`, distinct
/// from [`CoreStatus::Empty`].
pub fn is_core_nonempty(cf: &CharacteristicFunction) -> Result<CoreStatus> {
    is_core_nonempty_with(cf, &CoreOptions::default())
}

pub fn is_core_nonempty_with(
    cf: &CharacteristicFunction,
    opts: &CoreOptions,
) -> Result<CoreStatus> {
    let core = build_core_with(cf, opts)?;
    Ok(match find_feasible_point(&core)? {
        Some(witness) => CoreStatus::Nonempty { witness },
        None => CoreStatus::Empty,
    })
}

pub fn core_membership(x: &[f64], cf: &CharacteristicFunction, tol: f64) -> bool {
    core_membership_with(x, cf, tol, &CoreOptions::default()).unwrap_or(false)
}

pub fn core_membership_with(
    x: &[f64],
    cf: &CharacteristicFunction,
    tol: f64,
    opts: &CoreOptions,
) -> Result<bool> {
    if x.len() != cf.n_players() {
        return Err(Error::DimensionMismatch {
            expected: cf.n_players(),
            got: x.len(),
        });
    }
    if (x.iter().sum::<f64>() - cf.grand_value()).abs() > tol {
        return Ok(false);
    }
    for c in cf.proper_coalitions() {
        if c.payoff(x) < cf.resolved_value(c, opts.missing)? - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// On-disk form of a game; members are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub n: usize,
    pub coalitions: Vec<CoalitionEntry>,
    pub grand_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionEntry {
    pub members: Vec<usize>,
    pub value: f64,
}

impl TryFrom<&GameFile> for CharacteristicFunction {
    type Error = Error;

    fn try_from(file: &GameFile) -> Result<Self> {
        let mut cf = CharacteristicFunction::new(file.n, file.grand_value)?;
        for entry in &file.coalitions {
            if entry.members.is_empty() {
                return Err(Error::Config("coalition with no members".into()));
            }
            let mut members = Vec::with_capacity(entry.members.len());
            for &m in &entry.members {
                if m == 0 || m > file.n {
                    return Err(Error::PlayerOutOfRange {
                        index: m,
                        players: file.n,
                    });
                }
                members.push(m - 1);
            }
            let c = Coalition::from_members(&members);
            if c == cf.grand() {
                return Err(Error::Config(
                    "grand coalition belongs in `grand_value`, not `coalitions`".into(),
                ));
            }
            if cf.value(c).is_some() {
                return Err(Error::Config(format!("coalition {c:?} listed twice")));
            }
            cf.set(&members, entry.value)?;
        }
        Ok(cf)
    }
}

impl From<&CharacteristicFunction> for GameFile {
    fn from(cf: &CharacteristicFunction) -> Self {
        GameFile {
            n: cf.n_players(),
            coalitions: cf
                .listed()
                .map(|(c, value)| CoalitionEntry {
                    members: c.members().iter().map(|m| m + 1).collect(),
                    value,
                })
                .collect(),
            grand_value: cf.grand_value(),
        }
    }
}

impl CharacteristicFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text)?;
        CharacteristicFunction::try_from(&file)
    }

    /// Canonical pretty-printed form; coalitions in bitmask order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GameFile::from(self)).expect("game file serializes")
    }
}
