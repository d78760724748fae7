//! Binary pump on/off schedules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::HORIZON_HOURS;

/// On/off matrix: one row per pump (network order), one column per
/// horizon hour. Column 0 is the first simulated hour.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PumpSchedule {
    rows: Vec<Vec<bool>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("schedule has {found} rows but the network has {expected} pumps")]
    RowCount { expected: usize, found: usize },
    #[error("schedule row {row} has {found} entries, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("schedule row {row} contains '{ch}', expected 0 or 1")]
    BadChar { row: usize, ch: char },
}

impl PumpSchedule {
    pub fn new(rows: Vec<Vec<bool>>) -> Result<Self, ScheduleError> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != HORIZON_HOURS {
                return Err(ScheduleError::RowLength {
                    row: i,
                    expected: HORIZON_HOURS,
                    found: r.len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn all(n_pumps: usize, on: bool) -> Self {
        Self {
            rows: vec![vec![on; HORIZON_HOURS]; n_pumps],
        }
    }

    pub fn n_pumps(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, pump: usize, hour: usize) -> bool {
        self.rows[pump][hour]
    }

    pub fn set(&mut self, pump: usize, hour: usize, on: bool) {
        self.rows[pump][hour] = on;
    }

    pub fn row(&self, pump: usize) -> &[bool] {
        &self.rows[pump]
    }

    pub fn column(&self, hour: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[hour]).collect()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    /// Number of pump-hours switched on.
    pub fn on_count(&self) -> usize {
        self.rows.iter().flatten().filter(|b| **b).count()
    }

    pub fn hamming(&self, other: &PumpSchedule) -> usize {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn check_pumps(&self, n_pumps: usize) -> Result<(), ScheduleError> {
        if self.rows.len() != n_pumps {
            return Err(ScheduleError::RowCount {
                expected: n_pumps,
                found: self.rows.len(),
            });
        }
        Ok(())
    }
}

/// One line per pump, 24 characters of `0`/`1`.
impl fmt::Display for PumpSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            for b in r {
                f.write_str(if *b { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for PumpSchedule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rows = Vec::new();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let row = rows.len();
            let mut r = Vec::with_capacity(HORIZON_HOURS);
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                match ch {
                    '0' => r.push(false),
                    '1' => r.push(true),
                    _ => return Err(ScheduleError::BadChar { row, ch }),
                }
            }
            rows.push(r);
        }
        Self::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut s = PumpSchedule::all(2, false);
        s.set(0, 3, true);
        s.set(1, 23, true);
        let text = s.to_string();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), "000100000000000000000000");
        assert_eq!(text.parse::<PumpSchedule>().unwrap(), s);
    }

    #[test]
    fn rejects_short_rows_and_bad_chars() {
        assert!(matches!("0101".parse::<PumpSchedule>(), Err(ScheduleError::RowLength { .. })));
        assert!(matches!(
            "01010101010101010101010x".parse::<PumpSchedule>(),
            Err(ScheduleError::BadChar { ch: 'x', .. })
        ));
        let s = PumpSchedule::all(2, true);
        assert_eq!(s.check_pumps(3), Err(ScheduleError::RowCount { expected: 3, found: 2 }));
    }
}
