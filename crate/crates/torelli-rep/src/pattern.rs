//! Genus-generic highest-weight patterns such as `(0,1,0..0,1,0)`.
//!
//! A pattern is a list of entries with at most one gap, written `0..0`
//! (or `0,…,0`). Entries before the gap are read from the first
//! coordinate, entries after it from the last. At a given rank the two
//! ends are laid down and added where they overlap; an end entry that
//! falls one step outside the range lands on ω₀ (or ω_g), which is the
//! trivial weight for SL_g, and is dropped.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("bad weight pattern '{0}'")]
    Syntax(String),
    #[error("pattern '{0}' needs rank at least {1}")]
    TooShort(String, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub text: String,
    pub head: Vec<i32>,
    pub tail: Vec<i32>,
    pub gap: bool,
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, PatternError> {
        let bad = || PatternError::Syntax(text.to_string());
        let t = text.trim();
        let body = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let body = body.replace('…', "..").replace("0,..,0", "0..0").replace(' ', "");
        let nums = |s: &str| -> Result<Vec<i32>, PatternError> {
            s.split(',').filter(|x| !x.is_empty()).map(|x| x.parse::<i32>().map_err(|_| bad())).collect()
        };
        let parts: Vec<&str> = body.split("0..0").collect();
        match parts.len() {
            1 => Ok(Pattern { text: text.to_string(), head: nums(parts[0])?, tail: vec![], gap: false }),
            2 => {
                let (h, tl) = (parts[0], parts[1]);
                if (!h.is_empty() && !h.ends_with(',')) || (!tl.is_empty() && !tl.starts_with(',')) {
                    return Err(bad());
                }
                let head = nums(h)?;
                let tail = nums(tl)?;
                if head.iter().chain(&tail).any(|&x| x < 0) {
                    return Err(bad());
                }
                Ok(Pattern { text: text.to_string(), head, tail, gap: true })
            }
            _ => Err(bad()),
        }
    }

    /// Fundamental-weight coordinates at rank `n`.
    pub fn at_rank(&self, n: usize) -> Result<Vec<i32>, PatternError> {
        if !self.gap {
            if self.head.len() != n {
                return Err(PatternError::TooShort(self.text.clone(), self.head.len()));
            }
            return Ok(self.head.clone());
        }
        let too_short = || PatternError::TooShort(self.text.clone(), self.head.len().max(self.tail.len()));
        let mut v = vec![0; n];
        for (i, &x) in self.head.iter().enumerate() {
            if i < n {
                v[i] += x;
            } else if i == n {
                continue;
            } else if x != 0 {
                return Err(too_short());
            }
        }
        for (k, &x) in self.tail.iter().enumerate() {
            let j = n as i64 - self.tail.len() as i64 + k as i64;
            if j >= 0 {
                v[j as usize] += x;
            } else if j < -1 && x != 0 {
                return Err(too_short());
            }
        }
        Ok(v)
    }

    /// Smallest rank at which both ends fit without overlapping.
    pub fn natural_rank(&self) -> usize {
        if self.gap {
            self.head.len() + self.tail.len() + 1
        } else {
            self.head.len()
        }
    }
}
