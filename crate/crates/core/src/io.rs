//! JSON form of a hypothesis space:
//! `{"domain_size": n, "hypotheses": ["0101", ...]}`, where character `j` of
//! each string is the label of element `j`. Lifted spaces also carry
//! `"pair_domain_of": n` naming the base domain size.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Hypothesis, HypothesisSpace, MAX_BASE_DOMAIN, MAX_PAIR_DOMAIN};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub domain_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_domain_of: Option<usize>,
    pub hypotheses: Vec<String>,
}

impl SpaceFile {
    pub fn from_space(space: &HypothesisSpace, pair_domain_of: Option<usize>) -> Self {
        Self {
            domain_size: space.domain_size(),
            pair_domain_of,
            hypotheses: space.hypotheses().iter().map(|h| h.to_string()).collect(),
        }
    }

    pub fn into_space(self) -> Result<HypothesisSpace> {
        let cap = match self.pair_domain_of {
            None => MAX_BASE_DOMAIN,
            Some(base) => {
                let expected = base * base.saturating_sub(1) / 2;
                if self.domain_size != expected {
                    return Err(Error::Parse(format!(
                        "pair domain of {base} has {expected} pairs, file says {}",
                        self.domain_size
                    )));
                }
                MAX_PAIR_DOMAIN
            }
        };
        let hyps = self.hypotheses.iter().map(|s| Hypothesis::parse(s)).collect::<Result<Vec<_>>>()?;
        HypothesisSpace::with_cap(self.domain_size, hyps, cap)
    }
}

pub fn parse_space(json: &str) -> Result<(HypothesisSpace, Option<usize>)> {
    let file: SpaceFile = serde_json::from_str(json)?;
    let pair_domain_of = file.pair_domain_of;
    Ok((file.into_space()?, pair_domain_of))
}

pub fn read_space(path: &Path) -> Result<(HypothesisSpace, Option<usize>)> {
    parse_space(&fs::read_to_string(path)?)
}

/// Canonical JSON, since the space itself is canonical.
pub fn space_to_json(space: &HypothesisSpace, pair_domain_of: Option<usize>) -> String {
    serde_json::to_string_pretty(&SpaceFile::from_space(space, pair_domain_of)).expect("space serializes")
}

pub fn write_space(path: &Path, space: &HypothesisSpace, pair_domain_of: Option<usize>) -> Result<()> {
    let mut json = space_to_json(space, pair_domain_of);
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}
