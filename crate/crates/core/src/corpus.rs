//! Bundled example programs, parameters and instances.

use crate::frontend::{parse_params, ParamEnv};

/// Makespan of `m` jobs with lengths in {1, 2} on `n` machines.
pub const MS_SOURCE: &str = include_str!("../corpus/ms.spk");
/// Maximum-matching test by blossom shrinking.
pub const MM_SOURCE: &str = include_str!("../corpus/mm.spk");

/// A named program run: source, parameters and instance text.
#[derive(Debug, Clone, Copy)]
pub struct CorpusRun {
    pub name: &'static str,
    pub source: &'static str,
    pub params: &'static str,
    pub instance: &'static str,
}

pub const MS5: CorpusRun = CorpusRun {
    name: "ms5",
    source: MS_SOURCE,
    params: include_str!("../corpus/ms5.param"),
    instance: include_str!("../corpus/ms5.in"),
};

pub const MS10: CorpusRun = CorpusRun {
    name: "ms10",
    source: MS_SOURCE,
    params: include_str!("../corpus/ms10.param"),
    instance: include_str!("../corpus/ms10.in"),
};

pub const MS20: CorpusRun = CorpusRun {
    name: "ms20",
    source: MS_SOURCE,
    params: include_str!("../corpus/ms20.param"),
    instance: include_str!("../corpus/ms20.in"),
};

pub const WT8: CorpusRun = CorpusRun {
    name: "wt8",
    source: MM_SOURCE,
    params: include_str!("../corpus/mm8.param"),
    instance: include_str!("../corpus/wt8.in"),
};

pub const WT8A: CorpusRun = CorpusRun {
    name: "wt8a",
    source: MM_SOURCE,
    params: include_str!("../corpus/mm8.param"),
    instance: include_str!("../corpus/wt8a.in"),
};

/// All bundled runs.
pub const ALL: [CorpusRun; 5] = [MS5, MS10, MS20, WT8, WT8A];

impl CorpusRun {
    /// Parsed parameters. The bundled files are known to be valid.
    pub fn param_env(&self) -> ParamEnv {
        parse_params(self.params).expect("bundled parameter file")
    }
}
