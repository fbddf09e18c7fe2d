//! DIMACS road networks as shortest-path fortification games.
//!
//! Node ids in the file are 1-based and become 0-based. `a u v w` is a
//! directed arc with cost `w`; `e u v [w]` is an undirected edge that
//! becomes the two arcs `u->v` and `v->u` (cost 1 when `w` is missing).
//! Every arc gets the same delay.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Instance;

pub const ROAD_DELAY: i64 = 10_000;

/// Budgets and terminals for a road game. `source` and `sink` are 1-based
/// like the file.
#[derive(Debug, Clone, Copy)]
pub struct RoadGame {
    pub source: usize,
    pub sink: usize,
    pub fortify_budget: i64,
    pub interdict_budget: i64,
}

pub fn parse_dimacs_road_str(text: &str, game: RoadGame) -> Result<Instance> {
    let mut nodes: Option<usize> = None;
    let mut arcs: Vec<(usize, usize, i64, i64)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |message: String| Error::Parse { line, message };
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = fields.first() else { continue };
        let num = |i: usize| -> Result<i64> {
            let f = fields.get(i).ok_or_else(|| err(format!("missing field {i}")))?;
            f.parse::<i64>().map_err(|_| err(format!("{f:?} is not an integer")))
        };
        let node = |i: usize| -> Result<usize> {
            let v = num(i)?;
            match nodes {
                None => Err(err("arc before the problem line".into())),
                Some(n) if v >= 1 && (v as usize) <= n => Ok(v as usize - 1),
                Some(n) => Err(err(format!("node {v} outside 1..={n}"))),
            }
        };
        match tag {
            "c" => {}
            "p" => {
                if nodes.is_some() {
                    return Err(err("second problem line".into()));
                }
                let n = num(2)?;
                if n < 2 {
                    return Err(err("a road network needs at least two nodes".into()));
                }
                nodes = Some(n as usize);
            }
            "a" => {
                let cost = num(3)?;
                arcs.push((node(1)?, node(2)?, cost, ROAD_DELAY));
            }
            "e" => {
                let (u, v) = (node(1)?, node(2)?);
                let cost = if fields.len() > 3 { num(3)? } else { 1 };
                arcs.push((u, v, cost, ROAD_DELAY));
                arcs.push((v, u, cost, ROAD_DELAY));
            }
            other => return Err(err(format!("unknown line type {other:?}"))),
        }
    }
    let nodes = nodes.ok_or(Error::Parse {
        line: 1,
        message: "missing problem line".into(),
    })?;
    for (what, v) in [("source", game.source), ("sink", game.sink)] {
        if v == 0 || v > nodes {
            return Err(Error::InvalidInstance(format!("{what} {v} outside 1..={nodes}")));
        }
    }
    Instance::shortest_path(
        nodes,
        &arcs,
        game.source - 1,
        game.sink - 1,
        game.fortify_budget,
        game.interdict_budget,
    )
}

pub fn parse_dimacs_road(path: impl AsRef<Path>, game: RoadGame) -> Result<Instance> {
    parse_dimacs_road_str(&std::fs::read_to_string(path)?, game)
}
