//! Line-oriented text formats. `#` starts a comment; a first comment of the
//! form `# name <name>` names the instance.
//!
//! KFG: header `n B_F B_I b` (item count, budgets, knapsack capacity), then
//! one line `d a f g` per item (profit, weight, fortification cost,
//! interdiction cost). The profit doubles as the interdiction penalty.
//!
//! SPFG: header `V A B_F B_I s t` with 0-based node ids, then one line
//! `tail head c d` per arc, optionally followed by `f g` when the level costs
//! are not unit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Instance, RecourseSpec, Sense};

struct Lines<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    name: Option<String>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut name = None;
        let mut lines = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let (body, comment) = match raw.find('#') {
                Some(p) => (&raw[..p], Some(raw[p + 1..].trim())),
                None => (raw, None),
            };
            if let Some(rest) = comment.and_then(|c| c.strip_prefix("name ")) {
                if name.is_none() && lines.is_empty() {
                    name = Some(rest.trim().to_string());
                }
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if !fields.is_empty() {
                lines.push((k + 1, fields));
            }
        }
        Lines { lines, name, pos: 0 }
    }

    fn next(&mut self, what: &str, counts: &[usize]) -> Result<(usize, Vec<i64>)> {
        let last = self.lines.last().map_or(1, |l| l.0);
        let (line, fields) = self.lines.get(self.pos).ok_or_else(|| Error::Parse {
            line: last,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        if !counts.contains(&fields.len()) {
            return Err(Error::Parse {
                line: *line,
                message: format!("{what} needs {counts:?} fields, found {}", fields.len()),
            });
        }
        let values = fields
            .iter()
            .map(|f| {
                f.parse::<i64>().map_err(|_| Error::Parse {
                    line: *line,
                    message: format!("{f:?} is not an integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((*line, values))
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            Some((line, _)) => Err(Error::Parse {
                line: *line,
                message: "trailing data after the last record".into(),
            }),
            None => Ok(()),
        }
    }
}

fn count(line: usize, v: i64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Parse {
        line,
        message: format!("{what} must be nonnegative"),
    })
}

/// Validation failures are attributed to the header line.
fn at_header<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidInstance(message) => Error::Parse { line, message },
        other => other,
    })
}

pub fn parse_kfg_str(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (hline, h) = lines.next("header `n B_F B_I b`", &[4])?;
    let n = count(hline, h[0], "item count")?;
    let (mut d, mut a, mut f, mut g) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let (_, v) = lines.next("item `d a f g`", &[4])?;
        d.push(v[0]);
        a.push(v[1]);
        f.push(v[2]);
        g.push(v[3]);
    }
    lines.finish()?;
    let inst = at_header(hline, Instance::knapsack(d, a, h[3], f, g, h[1], h[2]))?;
    Ok(inst.with_name(lines.name.unwrap_or_default()))
}

pub fn parse_spfg_str(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (hline, h) = lines.next("header `V A B_F B_I s t`", &[6])?;
    let nodes = count(hline, h[0], "node count")?;
    let m = count(hline, h[1], "arc count")?;
    let source = count(hline, h[4], "source")?;
    let sink = count(hline, h[5], "sink")?;
    let mut arcs = Vec::with_capacity(m);
    let (mut f, mut g) = (Vec::new(), Vec::new());
    for _ in 0..m {
        let (line, v) = lines.next("arc `tail head c d [f g]`", &[4, 6])?;
        let tail = count(line, v[0], "tail")?;
        let head = count(line, v[1], "head")?;
        if tail >= nodes || head >= nodes {
            return Err(Error::Parse {
                line,
                message: format!("arc {tail}->{head} references a node outside 0..{nodes}"),
            });
        }
        arcs.push((tail, head, v[2], v[3]));
        f.push(v.get(4).copied().unwrap_or(1));
        g.push(v.get(5).copied().unwrap_or(1));
    }
    lines.finish()?;
    let inst = at_header(hline, Instance::shortest_path(nodes, &arcs, source, sink, h[2], h[3]))?;
    let inst = at_header(hline, inst.with_level_costs(f, g))?;
    Ok(inst.with_name(lines.name.unwrap_or_default()))
}

pub fn parse_kfg(path: impl AsRef<Path>) -> Result<Instance> {
    parse_kfg_str(&std::fs::read_to_string(path)?)
}

pub fn parse_spfg(path: impl AsRef<Path>) -> Result<Instance> {
    parse_spfg_str(&std::fs::read_to_string(path)?)
}

/// Reads either format, chosen by the header width.
pub fn parse_instance_str(text: &str) -> Result<Instance> {
    let header = Lines::new(text).lines.first().map(|l| l.1.len());
    match header {
        Some(6) => parse_spfg_str(text),
        _ => parse_kfg_str(text),
    }
}

pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance_str(&std::fs::read_to_string(path)?)
}

/// Serializes an authored (non-canonical) instance.
pub fn write_instance(instance: &Instance) -> Result<String> {
    if instance.negated || instance.scale != 1 {
        return Err(Error::InvalidInstance(
            "only authored instances with unit scale can be written".into(),
        ));
    }
    let mut out = String::new();
    if !instance.name.is_empty() {
        writeln!(out, "# name {}", instance.name).unwrap();
    }
    match &instance.recourse {
        RecourseSpec::Knapsack { weights, capacity } => {
            if instance.sense != Sense::Max || instance.nominal != instance.penalty {
                return Err(Error::InvalidInstance("not a knapsack fortification game".into()));
            }
            writeln!(
                out,
                "{} {} {} {}",
                instance.n(),
                instance.fortify_budget,
                instance.interdict_budget,
                capacity
            )
            .unwrap();
            for (i, w) in weights.iter().enumerate() {
                writeln!(
                    out,
                    "{} {} {} {}",
                    instance.penalty[i], w, instance.fortify_cost[i], instance.interdict_cost[i]
                )
                .unwrap();
            }
        }
        RecourseSpec::ShortestPath {
            nodes,
            arcs,
            source,
            sink,
        } => {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                nodes,
                arcs.len(),
                instance.fortify_budget,
                instance.interdict_budget,
                source,
                sink
            )
            .unwrap();
            let unit = instance
                .fortify_cost
                .iter()
                .chain(&instance.interdict_cost)
                .all(|&c| c == 1);
            for (i, a) in arcs.iter().enumerate() {
                write!(
                    out,
                    "{} {} {} {}",
                    a.tail, a.head, instance.nominal[i], instance.penalty[i]
                )
                .unwrap();
                if !unit {
                    write!(out, " {} {}", instance.fortify_cost[i], instance.interdict_cost[i]).unwrap();
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn write_instance_file(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance(instance)?)?;
    Ok(())
}
