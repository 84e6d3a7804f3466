//! TU benchmark plain-text format: 1-indexed, comma-separated, one record
//! per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::{Graph, GraphSet};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

struct Lines {
    path: PathBuf,
    rows: Vec<(usize, String)>,
}

impl Lines {
    fn read(path: PathBuf) -> Result<Self> {
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.clone()),
            _ => Error::Io(e),
        })?;
        let rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l.trim().to_owned()))
            .collect();
        Ok(Self { path, rows })
    }

    fn optional(path: PathBuf) -> Result<Option<Self>> {
        if path.exists() {
            Self::read(path).map(Some)
        } else {
            Ok(None)
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            file: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn ints(&self) -> Result<Vec<(usize, i64)>> {
        self.rows
            .iter()
            .map(|(line, s)| {
                s.parse::<i64>()
                    .map(|v| (*line, v))
                    .map_err(|_| self.err(*line, format!("expected an integer, got {s:?}")))
            })
            .collect()
    }

    fn fields<T: std::str::FromStr>(&self, line: usize, s: &str) -> Result<Vec<T>> {
        s.split(',')
            .map(|f| {
                let f = f.trim();
                f.parse::<T>()
                    .map_err(|_| self.err(line, format!("cannot parse field {f:?}")))
            })
            .collect()
    }
}

fn file(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

/// Reads `<name>_A.txt`, `<name>_graph_indicator.txt` and
/// `<name>_graph_labels.txt`, plus the optional node label and node attribute
/// files. Node attributes take precedence over one-hot node labels; with
/// neither, every node gets the constant feature 1.
pub fn parse_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphSet> {
    let dir = dir.as_ref();
    let adjacency = Lines::read(file(dir, name, "A"))?;
    let indicator = Lines::read(file(dir, name, "graph_indicator"))?;
    let graph_labels = Lines::read(file(dir, name, "graph_labels"))?;
    let node_labels = Lines::optional(file(dir, name, "node_labels"))?;
    let attributes = Lines::optional(file(dir, name, "node_attributes"))?;

    // Node i (0-based) belongs to graph_of[i] at local position local_of[i].
    let ind = indicator.ints()?;
    let graph_ids: BTreeSet<i64> = ind.iter().map(|&(_, g)| g).collect();
    let gid_index: BTreeMap<i64, usize> = graph_ids.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let num_graphs = graph_ids.len();
    let mut sizes = vec![0usize; num_graphs];
    let mut graph_of = Vec::with_capacity(ind.len());
    let mut local_of = Vec::with_capacity(ind.len());
    for &(_, g) in &ind {
        let gi = gid_index[&g];
        graph_of.push(gi);
        local_of.push(sizes[gi]);
        sizes[gi] += 1;
    }
    let total_nodes = ind.len();

    let labels = graph_labels.ints()?;
    if labels.len() != num_graphs {
        let line = labels.last().map_or(1, |&(l, _)| l);
        return Err(graph_labels.err(
            line,
            format!("{} graph labels for {num_graphs} graphs", labels.len()),
        ));
    }
    let classes: BTreeSet<i64> = labels.iter().map(|&(_, l)| l).collect();
    let class_index: BTreeMap<i64, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (line, s) in &adjacency.rows {
        let pair: Vec<usize> = adjacency.fields(*line, s)?;
        let [u, v] = pair[..] else {
            return Err(adjacency.err(*line, "expected two node indices"));
        };
        for x in [u, v] {
            if x == 0 || x > total_nodes {
                return Err(adjacency.err(
                    *line,
                    format!("node index {x} outside 1..={total_nodes}"),
                ));
            }
        }
        let (u, v) = (u - 1, v - 1);
        if graph_of[u] != graph_of[v] {
            return Err(adjacency.err(*line, format!("edge ({}, {}) crosses graphs", u + 1, v + 1)));
        }
        if u != v {
            edges[graph_of[u]].push((local_of[u], local_of[v]));
        }
    }

    let node_label_values = match &node_labels {
        Some(lines) => {
            let vals = lines.ints()?;
            if vals.len() != total_nodes {
                let line = vals.last().map_or(1, |&(l, _)| l);
                return Err(lines.err(line, format!("{} node labels for {total_nodes} nodes", vals.len())));
            }
            Some(vals.into_iter().map(|(_, v)| v).collect::<Vec<_>>())
        }
        None => None,
    };

    let (dim, node_features): (usize, Vec<Vec<f64>>) = if let Some(lines) = &attributes {
        let rows = lines
            .rows
            .iter()
            .map(|(line, s)| lines.fields::<f64>(*line, s).map(|r| (*line, r)))
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != total_nodes {
            return Err(lines.err(rows.len(), format!("{} attribute rows for {total_nodes} nodes", rows.len())));
        }
        let dim = rows.first().map_or(0, |(_, r)| r.len());
        for (line, r) in &rows {
            if r.len() != dim {
                return Err(lines.err(*line, format!("expected {dim} attributes, got {}", r.len())));
            }
            if !r.iter().all(|x| x.is_finite()) {
                return Err(lines.err(*line, "non-finite attribute"));
            }
        }
        (dim, rows.into_iter().map(|(_, r)| r).collect())
    } else if let Some(vals) = &node_label_values {
        let distinct: BTreeSet<i64> = vals.iter().copied().collect();
        let index: BTreeMap<i64, usize> = distinct.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let dim = distinct.len();
        let rows = vals
            .iter()
            .map(|v| {
                let mut r = vec![0.0; dim];
                r[index[v]] = 1.0;
                r
            })
            .collect();
        (dim, rows)
    } else {
        (1, vec![vec![1.0]; total_nodes])
    };

    let mut per_graph_feats: Vec<Vec<f64>> = sizes.iter().map(|&n| Vec::with_capacity(n * dim)).collect();
    let mut per_graph_labels: Vec<Vec<i64>> = sizes.iter().map(|&n| Vec::with_capacity(n)).collect();
    for i in 0..total_nodes {
        per_graph_feats[graph_of[i]].extend_from_slice(&node_features[i]);
        if let Some(vals) = &node_label_values {
            per_graph_labels[graph_of[i]].push(vals[i]);
        }
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for (gi, ((feats, edge_list), n)) in per_graph_feats.into_iter().zip(edges).zip(&sizes).enumerate() {
        let x = Tensor::new(*n, dim, feats)?;
        let label = class_index[&labels[gi].1];
        let mut g = Graph::new(*n, edge_list, x, label)?;
        if node_label_values.is_some() {
            g = g.with_node_labels(std::mem::take(&mut per_graph_labels[gi]))?;
        }
        graphs.push(g);
    }
    GraphSet::new(name, graphs, classes.len())
}

/// Writes a set in TU format. Edges are emitted in both directions, graph
/// labels as class indices, node labels when every graph carries them, and
/// features as node attributes otherwise.
pub fn write_tu(set: &GraphSet, dir: impl AsRef<Path>, name: &str) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut a = fs::File::create(file(dir, name, "A"))?;
    let mut ind = fs::File::create(file(dir, name, "graph_indicator"))?;
    let mut gl = fs::File::create(file(dir, name, "graph_labels"))?;
    let with_labels = set.graphs().iter().all(|g| g.node_labels().is_some());
    let mut nl = if with_labels {
        Some(fs::File::create(file(dir, name, "node_labels"))?)
    } else {
        None
    };
    let mut attr = if with_labels {
        None
    } else {
        Some(fs::File::create(file(dir, name, "node_attributes"))?)
    };

    let mut offset = 1;
    for (gi, g) in set.graphs().iter().enumerate() {
        writeln!(gl, "{}", g.label())?;
        for i in 0..g.num_nodes() {
            writeln!(ind, "{}", gi + 1)?;
            if let (Some(f), Some(labels)) = (nl.as_mut(), g.node_labels()) {
                writeln!(f, "{}", labels[i])?;
            }
            if let Some(f) = attr.as_mut() {
                let row: Vec<String> = g.features().row(i).iter().map(|x| format!("{x:?}")).collect();
                writeln!(f, "{}", row.join(", "))?;
            }
        }
        for &(u, v) in g.edges().iter() {
            writeln!(a, "{}, {}", u + offset, v + offset)?;
            writeln!(a, "{}, {}", v + offset, u + offset)?;
        }
        offset += g.num_nodes();
    }
    Ok(())
}
