//! Bit-exact text formats. Full-line comments start with `#`.
//!
//! Graph:
//! ```text
//! graph <n>
//! loops all|none|<space-separated ids>
//! edges
//! <u> <v>
//! ```
//!
//! Partition: one line per part, space-separated vertex ids.
//!
//! Colored graph: the graph block followed by `color <name>: <ids>` lines.
//!
//! Transduction: `colors:`, `nu:`, and `eta:` lines in the formula
//! grammar. Sparsify witnesses use a line-oriented node list documented
//! at [`render_sparsify_witness`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::logic::{parse_formula, render, ColoredGraph};
use crate::partition::Partition;
use crate::sparsify::{NodeData, SparsifyNode, SparsifyWitness};
use crate::transduction::{Transduction, Witness};

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_ids(fields: &[&str]) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| f.parse::<usize>().map_err(|_| Error::Format(format!("bad vertex id `{f}`"))))
        .collect()
}

pub fn render_graph(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {}", g.vertex_count());
    let loops = g.loops();
    if loops.len() == g.vertex_count() {
        out.push_str("loops all\n");
    } else if loops.is_empty() {
        out.push_str("loops none\n");
    } else {
        let ids: Vec<String> = loops.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "loops {}", ids.join(" "));
    }
    out.push_str("edges\n");
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| Error::Format("empty graph input".into()))?;
    let n: usize = header
        .strip_prefix("graph ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("expected `graph <n>`, got `{header}`")))?;
    let loops_line =
        lines.next().ok_or_else(|| Error::Format("missing `loops` line".into()))?;
    let loops_spec = loops_line
        .strip_prefix("loops")
        .ok_or_else(|| Error::Format(format!("expected `loops ...`, got `{loops_line}`")))?
        .trim();
    let loops: VertexSet = match loops_spec {
        "all" => (0..n).collect(),
        "none" | "" => VertexSet::new(),
        ids => parse_ids(&ids.split_whitespace().collect::<Vec<_>>())?.into_iter().collect(),
    };
    let edges_line =
        lines.next().ok_or_else(|| Error::Format("missing `edges` line".into()))?;
    if edges_line != "edges" {
        return Err(Error::Format(format!("expected `edges`, got `{edges_line}`")));
    }
    let mut edge_list = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Format(format!("expected `u v`, got `{line}`")));
        }
        let ids = parse_ids(&fields)?;
        edge_list.push((ids[0], ids[1]));
    }
    Graph::build(n, &edge_list, &loops)
}

pub fn render_partition(p: &Partition) -> String {
    let mut out = String::new();
    for part in p.parts() {
        let ids: Vec<String> = part.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    out
}

/// Parses a partition of `0..host_size`.
pub fn parse_partition(text: &str, host_size: usize) -> Result<Partition> {
    let mut parts = Vec::new();
    for line in content_lines(text) {
        parts.push(parse_ids(&line.split_whitespace().collect::<Vec<_>>())?);
    }
    Partition::from_parts(host_size, parts)
}

pub fn render_colored_graph(cg: &ColoredGraph) -> String {
    let mut out = render_graph(&cg.graph);
    for (name, set) in &cg.colors {
        let ids: Vec<String> = set.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "color {}:{}{}", name, if ids.is_empty() { "" } else { " " }, ids.join(" "));
    }
    out
}

pub fn parse_colored_graph(text: &str) -> Result<ColoredGraph> {
    let mut graph_part = String::new();
    let mut colors: BTreeMap<String, VertexSet> = BTreeMap::new();
    for line in content_lines(text) {
        if let Some(rest) = line.strip_prefix("color ") {
            let (name, ids) = rest
                .split_once(':')
                .ok_or_else(|| Error::Format(format!("expected `color <name>: <ids>`, got `{line}`")))?;
            let ids = parse_ids(&ids.split_whitespace().collect::<Vec<_>>())?;
            colors.insert(name.trim().to_string(), ids.into_iter().collect());
        } else {
            graph_part.push_str(line);
            graph_part.push('\n');
        }
    }
    let mut cg = ColoredGraph::new(parse_graph(&graph_part)?);
    for (name, set) in colors {
        cg.insert_color(name, set)?;
    }
    Ok(cg)
}

pub fn render_transduction(t: &Transduction) -> String {
    format!(
        "colors: {}\nnu: {}\neta: {}\n",
        t.colors().join(" "),
        render(t.domain_formula()),
        render(t.edge_formula()),
    )
}

pub fn parse_transduction(text: &str) -> Result<Transduction> {
    let mut colors = None;
    let mut nu = None;
    let mut eta = None;
    for line in content_lines(text) {
        if let Some(rest) = line.strip_prefix("colors:") {
            colors = Some(rest.split_whitespace().map(str::to_string).collect::<Vec<_>>());
        } else if let Some(rest) = line.strip_prefix("nu:") {
            nu = Some(parse_formula(rest.trim())?);
        } else if let Some(rest) = line.strip_prefix("eta:") {
            eta = Some(parse_formula(rest.trim())?);
        } else {
            return Err(Error::Format(format!("unexpected transduction line `{line}`")));
        }
    }
    let colors = colors.ok_or_else(|| Error::Format("missing `colors:` line".into()))?;
    let nu = nu.ok_or_else(|| Error::Format("missing `nu:` line".into()))?;
    let eta = eta.ok_or_else(|| Error::Format("missing `eta:` line".into()))?;
    Transduction::symmetrized(colors, nu, eta)
}

pub fn render_witness(w: &Witness) -> String {
    render_colored_graph(&w.coloring)
}

pub fn parse_witness(text: &str) -> Result<Witness> {
    Ok(Witness::new(parse_colored_graph(text)?))
}

/// Serializes a sparsify witness: header lines `k`/`d`, the result graph
/// between `result`/`endresult`, then one block per tree node in preorder:
///
/// ```text
/// node <id> parent <id|-> vertices <ids>
/// part <ids>
/// leader <part-index> <vertex>
/// xedge <u> <v>
/// endnode
/// ```
pub fn render_sparsify_witness(w: &SparsifyWitness) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sparsify-witness");
    let _ = writeln!(out, "k {}", w.k);
    let _ = writeln!(out, "d {}", w.d);
    out.push_str("result\n");
    out.push_str(&render_graph(&w.result));
    out.push_str("endresult\n");
    let mut next_id = 0;
    render_node(&w.root, None, &mut next_id, &mut out);
    out
}

fn render_node(node: &SparsifyNode, parent: Option<usize>, next_id: &mut usize, out: &mut String) {
    let id = *next_id;
    *next_id += 1;
    let ids: Vec<String> = node.vertices.iter().map(|v| v.to_string()).collect();
    let parent_text = parent.map_or("-".to_string(), |p| p.to_string());
    let _ = writeln!(out, "node {id} parent {parent_text} vertices {}", ids.join(" "));
    if let Some(data) = &node.data {
        for part in data.flip_partition.parts() {
            let ids: Vec<String> = part.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "part {}", ids.join(" "));
        }
        for (i, leader) in data.leaders.iter().enumerate() {
            let _ = writeln!(out, "leader {i} {leader}");
        }
        for &(u, v) in &data.x_edges {
            let _ = writeln!(out, "xedge {u} {v}");
        }
    }
    out.push_str("endnode\n");
    if let Some(data) = &node.data {
        for child in &data.children {
            render_node(child, Some(id), next_id, out);
        }
    }
}

struct RawNode {
    parent: Option<usize>,
    vertices: Vec<usize>,
    parts: Vec<Vec<usize>>,
    leaders: Vec<(usize, usize)>,
    x_edges: Vec<(usize, usize)>,
    children: Vec<usize>,
}

pub fn parse_sparsify_witness(text: &str) -> Result<SparsifyWitness> {
    let mut lines = content_lines(text).peekable();
    if lines.next() != Some("sparsify-witness") {
        return Err(Error::Format("missing `sparsify-witness` header".into()));
    }
    let k = parse_keyed(lines.next(), "k")?;
    let d = parse_keyed(lines.next(), "d")?;
    if lines.next() != Some("result") {
        return Err(Error::Format("missing `result` block".into()));
    }
    let mut graph_text = String::new();
    for line in lines.by_ref() {
        if line == "endresult" {
            break;
        }
        graph_text.push_str(line);
        graph_text.push('\n');
    }
    let result = parse_graph(&graph_text)?;

    let mut nodes: Vec<RawNode> = Vec::new();
    while let Some(line) = lines.next() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 || fields[0] != "node" || fields[2] != "parent" {
            return Err(Error::Format(format!("expected a node header, got `{line}`")));
        }
        let id: usize =
            fields[1].parse().map_err(|_| Error::Format("bad node id".into()))?;
        if id != nodes.len() {
            return Err(Error::Format(format!("node ids must be dense, got {id}")));
        }
        let parent = if fields[3] == "-" {
            None
        } else {
            Some(fields[3].parse::<usize>().map_err(|_| Error::Format("bad parent id".into()))?)
        };
        if fields.get(4) != Some(&"vertices") {
            return Err(Error::Format(format!("expected `vertices` in `{line}`")));
        }
        let vertices = parse_ids(&fields[5..])?;
        let mut raw = RawNode {
            parent,
            vertices,
            parts: vec![],
            leaders: vec![],
            x_edges: vec![],
            children: vec![],
        };
        for line in lines.by_ref() {
            if line == "endnode" {
                break;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.first() {
                Some(&"part") => raw.parts.push(parse_ids(&fields[1..])?),
                Some(&"leader") if fields.len() == 3 => {
                    let ids = parse_ids(&fields[1..])?;
                    raw.leaders.push((ids[0], ids[1]));
                }
                Some(&"xedge") if fields.len() == 3 => {
                    let ids = parse_ids(&fields[1..])?;
                    raw.x_edges.push((ids[0].min(ids[1]), ids[0].max(ids[1])));
                }
                _ => return Err(Error::Format(format!("unexpected node line `{line}`"))),
            }
        }
        if let Some(p) = raw.parent {
            if p >= nodes.len() {
                return Err(Error::Format("parent appears after child".into()));
            }
            nodes[p].children.push(id);
        }
        nodes.push(raw);
    }
    if nodes.is_empty() {
        return Err(Error::Format("witness has no nodes".into()));
    }
    let root = build_node(&nodes, 0)?;
    Ok(SparsifyWitness { root, result, k, d })
}

fn build_node(nodes: &[RawNode], id: usize) -> Result<SparsifyNode> {
    let raw = &nodes[id];
    if raw.parts.is_empty() {
        if !raw.children.is_empty() {
            return Err(Error::Format("leaf node with children".into()));
        }
        return Ok(SparsifyNode { vertices: raw.vertices.clone(), data: None });
    }
    // Parts are stored in original ids; map onto the local indexing.
    let local_parts: Vec<Vec<usize>> = raw
        .parts
        .iter()
        .map(|part| {
            part.iter()
                .map(|v| {
                    raw.vertices
                        .iter()
                        .position(|o| o == v)
                        .ok_or_else(|| Error::Format(format!("part vertex {v} not in node")))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<_>>()?;
    let flip_partition = Partition::from_parts(raw.vertices.len(), local_parts)?;
    let mut leaders = vec![usize::MAX; flip_partition.len()];
    for &(idx, v) in &raw.leaders {
        if idx >= leaders.len() {
            return Err(Error::Format(format!("leader index {idx} out of range")));
        }
        leaders[idx] = v;
    }
    if leaders.contains(&usize::MAX) {
        return Err(Error::Format("missing leader for some part".into()));
    }
    let children = raw
        .children
        .iter()
        .map(|&c| build_node(nodes, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparsifyNode {
        vertices: raw.vertices.clone(),
        data: Some(NodeData {
            flip_partition,
            leaders,
            x_edges: raw.x_edges.clone(),
            children,
        }),
    })
}

fn parse_keyed(line: Option<&str>, key: &str) -> Result<usize> {
    line.and_then(|l| l.strip_prefix(key))
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("expected `{key} <value>`")))
}
