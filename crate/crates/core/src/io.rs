//! Edge-list parsing, id interning and GraphML / report serialization.
//!
//! Bipartite edge files hold `<fan>\t<artist>` per line; weighted edge files
//! hold `<u>\t<v>[\t<weight>]`. Blank lines and lines starting with `#` are
//! skipped. Labels are UTF-8 and interned to dense ids in first-appearance
//! order.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Partition, WeightedGraph};
use crate::report::SegmentationReport;

/// Bijection between external labels and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdInterner {
    forward: HashMap<String, usize>,
    reverse: Vec<String>,
}

impl IdInterner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interner whose id `i` is `labels[i]`. Duplicate labels keep their
    /// first id.
    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut interner = Self::new();
        for l in labels {
            interner.intern(&l.into());
        }
        interner
    }

    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.forward.get(label) {
            return id;
        }
        let id = self.reverse.len();
        self.forward.insert(label.to_owned(), id);
        self.reverse.push(label.to_owned());
        id
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.forward.get(label).copied()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.reverse[id]
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.reverse
    }
}

/// `(label, value)` rows ordered by value descending, then label ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledTable {
    pub rows: Vec<LabeledRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub label: String,
    pub value: f64,
}

impl LabeledTable {
    /// Sorts the given rows into table order.
    pub fn new(rows: impl IntoIterator<Item = (String, f64)>) -> Self {
        let mut rows: Vec<LabeledRow> = rows.into_iter().map(|(label, value)| LabeledRow { label, value }).collect();
        rows.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.label.cmp(&b.label)));
        Self { rows }
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn truncated(&self, k: usize) -> Self {
        Self { rows: self.rows.iter().take(k).cloned().collect() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Yields `(line number, fields)` for every non-blank, non-comment line.
fn records<R: BufRead>(reader: R, delimiter: char) -> impl Iterator<Item = Result<(usize, Vec<String>)>> {
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::Io(e))),
        };
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(Ok((i + 1, trimmed.split(delimiter).map(str::to_owned).collect())))
    })
}

/// Reads a fan→artist membership file.
pub fn read_bipartite_edges<R: BufRead>(
    reader: R,
    delimiter: char,
) -> Result<(BipartiteGraph, IdInterner, IdInterner)> {
    let mut fans = IdInterner::new();
    let mut artists = IdInterner::new();
    let mut edges = Vec::new();
    for record in records(reader, delimiter) {
        let (line, fields) = record?;
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields (fan, artist), found {}", fields.len()),
            });
        }
        edges.push((fans.intern(&fields[0]), artists.intern(&fields[1])));
    }
    let graph = BipartiteGraph::with_sizes(fans.len(), artists.len(), &edges);
    Ok((graph, fans, artists))
}

/// Reads an undirected weighted edge file; a missing weight means 1.
pub fn read_weighted_edges<R: BufRead>(reader: R, delimiter: char) -> Result<(WeightedGraph, IdInterner)> {
    let mut ids = IdInterner::new();
    let mut edges = Vec::new();
    for record in records(reader, delimiter) {
        let (line, fields) = record?;
        if !(2..=3).contains(&fields.len()) || fields[..2].iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 or 3 fields (u, v[, weight]), found {}", fields.len()),
            });
        }
        let weight = match fields.get(2) {
            Some(w) => w
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse { line, message: format!("bad weight {w:?}: {e}") })?,
            None => 1.0,
        };
        if fields[0] == fields[1] {
            return Err(Error::Parse { line, message: format!("self-loop on {:?}", fields[0]) });
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::Parse { line, message: format!("weight must be positive, got {weight}") });
        }
        edges.push((ids.intern(&fields[0]), ids.intern(&fields[1]), weight));
    }
    let graph = WeightedGraph::with_vertex_count(ids.len(), &edges)?;
    Ok((graph, ids))
}

/// Writes `u\tv\tweight` per undirected edge, labels taken from `ids`.
pub fn write_weighted_edges<W: Write>(g: &WeightedGraph, ids: &IdInterner, out: &mut W) -> Result<()> {
    for (u, v, w) in g.edges() {
        writeln!(out, "{}\t{}\t{}", ids.label(u), ids.label(v), w)?;
    }
    Ok(())
}

pub fn write_bipartite_edges<W: Write>(
    b: &BipartiteGraph,
    fans: &IdInterner,
    artists: &IdInterner,
    out: &mut W,
) -> Result<()> {
    for (l, r) in b.edges() {
        writeln!(out, "{}\t{}", fans.label(l), artists.label(r))?;
    }
    Ok(())
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// GraphML with a `weight` edge attribute and, when a partition is given, a
/// `community` node attribute. Nodes appear in dense id order.
pub fn write_graphml<W: Write>(
    g: &WeightedGraph,
    ids: &IdInterner,
    partition: Option<&Partition>,
    out: &mut W,
) -> Result<()> {
    if let Some(p) = partition {
        if p.len() != g.vertex_count() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} vertices, graph has {}",
                p.len(),
                g.vertex_count()
            )));
        }
    }
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(out, r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#)?;
    if partition.is_some() {
        writeln!(out, r#"  <key id="community" for="node" attr.name="community" attr.type="int"/>"#)?;
    }
    writeln!(out, r#"  <graph id="G" edgedefault="undirected">"#)?;
    for v in 0..g.vertex_count() {
        let id = xml_escape(ids.label(v));
        match partition {
            Some(p) => writeln!(
                out,
                r#"    <node id="{id}"><data key="community">{}</data></node>"#,
                p.community_of(v)
            )?,
            None => writeln!(out, r#"    <node id="{id}"/>"#)?,
        }
    }
    for (u, v, w) in g.edges() {
        writeln!(
            out,
            r#"    <edge source="{}" target="{}"><data key="weight">{w}</data></edge>"#,
            xml_escape(ids.label(u)),
            xml_escape(ids.label(v))
        )?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    Ok(())
}

/// Reads `<artist>\t<genre id>` lines. Returns the genre of every artist
/// known to `artists`; artists absent from the file get `None`, unknown
/// labels in the file are ignored.
pub fn read_genre_map<R: BufRead>(reader: R, delimiter: char, artists: &IdInterner) -> Result<Vec<Option<usize>>> {
    let mut genres = vec![None; artists.len()];
    for record in records(reader, delimiter) {
        let (line, fields) = record?;
        if fields.len() != 2 {
            return Err(Error::Parse { line, message: format!("expected 2 fields (artist, genre), found {}", fields.len()) });
        }
        let genre = fields[1]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse { line, message: format!("bad genre id {:?}: {e}", fields[1]) })?;
        if let Some(id) = artists.get(&fields[0]) {
            genres[id] = Some(genre);
        }
    }
    Ok(genres)
}

pub fn write_genre_map<W: Write>(artists: &IdInterner, genres: &[usize], out: &mut W) -> Result<()> {
    for (id, g) in genres.iter().enumerate() {
        writeln!(out, "{}\t{}", artists.label(id), g)?;
    }
    Ok(())
}

/// Writes the report as pretty-printed JSON followed by a newline.
pub fn write_report<W: Write>(report: &SegmentationReport, out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_direct_parse() {
        let (b, fans, artists) = read_bipartite_edges("f1\ta1\nf2\ta1\n".as_bytes(), '\t').unwrap();
        assert_eq!((b.n_left(), b.n_right(), b.edge_count()), (2, 1, 2));
        assert_eq!(fans.label(1), "f2");
        assert_eq!(artists.get("a1"), Some(0));
    }

    #[test]
    fn bipartite_skips_comments_and_blanks() {
        let (b, _, _) = read_bipartite_edges("f1\ta1\n# comment\n\nf1\ta2\n".as_bytes(), '\t').unwrap();
        assert_eq!(b.edge_count(), 2);
    }

    #[test]
    fn bipartite_one_field_names_line() {
        let err = read_bipartite_edges("f1\n".as_bytes(), '\t').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn bipartite_empty_stream() {
        let (b, _, _) = read_bipartite_edges("".as_bytes(), '\t').unwrap();
        assert_eq!(b.edge_count(), 0);
    }

    #[test]
    fn custom_delimiter_and_utf8() {
        let (b, _, artists) = read_bipartite_edges("粉丝1,张艺兴(EXO)\n粉丝2,张艺兴(EXO)\n".as_bytes(), ',').unwrap();
        assert_eq!(b.edge_count(), 2);
        assert_eq!(artists.label(0), "张艺兴(EXO)");
    }

    #[test]
    fn weighted_explicit_and_default() {
        let (g, _) = read_weighted_edges("a\tb\t3\n".as_bytes(), '\t').unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 3.0)]);
        let (g, _) = read_weighted_edges("a\tb\n".as_bytes(), '\t').unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);
    }

    #[test]
    fn weighted_errors_carry_line() {
        let err = read_weighted_edges("a\ta\t1\n".as_bytes(), '\t').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(err.to_string().contains("self-loop"));
        let err = read_weighted_edges("a\tb\n# c\nb\tc\t0\n".as_bytes(), '\t').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = read_weighted_edges("a\tb\tx\n".as_bytes(), '\t').unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn table_order() {
        let t = LabeledTable::new([("b".to_string(), 2.0), ("c".to_string(), 5.0), ("a".to_string(), 2.0)]);
        let labels: Vec<_> = t.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["c", "a", "b"]);
    }

    #[test]
    fn graphml_single_edge_with_partition() {
        let g = WeightedGraph::from_edges(&[(0, 1, 2.5)]).unwrap();
        let ids = IdInterner::from_labels(["x", "y"]);
        let p = Partition::new(vec![0, 0]).unwrap();
        let mut buf = Vec::new();
        write_graphml(&g, &ids, Some(&p), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<node ").count(), 2);
        assert_eq!(text.matches("<edge ").count(), 1);
        assert_eq!(text.matches(r#"<data key="community">0</data>"#).count(), 2);
        assert!(text.contains(r#"<data key="weight">2.5</data>"#));
    }

    #[test]
    fn graphml_rejects_short_partition() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        let ids = IdInterner::from_labels(["x", "y"]);
        let p = Partition::new(vec![0]).unwrap();
        assert!(write_graphml(&g, &ids, Some(&p), &mut Vec::new()).is_err());
    }

    #[test]
    fn empty_report_has_empty_arrays() {
        let mut buf = Vec::new();
        write_report(&SegmentationReport::default(), &mut buf).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["communities"], serde_json::json!([]));
        assert!(doc["graph"].is_object());
        assert!(doc["powerlaw"].is_object());
        assert!(doc["concordance"].is_null());
    }

    #[test]
    fn genre_map_round_trip() {
        let artists = IdInterner::from_labels(["a0", "a1", "a2"]);
        let mut buf = Vec::new();
        write_genre_map(&artists, &[2, 0, 1], &mut buf).unwrap();
        buf.extend_from_slice(b"zz\t4\n");
        assert_eq!(read_genre_map(buf.as_slice(), '\t', &artists).unwrap(), vec![Some(2), Some(0), Some(1)]);
        assert!(read_genre_map("a0\tx\n".as_bytes(), '\t', &artists).is_err());
    }

    #[test]
    fn interner_is_deterministic() {
        let text = "c\ta\nb\ta\nc\td\n";
        let (_, f1, a1) = read_bipartite_edges(text.as_bytes(), '\t').unwrap();
        let (_, f2, a2) = read_bipartite_edges(text.as_bytes(), '\t').unwrap();
        assert_eq!(f1, f2);
        assert_eq!(a1, a2);
        assert_eq!(f1.labels(), ["c", "b"]);
    }
}
