//! Workflow files.
//!
//! JSON (schema 1):
//!
//! ```json
//! {
//!   "schema": 1,
//!   "processors": 2,
//!   "tasks": ["entry", "a", "exit"],
//!   "wcet": [[0, 0], [10, 12], [0, 0]],
//!   "edges": [[0, 1, 0], [1, 2, 0]]
//! }
//! ```
//!
//! `edges` entries are `[from, to, weight]` with task indices into `tasks`.
//! Files may hold either a raw or an augmented DAG; loading augments.
//!
//! DOT export uses the same content as node and edge attributes:
//!
//! ```text
//! digraph workflow {
//!   graph [schema=1, processors=2];
//!   0 [label="entry", wcet="0 0"];
//!   0 -> 1 [weight=0];
//! }
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{augment, RawGraph, TaskGraph};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
}

impl GraphFormat {
    /// Picks a format from a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("dot") | Some("gv") => GraphFormat::Dot,
            _ => GraphFormat::Json,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "T: Real"))]
struct WorkflowFile<T> {
    schema: u32,
    processors: usize,
    tasks: Vec<String>,
    wcet: Vec<Vec<T>>,
    edges: Vec<(usize, usize, T)>,
}

pub fn to_json<T: Real>(graph: &TaskGraph<T>) -> String {
    let raw = graph.to_raw();
    let file = WorkflowFile {
        schema: SCHEMA_VERSION,
        processors: raw.num_processors,
        tasks: raw.names,
        wcet: raw.wcet,
        edges: raw.edges,
    };
    serde_json::to_string_pretty(&file).expect("workflow serializes")
}

pub fn parse_json<T: Real>(text: &str) -> Result<TaskGraph<T>> {
    let file: WorkflowFile<T> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.schema != SCHEMA_VERSION {
        return Err(Error::InvalidGraph(format!(
            "unsupported schema {} (expected {SCHEMA_VERSION})",
            file.schema
        )));
    }
    augment(RawGraph {
        num_processors: file.processors,
        names: file.tasks,
        wcet: file.wcet,
        edges: file.edges,
    })
}

pub fn to_dot<T: Real>(graph: &TaskGraph<T>) -> String {
    let mut out = String::new();
    out.push_str("digraph workflow {\n");
    let _ = writeln!(
        out,
        "  graph [schema={SCHEMA_VERSION}, processors={}];",
        graph.num_processors()
    );
    for t in graph.tasks() {
        let wcet: Vec<String> = graph.wcet_row(t).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            out,
            "  {} [label=\"{}\", wcet=\"{}\"];",
            t.0,
            escape(graph.name(t)),
            wcet.join(" ")
        );
    }
    for e in graph.edges() {
        let _ = writeln!(out, "  {} -> {} [weight={}];", e.from.0, e.to.0, e.weight);
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.chars.get(self.pos + 1) == Some(&'/') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected '{c}', found '{got}'"))),
            None => Err(self.err(format!("expected '{c}', found end of input"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    /// Identifier, number, or quoted string.
    fn token(&mut self) -> Result<String> {
        self.skip_ws();
        match self.peek() {
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('\\') => match self.bump() {
                            Some(c) => s.push(c),
                            None => return Err(self.err("unterminated string")),
                        },
                        Some('"') => return Ok(s),
                        Some(c) => s.push(c),
                        None => return Err(self.err("unterminated string")),
                    }
                }
            }
            Some(c) if c.is_alphanumeric() || "_.-+".contains(c) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || "_.-+".contains(c) {
                        // stop before an edge operator
                        if c == '-' && self.chars.get(self.pos + 1) == Some(&'>') {
                            break;
                        }
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(s)
            }
            Some(c) => Err(self.err(format!("unexpected character '{c}'"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn attrs(&mut self) -> Result<Vec<(String, String, usize, usize)>> {
        let mut out = Vec::new();
        if !self.eat('[') {
            return Ok(out);
        }
        loop {
            if self.eat(']') {
                return Ok(out);
            }
            self.skip_ws();
            let (line, col) = (self.line, self.col);
            let key = self.token()?;
            self.expect('=')?;
            let value = self.token()?;
            out.push((key, value, line, col));
            if !self.eat(',') && !self.eat(';') {
                self.expect(']')?;
                return Ok(out);
            }
        }
    }
}

fn parse_num<V: std::str::FromStr>(s: &str, line: usize, column: usize, what: &str) -> Result<V> {
    s.parse().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("invalid {what} '{s}'"),
    })
}

pub fn parse_dot<T: Real>(text: &str) -> Result<TaskGraph<T>> {
    let mut cur = Cursor::new(text);
    let kw = cur.token()?;
    if kw != "digraph" {
        return Err(cur.err(format!("expected 'digraph', found '{kw}'")));
    }
    cur.skip_ws();
    if cur.peek() != Some('{') {
        cur.token()?;
    }
    cur.expect('{')?;

    let mut processors: Option<usize> = None;
    let mut nodes: Vec<Option<(String, Vec<T>)>> = Vec::new();
    let mut edges = Vec::new();
    loop {
        if cur.eat('}') {
            break;
        }
        cur.skip_ws();
        let (line, col) = (cur.line, cur.col);
        let head = cur.token()?;
        if head == "graph" || head == "node" || head == "edge" {
            let attrs = cur.attrs()?;
            if head == "graph" {
                for (k, v, l, c) in attrs {
                    match k.as_str() {
                        "processors" => processors = Some(parse_num(&v, l, c, "processor count")?),
                        "schema" => {
                            let s: u32 = parse_num(&v, l, c, "schema")?;
                            if s != SCHEMA_VERSION {
                                return Err(Error::Parse {
                                    line: l,
                                    column: c,
                                    message: format!("unsupported schema {s}"),
                                });
                            }
                        }
                        _ => {}
                    }
                }
            }
            cur.eat(';');
            continue;
        }
        let from: usize = parse_num(&head, line, col, "node id")?;
        cur.skip_ws();
        if cur.peek() == Some('-') {
            cur.bump();
            cur.expect('>')?;
            cur.skip_ws();
            let (l2, c2) = (cur.line, cur.col);
            let to: usize = parse_num(&cur.token()?, l2, c2, "node id")?;
            let mut weight = None;
            for (k, v, l, c) in cur.attrs()? {
                if k == "weight" {
                    weight = Some(parse_num::<T>(&v, l, c, "edge weight")?);
                }
            }
            let weight = weight.ok_or_else(|| Error::Parse {
                line,
                column: col,
                message: format!("edge {from} -> {to} has no weight"),
            })?;
            edges.push((from, to, weight));
        } else {
            let mut label = None;
            let mut wcet = None;
            for (k, v, l, c) in cur.attrs()? {
                match k.as_str() {
                    "label" => label = Some(v),
                    "wcet" => {
                        let row = v
                            .split_whitespace()
                            .map(|x| parse_num::<T>(x, l, c, "wcet"))
                            .collect::<Result<Vec<T>>>()?;
                        wcet = Some(row);
                    }
                    _ => {}
                }
            }
            let wcet = wcet.ok_or_else(|| Error::Parse {
                line,
                column: col,
                message: format!("node {from} has no wcet attribute"),
            })?;
            if nodes.len() <= from {
                nodes.resize(from + 1, None);
            }
            if nodes[from].is_some() {
                return Err(Error::Parse {
                    line,
                    column: col,
                    message: format!("node {from} declared twice"),
                });
            }
            nodes[from] = Some((label.unwrap_or_else(|| from.to_string()), wcet));
        }
        cur.eat(';');
    }

    let mut raw = RawGraph::new(processors.ok_or_else(|| cur.err("missing graph [processors=...]"))?);
    for (i, node) in nodes.into_iter().enumerate() {
        let (name, wcet) = node.ok_or_else(|| Error::InvalidGraph(format!("node {i} is not declared")))?;
        raw.add_task(name, wcet);
    }
    raw.edges = edges;
    augment(raw)
}

pub fn save<T: Real>(graph: &TaskGraph<T>, path: &Path, format: GraphFormat) -> Result<()> {
    let text = match format {
        GraphFormat::Json => to_json(graph),
        GraphFormat::Dot => to_dot(graph),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load<T: Real>(path: &Path, format: GraphFormat) -> Result<TaskGraph<T>> {
    let text = std::fs::read_to_string(path)?;
    match format {
        GraphFormat::Json => parse_json(&text),
        GraphFormat::Dot => parse_dot(&text),
    }
}

pub fn load_json<T: Real>(path: &Path) -> Result<TaskGraph<T>> {
    load(path, GraphFormat::Json)
}

pub fn load_dot<T: Real>(path: &Path) -> Result<TaskGraph<T>> {
    load(path, GraphFormat::Dot)
}
