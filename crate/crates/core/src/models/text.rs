//! Versioned plain-text model dump.
//!
//! Layout (line oriented, whitespace separated):
//!
//! ```text
//! optbench-model v1
//! family gradient-boost
//! base 10.25
//! learning_rate 0.1
//! trees 2
//! tree 0
//! nodes 3
//! node 0 branch 1 0.5 1 2
//! node 1 leaf -0.25
//! node 2 leaf 0.75
//! tree 1
//! ...
//! end
//! ```
//!
//! Branch nodes carry `feature threshold left right`; leaves carry their
//! value. Floats are written in shortest round-trip form.

use super::{
    FittedModel, GradientBoost, ModelError, NaturalGradientBoost, Node, RandomForest,
    RegressionTree,
};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

const HEADER: &str = "optbench-model v1";

pub(super) fn to_text(model: &FittedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    match model {
        FittedModel::Cart(tree) => {
            let _ = writeln!(out, "family cart");
            write_tree(&mut out, tree);
        }
        FittedModel::RandomForest(forest) => {
            let _ = writeln!(out, "family random-forest");
            let _ = writeln!(out, "trees {}", forest.trees().len());
            for (i, tree) in forest.trees().iter().enumerate() {
                let _ = writeln!(out, "tree {i}");
                write_tree(&mut out, tree);
            }
        }
        FittedModel::GradientBoost(gb) => {
            let _ = writeln!(out, "family gradient-boost");
            let _ = writeln!(out, "base {}", gb.base());
            let _ = writeln!(out, "learning_rate {}", gb.learning_rate());
            let _ = writeln!(out, "trees {}", gb.trees().len());
            for (i, tree) in gb.trees().iter().enumerate() {
                let _ = writeln!(out, "tree {i}");
                write_tree(&mut out, tree);
            }
        }
        FittedModel::NgbGaussian(ngb) => {
            let (mu0, log_sigma0, learning_rate, stages) = ngb.parts();
            let _ = writeln!(out, "family ngb-gaussian");
            let _ = writeln!(out, "mu0 {mu0}");
            let _ = writeln!(out, "log_sigma0 {log_sigma0}");
            let _ = writeln!(out, "learning_rate {learning_rate}");
            let _ = writeln!(out, "stages {}", stages.len());
            for (i, (scale, mu_tree, ls_tree)) in stages.iter().enumerate() {
                let _ = writeln!(out, "stage {i} scale {scale}");
                write_tree(&mut out, mu_tree);
                write_tree(&mut out, ls_tree);
            }
        }
    }
    let _ = writeln!(out, "end");
    out
}

fn write_tree(out: &mut String, tree: &RegressionTree) {
    let _ = writeln!(out, "nodes {}", tree.nodes().len());
    for (i, node) in tree.nodes().iter().enumerate() {
        match node {
            Node::Branch {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "node {i} branch {feature} {threshold} {left} {right}");
            }
            Node::Leaf { value } => {
                let _ = writeln!(out, "node {i} leaf {value}");
            }
        }
    }
}

struct Lines<'a> {
    iter: core::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Lines<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            iter: s.lines(),
            line_no: 0,
        }
    }

    fn next(&mut self) -> Result<&'a str, ModelError> {
        loop {
            self.line_no += 1;
            match self.iter.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => return Ok(l.trim()),
                None => {
                    return Err(ModelError::Parse {
                        line: self.line_no,
                        message: "unexpected end of input".to_string(),
                    })
                }
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Parse {
            line: self.line_no,
            message: message.into(),
        }
    }

    /// Next line, which must start with `tag`; returns the remainder.
    fn tagged(&mut self, tag: &str) -> Result<&'a str, ModelError> {
        let line = self.next()?;
        line.strip_prefix(tag)
            .map(str::trim)
            .ok_or_else(|| self.err(format!("expected `{tag} ...`, got `{line}`")))
    }
}

fn parse_f64(lines: &Lines<'_>, s: &str) -> Result<f64, ModelError> {
    s.parse::<f64>()
        .map_err(|_| lines.err(format!("bad float `{s}`")))
}

fn parse_usize(lines: &Lines<'_>, s: &str) -> Result<usize, ModelError> {
    s.parse::<usize>()
        .map_err(|_| lines.err(format!("bad count `{s}`")))
}

fn read_tree(lines: &mut Lines<'_>) -> Result<RegressionTree, ModelError> {
    let count = {
        let rest = lines.tagged("nodes")?;
        parse_usize(lines, rest)?
    };
    if count == 0 {
        return Err(lines.err("tree must have at least one node"));
    }
    let mut nodes = Vec::with_capacity(count);
    for expect in 0..count {
        let line = lines.next()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("node") {
            return Err(lines.err(format!("expected `node ...`, got `{line}`")));
        }
        let idx_s = parts.next().ok_or_else(|| lines.err("missing node index"))?;
        let idx = parse_usize(lines, idx_s)?;
        if idx != expect {
            return Err(lines.err(format!("node index {idx}, expected {expect}")));
        }
        match parts.next() {
            Some("branch") => {
                let f: Vec<&str> = parts.collect();
                if f.len() != 4 {
                    return Err(lines.err("branch needs `feature threshold left right`"));
                }
                let feature = parse_usize(lines, f[0])?;
                let threshold = parse_f64(lines, f[1])?;
                let left = parse_usize(lines, f[2])?;
                let right = parse_usize(lines, f[3])?;
                if left >= count || right >= count {
                    return Err(lines.err("child index out of range"));
                }
                nodes.push(Node::Branch {
                    feature,
                    threshold,
                    left,
                    right,
                });
            }
            Some("leaf") => {
                let v = parts.next().ok_or_else(|| lines.err("missing leaf value"))?;
                if parts.next().is_some() {
                    return Err(lines.err("trailing tokens after leaf value"));
                }
                nodes.push(Node::Leaf {
                    value: parse_f64(lines, v)?,
                });
            }
            other => {
                return Err(lines.err(format!("unknown node kind {other:?}")));
            }
        }
    }
    Ok(RegressionTree::from_nodes(nodes))
}

fn read_indexed_trees(lines: &mut Lines<'_>, n: usize) -> Result<Vec<RegressionTree>, ModelError> {
    let mut trees = Vec::with_capacity(n);
    for expect in 0..n {
        let rest = lines.tagged("tree")?;
        let idx = parse_usize(lines, rest)?;
        if idx != expect {
            return Err(lines.err(format!("tree index {idx}, expected {expect}")));
        }
        trees.push(read_tree(lines)?);
    }
    Ok(trees)
}

pub(super) fn from_text(s: &str) -> Result<FittedModel, ModelError> {
    let mut lines = Lines::new(s);
    let header = lines.next()?;
    if header != HEADER {
        return Err(lines.err(format!("bad header `{header}`, expected `{HEADER}`")));
    }
    let family = lines.tagged("family")?;
    let model = match family {
        "cart" => FittedModel::Cart(read_tree(&mut lines)?),
        "random-forest" => {
            let n = {
                let rest = lines.tagged("trees")?;
                parse_usize(&lines, rest)?
            };
            if n == 0 {
                return Err(lines.err("forest must have at least one tree"));
            }
            FittedModel::RandomForest(RandomForest::from_trees(read_indexed_trees(
                &mut lines, n,
            )?))
        }
        "gradient-boost" => {
            let base = {
                let rest = lines.tagged("base")?;
                parse_f64(&lines, rest)?
            };
            let learning_rate = {
                let rest = lines.tagged("learning_rate")?;
                parse_f64(&lines, rest)?
            };
            let n = {
                let rest = lines.tagged("trees")?;
                parse_usize(&lines, rest)?
            };
            FittedModel::GradientBoost(GradientBoost::from_parts(
                base,
                learning_rate,
                read_indexed_trees(&mut lines, n)?,
            ))
        }
        "ngb-gaussian" => {
            let mu0 = {
                let rest = lines.tagged("mu0")?;
                parse_f64(&lines, rest)?
            };
            let log_sigma0 = {
                let rest = lines.tagged("log_sigma0")?;
                parse_f64(&lines, rest)?
            };
            let learning_rate = {
                let rest = lines.tagged("learning_rate")?;
                parse_f64(&lines, rest)?
            };
            let n = {
                let rest = lines.tagged("stages")?;
                parse_usize(&lines, rest)?
            };
            let mut stages = Vec::with_capacity(n);
            for expect in 0..n {
                let rest = lines.tagged("stage")?;
                let mut parts = rest.split_whitespace();
                let idx = parse_usize(&lines, parts.next().unwrap_or(""))?;
                if idx != expect {
                    return Err(lines.err(format!("stage index {idx}, expected {expect}")));
                }
                if parts.next() != Some("scale") {
                    return Err(lines.err("expected `scale`"));
                }
                let scale = parse_f64(&lines, parts.next().unwrap_or(""))?;
                let mu_tree = read_tree(&mut lines)?;
                let ls_tree = read_tree(&mut lines)?;
                stages.push((scale, mu_tree, ls_tree));
            }
            FittedModel::NgbGaussian(NaturalGradientBoost::from_parts(
                mu0,
                log_sigma0,
                learning_rate,
                stages,
            ))
        }
        other => return Err(lines.err(format!("unknown family `{other}`"))),
    };
    let end = lines.next()?;
    if end != "end" {
        return Err(lines.err(format!("expected `end`, got `{end}`")));
    }
    Ok(model)
}
