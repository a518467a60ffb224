// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::fs;
use std::path::Path;

use acyclic_core::graph::{generate, load_graph, Family, Graph};
use acyclic_core::rng::Color;
use anyhow::{bail, Context, Result};

pub fn read_graph(path: Option<&Path>, generator: Option<&str>) -> Result<Graph> {
    match (path, generator) {
        (Some(p), None) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            load_graph(&text).with_context(|| format!("parsing {}", p.display()))
        }
        (None, Some(spec)) => {
            let family: Family = spec.parse()?;
            Ok(generate(&family)?)
        }
        (Some(_), Some(_)) => bail!("give either a graph file or --gen, not both"),
        (None, None) => bail!("no graph given; pass a file or --gen SPEC"),
    }
}

/// Header `K m`, then one color per line in canonical edge order.
pub fn write_coloring(palette_size: u32, colors: &[Color]) -> String {
    let mut out = format!("{} {}\n", palette_size, colors.len());
    for c in colors {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_coloring(text: &str, edge_count: usize) -> Result<(u32, Vec<Color>)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().context("coloring file is empty")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [k, m] = fields.as_slice() else {
        bail!("header must be \"K m\", got {:?}", header);
    };
    let k: u32 = k
        .parse()
        .with_context(|| format!("bad palette size {:?}", k))?;
    let m: usize = m
        .parse()
        .with_context(|| format!("bad edge count {:?}", m))?;
    if m != edge_count {
        bail!("coloring has {} edges but the graph has {}", m, edge_count);
    }
    let mut colors = Vec::with_capacity(m);
    for (line, text) in lines {
        let c: Color = text
            .parse()
            .with_context(|| format!("line {}: bad color {:?}", line + 1, text))?;
        if c == 0 || c > k {
            bail!("line {}: color {} outside 1..={}", line + 1, c, k);
        }
        colors.push(c);
    }
    if colors.len() != m {
        bail!("expected {} colors, found {}", m, colors.len());
    }
    Ok((k, colors))
}
