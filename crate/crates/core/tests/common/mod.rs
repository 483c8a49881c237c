//! Independent reference implementations used as oracles. Everything
//! here is deliberately written from first principles (plain nested
//! loops over `Vec<Vec<f64>>`) and shares no code with the library
//! paths it checks.

#![allow(dead_code)]

use prosograph::graph::{DependencyTree, EdgeType, SyntacticGraph};

pub use prosograph::testing::{random_chinese_boundary, random_english_boundary, random_tree};

// ---------------------------------------------------------------------------
// expected edge sets, built from the construction rules directly
// ---------------------------------------------------------------------------

pub type EdgeTriple = (usize, usize, EdgeType);

/// Expected English edge set: sentinel pairs plus one doubled edge per
/// non-root word, enumerated independently of the builder.
pub fn expected_english_edges(tree: &DependencyTree) -> Vec<EdgeTriple> {
    let n = tree.len();
    let node = |word0: usize| word0 + 1;
    let mut edges = vec![
        (0, node(0), EdgeType::DepForward),
        (node(0), 0, EdgeType::DepReverse),
        (node(n - 1), n + 1, EdgeType::DepForward),
        (n + 1, node(n - 1), EdgeType::DepReverse),
    ];
    for w in tree.words() {
        if w.head != 0 {
            edges.push((node(w.head - 1), node(w.id - 1), EdgeType::DepForward));
            edges.push((node(w.id - 1), node(w.head - 1), EdgeType::DepReverse));
        }
    }
    edges
}

/// Expected Chinese edge set from the rules: dependency pairs between
/// first characters, intra-word chains, sentinel pairs at the first and
/// last character.
pub fn expected_chinese_edges(tree: &DependencyTree, chars_per_word: &[usize]) -> Vec<EdgeTriple> {
    let n = tree.len();
    let mut first = vec![0usize; n];
    let mut acc = 0;
    for (w, &k) in chars_per_word.iter().enumerate() {
        first[w] = acc;
        acc += k;
    }
    let total = acc;
    let node = |c: usize| c + 1;
    let mut edges = vec![
        (0, node(0), EdgeType::DepForward),
        (node(0), 0, EdgeType::DepReverse),
        (node(total - 1), total + 1, EdgeType::DepForward),
        (total + 1, node(total - 1), EdgeType::DepReverse),
    ];
    for w in tree.words() {
        if w.head != 0 {
            let (h, d) = (node(first[w.head - 1]), node(first[w.id - 1]));
            edges.push((h, d, EdgeType::DepForward));
            edges.push((d, h, EdgeType::DepReverse));
        }
    }
    for (w, &k) in chars_per_word.iter().enumerate() {
        for c in first[w]..first[w] + k - 1 {
            edges.push((node(c), node(c + 1), EdgeType::IntraForward));
            edges.push((node(c + 1), node(c), EdgeType::IntraReverse));
        }
    }
    edges
}

pub fn edge_triples(g: &SyntacticGraph) -> Vec<EdgeTriple> {
    g.edges().iter().map(|e| (e.src, e.dst, e.etype)).collect()
}

pub fn same_edge_set(a: &[EdgeTriple], b: &[EdgeTriple]) -> bool {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort();
    sb.sort();
    sa == sb
}

/// Undirected connectivity via union-find.
pub fn is_connected(num_nodes: usize, edges: &[EdgeTriple]) -> bool {
    let mut parent: Vec<usize> = (0..num_nodes).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v, _) in edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        parent[ru] = rv;
    }
    let root = find(&mut parent, 0);
    (0..num_nodes).all(|i| find(&mut parent, i) == root)
}

// ---------------------------------------------------------------------------
// reference pooling
// ---------------------------------------------------------------------------

/// Group-by-then-average reference for pooling, implementing the same
/// documented pivot-centered mean: m = v0 + (sum_i (v_i - v0)) / k.
pub fn reference_group_means(rows: &[Vec<f64>], group_of_row: &[usize]) -> Vec<Vec<f64>> {
    let n_groups = group_of_row.iter().max().map(|m| m + 1).unwrap_or(0);
    let d = rows[0].len();
    let mut out = Vec::with_capacity(n_groups);
    for g in 0..n_groups {
        let members: Vec<&Vec<f64>> = rows
            .iter()
            .zip(group_of_row)
            .filter(|(_, &gr)| gr == g)
            .map(|(r, _)| r)
            .collect();
        let mut mean = vec![0.0; d];
        for (j, m) in mean.iter_mut().enumerate() {
            let pivot = members[0][j];
            let mut sum = 0.0;
            for r in &members {
                sum += r[j] - pivot;
            }
            *m = pivot + sum / members.len() as f64;
        }
        out.push(mean);
    }
    out
}

/// Plain arithmetic mean (sum / count) for tolerance comparison.
pub fn naive_group_means(rows: &[Vec<f64>], group_of_row: &[usize]) -> Vec<Vec<f64>> {
    let n_groups = group_of_row.iter().max().map(|m| m + 1).unwrap_or(0);
    let d = rows[0].len();
    let mut sums = vec![vec![0.0; d]; n_groups];
    let mut counts = vec![0usize; n_groups];
    for (r, &g) in rows.iter().zip(group_of_row) {
        counts[g] += 1;
        for (s, &v) in sums[g].iter_mut().zip(r) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= c as f64;
        }
    }
    sums
}

// ---------------------------------------------------------------------------
// reference gated graph convolution interpreter
// ---------------------------------------------------------------------------

/// Parameters for the reference interpreter, plain vectors only.
pub struct RefLayer {
    /// per edge type: (W, b) with W[d][d] acting on row vectors
    pub messages: Vec<(EdgeType, Vec<Vec<f64>>, Vec<f64>)>,
    pub w_z: Vec<Vec<f64>>,
    pub u_z: Vec<Vec<f64>>,
    pub b_z: Vec<f64>,
    pub w_r: Vec<Vec<f64>>,
    pub u_r: Vec<Vec<f64>>,
    pub b_r: Vec<f64>,
    pub w_h: Vec<Vec<f64>>,
    pub u_h: Vec<Vec<f64>>,
    pub b_h: Vec<f64>,
}

fn vecmat(x: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let d_out = m[0].len();
    let mut out = vec![0.0; d_out];
    for (k, &xv) in x.iter().enumerate() {
        for j in 0..d_out {
            out[j] += xv * m[k][j];
        }
    }
    out
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Step-by-step gated graph convolution, one node at a time.
pub fn reference_ggnn(
    h0: &[Vec<f64>],
    edges: &[EdgeTriple],
    layer: &RefLayer,
    iterations: usize,
) -> Vec<Vec<f64>> {
    let m = h0.len();
    let d = h0[0].len();
    let mut h: Vec<Vec<f64>> = h0.to_vec();
    for _ in 0..iterations {
        let mut agg = vec![vec![0.0; d]; m];
        for &(src, dst, etype) in edges {
            let (_, w, b) = layer
                .messages
                .iter()
                .find(|(t, _, _)| *t == etype)
                .expect("message params for edge type");
            let msg = vecmat(&h[src], w);
            for j in 0..d {
                agg[dst][j] += msg[j] + b[j];
            }
        }
        let mut next = vec![vec![0.0; d]; m];
        for v in 0..m {
            let az = vecmat(&agg[v], &layer.w_z);
            let hz = vecmat(&h[v], &layer.u_z);
            let ar = vecmat(&agg[v], &layer.w_r);
            let hr = vecmat(&h[v], &layer.u_r);
            let mut z = vec![0.0; d];
            let mut r = vec![0.0; d];
            for j in 0..d {
                z[j] = sigmoid(az[j] + hz[j] + layer.b_z[j]);
                r[j] = sigmoid(ar[j] + hr[j] + layer.b_r[j]);
            }
            let rh: Vec<f64> = (0..d).map(|j| r[j] * h[v][j]).collect();
            let ah = vecmat(&agg[v], &layer.w_h);
            let uh = vecmat(&rh, &layer.u_h);
            for j in 0..d {
                let cand = (ah[j] + uh[j] + layer.b_h[j]).tanh();
                next[v][j] = (1.0 - z[j]) * h[v][j] + z[j] * cand;
            }
        }
        h = next;
    }
    h
}

/// Convert library layer parameters into reference form.
pub fn ref_layer_from(layer: &prosograph::encoder::LayerParams) -> RefLayer {
    let to_mat = |t: &prosograph::Tensor| -> Vec<Vec<f64>> {
        (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
    };
    let to_vec = |t: &prosograph::Tensor| t.data().to_vec();
    RefLayer {
        messages: layer
            .messages
            .iter()
            .map(|(t, m)| (*t, to_mat(&m.weight), to_vec(&m.bias)))
            .collect(),
        w_z: to_mat(&layer.gru.w_z),
        u_z: to_mat(&layer.gru.u_z),
        b_z: to_vec(&layer.gru.b_z),
        w_r: to_mat(&layer.gru.w_r),
        u_r: to_mat(&layer.gru.u_r),
        b_r: to_vec(&layer.gru.b_r),
        w_h: to_mat(&layer.gru.w_h),
        u_h: to_mat(&layer.gru.u_h),
        b_h: to_vec(&layer.gru.b_h),
    }
}

// ---------------------------------------------------------------------------
// reference conv2d (six nested loops)
// ---------------------------------------------------------------------------

/// Direct cross-correlation with the documented summation order:
/// output-major, then C_in, kh, kw.
#[allow(clippy::too_many_arguments)]
pub fn reference_conv2d(
    input: &[f64],
    c_in: usize,
    h: usize,
    w: usize,
    kernel: &[f64],
    c_out: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    padding: usize,
) -> Vec<f64> {
    let h_out = (h + 2 * padding - kh) / stride + 1;
    let w_out = (w + 2 * padding - kw) / stride + 1;
    let mut out = vec![0.0; c_out * h_out * w_out];
    for co in 0..c_out {
        for oy in 0..h_out {
            for ox in 0..w_out {
                let mut acc = 0.0;
                for ci in 0..c_in {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = (oy * stride + ky) as isize - padding as isize;
                            let ix = (ox * stride + kx) as isize - padding as isize;
                            if iy >= 0 && (iy as usize) < h && ix >= 0 && (ix as usize) < w {
                                acc += input[(ci * h + iy as usize) * w + ix as usize]
                                    * kernel[((co * c_in + ci) * kh + ky) * kw + kx];
                            }
                        }
                    }
                }
                out[(co * h_out + oy) * w_out + ox] = acc;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// DOT grammar checker
// ---------------------------------------------------------------------------

/// Minimal validating parser for the DOT grammar (digraph subset):
/// graph : 'digraph' [ID] '{' stmt_list '}'
/// stmt  : node_stmt | edge_stmt | ID '=' ID
/// Accepts attribute lists, quoted IDs, and numerals per the published
/// grammar. Returns Err with a message on the first violation.
pub fn check_dot_grammar(text: &str) -> Result<(), String> {
    let tokens = dot_tokenize(text)?;
    let mut p = DotParser { tokens, pos: 0 };
    p.parse_graph()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing tokens after graph body at {}", p.pos));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum DotTok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Equals,
    Arrow,
}

fn dot_tokenize(text: &str) -> Result<Vec<DotTok>, String> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '{' => {
                toks.push(DotTok::LBrace);
                i += 1;
            }
            '}' => {
                toks.push(DotTok::RBrace);
                i += 1;
            }
            '[' => {
                toks.push(DotTok::LBracket);
                i += 1;
            }
            ']' => {
                toks.push(DotTok::RBracket);
                i += 1;
            }
            ';' => {
                toks.push(DotTok::Semi);
                i += 1;
            }
            ',' => {
                toks.push(DotTok::Comma);
                i += 1;
            }
            '=' => {
                toks.push(DotTok::Equals);
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    toks.push(DotTok::Arrow);
                    i += 2;
                } else {
                    return Err(format!("stray '-' at char {i}"));
                }
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            s.push(*chars.get(i + 1).ok_or("dangling escape")?);
                            i += 2;
                        }
                        Some(ch) => {
                            s.push(*ch);
                            i += 1;
                        }
                        None => return Err("unterminated quoted string".into()),
                    }
                }
                if s.is_empty() {
                    return Err("empty quoted identifier".into());
                }
                toks.push(DotTok::Id(s));
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
                {
                    i += 1;
                }
                let id: String = chars[start..i].iter().collect();
                if id.chars().next().unwrap().is_ascii_digit() && !id.chars().all(|c| c.is_ascii_digit() || c == '.') {
                    return Err(format!("identifier '{id}' may not start with a digit"));
                }
                toks.push(DotTok::Id(id));
            }
            other => return Err(format!("unexpected character '{other}' at {i}")),
        }
    }
    Ok(toks)
}

struct DotParser {
    tokens: Vec<DotTok>,
    pos: usize,
}

impl DotParser {
    fn peek(&self) -> Option<&DotTok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, tok: &DotTok) -> Result<(), String> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected {tok:?} at token {}", self.pos))
        }
    }

    fn eat_id(&mut self) -> Result<String, String> {
        match self.peek() {
            Some(DotTok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => Err(format!("expected identifier, found {other:?}")),
        }
    }

    fn parse_graph(&mut self) -> Result<(), String> {
        let kw = self.eat_id()?;
        if kw != "digraph" {
            return Err(format!("expected 'digraph', found '{kw}'"));
        }
        if matches!(self.peek(), Some(DotTok::Id(_))) {
            self.eat_id()?;
        }
        self.eat(&DotTok::LBrace)?;
        while self.peek() != Some(&DotTok::RBrace) {
            self.parse_stmt()?;
            if self.peek() == Some(&DotTok::Semi) {
                self.pos += 1;
            }
        }
        self.eat(&DotTok::RBrace)
    }

    fn parse_stmt(&mut self) -> Result<(), String> {
        let _first = self.eat_id()?;
        match self.peek() {
            // ID '=' ID
            Some(DotTok::Equals) => {
                self.pos += 1;
                self.eat_id()?;
                Ok(())
            }
            // edge_stmt: node_id ('->' node_id)+ [attr_list]
            Some(DotTok::Arrow) => {
                while self.peek() == Some(&DotTok::Arrow) {
                    self.pos += 1;
                    self.eat_id()?;
                }
                self.parse_optional_attr_list()
            }
            // node_stmt: node_id [attr_list]
            _ => self.parse_optional_attr_list(),
        }
    }

    fn parse_optional_attr_list(&mut self) -> Result<(), String> {
        while self.peek() == Some(&DotTok::LBracket) {
            self.pos += 1;
            while self.peek() != Some(&DotTok::RBracket) {
                self.eat_id()?;
                self.eat(&DotTok::Equals)?;
                self.eat_id()?;
                if matches!(self.peek(), Some(DotTok::Comma) | Some(DotTok::Semi)) {
                    self.pos += 1;
                }
            }
            self.eat(&DotTok::RBracket)?;
        }
        Ok(())
    }
}
