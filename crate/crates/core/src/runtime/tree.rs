//! Greedy CART classifier with Gini impurity.

use serde::{Deserialize, Serialize};

use super::table::{Cell, Table, TableError};

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("training table has no rows")]
    Empty,
    #[error("training table has no feature columns besides `{0}`")]
    NoFeatures(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Split {
    /// Numeric feature: rows with `value <= threshold` go left.
    LessEq { feature: String, threshold: f64 },
    /// Categorical feature: rows equal to `value` go left.
    Equals { feature: String, value: Cell },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { label: Cell, samples: usize },
    Branch { split: Split, left: Box<Node>, right: Box<Node> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub target: String,
    pub features: Vec<String>,
    pub max_depth: usize,
    pub root: Node,
}

fn gini(labels: &[&Cell]) -> f64 {
    let counts = tally(labels);
    let n = labels.len() as f64;
    1.0 - counts.iter().map(|(_, c)| (*c as f64 / n).powi(2)).sum::<f64>()
}

/// Label counts in order of first appearance.
fn tally<'a>(labels: &[&'a Cell]) -> Vec<(&'a Cell, usize)> {
    let mut out: Vec<(&Cell, usize)> = Vec::new();
    for l in labels {
        match out.iter_mut().find(|(k, _)| k == l) {
            Some((_, c)) => *c += 1,
            None => out.push((l, 1)),
        }
    }
    out
}

fn majority(labels: &[&Cell]) -> Cell {
    let counts = tally(labels);
    let best = counts.iter().map(|(_, c)| *c).max().unwrap_or(0);
    counts.into_iter().find(|(_, c)| *c == best).map(|(l, _)| l.clone()).unwrap_or(Cell::Null)
}

impl Split {
    fn goes_left(&self, cell: &Cell) -> bool {
        match self {
            Split::LessEq { threshold, .. } => cell.as_f64().is_some_and(|v| v <= *threshold),
            Split::Equals { value, .. } => cell.same(value),
        }
    }

    fn feature(&self) -> &str {
        match self {
            Split::LessEq { feature, .. } | Split::Equals { feature, .. } => feature,
        }
    }
}

struct Trainer<'a> {
    table: &'a Table,
    target: usize,
    features: Vec<usize>,
    numeric: Vec<bool>,
    max_depth: usize,
}

impl Trainer<'_> {
    fn labels(&self, rows: &[usize]) -> Vec<&Cell> {
        rows.iter().map(|&r| &self.table.rows[r][self.target]).collect()
    }

    fn candidates(&self, fi: usize, rows: &[usize]) -> Vec<Split> {
        let col = self.features[fi];
        let name = self.table.columns[col].clone();
        if self.numeric[fi] {
            let mut vals: Vec<f64> = rows.iter().filter_map(|&r| self.table.rows[r][col].as_f64()).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            vals.windows(2).map(|w| Split::LessEq { feature: name.clone(), threshold: (w[0] + w[1]) / 2.0 }).collect()
        } else {
            let mut seen: Vec<Cell> = Vec::new();
            for &r in rows {
                let c = &self.table.rows[r][col];
                if !seen.iter().any(|s| s.same(c)) {
                    seen.push(c.clone());
                }
            }
            if seen.len() < 2 {
                return Vec::new();
            }
            seen.into_iter().map(|value| Split::Equals { feature: name.clone(), value }).collect()
        }
    }

    /// The split with the largest impurity decrease. Ties keep the earliest
    /// feature and, within a feature, the earliest candidate.
    fn best_split(&self, rows: &[usize]) -> Option<(Split, Vec<usize>, Vec<usize>)> {
        let parent = gini(&self.labels(rows));
        let n = rows.len() as f64;
        let mut best: Option<(f64, Split, Vec<usize>, Vec<usize>)> = None;
        for fi in 0..self.features.len() {
            let col = self.features[fi];
            for split in self.candidates(fi, rows) {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| split.goes_left(&self.table.rows[r][col]));
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let child = (left.len() as f64 * gini(&self.labels(&left))
                    + right.len() as f64 * gini(&self.labels(&right)))
                    / n;
                let gain = parent - child;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.0 + 1e-12) {
                    best = Some((gain, split, left, right));
                }
            }
        }
        best.map(|(_, s, l, r)| (s, l, r))
    }

    fn grow(&self, rows: &[usize], depth: usize) -> Node {
        let labels = self.labels(rows);
        let leaf = || Node::Leaf { label: majority(&labels), samples: rows.len() };
        if depth >= self.max_depth || tally(&labels).len() <= 1 {
            return leaf();
        }
        match self.best_split(rows) {
            Some((split, left, right)) => Node::Branch {
                split,
                left: Box::new(self.grow(&left, depth + 1)),
                right: Box::new(self.grow(&right, depth + 1)),
            },
            None => leaf(),
        }
    }
}

impl DecisionTree {
    /// Fits on every column of `table` other than `target`. A feature is
    /// numeric when all its non-null cells are numbers, categorical otherwise.
    pub fn fit(table: &Table, target: &str, max_depth: usize) -> Result<Self, TreeError> {
        let t = table.column_index(target)?;
        if table.is_empty() {
            return Err(TreeError::Empty);
        }
        let features: Vec<usize> = (0..table.columns.len()).filter(|&c| c != t).collect();
        if features.is_empty() {
            return Err(TreeError::NoFeatures(target.to_string()));
        }
        let numeric = features
            .iter()
            .map(|&c| table.rows.iter().map(|r| &r[c]).filter(|x| **x != Cell::Null).all(Cell::is_numeric))
            .collect();
        let trainer = Trainer { table, target: t, features, numeric, max_depth };
        let rows: Vec<usize> = (0..table.len()).collect();
        let root = trainer.grow(&rows, 0);
        Ok(Self {
            target: target.to_string(),
            features: trainer.features.iter().map(|&c| table.columns[c].clone()).collect(),
            max_depth,
            root,
        })
    }

    /// Predicts one label per row. Missing feature columns are an error.
    pub fn predict(&self, table: &Table) -> Result<Vec<Cell>, TreeError> {
        let mut idx = std::collections::HashMap::new();
        for f in &self.features {
            if let Ok(i) = table.column_index(f) {
                idx.insert(f.as_str(), i);
            }
        }
        table
            .rows
            .iter()
            .map(|row| {
                let mut node = &self.root;
                loop {
                    match node {
                        Node::Leaf { label, .. } => return Ok(label.clone()),
                        Node::Branch { split, left, right } => {
                            let i = *idx
                                .get(split.feature())
                                .ok_or_else(|| TableError::NoColumn(split.feature().to_string()))?;
                            node = if split.goes_left(&row[i]) { left } else { right };
                        }
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_a_threshold() {
        let t = Table::from_csv("x,y\n1,no\n2,no\n3,no\n10,yes\n12,yes\n").unwrap();
        let tree = DecisionTree::fit(&t, "y", DEFAULT_MAX_DEPTH).unwrap();
        assert_eq!(
            tree.root,
            Node::Branch {
                split: Split::LessEq { feature: "x".into(), threshold: 6.5 },
                left: Box::new(Node::Leaf { label: Cell::Text("no".into()), samples: 3 }),
                right: Box::new(Node::Leaf { label: Cell::Text("yes".into()), samples: 2 }),
            }
        );
        let q = Table::from_csv("x\n0\n6\n7\n100\n").unwrap();
        let want: Vec<Cell> = ["no", "no", "yes", "yes"].iter().map(|s| Cell::Text(s.to_string())).collect();
        assert_eq!(tree.predict(&q).unwrap(), want);
    }

    #[test]
    fn categorical_split_and_depth_limit() {
        let t = Table::from_csv("colour,size,ok\nred,1,True\nblue,1,False\nred,2,True\nblue,2,False\n").unwrap();
        let tree = DecisionTree::fit(&t, "ok", 8).unwrap();
        let Node::Branch { split, .. } = &tree.root else { panic!("expected a split") };
        assert_eq!(split, &Split::Equals { feature: "colour".into(), value: Cell::Text("red".into()) });
        let stump = DecisionTree::fit(&t, "ok", 0).unwrap();
        assert!(matches!(stump.root, Node::Leaf { samples: 4, .. }));
    }

    #[test]
    fn dump_round_trips() {
        let t = Table::from_csv("x,y\n1,0\n5,1\n").unwrap();
        let tree = DecisionTree::fit(&t, "y", 8).unwrap();
        let text = serde_json::to_string(&tree).unwrap();
        assert_eq!(serde_json::from_str::<DecisionTree>(&text).unwrap(), tree);
    }

    #[test]
    fn missing_target_is_an_error() {
        let t = Table::from_csv("x\n1\n").unwrap();
        assert!(matches!(DecisionTree::fit(&t, "y", 8), Err(TreeError::Table(_))));
    }
}
