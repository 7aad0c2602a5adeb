//! Table queries written in dataframe indexing syntax, such as
//! `df[(df["trade-id"] == "TR123")]` or `df[['year', 'balance']]`.
//!
//! The text is parsed into a small filter language and interpreted; it is
//! never handed to a host interpreter.
//!
//! ```text
//! query  := 'df' index+
//! index  := '[' string ']'                      column projection
//!         | '[' '[' string (',' string)* ']' ']'
//!         | '[' expr ']'                        row filter
//! expr   := conj ('|' conj)*
//! conj   := unary ('&' unary)*
//! unary  := '~' unary | '(' expr ')' | column op literal
//!         | column '.isin' '(' '[' literal (',' literal)* ']' ')'
//!         | column '.str.contains' '(' string ')'
//! column := 'df' '[' string ']'
//! ```

use std::cmp::Ordering;

use super::table::{Cell, Table, TableError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("malformed query at offset {at}: {message}")]
    Syntax { at: usize, message: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Cmp { column: String, op: CmpOp, value: Cell },
    IsIn { column: String, values: Vec<Cell> },
    Contains { column: String, needle: String },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Columns(Vec<String>),
    Filter(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub selectors: Vec<Selector>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64, bool),
    Sym(&'static str),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, QueryError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |at: usize, m: &str| QueryError::Syntax { at, message: m.to_string() };
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '"' || c == '\'' {
            let close = src[i + 1..].find(c).ok_or_else(|| err(start, "unterminated string"))?;
            out.push((start, Tok::Str(src[i + 1..i + 1 + close].to_string())));
            i += close + 2;
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i += 1;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            let n: f64 = text.parse().map_err(|_| err(start, "bad number"))?;
            out.push((start, Tok::Num(n, !text.contains('.'))));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
            continue;
        }
        let two = src.get(i..i + 2).unwrap_or("");
        let sym = match two {
            "==" => Some("=="),
            "!=" => Some("!="),
            "<=" => Some("<="),
            ">=" => Some(">="),
            _ => None,
        };
        if let Some(s) = sym {
            out.push((start, Tok::Sym(s)));
            i += 2;
            continue;
        }
        let s = match c {
            '[' => "[",
            ']' => "]",
            '(' => "(",
            ')' => ")",
            ',' => ",",
            '&' => "&",
            '|' => "|",
            '~' => "~",
            '<' => "<",
            '>' => ">",
            '.' => ".",
            _ => return Err(err(start, &format!("unexpected character `{c}`"))),
        };
        out.push((start, Tok::Sym(s)));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax { at: self.at(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), QueryError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.fail(format!("expected `{sym}`"))
        }
    }

    fn ident(&mut self, name: &str) -> Result<(), QueryError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == name => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{name}`")),
        }
    }

    fn string(&mut self) -> Result<String, QueryError> {
        match self.peek().cloned() {
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected a quoted name"),
        }
    }

    fn literal(&mut self) -> Result<Cell, QueryError> {
        let cell = match self.peek().cloned() {
            Some(Tok::Str(s)) => Cell::Text(s),
            Some(Tok::Num(n, true)) if n.abs() < 9e15 => Cell::Int(n as i64),
            Some(Tok::Num(n, _)) => Cell::Float(n),
            Some(Tok::Ident(s)) if s == "True" || s == "true" => Cell::Bool(true),
            Some(Tok::Ident(s)) if s == "False" || s == "false" => Cell::Bool(false),
            Some(Tok::Ident(s)) if s == "None" => Cell::Null,
            _ => return self.fail("expected a literal"),
        };
        self.pos += 1;
        Ok(cell)
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        self.ident("df")?;
        let mut selectors = Vec::new();
        while self.eat("[") {
            selectors.push(self.selector()?);
            self.expect("]")?;
        }
        if selectors.is_empty() {
            return self.fail("expected `[`");
        }
        if self.pos < self.toks.len() {
            return self.fail("trailing input");
        }
        Ok(Query { selectors })
    }

    fn selector(&mut self) -> Result<Selector, QueryError> {
        if let Some(Tok::Str(_)) = self.peek() {
            return Ok(Selector::Columns(vec![self.string()?]));
        }
        if self.eat("[") {
            let mut cols = vec![self.string()?];
            while self.eat(",") {
                cols.push(self.string()?);
            }
            self.expect("]")?;
            return Ok(Selector::Columns(cols));
        }
        Ok(Selector::Filter(self.expr()?))
    }

    fn expr(&mut self) -> Result<Expr, QueryError> {
        let mut e = self.conj()?;
        while self.eat("|") {
            e = Expr::Or(Box::new(e), Box::new(self.conj()?));
        }
        Ok(e)
    }

    fn conj(&mut self) -> Result<Expr, QueryError> {
        let mut e = self.unary()?;
        while self.eat("&") {
            e = Expr::And(Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, QueryError> {
        if self.eat("~") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.eat("(") {
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        }
        let column = self.column()?;
        if self.eat(".") {
            return self.method(column);
        }
        let op = match self.peek() {
            Some(Tok::Sym("==")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            _ => return self.fail("expected a comparison"),
        };
        self.pos += 1;
        Ok(Expr::Cmp { column, op, value: self.literal()? })
    }

    fn column(&mut self) -> Result<String, QueryError> {
        self.ident("df")?;
        self.expect("[")?;
        let c = self.string()?;
        self.expect("]")?;
        Ok(c)
    }

    fn method(&mut self, column: String) -> Result<Expr, QueryError> {
        match (self.peek(), self.peek_at(1), self.peek_at(2)) {
            (Some(Tok::Ident(m)), _, _) if m == "isin" => {
                self.pos += 1;
                self.expect("(")?;
                self.expect("[")?;
                let mut values = vec![self.literal()?];
                while self.eat(",") {
                    values.push(self.literal()?);
                }
                self.expect("]")?;
                self.expect(")")?;
                Ok(Expr::IsIn { column, values })
            }
            (Some(Tok::Ident(s)), Some(Tok::Sym(".")), Some(Tok::Ident(m))) if s == "str" && m == "contains" => {
                self.pos += 3;
                self.expect("(")?;
                let needle = self.string()?;
                self.expect(")")?;
                Ok(Expr::Contains { column, needle })
            }
            _ => self.fail("expected `isin` or `str.contains`"),
        }
    }
}

/// Parses query text. Surrounding whitespace and a trailing semicolon are ignored.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let text = text.trim().trim_end_matches(';');
    let toks = tokenize(text)?;
    Parser { toks, pos: 0, len: text.len() }.query()
}

impl Expr {
    fn columns<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Cmp { column, .. } | Expr::IsIn { column, .. } | Expr::Contains { column, .. } => out.push(column),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.columns(out);
                b.columns(out);
            }
            Expr::Not(a) => a.columns(out),
        }
    }

    fn eval(&self, table: &Table, row: &[Cell]) -> bool {
        let get = |c: &str| &row[table.column_index(c).expect("columns checked before evaluation")];
        match self {
            Expr::Cmp { column, op, value } => {
                let ord = get(column).compare(value);
                match op {
                    CmpOp::Eq => ord == Some(Ordering::Equal),
                    CmpOp::Ne => ord != Some(Ordering::Equal),
                    CmpOp::Lt => ord == Some(Ordering::Less),
                    CmpOp::Le => matches!(ord, Some(Ordering::Less | Ordering::Equal)),
                    CmpOp::Gt => ord == Some(Ordering::Greater),
                    CmpOp::Ge => matches!(ord, Some(Ordering::Greater | Ordering::Equal)),
                }
            }
            Expr::IsIn { column, values } => values.iter().any(|v| get(column).same(v)),
            Expr::Contains { column, needle } => matches!(get(column), Cell::Text(s) if s.contains(needle.as_str())),
            Expr::And(a, b) => a.eval(table, row) && b.eval(table, row),
            Expr::Or(a, b) => a.eval(table, row) || b.eval(table, row),
            Expr::Not(a) => !a.eval(table, row),
        }
    }
}

impl Query {
    pub fn apply(&self, table: &Table) -> Result<Table, QueryError> {
        let mut cur = table.clone();
        for sel in &self.selectors {
            cur = match sel {
                Selector::Columns(cols) => {
                    let idx = cols.iter().map(|c| cur.column_index(c)).collect::<Result<Vec<_>, _>>()?;
                    Table {
                        columns: cols.clone(),
                        rows: cur.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect(),
                    }
                }
                Selector::Filter(e) => {
                    let mut cols = Vec::new();
                    e.columns(&mut cols);
                    for c in cols {
                        cur.column_index(c)?;
                    }
                    let rows = cur.rows.iter().filter(|r| e.eval(&cur, r)).cloned().collect();
                    Table { columns: cur.columns.clone(), rows }
                }
            };
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trades() -> Table {
        Table::from_csv("trade-id,status,amount\nTR123,settled,10\nTR124,pending,25.5\nTR125,settled,7\n").unwrap()
    }

    #[test]
    fn filters_on_equality() {
        let q = parse_query(r#"df[(df["trade-id"] == "TR123")]"#).unwrap();
        let t = q.apply(&trades()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.rows[0][1], Cell::Text("settled".into()));
    }

    #[test]
    fn projects_columns() {
        let t = parse_query("df['status']").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.columns, vec!["status"]);
        assert_eq!(t.len(), 3);
        let t = parse_query(r#"df[["trade-id", "amount"]]"#).unwrap().apply(&trades()).unwrap();
        assert_eq!(t.columns, vec!["trade-id", "amount"]);
    }

    #[test]
    fn ranges_and_disjunction() {
        let t = parse_query("df[(df['amount'] >= 8) & (df['amount'] <= 30)]").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.len(), 2);
        let t = parse_query("df[(df['amount'] < 8) | (df['status'] == 'pending')]").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.len(), 2);
        let t = parse_query("df[~(df['status'] == 'settled')]").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn booleans_without_parentheses() {
        let t = Table::from_csv("subject,isrecurring\na,True\nb,False\nc,True\n").unwrap();
        let r = parse_query("df[df['isrecurring'] == True]").unwrap().apply(&t).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn chained_filter_then_projection() {
        let t = parse_query("df[df['status'] == 'settled']['amount']").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.rows, vec![vec![Cell::Float(10.0)], vec![Cell::Float(7.0)]]);
    }

    #[test]
    fn methods() {
        let t = parse_query("df[df['trade-id'].isin(['TR124', 'TR125'])]").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.len(), 2);
        let t = parse_query("df[df['status'].str.contains('end')]").unwrap().apply(&trades()).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn rejects_host_code() {
        for q in [
            "__import__('os').system('ls')",
            "df[(df['a'] == 1)",
            "df[df.a == 1]",
            "df['a'] + 1",
            "df[(df['a'] = 1)]",
            "",
        ] {
            assert!(matches!(parse_query(q), Err(QueryError::Syntax { .. })), "{q}");
        }
    }

    #[test]
    fn unknown_column_is_an_error() {
        let q = parse_query("df[df['nope'] == 1]").unwrap();
        assert_eq!(q.apply(&trades()), Err(QueryError::Table(TableError::NoColumn("nope".into()))));
    }
}
