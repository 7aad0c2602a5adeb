//! Reader for the loosely formatted dictionaries language models return.
//!
//! Accepted beyond strict JSON: surrounding prose and code fences,
//! single-quoted strings, Python `True`/`False`/`None`, bare keys, missing
//! or trailing commas, raw newlines inside strings, and unescaped quotes
//! inside strings. A quote only closes a string when the next significant
//! character can follow a string at that point.

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JsonError {
    #[error("no JSON object found in the reply")]
    NoObject,
    #[error("unbalanced braces: the reply ends inside an object")]
    Unbalanced,
    #[error("malformed object at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

/// Extracts the first complete object from `reply`.
pub fn parse_llm_output(reply: &str) -> Result<Value, JsonError> {
    let mut first_err = None;
    for (start, _) in reply.char_indices().filter(|(_, c)| *c == '{') {
        let mut p = Parser { src: reply, pos: start };
        match p.object() {
            Ok(v) => return Ok(v),
            Err(JsonError::Unbalanced) if first_err.is_none() => return Err(JsonError::Unbalanced),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(JsonError::NoObject))
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Key,
    ObjectValue,
    ArrayItem,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> JsonError {
        JsonError::Syntax { offset: self.pos, message: message.into() }
    }

    fn eof_or(&self, e: JsonError) -> JsonError {
        if self.pos >= self.src.len() {
            JsonError::Unbalanced
        } else {
            e
        }
    }

    fn object(&mut self) -> Result<Value, JsonError> {
        debug_assert_eq!(self.peek(), Some('{'));
        self.bump();
        let mut map = Map::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(JsonError::Unbalanced),
                Some('}') => {
                    self.bump();
                    return Ok(Value::Object(map));
                }
                Some(',') => {
                    self.bump();
                    continue;
                }
                _ => {}
            }
            let key = self.key()?;
            self.skip_ws();
            if self.peek() != Some(':') {
                return Err(self.eof_or(self.err(format!("expected ':' after key `{key}`"))));
            }
            self.bump();
            self.skip_ws();
            let value = self.value(Ctx::ObjectValue)?;
            if map.contains_key(&key) {
                return Err(self.err(format!("duplicate key `{key}`")));
            }
            map.insert(key, value);
        }
    }

    fn array(&mut self) -> Result<Value, JsonError> {
        self.bump();
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(JsonError::Unbalanced),
                Some(']') => {
                    self.bump();
                    return Ok(Value::Array(items));
                }
                Some(',') => {
                    self.bump();
                    continue;
                }
                _ => items.push(self.value(Ctx::ArrayItem)?),
            }
        }
    }

    fn key(&mut self) -> Result<String, JsonError> {
        match self.peek() {
            Some(q @ ('"' | '\'')) => self.string(q, Ctx::Key),
            Some(c) if c.is_alphanumeric() || c == '_' || c == '-' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' {
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(self.src[start..self.pos].to_string())
            }
            _ => Err(self.err("expected a key")),
        }
    }

    fn value(&mut self, ctx: Ctx) -> Result<Value, JsonError> {
        match self.peek() {
            None => Err(JsonError::Unbalanced),
            Some('{') => self.object(),
            Some('[') => self.array(),
            Some(q @ ('"' | '\'')) => self.string(q, ctx).map(Value::String),
            Some(_) => self.scalar(),
        }
    }

    fn scalar(&mut self) -> Result<Value, JsonError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '-' | '+' | '.' | '_') {
                self.bump();
            } else {
                break;
            }
        }
        let word = &self.src[start..self.pos];
        match word {
            "true" | "True" => Ok(Value::Bool(true)),
            "false" | "False" => Ok(Value::Bool(false)),
            "null" | "None" => Ok(Value::Null),
            "" => Err(self.err("expected a value")),
            _ => {
                if let Ok(i) = word.parse::<i64>() {
                    return Ok(Value::Number(i.into()));
                }
                word.parse::<f64>()
                    .ok()
                    .and_then(Number::from_f64)
                    .map(Value::Number)
                    .ok_or_else(|| JsonError::Syntax { offset: start, message: format!("unexpected `{word}`") })
            }
        }
    }

    /// Would a string ending at the current position be well placed?
    fn closes_here(&self, ctx: Ctx) -> bool {
        let next = self.rest().trim_start().chars().next();
        match ctx {
            Ctx::Key => next == Some(':'),
            Ctx::ObjectValue => match next {
                None | Some(',' | '}') => true,
                // a missing comma before the next key
                Some('"' | '\'') => self.next_is_key(),
                _ => false,
            },
            Ctx::ArrayItem => matches!(next, None | Some(',' | ']' | '"' | '\'')),
        }
    }

    /// True when the text after the current position looks like `"key":`.
    fn next_is_key(&self) -> bool {
        let rest = self.rest().trim_start();
        let mut chars = rest.char_indices();
        let Some((_, q)) = chars.next() else { return false };
        for (i, c) in chars {
            if c == q {
                return rest[i + 1..].trim_start().starts_with(':');
            }
            if c == '\n' {
                return false;
            }
        }
        false
    }

    fn string(&mut self, quote: char, ctx: Ctx) -> Result<String, JsonError> {
        self.bump();
        let mut out = String::new();
        // where a strict reader would have stopped, used if no better close exists
        let mut strict_end: Option<(usize, usize)> = None;
        loop {
            let Some(c) = self.bump() else {
                return match strict_end {
                    Some((pos, len)) => {
                        self.pos = pos;
                        out.truncate(len);
                        Ok(out)
                    }
                    None => Err(JsonError::Unbalanced),
                };
            };
            match c {
                '\\' => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some('b') => out.push('\u{8}'),
                    Some('f') => out.push('\u{c}'),
                    Some('u') => {
                        let hex: String = self.rest().chars().take(4).collect();
                        match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                            Some(ch) if hex.len() == 4 => {
                                out.push(ch);
                                self.pos += 4;
                            }
                            _ => out.push_str("\\u"),
                        }
                    }
                    Some(other) => out.push(other),
                    None => return Err(JsonError::Unbalanced),
                },
                c if c == quote && self.closes_here(ctx) => return Ok(out),
                c => {
                    if c == quote && strict_end.is_none() {
                        strict_end = Some((self.pos, out.len()));
                    }
                    out.push(c)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_object() {
        assert_eq!(parse_llm_output("{}").unwrap(), json!({}));
    }

    #[test]
    fn single_quoted_example() {
        let reply = r#"{'text1': {"type": "text", "value": "matched"},  'text2': {'type': 'text', 'value': 'text2'}, 'init_state': {'type': 'state', 'value': ''}, 'goals': {'type': 'state', 'value': '(and (summarized text1 text2))'}}"#;
        let v = parse_llm_output(reply).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["text1", "text2", "init_state", "goals"]);
        assert_eq!(v["goals"]["value"], "(and (summarized text1 text2))");
        assert_eq!(v["init_state"]["value"], "");
    }

    #[test]
    fn prose_and_fences_are_skipped() {
        let v = parse_llm_output("Here is the dictionary:\n```json\n{\"a\": [1, 2.5, true, None]}\n```\nDone.").unwrap();
        assert_eq!(v, json!({"a": [1, 2.5, true, null]}));
    }

    #[test]
    fn unescaped_inner_quotes_and_missing_commas() {
        let reply = "{\"q\": {\"type\": \"query\", \"value\": \"df[(df[\"trade-id\"] == \"TR123\")]\"}\n \"r\": {\"type\": \"response\", \"value\": []}}";
        let v = parse_llm_output(reply).unwrap();
        assert_eq!(v["q"]["value"], "df[(df[\"trade-id\"] == \"TR123\")]");
        assert_eq!(v["r"]["value"], json!([]));
    }

    #[test]
    fn python_literals_and_trailing_commas() {
        let v = parse_llm_output("{'a': True, 'b': False, 'c': None, 'd': [1, 2,],}").unwrap();
        assert_eq!(v, json!({"a": true, "b": false, "c": null, "d": [1, 2]}));
    }

    #[test]
    fn strict_json_is_a_fixed_point() {
        let v = json!({"x": {"type": "text", "value": "a \"quoted\" word\nnext"}, "n": -3, "f": 0.5});
        let text = serde_json::to_string(&v).unwrap();
        let once = parse_llm_output(&text).unwrap();
        assert_eq!(once, v);
        assert_eq!(parse_llm_output(&serde_json::to_string(&once).unwrap()).unwrap(), once);
    }

    #[test]
    fn printed_trade_status_dictionary() {
        let printed = include_str!("../../fixtures/trade_status_reply.txt");
        let strict: Value = serde_json::from_str(include_str!("../../fixtures/trade_status.json")).unwrap();
        let v = parse_llm_output(printed).unwrap();
        assert_eq!(v["query1"], strict["query1"]);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        let strict_keys: Vec<&String> = strict.as_object().unwrap().keys().collect();
        assert_eq!(keys, strict_keys);
        let prefixed = format!("Here is the dictionary:\n{printed}");
        assert_eq!(parse_llm_output(&prefixed).unwrap(), v);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_llm_output("no braces here"), Err(JsonError::NoObject));
        assert_eq!(parse_llm_output("{\"a\": {\"b\": 1}"), Err(JsonError::Unbalanced));
        assert!(matches!(parse_llm_output("{\"a\" 1}"), Err(JsonError::Syntax { .. })));
        assert!(matches!(parse_llm_output("{\"a\": 1, \"a\": 2}"), Err(JsonError::Syntax { .. })));
    }
}
