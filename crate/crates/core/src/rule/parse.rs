use super::{ParseError, RuleAst};

/// Deepest nesting accepted before the parser gives up.
pub const MAX_NESTING: usize = 512;

/// Parses a rule formula.
pub fn parse(text: &str) -> Result<RuleAst, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let ast = p.formula(0)?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("end of input"));
    }
    Ok(ast)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn bytes(&self) -> &[u8] {
        self.src.as_bytes()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n')) {
            self.pos += 1;
        }
    }

    fn found(&self) -> String {
        match self.src[self.pos..].chars().next() {
            None => "end of input".to_string(),
            Some(c) if c.is_ascii_alphanumeric() => {
                let word: String = self.src[self.pos..]
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                format!("\"{word}\"")
            }
            Some(c) => format!("{c:?}"),
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.to_string(),
            found: self.found(),
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("'{}'", byte as char)))
        }
    }

    fn word_len(&self) -> usize {
        self.bytes()[self.pos..]
            .iter()
            .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
            .count()
    }

    fn formula(&mut self, depth: usize) -> Result<RuleAst, ParseError> {
        self.skip_ws();
        if depth >= MAX_NESTING {
            return Err(self.error(&format!("at most {MAX_NESTING} levels of nesting")));
        }
        let start = self.pos;
        let len = self.word_len();
        let word = &self.src[start..start + len];
        match word {
            "NOT" => {
                self.pos += len;
                self.expect(b'(')?;
                let inner = self.formula(depth + 1)?;
                self.expect(b')')?;
                Ok(RuleAst::Not(Box::new(inner)))
            }
            "AND" | "OR" => {
                self.pos += len;
                self.expect(b'(')?;
                let mut children = vec![self.formula(depth + 1)?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                            children.push(self.formula(depth + 1)?);
                        }
                        Some(b')') if children.len() >= 2 => {
                            self.pos += 1;
                            break;
                        }
                        _ if children.len() < 2 => {
                            return Err(self.error("',' (AND/OR take at least two operands)"));
                        }
                        _ => return Err(self.error("',' or ')'")),
                    }
                }
                Ok(if word == "AND" { RuleAst::And(children) } else { RuleAst::Or(children) })
            }
            _ if word.starts_with('v') => self.atom(word),
            _ => Err(self.error("a formula (vN, NOT, AND or OR)")),
        }
    }

    fn atom(&mut self, word: &str) -> Result<RuleAst, ParseError> {
        let digits = &word[1..];
        let well_formed = !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && !digits.starts_with('0');
        if !well_formed {
            return Err(self.error("a voter atom v1, v2, ..."));
        }
        let index = digits
            .parse::<usize>()
            .map_err(|_| self.error("a voter index that fits in a machine word"))?;
        self.pos += word.len();
        Ok(RuleAst::Atom(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use RuleAst::*;

    #[test]
    fn simple_and() {
        assert_eq!(parse("AND(v1, v2)").unwrap(), And(vec![Atom(1), Atom(2)]));
    }

    #[test]
    fn role_weighted() {
        assert_eq!(
            parse("OR(v1, AND(v2, v3))").unwrap(),
            Or(vec![Atom(1), And(vec![Atom(2), Atom(3)])])
        );
    }

    #[test]
    fn majority() {
        let ast = parse("OR(AND(v1,v2), AND(v2,v3), AND(v1,v3))").unwrap();
        assert_eq!(
            ast,
            Or(vec![
                And(vec![Atom(1), Atom(2)]),
                And(vec![Atom(2), Atom(3)]),
                And(vec![Atom(1), Atom(3)]),
            ])
        );
        assert_eq!(ast.to_string(), "OR(AND(v1, v2), AND(v2, v3), AND(v1, v3))");
    }

    #[test]
    fn whitespace_between_tokens() {
        let ast = parse(" \tNOT\n( v12 ) ").unwrap();
        assert_eq!(ast, Not(Box::new(Atom(12))));
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse("v0").unwrap_err();
        assert_eq!(e.offset, 0);
        let e = parse("AND(v1)").unwrap_err();
        assert_eq!(e.offset, 6);
        assert_eq!(e.found, "')'");
        let e = parse("AND(v1, v2").unwrap_err();
        assert_eq!((e.offset, e.found.as_str()), (10, "end of input"));
        let e = parse("and(v1, v2)").unwrap_err();
        assert_eq!(e.found, "\"and\"");
        let e = parse("v1 v2").unwrap_err();
        assert_eq!(e.offset, 3);
        assert!(parse("").is_err());
        assert!(parse("v").is_err());
        assert!(parse("v1x").is_err());
        assert!(parse("v01").is_err());
        assert!(parse("NOT(v1, v2)").is_err());
        assert!(parse("AND(v1,,v2)").is_err());
        assert!(parse("v99999999999999999999999").is_err());
        assert!(parse("é").is_err());
    }

    #[test]
    fn nesting_limit_is_an_error_not_a_crash() {
        let deep = "NOT(".repeat(100_000) + "v1" + &")".repeat(100_000);
        let e = parse(&deep).unwrap_err();
        assert!(e.offset <= deep.len());
        let ok = "NOT(".repeat(100) + "v1" + &")".repeat(100);
        assert_eq!(parse(&ok).unwrap().depth(), 101);
    }
}
