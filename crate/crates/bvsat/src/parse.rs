//! Minimal S-expression reader for the SMT-LIB subset bvsat accepts.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            Sexpr::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::Atom(_) => None,
            Sexpr::List(items) => Some(items),
        }
    }
}

impl std::fmt::Display for Sexpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::List(items) => {
                f.write_str("(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse a whole script into top-level S-expressions. Comments run from
/// `;` to end of line.
pub fn parse_all(input: &str) -> Result<Vec<Sexpr>, String> {
    let mut chars = input.chars().peekable();
    let mut stack: Vec<Vec<Sexpr>> = Vec::new();
    let mut top: Vec<Sexpr> = Vec::new();
    let mut atom = String::new();

    fn flush(atom: &mut String, stack: &mut [Vec<Sexpr>], top: &mut Vec<Sexpr>) {
        if atom.is_empty() {
            return;
        }
        let s = Sexpr::Atom(std::mem::take(atom));
        match stack.last_mut() {
            Some(frame) => frame.push(s),
            None => top.push(s),
        }
    }

    while let Some(c) = chars.next() {
        match c {
            ';' => {
                flush(&mut atom, &mut stack, &mut top);
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => {
                flush(&mut atom, &mut stack, &mut top);
                stack.push(Vec::new());
            }
            ')' => {
                flush(&mut atom, &mut stack, &mut top);
                let frame = stack.pop().ok_or("unbalanced ')'")?;
                let s = Sexpr::List(frame);
                match stack.last_mut() {
                    Some(parent) => parent.push(s),
                    None => top.push(s),
                }
            }
            c if c.is_whitespace() => flush(&mut atom, &mut stack, &mut top),
            c => atom.push(c),
        }
    }
    flush(&mut atom, &mut stack, &mut top);
    if !stack.is_empty() {
        return Err("unbalanced '('".to_string());
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_lists_and_atoms() {
        let got = parse_all("(assert (= x #b1)) (check-sat)").unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].to_string(), "(assert (= x #b1))");
        assert_eq!(got[1].to_string(), "(check-sat)");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let src = "; header comment\n(set-logic QF_BV) ; trailing\n\n(exit)\n";
        let got = parse_all(src).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].to_string(), "(set-logic QF_BV)");
        assert_eq!(got[1].to_string(), "(exit)");
    }

    #[test]
    fn unbalanced_input_is_an_error() {
        assert!(parse_all("(assert (= x").is_err());
        assert!(parse_all("x))").is_err());
    }
}
