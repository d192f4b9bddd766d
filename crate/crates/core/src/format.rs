//! Text serialization of code instances.
//!
//! ```text
//! mrlc v1
//! kind local
//! k 4 r 2 h 2
//! field 8 0x11b
//! 0x1 0x2 0x3
//! 0x4 0x5 0x6
//! 0x7 0x8 0x9
//! ```
//!
//! One line of coefficients per local group: `r+1` values (slot order) for
//! a local code, `r` values for a data-local code, which then ends with a
//! `heavy` line holding its `h` heavy-parity coefficients. Blank lines and
//! lines starting with `#` are ignored when parsing.

use std::fmt::Write as _;

use crate::gf2::{FieldDescriptor, FieldElement, FieldError};
use crate::topology::{CodeInstance, CodeKind, LocalTopology, TopologyError};

const MAGIC: &str = "mrlc v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of file, expected {0}")]
    Truncated(&'static str),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn join_hex(values: &[FieldElement]) -> String {
    values
        .iter()
        .map(|v| format!("{v:#x}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn serialize_code(code: &CodeInstance) -> String {
    let topo = code.topology();
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "kind {}", topo.kind()).unwrap();
    writeln!(out, "k {} r {} h {}", topo.k(), topo.r(), topo.h()).unwrap();
    writeln!(out, "field {}", code.field().serialize()).unwrap();
    let alphas = code.alphas();
    let per_group = match topo.kind() {
        CodeKind::Local => topo.r() + 1,
        CodeKind::DataLocal => topo.r(),
    };
    for group in alphas[..topo.groups() * per_group].chunks(per_group) {
        writeln!(out, "{}", join_hex(group)).unwrap();
    }
    if topo.kind() == CodeKind::DataLocal {
        writeln!(
            out,
            "heavy {}",
            join_hex(&alphas[topo.groups() * per_group..])
        )
        .unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next meaningful line with its 1-based number.
    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), FormatError> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Ok((i + 1, line));
            }
        }
        Err(FormatError::Truncated(what))
    }

    fn rest(&mut self) -> Option<(usize, &'a str)> {
        self.next("").ok()
    }
}

fn parse_usize(line: usize, token: Option<&str>, name: &str) -> Result<usize, FormatError> {
    let token = token.ok_or_else(|| syntax(line, format!("missing value for {name}")))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("invalid {name} '{token}'")))
}

fn parse_hex(line: usize, token: &str) -> Result<u128, FormatError> {
    let digits = token
        .strip_prefix("0x")
        .ok_or_else(|| syntax(line, format!("'{token}' must be hex with a 0x prefix")))?;
    u128::from_str_radix(digits, 16)
        .map_err(|_| syntax(line, format!("invalid hex value '{token}'")))
}

fn parse_elements(
    line: usize,
    text: &str,
    field: &FieldDescriptor,
    expected: usize,
) -> Result<Vec<FieldElement>, FormatError> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            let v = parse_hex(line, tok)?;
            u64::try_from(v)
                .ok()
                .and_then(|v| field.element(v).ok())
                .ok_or_else(|| {
                    syntax(
                        line,
                        format!("{tok} is not an element of GF(2^{})", field.degree()),
                    )
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(syntax(
            line,
            format!("expected {expected} coefficients, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn parse_code(text: &str) -> Result<CodeInstance, FormatError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };

    let (n, magic) = lines.next("header")?;
    if magic != MAGIC {
        return Err(syntax(n, format!("expected header '{MAGIC}'")));
    }

    let (n, kind_line) = lines.next("kind line")?;
    let kind = match kind_line.split_whitespace().collect::<Vec<_>>()[..] {
        ["kind", "local"] => CodeKind::Local,
        ["kind", "datalocal"] => CodeKind::DataLocal,
        _ => return Err(syntax(n, "expected 'kind local' or 'kind datalocal'")),
    };

    let (n, params) = lines.next("parameter line")?;
    let tokens: Vec<&str> = params.split_whitespace().collect();
    if tokens.len() != 6 || tokens[0] != "k" || tokens[2] != "r" || tokens[4] != "h" {
        return Err(syntax(n, "expected 'k <k> r <r> h <h>'"));
    }
    let k = parse_usize(n, Some(tokens[1]), "k")?;
    let r = parse_usize(n, Some(tokens[3]), "r")?;
    let h = parse_usize(n, Some(tokens[5]), "h")?;
    let topology = LocalTopology::new(kind, k, r, h)?;

    let (n, field_line) = lines.next("field line")?;
    let tokens: Vec<&str> = field_line.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != "field" {
        return Err(syntax(n, "expected 'field <degree> <modulus>'"));
    }
    let degree = parse_usize(n, Some(tokens[1]), "field degree")?;
    let degree = u32::try_from(degree).map_err(|_| FieldError::DegreeOutOfRange(u32::MAX))?;
    let modulus = parse_hex(n, tokens[2])?;
    let field = FieldDescriptor::with_modulus(degree, modulus, None)?;

    let per_group = match kind {
        CodeKind::Local => r + 1,
        CodeKind::DataLocal => r,
    };
    let mut alphas = Vec::with_capacity(topology.alpha_count());
    for _ in 0..topology.groups() {
        let (n, line) = lines.next("coefficient line")?;
        alphas.extend(parse_elements(n, line, &field, per_group)?);
    }
    if kind == CodeKind::DataLocal {
        let (n, line) = lines.next("heavy line")?;
        let values = line
            .strip_prefix("heavy")
            .filter(|rest| rest.is_empty() || rest.starts_with(char::is_whitespace))
            .ok_or_else(|| syntax(n, "expected 'heavy' followed by the heavy coefficients"))?;
        alphas.extend(parse_elements(n, values, &field, h)?);
    }
    if let Some((n, _)) = lines.rest() {
        return Err(syntax(
            n,
            "trailing content after the last coefficient line",
        ));
    }
    Ok(CodeInstance::new(topology, field, alphas)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{construct_basic, construct_optimized, derive_data_local};

    #[test]
    fn layout() {
        let code = construct_optimized(4, 2, 2).unwrap();
        let text = serialize_code(&code);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            &lines[..4],
            ["mrlc v1", "kind local", "k 4 r 2 h 2", "field 4 0x13"]
        );
        assert_eq!(lines.len(), 4 + 3);
        assert!(lines[4..].iter().all(|l| l.split(' ').count() == 3));
        // the zero element of S1 fills the local-parity slot
        assert!(lines[4].ends_with(" 0x0"));
    }

    #[test]
    fn round_trips_are_byte_identical() {
        let local = construct_basic(6, 2, 2).unwrap();
        let dl = derive_data_local(&construct_optimized(5, 2, 3).unwrap(), None).unwrap();
        for code in [local, dl] {
            let text = serialize_code(&code);
            let parsed = parse_code(&text).unwrap();
            assert_eq!(parsed, code);
            assert_eq!(serialize_code(&parsed), text);
        }
    }

    #[test]
    fn data_local_has_heavy_line() {
        let dl = derive_data_local(&construct_optimized(6, 2, 2).unwrap(), None).unwrap();
        let text = serialize_code(&dl);
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("heavy "));
        assert_eq!(last.split(' ').count(), 3);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text =
            "# code\nmrlc v1\n\nkind local\nk 1 r 1 h 1\nfield 2 0x7\n0x1 0x2\n  0x3 0x0  \n";
        let code = parse_code(text).unwrap();
        assert_eq!(code.alphas().len(), 4);
    }

    #[test]
    fn rejects_malformed_input() {
        let good = "mrlc v1\nkind local\nk 1 r 1 h 1\nfield 2 0x7\n0x1 0x2\n0x3 0x0\n";
        assert!(parse_code(good).is_ok());
        let cases = [
            ("mrlc v2\n", "header"),
            ("mrlc v1\nkind global\n", "kind"),
            (&good.replace("field 2 0x7", "field 2 0x5")[..], "reducible"),
            (&good.replace("0x3 0x0", "0x3 0x4")[..], "not an element"),
            (&good.replace("0x3 0x0", "0x3")[..], "expected 2"),
            (&good.replace("0x3 0x0", "3 0")[..], "0x prefix"),
            (&good.replace("k 1 r 1", "k 1 r 3")[..], "divide"),
            (
                "mrlc v1\nkind local\nk 1 r 1 h 1\nfield 2 0x7\n0x1 0x2\n",
                "end of file",
            ),
            (&format!("{good}0x1\n")[..], "trailing"),
        ];
        for (text, needle) in cases {
            let err = parse_code(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{needle}: {err}");
        }
    }
}
