use std::path::Path;

use contact_core::expr::{parse_expression, Entry, ProblemFile, VarNames};
use contact_core::germ::normalize_to_graph;
use contact_core::{DefiningFunction, GraphForm, Polynomial, Rational};

use crate::CliError;

/// A loaded problem with both of its frames.
pub struct Problem {
    pub file: ProblemFile<Rational>,
    pub r: DefiningFunction,
}

impl Problem {
    pub fn from_text(text: &str, origin: &str) -> Result<Self, CliError> {
        let file = ProblemFile::parse(text).map_err(|e| CliError::Input(format!("{}: {}", origin, e)))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {}", path.display(), e)))?;
        Self::from_text(&text, &path.display().to_string())
    }

    /// An inline expression; the dimension is the largest `zK` index unless
    /// given.
    pub fn from_expr(text: &str, nvars: Option<usize>, graph: bool) -> Result<Self, CliError> {
        let n = match nvars {
            Some(n) => n,
            None => infer_nvars(text).ok_or_else(|| CliError::Input("cannot infer the number of variables".into()))?,
        };
        let p: Polynomial = parse_expression(text, &VarNames::z(n)).map_err(|e| CliError::Input(format!("--expr: {}", e)))?;
        let entry = if graph { Entry::Graph(p) } else { Entry::Defining(p) };
        Self::from_file(ProblemFile { nvars: n, definitions: Vec::new(), entry })
    }

    fn from_file(file: ProblemFile<Rational>) -> Result<Self, CliError> {
        let r = match &file.entry {
            Entry::Defining(p) => DefiningFunction::validate(p.clone()),
            Entry::Graph(g) => DefiningFunction::from_graph(g),
        }
        .map_err(|e| CliError::Input(format!("defining function: {}", e)))?;
        Ok(Self { file, r })
    }

    pub fn canonical_text(&self) -> String {
        self.file.print()
    }

    pub fn is_graph(&self) -> bool {
        matches!(self.file.entry, Entry::Graph(_))
    }

    /// Graph normal form through degree `order`; exact for graph entries.
    pub fn graph_form(&self, order: u32) -> Result<GraphForm, CliError> {
        match &self.file.entry {
            Entry::Graph(g) => GraphForm::from_graph(g.clone()).map_err(|e| CliError::Input(format!("graph function: {}", e))),
            Entry::Defining(_) => normalize_to_graph(&self.r, order).map_err(CliError::from),
        }
    }

    pub fn names(&self) -> VarNames {
        VarNames::z(self.file.nvars)
    }
}

fn infer_nvars(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut best = None;
    for (i, _) in text.match_indices('z') {
        let before_ok = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_');
        let digits: String = text[i + 1..].chars().take_while(|c| c.is_ascii_digit()).collect();
        if before_ok && !digits.is_empty() {
            let k: usize = digits.parse().ok()?;
            best = Some(best.map_or(k, |b: usize| b.max(k)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_inferred() {
        assert_eq!(infer_nvars("2*Re(z3) + abs2(z1^2 - z2^3)"), Some(3));
        assert_eq!(infer_nvars("abs2(z12)"), Some(12));
        assert_eq!(infer_nvars("abs2(t)"), None);
    }

    #[test]
    fn graph_entries_get_an_extra_variable() {
        let p = Problem::from_expr("abs2(z1)^2", None, true).unwrap();
        assert_eq!(p.r.nvars(), 2);
        assert_eq!(p.graph_form(8).unwrap().nvars(), 1);
    }

    #[test]
    fn non_real_input_is_rejected() {
        assert!(matches!(Problem::from_expr("i*z1 - conj(i*z1)", None, false), Err(CliError::Input(_))));
    }
}
