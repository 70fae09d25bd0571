//! Line-oriented `key = value` kernel files.
//!
//! ```text
//! # kernel 1 + t*u
//! phi1 = 1
//! phi2 = t
//! psi1 = 1
//! psi2 = t
//! k = 2
//! quad_tol = 1e-12   # optional
//! ```

use std::collections::BTreeMap;

use crate::CliError;

const KEYS: [&str; 9] = [
    "phi1",
    "phi2",
    "psi1",
    "psi2",
    "k",
    "quad_tol",
    "root_tol",
    "residual_tol",
    "grid",
];

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFile {
    pub phi1: String,
    pub phi2: String,
    pub psi1: String,
    pub psi2: String,
    pub k: usize,
    pub quad_tol: Option<f64>,
    pub root_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub grid: Option<usize>,
}

fn input(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("kernel file line {line}: {msg}"))
}

impl KernelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| input(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| input(line, format!("unknown key `{key}`")))?;
            if value.is_empty() {
                return Err(input(line, format!("`{key}` has no value")));
            }
            if let Some((first, _)) = entries.insert(key, (line, value)) {
                return Err(input(line, format!("`{key}` already set on line {first}")));
            }
        }

        let text_of = |key: &str| -> Result<String, CliError> {
            entries
                .get(key)
                .map(|(_, v)| v.to_string())
                .ok_or_else(|| CliError::Input(format!("kernel file is missing `{key}`")))
        };
        let number = |key: &str| -> Result<Option<f64>, CliError> {
            entries
                .get(key)
                .map(|&(line, v)| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| *x > 0.0 && x.is_finite())
                        .ok_or_else(|| input(line, format!("`{key}` must be a positive number, got `{v}`")))
                })
                .transpose()
        };
        let count = |key: &str| -> Result<Option<usize>, CliError> {
            entries
                .get(key)
                .map(|&(line, v)| {
                    v.parse::<usize>()
                        .map_err(|_| input(line, format!("`{key}` must be a non-negative integer, got `{v}`")))
                })
                .transpose()
        };

        Ok(KernelFile {
            phi1: text_of("phi1")?,
            phi2: text_of("phi2")?,
            psi1: text_of("psi1")?,
            psi2: text_of("psi2")?,
            k: count("k")?.ok_or_else(|| CliError::Input("kernel file is missing `k`".into()))?,
            quad_tol: number("quad_tol")?,
            root_tol: number("root_tol")?,
            residual_tol: number("residual_tol")?,
            grid: count("grid")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = "# comment\nphi1 = 1\nphi2=t\npsi1 = 1 # trailing\npsi2 = t\nk = 2\n";

    #[test]
    fn parses_minimal_file() {
        let f = KernelFile::parse(MODEL).unwrap();
        assert_eq!(f.phi2, "t");
        assert_eq!(f.psi1, "1");
        assert_eq!(f.k, 2);
        assert_eq!(f.quad_tol, None);
    }

    #[test]
    fn optional_overrides() {
        let f = KernelFile::parse(&format!("{MODEL}quad_tol = 1e-12\ngrid = 51\n")).unwrap();
        assert_eq!(f.quad_tol, Some(1e-12));
        assert_eq!(f.grid, Some(51));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "phi1 = 1\n",
            "phi1 1\n",
            &format!("{MODEL}colour = red\n"),
            &format!("{MODEL}k = 3\n"),
            &format!("{MODEL}quad_tol = -1\n"),
            &MODEL.replace("k = 2", "k = two"),
            &MODEL.replace("psi2 = t", "psi2 ="),
        ] {
            assert!(matches!(KernelFile::parse(bad), Err(CliError::Input(_))), "{bad:?}");
        }
    }
}
