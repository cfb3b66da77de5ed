//! Bundled reference tables. A directory holding files with the same names
//! can replace them, which is what the `SICA_FIXTURES` variable selects.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::table::{ingest_csv, CountTable, CsvOptions};

pub const FIXTURES_ENV: &str = "SICA_FIXTURES";

pub const EXAMPLE1: &str = "example1.csv";
pub const EXAMPLE2: &str = "example2.csv";
pub const EXAMPLE3: &str = "example3.csv";
pub const RODENT: &str = "rodent.csv";

const EMBEDDED: [(&str, &str); 4] = [
    (EXAMPLE1, include_str!("../fixtures/example1.csv")),
    (EXAMPLE2, include_str!("../fixtures/example2.csv")),
    (EXAMPLE3, include_str!("../fixtures/example3.csv")),
    (RODENT, include_str!("../fixtures/rodent.csv")),
];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FixtureSource {
    #[default]
    Embedded,
    Directory(PathBuf),
}

impl FixtureSource {
    /// The directory named by `SICA_FIXTURES`, or the embedded copies.
    pub fn from_env() -> Self {
        match std::env::var_os(FIXTURES_ENV) {
            Some(dir) if !dir.is_empty() => FixtureSource::Directory(dir.into()),
            _ => FixtureSource::Embedded,
        }
    }

    pub fn directory(path: impl AsRef<Path>) -> Self {
        FixtureSource::Directory(path.as_ref().to_path_buf())
    }

    pub fn load(&self, name: &str) -> Result<CountTable> {
        match self {
            FixtureSource::Embedded => {
                let text = EMBEDDED
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, t)| *t)
                    .ok_or_else(|| {
                        std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            format!("no bundled fixture named {name}"),
                        )
                    })?;
                ingest_csv(text.as_bytes(), &CsvOptions::default())
            }
            FixtureSource::Directory(dir) => {
                let file = std::fs::File::open(dir.join(name))?;
                ingest_csv(file, &CsvOptions::default())
            }
        }
    }
}

/// The rodent presence counts, 28 sites by 9 species.
pub fn rodent() -> CountTable {
    FixtureSource::Embedded
        .load(RODENT)
        .expect("bundled fixture parses")
}

pub fn example1() -> CountTable {
    FixtureSource::Embedded
        .load(EXAMPLE1)
        .expect("bundled fixture parses")
}

pub fn example2() -> CountTable {
    FixtureSource::Embedded
        .load(EXAMPLE2)
        .expect("bundled fixture parses")
}

pub fn example3() -> CountTable {
    FixtureSource::Embedded
        .load(EXAMPLE3)
        .expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_have_expected_shapes() {
        let r = rodent();
        assert_eq!((r.nrows(), r.ncols()), (28, 9));
        assert_eq!(r.zero_count(), 167);
        assert_eq!((example1().nrows(), example1().ncols()), (6, 5));
        assert_eq!((example2().nrows(), example2().ncols()), (3, 4));
        assert_eq!(example3().zero_count(), 1);
    }

    #[test]
    fn directory_source_reads_files() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let t = FixtureSource::directory(&dir).load(EXAMPLE3).unwrap();
        assert_eq!(t, example3());
        assert!(FixtureSource::directory(&dir).load("missing.csv").is_err());
    }
}
