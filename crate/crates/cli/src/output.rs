use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Text form of [`round12`], used for every number written to disk.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    format!("{:?}", round12(x))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n
                    .as_f64()
                    .and_then(|x| serde_json::Number::from_f64(round12(x)))
                {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
        })
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        round_value(&mut v);
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn csv(&self, name: &str, csv: &Csv) -> Result<PathBuf> {
        self.write(name, &csv.text)
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Minimal CSV builder; cells are numbers or plain labels without commas.
pub struct Csv {
    text: String,
}

pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let mut line = String::new();
        for (k, c) in cells.into_iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            match c {
                Cell::Num(x) => line.push_str(&fmt12(x)),
                Cell::Text(s) => {
                    let _ = write!(line, "{}", s.replace([',', '\n'], " "));
                }
            }
        }
        line.push('\n');
        self.text.push_str(&line);
    }
}
