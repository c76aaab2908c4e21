//! Binary field dumps: a `key=value` text header closed by a `---` line,
//! followed by little-endian `f64` data.
//!
//! State dumps hold `Re u, Im u` interleaved per site and then `a` in
//! direction-major, site-minor order. Scalar dumps (energy density,
//! discrepancy) hold one value per site.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{BundleTwist, FieldState, Grid};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "selfdual-field-dump";
const TERMINATOR: &str = "---";

#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub format_version: u32,
    /// `state` or the name of a site scalar.
    pub content: String,
    pub dim: usize,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    pub degrees: Vec<i64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub header: DumpHeader,
    pub data: Vec<f64>,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl DumpHeader {
    fn for_grid(grid: &Grid, twist: &BundleTwist, content: &str, epsilon: Option<f64>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            content: content.to_string(),
            dim: grid.dim(),
            sizes: grid.sizes().to_vec(),
            lengths: grid.lengths().to_vec(),
            degrees: twist.degrees().to_vec(),
            epsilon,
        }
    }

    fn render(&self) -> String {
        let mut h = format!("{MAGIC}\nformat-version={}\ncontent={}\n", self.format_version, self.content);
        h.push_str(&format!("dim={}\nsizes={}\nlengths={}\n", self.dim, join(&self.sizes), join(&self.lengths)));
        h.push_str(&format!("degrees={}\n", join(&self.degrees)));
        if let Some(e) = self.epsilon {
            h.push_str(&format!("epsilon={e}\n"));
        }
        h.push_str(TERMINATOR);
        h.push('\n');
        h
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.sizes, &self.lengths)
    }

    fn expected_len(&self) -> usize {
        let n: usize = self.sizes.iter().product();
        if self.content == "state" {
            n * (2 + self.dim)
        } else {
            n
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Error::Dump(format!("bad value {s:?} for {key}"))))
        .collect()
}

fn parse_header(text: &str) -> Result<DumpHeader> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(Error::Dump("missing magic line".into()));
    }
    let mut version = None;
    let mut content = None;
    let mut dim = None;
    let mut sizes = None;
    let mut lengths = None;
    let mut degrees = None;
    let mut epsilon = None;
    for line in lines {
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Dump(format!("bad header line {line:?}")))?;
        let v = v.trim();
        match k.trim() {
            "format-version" => {
                let found = v.parse::<u32>().map_err(|_| Error::Dump(format!("bad format-version {v:?}")))?;
                if found != FORMAT_VERSION {
                    return Err(Error::FormatVersion { found, expected: FORMAT_VERSION });
                }
                version = Some(found);
            }
            "content" => content = Some(v.to_string()),
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| Error::Dump(format!("bad dim {v:?}")))?),
            "sizes" => sizes = Some(parse_list::<usize>("sizes", v)?),
            "lengths" => lengths = Some(parse_list::<f64>("lengths", v)?),
            "degrees" => degrees = Some(parse_list::<i64>("degrees", v)?),
            "epsilon" => epsilon = Some(v.parse::<f64>().map_err(|_| Error::Dump(format!("bad epsilon {v:?}")))?),
            other => return Err(Error::Dump(format!("unknown header key {other:?}"))),
        }
    }
    let missing = |k: &str| Error::Dump(format!("header lacks {k}"));
    let h = DumpHeader {
        format_version: version.ok_or_else(|| missing("format-version"))?,
        content: content.ok_or_else(|| missing("content"))?,
        dim: dim.ok_or_else(|| missing("dim"))?,
        sizes: sizes.ok_or_else(|| missing("sizes"))?,
        lengths: lengths.ok_or_else(|| missing("lengths"))?,
        degrees: degrees.ok_or_else(|| missing("degrees"))?,
        epsilon,
    };
    if h.sizes.len() != h.dim || h.lengths.len() != h.dim {
        return Err(Error::Dump(format!("dim {} disagrees with sizes/lengths", h.dim)));
    }
    Ok(h)
}

pub fn encode(header: &DumpHeader, data: &[f64]) -> Vec<u8> {
    let mut out = header.render().into_bytes();
    out.reserve(8 * data.len());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FieldDump> {
    let marker = format!("\n{TERMINATOR}\n");
    let pos = bytes
        .windows(marker.len())
        .position(|w| w == marker.as_bytes())
        .ok_or_else(|| Error::Dump("header terminator not found".into()))?;
    let text = std::str::from_utf8(&bytes[..pos]).map_err(|_| Error::Dump("header is not UTF-8".into()))?;
    let header = parse_header(text)?;
    let body = &bytes[pos + marker.len()..];
    let want = header.expected_len();
    if body.len() != 8 * want {
        return Err(Error::Dump(format!("expected {} data bytes, found {}", 8 * want, body.len())));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(FieldDump { header, data })
}

impl FieldDump {
    pub fn from_state(state: &FieldState, epsilon: Option<f64>) -> Self {
        Self { header: DumpHeader::for_grid(state.grid(), state.twist(), "state", epsilon), data: state.to_vec() }
    }

    pub fn from_scalar(state: &FieldState, name: &str, values: &[f64], epsilon: Option<f64>) -> Self {
        Self { header: DumpHeader::for_grid(state.grid(), state.twist(), name, epsilon), data: values.to_vec() }
    }

    pub fn to_state(&self) -> Result<FieldState> {
        if self.header.content != "state" {
            return Err(Error::Dump(format!("dump holds {:?}, not a field state", self.header.content)));
        }
        let grid = self.header.grid()?;
        let n = grid.num_sites();
        let u = (0..n).map(|s| Complex64::new(self.data[2 * s], self.data[2 * s + 1])).collect();
        let a = self.data[2 * n..].to_vec();
        FieldState::from_parts(grid, BundleTwist::new(self.header.degrees.clone()), u, a)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode(&self.header, &self.data)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        decode(&fs::read(path)?)
    }
}

pub fn write_state(path: &Path, state: &FieldState, epsilon: Option<f64>) -> Result<()> {
    FieldDump::from_state(state, epsilon).write(path)
}

/// The state and, when recorded, the ε it was computed at.
pub fn read_state(path: &Path) -> Result<(FieldState, Option<f64>)> {
    let d = FieldDump::read(path)?;
    Ok((d.to_state()?, d.header.epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_state, InitSpec};

    #[test]
    fn header_roundtrip_preserves_odd_floats() {
        let g = Grid::new(&[8, 12], &[1.0 / 3.0, 2.5e-7]).unwrap();
        let st = build_state(&g, &BundleTwist::new(vec![-2]), InitSpec::Random { seed: 3, amplitude: 0.4 }).unwrap();
        let d = FieldDump::from_state(&st, Some(0.1 + 0.2));
        let back = decode(&d.to_bytes()).unwrap();
        assert_eq!(back, d);
        let st2 = back.to_state().unwrap();
        assert_eq!(st2, st);
    }

    #[test]
    fn version_mismatch_reports_both() {
        let g = Grid::uniform(2, 8, 1.0).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Zero).unwrap();
        let mut d = FieldDump::from_state(&st, None);
        d.header.format_version = 7;
        match decode(&d.to_bytes()) {
            Err(Error::FormatVersion { found: 7, expected: FORMAT_VERSION }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_body_is_rejected() {
        let g = Grid::uniform(2, 8, 1.0).unwrap();
        let st = build_state(&g, &BundleTwist::trivial(2), InitSpec::Zero).unwrap();
        let mut bytes = FieldDump::from_state(&st, None).to_bytes();
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode(&bytes), Err(Error::Dump(_))));
    }
}
