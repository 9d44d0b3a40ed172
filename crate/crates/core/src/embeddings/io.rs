//! word2vec text format, plus a sidecar for the subword tables.
//!
//! Main file: `vocab_size dimension`, then `token v1 … vd` per line. Values
//! use the shortest representation that round-trips the f32 exactly.
//!
//! Sidecar (`<file>.subwords`): a `#subwords` header with the n-gram
//! settings and row counts, then one `token v1 … vd` line per vocabulary
//! word (its own vector) and one `bucket v1 … vd` line per stored bucket.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{SubwordTable, VectorTable};
use crate::error::{Error, Result};
use crate::tsv;

pub fn subword_sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".subwords");
    PathBuf::from(s)
}

fn write_row<W: Write>(w: &mut W, key: &str, values: &[f32]) -> std::io::Result<()> {
    w.write_all(key.as_bytes())?;
    for v in values {
        write!(w, " {v}")?;
    }
    writeln!(w)
}

/// Writes the main word2vec text body (no sidecar).
pub fn write_w2v<W: Write>(table: &VectorTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for (word, v) in table.iter() {
        write_row(&mut w, word, v)?;
    }
    w.flush()
}

/// Saves `table` to `path`; subword models also get their sidecar. An
/// optional `header` line (provenance) is written first in both files.
pub fn save_w2v(table: &VectorTable, path: &Path, header: Option<&str>) -> Result<()> {
    let create = |p: &Path| -> Result<BufWriter<std::fs::File>> {
        let f = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        if let Some(h) = header {
            writeln!(w, "{h}").map_err(|e| Error::io(p, e))?;
        }
        Ok(w)
    };
    let w = create(path)?;
    write_w2v(table, w).map_err(|e| Error::io(path, e))?;

    if let Some(sw) = table.subwords() {
        let side = subword_sidecar_path(path);
        let mut w = create(&side)?;
        let dim = table.dim();
        let body = (|| -> std::io::Result<()> {
            writeln!(
                w,
                "#subwords dim={} ngram_min={} ngram_max={} buckets={} words={} rows={}",
                dim,
                sw.ngram_min,
                sw.ngram_max,
                sw.buckets,
                table.len(),
                sw.bucket_ids().len()
            )?;
            for (i, word) in table.words().iter().enumerate() {
                write_row(&mut w, word, &sw.own_rows()[i * dim..(i + 1) * dim])?;
            }
            for (i, b) in sw.bucket_ids().iter().enumerate() {
                write_row(&mut w, &b.to_string(), &sw.bucket_rows()[i * dim..(i + 1) * dim])?;
            }
            w.flush()
        })();
        body.map_err(|e| Error::io(&side, e))?;
    }
    Ok(())
}

fn parse_row<'a>(path: &Path, n: usize, line: &'a str, dim: usize) -> Result<(&'a str, Vec<f32>)> {
    let mut parts = line.split(' ').filter(|p| !p.is_empty());
    let key = parts
        .next()
        .ok_or_else(|| Error::parse(path, n, "empty row"))?;
    let values = parts
        .map(|p| match p.parse::<f32>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(path, n, format!("row `{key}`: bad value `{p}`"))),
        })
        .collect::<Result<Vec<f32>>>()?;
    if values.len() != dim {
        return Err(Error::parse(
            path,
            n,
            format!("row `{key}` has {} values, expected {dim}", values.len()),
        ));
    }
    Ok((key, values))
}

fn parse_header(path: &Path, n: usize, line: &str) -> Result<(usize, usize)> {
    let nums: Vec<usize> = line
        .split_whitespace()
        .map(|x| x.parse().map_err(|_| Error::parse(path, n, format!("bad header `{line}`"))))
        .collect::<Result<_>>()?;
    match nums[..] {
        [rows, dim] if dim > 0 => Ok((rows, dim)),
        _ => Err(Error::parse(path, n, format!("bad header `{line}`"))),
    }
}

/// Reads only the main word2vec file.
pub fn read_w2v(path: &Path) -> Result<VectorTable> {
    let lines = tsv::read_lines(path)?;
    let mut lines = lines.into_iter().filter(|(_, l)| !l.is_empty());
    let (hn, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let (rows, dim) = parse_header(path, hn, &header)?;
    let mut table = VectorTable::new(dim);
    let mut seen = 0;
    for (n, line) in lines {
        seen += 1;
        if seen > rows {
            return Err(Error::parse(path, n, format!("header declares {rows} rows, found more")));
        }
        let (key, values) = parse_row(path, n, &line, dim)?;
        if table.contains(key) {
            log::warn!("{}:{n}: duplicate token `{key}` ignored", path.display());
            continue;
        }
        table.insert(key, &values)?;
    }
    if seen != rows {
        return Err(Error::parse(path, hn, format!("header declares {rows} rows, found {seen}")));
    }
    Ok(table)
}

/// Reads a word2vec file and, when present, its subword sidecar.
pub fn load_w2v(path: impl AsRef<Path>) -> Result<VectorTable> {
    let path = path.as_ref();
    let table = read_w2v(path)?;
    let side = subword_sidecar_path(path);
    if !side.exists() {
        return Ok(table);
    }
    let sw = read_sidecar(&side, &table)?;
    Ok(table.with_subwords(sw))
}

fn read_sidecar(path: &Path, table: &VectorTable) -> Result<SubwordTable> {
    let lines = tsv::read_lines(path)?;
    let mut lines = lines.into_iter().filter(|(_, l)| !l.is_empty());
    let (hn, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing #subwords header"))?;
    let fields = header
        .strip_prefix("#subwords")
        .ok_or_else(|| Error::parse(path, hn, "missing #subwords header"))?;
    let get = |name: &str| -> Result<usize> {
        fields
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(name).and_then(|r| r.strip_prefix('=')))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(path, hn, format!("missing `{name}`")))
    };
    let dim = get("dim")?;
    if dim != table.dim() {
        return Err(Error::Dimension {
            expected: table.dim(),
            actual: dim,
        });
    }
    let words = get("words")?;
    let rows = get("rows")?;
    if words != table.len() {
        return Err(Error::parse(path, hn, format!("sidecar has {words} words, table has {}", table.len())));
    }
    let mut own = Vec::with_capacity(words * dim);
    let mut ids = Vec::with_capacity(rows);
    let mut vectors = Vec::with_capacity(rows * dim);
    let mut count = 0;
    for (n, line) in lines {
        let (key, values) = parse_row(path, n, &line, dim)?;
        if count < words {
            if key != table.words()[count] {
                return Err(Error::parse(path, n, format!("expected word `{}`", table.words()[count])));
            }
            own.extend_from_slice(&values);
        } else {
            ids.push(key.parse().map_err(|_| Error::parse(path, n, format!("bad bucket `{key}`")))?);
            vectors.extend_from_slice(&values);
        }
        count += 1;
    }
    if count != words + rows {
        return Err(Error::parse(path, hn, format!("expected {} rows, found {count}", words + rows)));
    }
    Ok(SubwordTable::new(
        get("ngram_min")?,
        get("ngram_max")?,
        get("buckets")? as u32,
        own,
        ids,
        vectors,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{train, EmbeddingConfig};

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn round_trip_plain() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = VectorTable::new(3);
        t.insert("bond", &[0.1, -2.5e-7, 3.0]).unwrap();
        t.insert("swap", &[1.0 / 3.0, 0.0, -0.125]).unwrap();
        let p = dir.path().join("v.vec");
        save_w2v(&t, &p, None).unwrap();
        assert_eq!(load_w2v(&p).unwrap(), t);
    }

    #[test]
    fn round_trip_subwords_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = EmbeddingConfig { dimension: 8, min_count: 1, epochs: 1, buckets: 97, ..Default::default() };
        let t = train(["interest rate swap"], &cfg).unwrap();
        let p = dir.path().join("ft.vec");
        save_w2v(&t, &p, Some("#!hypernym test")).unwrap();
        let back = load_w2v(&p).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.compose("swap").unwrap(), back.get("swap").unwrap());
    }

    #[test]
    fn header_row_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.vec", "2 2\na 1 2\nb 3 4\nc 5 6\n");
        assert!(matches!(load_w2v(&p), Err(Error::Parse { line: 4, .. })));
        let p = write(dir.path(), "b.vec", "3 2\na 1 2\n");
        assert!(load_w2v(&p).is_err());
    }

    #[test]
    fn dimension_mismatch_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.vec", "2 2\na 1 2\nb 3\n");
        let err = load_w2v(&p).unwrap_err().to_string();
        assert!(err.contains(":3:") && err.contains("`b`"), "{err}");
    }

    #[test]
    fn loads_300_dimensional_file() {
        let dir = tempfile::tempdir().unwrap();
        let row = |w: &str, x: f32| {
            let vals: Vec<String> = (0..300).map(|i| format!("{:.6}", x * i as f32 / 300.0)).collect();
            format!("{w} {}\n", vals.join(" "))
        };
        let body = format!("2 300\n{}{}", row("bond", 1.0), row("equity", -0.5));
        let p = write(dir.path(), "w2v300.txt", &body);
        let t = load_w2v(&p).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 300));
    }
}
