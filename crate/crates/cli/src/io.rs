//! Matrix file ingestion: matrix-market coordinate files (sparse), csv
//! (dense, one row per line), and a raw f64 binary layout for large
//! benchmark inputs. Each format also has a streaming source that reads the
//! file once per pass instead of materializing the matrix.
//!
//! Binary layout: 8-byte magic `PCMATRX1`, then n and d as little-endian
//! u64, then n*d little-endian f64 values in row-major order.

use pcsketch::error::{Error, Result};
use pcsketch::matrix::DataMatrix;
use pcsketch::stream::{MatrixSource, RowChunk};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

pub const BINARY_MAGIC: &[u8; 8] = b"PCMATRX1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MatrixFormat {
    /// Matrix-market coordinate format (sparse)
    MatrixMarket,
    /// Comma-separated values, one matrix row per line (dense)
    Csv,
    /// Raw little-endian f64 rows with a PCMATRX1 header (dense)
    F64Binary,
}

/// Pick a format from the file extension when none was given explicitly.
pub fn infer_format(path: &Path, explicit: Option<MatrixFormat>) -> Result<MatrixFormat> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("mtx") => Ok(MatrixFormat::MatrixMarket),
        Some("csv") => Ok(MatrixFormat::Csv),
        Some("bin") => Ok(MatrixFormat::F64Binary),
        other => Err(Error::InvalidParams(format!(
            "cannot infer format from extension {:?}; pass --format",
            other.unwrap_or("<none>")
        ))),
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    match format {
        MatrixFormat::Csv => load_csv(path),
        MatrixFormat::MatrixMarket => load_matrix_market(path),
        MatrixFormat::F64Binary => load_binary(path),
    }
}

fn line_err(line: usize, reason: String) -> Error {
    Error::Format {
        offset: line,
        reason: format!("line {line}: {reason}"),
    }
}

fn load_csv(path: &Path) -> Result<DataMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_csv_row(&line, lineno)?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(line_err(
                    lineno,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(line_err(1, "no data rows".into()));
    }
    DataMatrix::from_rows(&rows)
}

fn parse_csv_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| line_err(lineno, format!("bad value '{}'", tok.trim())))
        })
        .collect()
}

struct MmHeader {
    rows: usize,
    cols: usize,
    nnz: usize,
    /// 1-based line number of the size line; entries start after it.
    size_line: usize,
}

fn read_mm_header(reader: &mut impl BufRead) -> Result<MmHeader> {
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let banner = line.trim();
    if !banner.starts_with("%%MatrixMarket") {
        return Err(line_err(1, "expected a %%MatrixMarket banner".into()));
    }
    let words: Vec<&str> = banner.split_whitespace().collect();
    // banner: %%MatrixMarket matrix coordinate real general
    if words.len() < 5
        || words[1] != "matrix"
        || words[2] != "coordinate"
        || words[3] != "real"
        || words[4] != "general"
    {
        return Err(line_err(
            1,
            format!("unsupported banner '{banner}'; need 'matrix coordinate real general'"),
        ));
    }
    let mut lineno = 1;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(line_err(lineno, "missing size line".into()));
        }
        lineno += 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(line_err(lineno, "size line needs 'rows cols nnz'".into()));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| line_err(lineno, format!("bad count '{s}'")))
        };
        return Ok(MmHeader {
            rows: parse(parts[0])?,
            cols: parse(parts[1])?,
            nnz: parse(parts[2])?,
            size_line: lineno,
        });
    }
}

fn parse_mm_entry(
    line: &str,
    lineno: usize,
    entry_idx: usize,
    rows: usize,
    cols: usize,
) -> Result<(usize, usize, f64)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(line_err(
            lineno,
            format!("entry {entry_idx}: need 'row col value'"),
        ));
    }
    let r: usize = parts[0]
        .parse()
        .map_err(|_| line_err(lineno, format!("entry {entry_idx}: bad row '{}'", parts[0])))?;
    let c: usize = parts[1]
        .parse()
        .map_err(|_| line_err(lineno, format!("entry {entry_idx}: bad col '{}'", parts[1])))?;
    let v: f64 = parts[2]
        .parse()
        .map_err(|_| line_err(lineno, format!("entry {entry_idx}: bad value '{}'", parts[2])))?;
    if r < 1 || r > rows || c < 1 || c > cols {
        return Err(line_err(
            lineno,
            format!("entry {entry_idx}: index ({r}, {c}) outside {rows}x{cols} (1-based)"),
        ));
    }
    Ok((r - 1, c - 1, v))
}

fn load_matrix_market(path: &Path) -> Result<DataMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    let header = read_mm_header(&mut reader)?;
    let mut triplets = Vec::with_capacity(header.nnz);
    let mut lineno = header.size_line;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let entry = parse_mm_entry(t, lineno, triplets.len() + 1, header.rows, header.cols)?;
        triplets.push(entry);
    }
    if triplets.len() != header.nnz {
        return Err(line_err(
            lineno,
            format!("declared {} entries, found {}", header.nnz, triplets.len()),
        ));
    }
    DataMatrix::from_triplets(header.rows, header.cols, &triplets)
}

fn read_binary_header(reader: &mut impl Read) -> Result<(usize, usize)> {
    let mut magic = [0u8; 8];
    reader.read_exact(&mut magic).map_err(|_| Error::Format {
        offset: 0,
        reason: "file shorter than the 8-byte magic".into(),
    })?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format {
            offset: 0,
            reason: format!("bad magic {magic:?}, expected {BINARY_MAGIC:?}"),
        });
    }
    let mut buf = [0u8; 8];
    reader.read_exact(&mut buf).map_err(|_| Error::Format {
        offset: 8,
        reason: "truncated row count".into(),
    })?;
    let n = u64::from_le_bytes(buf) as usize;
    reader.read_exact(&mut buf).map_err(|_| Error::Format {
        offset: 16,
        reason: "truncated column count".into(),
    })?;
    let d = u64::from_le_bytes(buf) as usize;
    if n == 0 || d == 0 {
        return Err(Error::Format {
            offset: 8,
            reason: format!("empty shape {n}x{d}"),
        });
    }
    Ok((n, d))
}

fn load_binary(path: &Path) -> Result<DataMatrix> {
    let mut reader = BufReader::new(File::open(path)?);
    let (n, d) = read_binary_header(&mut reader)?;
    let mut rows = Vec::with_capacity(n);
    let mut buf = vec![0u8; d * 8];
    for i in 0..n {
        reader.read_exact(&mut buf).map_err(|_| Error::Format {
            offset: 24 + i * d * 8,
            reason: format!("truncated at row {i} of {n}"),
        })?;
        let row: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        rows.push(row);
    }
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(Error::Format {
            offset: 24 + n * d * 8,
            reason: "trailing bytes after the last row".into(),
        });
    }
    DataMatrix::from_rows(&rows)
}

/// File-backed streaming source: every scan re-reads the file sequentially.
/// The dimensions (and for matrix-market the entry order) are validated on
/// construction with one throwaway pass.
#[derive(Debug)]
pub struct FileSource {
    path: PathBuf,
    format: MatrixFormat,
    rows: usize,
    cols: usize,
    row_buf: Vec<f64>,
}

impl FileSource {
    pub fn open(path: &Path, format: MatrixFormat) -> Result<Self> {
        let (rows, cols) = match format {
            MatrixFormat::Csv => {
                let reader = BufReader::new(File::open(path)?);
                let mut rows = 0usize;
                let mut cols = 0usize;
                for (idx, line) in reader.lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let row = parse_csv_row(&line, idx + 1)?;
                    if rows == 0 {
                        cols = row.len();
                    } else if row.len() != cols {
                        return Err(line_err(
                            idx + 1,
                            format!("expected {cols} columns, found {}", row.len()),
                        ));
                    }
                    rows += 1;
                }
                if rows == 0 {
                    return Err(line_err(1, "no data rows".into()));
                }
                (rows, cols)
            }
            MatrixFormat::F64Binary => {
                let mut reader = BufReader::new(File::open(path)?);
                read_binary_header(&mut reader)?
            }
            MatrixFormat::MatrixMarket => {
                // Validation pass; also enforces the sorted-entry contract.
                let mut probe = MmScan::open(path)?;
                let (r, c) = (probe.rows, probe.cols);
                while probe.next_entry()?.is_some() {}
                (r, c)
            }
        };
        Ok(FileSource {
            path: path.to_path_buf(),
            format,
            rows,
            cols,
            row_buf: vec![0.0; cols],
        })
    }
}

impl MatrixSource for FileSource {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn scan(&mut self, visit: &mut dyn FnMut(RowChunk<'_>)) -> Result<()> {
        match self.format {
            MatrixFormat::Csv => {
                let reader = BufReader::new(File::open(&self.path)?);
                let mut row = 0usize;
                for (idx, line) in reader.lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let vals = parse_csv_row(&line, idx + 1)?;
                    self.row_buf.copy_from_slice(&vals);
                    visit(RowChunk::Dense {
                        row,
                        values: &self.row_buf,
                    });
                    row += 1;
                }
                Ok(())
            }
            MatrixFormat::F64Binary => {
                let mut reader = BufReader::new(File::open(&self.path)?);
                read_binary_header(&mut reader)?;
                let mut buf = vec![0u8; self.cols * 8];
                for i in 0..self.rows {
                    reader.read_exact(&mut buf).map_err(|_| Error::Format {
                        offset: 24 + i * self.cols * 8,
                        reason: format!("truncated at row {i}"),
                    })?;
                    for (slot, chunk) in self.row_buf.iter_mut().zip(buf.chunks_exact(8)) {
                        *slot = f64::from_le_bytes(chunk.try_into().unwrap());
                    }
                    visit(RowChunk::Dense {
                        row: i,
                        values: &self.row_buf,
                    });
                }
                Ok(())
            }
            MatrixFormat::MatrixMarket => {
                let mut scan = MmScan::open(&self.path)?;
                let mut cur_row = usize::MAX;
                let mut cols: Vec<usize> = Vec::new();
                let mut vals: Vec<f64> = Vec::new();
                loop {
                    let next = scan.next_entry()?;
                    match next {
                        Some((r, c, v)) => {
                            if r != cur_row {
                                if cur_row != usize::MAX && !cols.is_empty() {
                                    visit(RowChunk::Entries {
                                        row: cur_row,
                                        cols: &cols,
                                        values: &vals,
                                    });
                                }
                                cols.clear();
                                vals.clear();
                                cur_row = r;
                            }
                            cols.push(c);
                            vals.push(v);
                        }
                        None => {
                            if cur_row != usize::MAX && !cols.is_empty() {
                                visit(RowChunk::Entries {
                                    row: cur_row,
                                    cols: &cols,
                                    values: &vals,
                                });
                            }
                            return Ok(());
                        }
                    }
                }
            }
        }
    }
}

/// Sequential matrix-market entry reader. Streaming requires entries sorted
/// by (row, col) so that the scan order matches the in-memory CSR order;
/// unsorted files are rejected with the offending entry named.
struct MmScan {
    reader: BufReader<File>,
    rows: usize,
    cols: usize,
    declared_nnz: usize,
    seen: usize,
    lineno: usize,
    last: Option<(usize, usize)>,
    line: String,
}

impl MmScan {
    fn open(path: &Path) -> Result<Self> {
        let mut reader = BufReader::new(File::open(path)?);
        let header = read_mm_header(&mut reader)?;
        Ok(MmScan {
            reader,
            rows: header.rows,
            cols: header.cols,
            declared_nnz: header.nnz,
            seen: 0,
            lineno: header.size_line,
            last: None,
            line: String::new(),
        })
    }

    fn next_entry(&mut self) -> Result<Option<(usize, usize, f64)>> {
        loop {
            self.line.clear();
            if self.reader.read_line(&mut self.line)? == 0 {
                if self.seen != self.declared_nnz {
                    return Err(line_err(
                        self.lineno,
                        format!("declared {} entries, found {}", self.declared_nnz, self.seen),
                    ));
                }
                return Ok(None);
            }
            self.lineno += 1;
            let t = self.line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let owned = t.to_string();
            let (r, c, v) =
                parse_mm_entry(&owned, self.lineno, self.seen + 1, self.rows, self.cols)?;
            if let Some(prev) = self.last {
                if (r, c) <= prev {
                    return Err(line_err(
                        self.lineno,
                        format!(
                            "entry {}: streaming needs entries sorted by (row, col); \
                             ({}, {}) follows ({}, {})",
                            self.seen + 1,
                            r + 1,
                            c + 1,
                            prev.0 + 1,
                            prev.1 + 1
                        ),
                    ));
                }
            }
            self.last = Some((r, c));
            self.seen += 1;
            return Ok(Some((r, c, v)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcsketch::matrix::random_dense;
    use pcsketch::stream::MatrixSource;
    use std::io::Write;

    fn temp(name: &str, bytes: &[u8]) -> PathBuf {
        let dir = tempfile::tempdir().unwrap().keep();
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(bytes).unwrap();
        path
    }

    #[test]
    fn csv_two_by_two() {
        let path = temp("m.csv", b"1,2\n3,4\n");
        let m = load_matrix(&path, MatrixFormat::Csv).unwrap();
        assert_eq!((m.rows(), m.cols(), m.nnz()), (2, 2, 4));
        let d = m.to_dense();
        assert_eq!(
            (d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]),
            (1.0, 2.0, 3.0, 4.0)
        );
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let path = temp("bad.csv", b"1,2\n3,oops\n");
        let err = load_matrix(&path, MatrixFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let ragged = temp("ragged.csv", b"1,2\n3\n");
        let err = load_matrix(&ragged, MatrixFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn matrix_market_single_entry() {
        let text = b"%%MatrixMarket matrix coordinate real general\n% comment\n3 3 1\n1 1 5.0\n";
        let path = temp("m.mtx", text);
        let m = load_matrix(&path, MatrixFormat::MatrixMarket).unwrap();
        assert_eq!((m.rows(), m.cols(), m.nnz()), (3, 3, 1));
        assert!(m.is_sparse());
        assert_eq!(m.to_dense()[(0, 0)], 5.0);
    }

    #[test]
    fn matrix_market_errors_name_the_entry() {
        let oob = temp(
            "oob.mtx",
            b"%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        );
        let err = load_matrix(&oob, MatrixFormat::MatrixMarket).unwrap_err();
        assert!(err.to_string().contains("entry 1"), "{err}");
        assert!(err.to_string().contains("(3, 1)"), "{err}");

        let wrong_count = temp(
            "count.mtx",
            b"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
        );
        let err = load_matrix(&wrong_count, MatrixFormat::MatrixMarket).unwrap_err();
        assert!(err.to_string().contains("declared 2"), "{err}");

        let banner = temp("banner.mtx", b"%%MatrixMarket matrix array real general\n2 2\n");
        assert!(load_matrix(&banner, MatrixFormat::MatrixMarket).is_err());
    }

    fn binary_bytes(m: &pcsketch::matrix::DataMatrix) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
        let d = m.to_dense();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.extend_from_slice(&d[(i, j)].to_le_bytes());
            }
        }
        out
    }

    #[test]
    fn binary_round_trip_is_bit_identical() {
        let m = random_dense(7, 5, 42);
        let path = temp("m.bin", &binary_bytes(&m));
        let back = load_matrix(&path, MatrixFormat::F64Binary).unwrap();
        assert_eq!(back.to_dense(), m.to_dense());
        assert_eq!(binary_bytes(&back), binary_bytes(&m));
    }

    #[test]
    fn binary_rejects_corruption() {
        let m = random_dense(4, 3, 1);
        let good = binary_bytes(&m);

        let bad_magic = temp("m1.bin", &{
            let mut b = good.clone();
            b[0] ^= 1;
            b
        });
        let err = load_matrix(&bad_magic, MatrixFormat::F64Binary).unwrap_err();
        assert!(err.to_string().contains("magic"), "{err}");

        let truncated = temp("m2.bin", &good[..good.len() - 4]);
        let err = load_matrix(&truncated, MatrixFormat::F64Binary).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");

        let trailing = temp("m3.bin", &{
            let mut b = good.clone();
            b.push(0);
            b
        });
        assert!(load_matrix(&trailing, MatrixFormat::F64Binary).is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(
            infer_format(Path::new("x.mtx"), None).unwrap(),
            MatrixFormat::MatrixMarket
        );
        assert_eq!(infer_format(Path::new("x.csv"), None).unwrap(), MatrixFormat::Csv);
        assert_eq!(
            infer_format(Path::new("x.bin"), None).unwrap(),
            MatrixFormat::F64Binary
        );
        assert!(infer_format(Path::new("x.dat"), None).is_err());
        assert_eq!(
            infer_format(Path::new("x.dat"), Some(MatrixFormat::Csv)).unwrap(),
            MatrixFormat::Csv
        );
    }

    #[test]
    fn file_source_matches_in_memory_scan() {
        // identical entry order means identical accumulations downstream
        let m = random_dense(6, 4, 9);
        let mut csv = String::new();
        let d = m.to_dense();
        for i in 0..6 {
            let row: Vec<String> = (0..4).map(|j| format!("{:.17e}", d[(i, j)])).collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let path = temp("s.csv", csv.as_bytes());
        let mut src = FileSource::open(&path, MatrixFormat::Csv).unwrap();
        assert_eq!((src.rows(), src.cols()), (6, 4));
        let mut collected = Vec::new();
        src.scan(&mut |chunk| {
            if let RowChunk::Dense { row, values } = chunk {
                collected.push((row, values.to_vec()));
            }
        })
        .unwrap();
        assert_eq!(collected.len(), 6);
        for (i, vals) in &collected {
            for (j, v) in vals.iter().enumerate() {
                assert_eq!(*v, d[(*i, j)]);
            }
        }
    }

    #[test]
    fn mm_source_requires_sorted_entries() {
        let unsorted = temp(
            "u.mtx",
            b"%%MatrixMarket matrix coordinate real general\n3 3 2\n2 1 1.0\n1 1 2.0\n",
        );
        let err = FileSource::open(&unsorted, MatrixFormat::MatrixMarket).unwrap_err();
        assert!(err.to_string().contains("sorted"), "{err}");
    }

    #[test]
    fn mm_source_streams_rows_in_order() {
        let text = b"%%MatrixMarket matrix coordinate real general\n4 3 4\n1 1 1.0\n1 3 2.0\n3 2 -1.5\n4 1 0.5\n";
        let path = temp("s.mtx", text);
        let mut src = FileSource::open(&path, MatrixFormat::MatrixMarket).unwrap();
        assert_eq!((src.rows(), src.cols()), (4, 3));
        let mut rows = Vec::new();
        src.scan(&mut |chunk| {
            if let RowChunk::Entries { row, cols, values } = chunk {
                rows.push((row, cols.to_vec(), values.to_vec()));
            }
        })
        .unwrap();
        assert_eq!(
            rows,
            vec![
                (0, vec![0, 2], vec![1.0, 2.0]),
                (2, vec![1], vec![-1.5]),
                (3, vec![0], vec![0.5]),
            ]
        );
    }
}
