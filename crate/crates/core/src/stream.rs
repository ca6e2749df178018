//! Streaming access to a matrix: a source can be scanned sequentially, one
//! pass at a time. The sketch builder reads its input exactly twice, so any
//! source that can replay two sequential scans supports streaming
//! construction without materializing the matrix.

use crate::error::Result;
use crate::matrix::{DataMatrix, Storage};

/// One visited piece of a matrix during a scan. Entry order within a scan is
/// part of the source's contract: replayed scans must yield entries in the
/// same order so accumulations are bit-reproducible.
pub enum RowChunk<'a> {
    /// A full dense row.
    Dense { row: usize, values: &'a [f64] },
    /// Explicit entries of one row (sparse storage or partial rows).
    Entries {
        row: usize,
        cols: &'a [usize],
        values: &'a [f64],
    },
}

pub trait MatrixSource {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// One sequential pass over the data.
    fn scan(&mut self, visit: &mut dyn FnMut(RowChunk<'_>)) -> Result<()>;
}

/// Adapter presenting an in-memory matrix as a source. Dense rows are visited
/// row-major; sparse rows in CSR order.
pub struct InMemorySource<'a> {
    matrix: &'a DataMatrix,
    row_buf: Vec<f64>,
}

impl<'a> InMemorySource<'a> {
    pub fn new(matrix: &'a DataMatrix) -> Self {
        InMemorySource {
            matrix,
            row_buf: vec![0.0; matrix.cols()],
        }
    }
}

impl MatrixSource for InMemorySource<'_> {
    fn rows(&self) -> usize {
        self.matrix.rows()
    }

    fn cols(&self) -> usize {
        self.matrix.cols()
    }

    fn scan(&mut self, visit: &mut dyn FnMut(RowChunk<'_>)) -> Result<()> {
        match self.matrix.storage() {
            Storage::Dense(m) => {
                let d = self.matrix.cols();
                for i in 0..self.matrix.rows() {
                    for c in 0..d {
                        self.row_buf[c] = m[(i, c)];
                    }
                    visit(RowChunk::Dense {
                        row: i,
                        values: &self.row_buf,
                    });
                }
            }
            Storage::Sparse(s) => {
                for i in 0..self.matrix.rows() {
                    let (lo, hi) = (s.row_offsets[i], s.row_offsets[i + 1]);
                    visit(RowChunk::Entries {
                        row: i,
                        cols: &s.col_indices[lo..hi],
                        values: &s.values[lo..hi],
                    });
                }
            }
        }
        Ok(())
    }
}

/// Wrapper that counts completed passes, used to assert the two-pass
/// streaming contract.
pub struct CountingSource<S> {
    inner: S,
    passes: usize,
}

impl<S: MatrixSource> CountingSource<S> {
    pub fn new(inner: S) -> Self {
        CountingSource { inner, passes: 0 }
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: MatrixSource> MatrixSource for CountingSource<S> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn scan(&mut self, visit: &mut dyn FnMut(RowChunk<'_>)) -> Result<()> {
        self.passes += 1;
        self.inner.scan(visit)
    }
}
