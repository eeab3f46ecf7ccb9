//! Covariance storage backends.
//!
//! `Dense` keeps the full `2M × 2M` matrix. `Sparse` keeps, for every mode,
//! only the 2×2 blocks it shares with correlated modes; a comb state has at
//! most six such partners per mode, so memory and work scale with `M`.

use nalgebra::DMatrix;

/// `block[α][β] = Cov(x_i^α, x_j^β)` with α, β ∈ {0 = Q, 1 = P}.
pub(crate) type Block = [[f64; 2]; 2];

const ZERO_BLOCK: Block = [[0.0; 2]; 2];

fn transpose(b: &Block) -> Block {
    [[b[0][0], b[1][0]], [b[0][1], b[1][1]]]
}

#[derive(Clone, Debug)]
pub(crate) struct BlockSparse {
    rows: Vec<Vec<(usize, Block)>>,
}

impl BlockSparse {
    pub(crate) fn vacuum(modes: usize, v0: f64) -> Self {
        let rows = (0..modes)
            .map(|i| vec![(i, [[v0, 0.0], [0.0, v0]])])
            .collect();
        Self { rows }
    }

    pub(crate) fn block(&self, i: usize, j: usize) -> Block {
        self.rows[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, b)| *b)
            .unwrap_or(ZERO_BLOCK)
    }

    fn upsert_one(&mut self, i: usize, j: usize, b: Block) {
        let row = &mut self.rows[i];
        match row.iter_mut().find(|(k, _)| *k == j) {
            Some(slot) => slot.1 = b,
            None => row.push((j, b)),
        }
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, b: Block) {
        self.upsert_one(i, j, b);
        if i != j {
            self.upsert_one(j, i, transpose(&b));
        }
    }

    pub(crate) fn stored_blocks(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub(crate) fn partners(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().map(|(k, _)| *k)
    }

    fn apply(&mut self, modes: &[usize], s: &DMatrix<f64>) {
        let k = modes.len();
        let local = |t: usize, alpha: usize| alpha * k + t;

        let mut others: Vec<usize> = modes
            .iter()
            .flat_map(|&m| self.partners(m))
            .filter(|j| !modes.contains(j))
            .collect();
        others.sort_unstable();
        others.dedup();

        for &j in &others {
            let mut x = DMatrix::zeros(2 * k, 2);
            for (t, &m) in modes.iter().enumerate() {
                let b = self.block(m, j);
                for alpha in 0..2 {
                    for beta in 0..2 {
                        x[(local(t, alpha), beta)] = b[alpha][beta];
                    }
                }
            }
            let y = s * x;
            for (t, &m) in modes.iter().enumerate() {
                let b = [
                    [y[(local(t, 0), 0)], y[(local(t, 0), 1)]],
                    [y[(local(t, 1), 0)], y[(local(t, 1), 1)]],
                ];
                self.set(m, j, b);
            }
        }

        let mut a = DMatrix::zeros(2 * k, 2 * k);
        for (t, &m) in modes.iter().enumerate() {
            for (u, &n) in modes.iter().enumerate() {
                let b = self.block(m, n);
                for alpha in 0..2 {
                    for beta in 0..2 {
                        a[(local(t, alpha), local(u, beta))] = b[alpha][beta];
                    }
                }
            }
        }
        let a = s * a * s.transpose();
        let a = (&a + a.transpose()) * 0.5;
        for (t, &m) in modes.iter().enumerate() {
            for (u, &n) in modes.iter().enumerate().skip(t) {
                let b = [
                    [a[(local(t, 0), local(u, 0))], a[(local(t, 0), local(u, 1))]],
                    [a[(local(t, 1), local(u, 0))], a[(local(t, 1), local(u, 1))]],
                ];
                self.set(m, n, b);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Storage {
    Dense(DMatrix<f64>),
    Sparse(BlockSparse),
}

impl Storage {
    pub(crate) fn dense_vacuum(modes: usize, v0: f64) -> Self {
        Storage::Dense(DMatrix::identity(2 * modes, 2 * modes) * v0)
    }

    pub(crate) fn sparse_vacuum(modes: usize, v0: f64) -> Self {
        Storage::Sparse(BlockSparse::vacuum(modes, v0))
    }

    pub(crate) fn block(&self, modes: usize, i: usize, j: usize) -> Block {
        match self {
            Storage::Dense(cov) => [
                [cov[(i, j)], cov[(i, modes + j)]],
                [cov[(modes + i, j)], cov[(modes + i, modes + j)]],
            ],
            Storage::Sparse(bs) => bs.block(i, j),
        }
    }

    /// `cov ← S cov Sᵀ` with `S` acting on the quadratures of `modes`.
    pub(crate) fn apply(&mut self, total: usize, modes: &[usize], s: &DMatrix<f64>) {
        match self {
            Storage::Dense(cov) => apply_dense(cov, total, modes, s),
            Storage::Sparse(bs) => bs.apply(modes, s),
        }
    }

    pub(crate) fn to_dense(&self, total: usize) -> DMatrix<f64> {
        match self {
            Storage::Dense(cov) => cov.clone(),
            Storage::Sparse(bs) => {
                let mut cov = DMatrix::zeros(2 * total, 2 * total);
                for i in 0..total {
                    for &(j, b) in &bs.rows[i] {
                        cov[(i, j)] = b[0][0];
                        cov[(i, total + j)] = b[0][1];
                        cov[(total + i, j)] = b[1][0];
                        cov[(total + i, total + j)] = b[1][1];
                    }
                }
                cov
            }
        }
    }

    /// Bytes held by the covariance data.
    pub(crate) fn bytes(&self) -> usize {
        match self {
            Storage::Dense(cov) => cov.len() * std::mem::size_of::<f64>(),
            Storage::Sparse(bs) => {
                bs.stored_blocks() * std::mem::size_of::<(usize, Block)>()
                    + bs.rows.len() * std::mem::size_of::<Vec<(usize, Block)>>()
            }
        }
    }

    pub(crate) fn is_dense(&self) -> bool {
        matches!(self, Storage::Dense(_))
    }
}

fn apply_dense(cov: &mut DMatrix<f64>, total: usize, modes: &[usize], s: &DMatrix<f64>) {
    let k = modes.len();
    let dim = 2 * total;
    let global: Vec<usize> = modes
        .iter()
        .copied()
        .chain(modes.iter().map(|&m| total + m))
        .collect();

    let mut rows = DMatrix::zeros(2 * k, dim);
    for (a, &ga) in global.iter().enumerate() {
        rows.row_mut(a).copy_from(&cov.row(ga));
    }
    let rows = s * rows;

    let mut active = DMatrix::zeros(2 * k, 2 * k);
    for (b, &gb) in global.iter().enumerate() {
        active.column_mut(b).copy_from(&rows.column(gb));
    }
    let active = &active * s.transpose();
    let active = (&active + active.transpose()) * 0.5;

    for col in 0..dim {
        if global.contains(&col) {
            continue;
        }
        for (a, &ga) in global.iter().enumerate() {
            let v = rows[(a, col)];
            cov[(ga, col)] = v;
            cov[(col, ga)] = v;
        }
    }
    for (a, &ga) in global.iter().enumerate() {
        for (b, &gb) in global.iter().enumerate() {
            cov[(ga, gb)] = active[(a, b)];
        }
    }
}
