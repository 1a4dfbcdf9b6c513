//! The discretized half-strip `[0, ℓ) × [0, L]`, `ℓ = π/ε`, its boundary data
//! and the ghost-value rules shared by every stencil in the crate.
//!
//! Nodes are `x_i = iη` for `0 ≤ i < m` and `y_j = jζ` for `0 ≤ j ≤ n`, stored
//! row-major with `i` fastest. Values outside that range are ghosts:
//!
//! * `i = -1` and `i = m` come from shift-periodicity, `θ(x + ℓ, y) = θ(x, y) + π`;
//! * `j = n + 1` continues the far-field roll `πi/m + √(1-ε²)(L+ζ) + δ`;
//! * `j = -1` reflects across the midline, see [`Reflection`].

use std::f64::consts::PI;

use crate::error::{invalid, RcnError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGrid {
    eps: f64,
    height: f64,
    m: usize,
    n: usize,
    eta: f64,
    zeta: f64,
}

impl StripGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(eps: f64, height: f64, m: usize, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return invalid(format!("eps must lie in (0, 1], got {eps}"));
        }
        if !(height > 0.0 && height.is_finite()) {
            return invalid(format!("strip height must be positive, got {height}"));
        }
        if m < Self::MIN_NODES || n < Self::MIN_NODES {
            return invalid(format!("grid needs m, n >= {}, got m = {m}, n = {n}", Self::MIN_NODES));
        }
        Ok(Self {
            eps,
            height,
            m,
            n,
            eta: PI / (eps * m as f64),
            zeta: height / n as f64,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Strip height `L`.
    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// x-spacing `η = ℓ/m`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// y-spacing `ζ = L/n`.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// x-period `ℓ = π/ε`.
    pub fn period(&self) -> f64 {
        PI / self.eps
    }

    /// Far-field slope `√(1-ε²)` of the roll pattern in y.
    pub fn slope(&self) -> f64 {
        (1.0 - self.eps * self.eps).max(0.0).sqrt()
    }

    pub fn x(&self, i: isize) -> f64 {
        i as f64 * self.eta
    }

    pub fn y(&self, j: isize) -> f64 {
        j as f64 * self.zeta
    }

    /// Number of stored nodes, `m (n + 1)`.
    pub fn len(&self) -> usize {
        self.m * (self.n + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.m && j <= self.n);
        j * self.m + i
    }

    /// Roll pattern `εx + √(1-ε²)y + δ` at node `(i, j)`; `εx_i = πi/m` exactly.
    #[inline]
    pub fn roll(&self, i: isize, j: isize, delta: f64) -> f64 {
        PI * i as f64 / self.m as f64 + self.slope() * self.y(j) + delta
    }
}

/// Dirichlet node count `k` (so `a = k/m`) and the asymptotic phase shift `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConfig {
    pub k: usize,
    pub delta: f64,
}

impl BoundaryConfig {
    pub fn new(k: usize, delta: f64) -> Self {
        Self { k, delta }
    }

    /// Dirichlet fraction `a = k/m`.
    pub fn fraction(&self, grid: &StripGrid) -> f64 {
        self.k as f64 / grid.m() as f64
    }
}

/// Rule for the `j = -1` ghost row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reflection {
    /// Even reflection `θ_{i,-1} = θ_{i,1}` on Neumann nodes and odd
    /// reflection about the boundary value, `θ_{i,-1} = 2θ_{i,0} - θ_{i,1}`,
    /// on Dirichlet nodes.
    #[default]
    Mixed,
    /// Even reflection on every node.
    Even,
}

/// How ghost values are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhostMode {
    #[default]
    ShiftPeriodic,
    /// Every ghost value is zero. Only useful for free evaluation of
    /// stencils on raw arrays.
    Zero,
}

/// Nodal phase values `θ_{i,j}` bound to a grid and boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    grid: StripGrid,
    config: BoundaryConfig,
    reflection: Reflection,
    ghosts: GhostMode,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn zeros(grid: StripGrid, config: BoundaryConfig) -> Result<Self> {
        Self::from_values(grid, config, vec![0.0; grid.len()])
    }

    pub fn from_values(grid: StripGrid, config: BoundaryConfig, values: Vec<f64>) -> Result<Self> {
        if config.k > grid.m() {
            return invalid(format!("k = {} exceeds m = {}", config.k, grid.m()));
        }
        if values.len() != grid.len() {
            return invalid(format!("expected {} nodal values, got {}", grid.len(), values.len()));
        }
        if !config.delta.is_finite() {
            return invalid("delta must be finite");
        }
        Ok(Self {
            grid,
            config,
            reflection: Reflection::default(),
            ghosts: GhostMode::default(),
            values,
        })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: StripGrid, config: BoundaryConfig, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..=grid.n() {
            let y = grid.y(j as isize);
            for i in 0..grid.m() {
                values.push(f(grid.x(i as isize), y));
            }
        }
        Self::from_values(grid, config, values)
    }

    pub fn with_reflection(mut self, reflection: Reflection) -> Self {
        self.reflection = reflection;
        self
    }

    pub fn with_ghosts(mut self, ghosts: GhostMode) -> Self {
        self.ghosts = ghosts;
        self
    }

    pub fn grid(&self) -> &StripGrid {
        &self.grid
    }

    pub fn config(&self) -> BoundaryConfig {
        self.config
    }

    pub fn reflection(&self) -> Reflection {
        self.reflection
    }

    pub fn ghosts(&self) -> GhostMode {
        self.ghosts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn delta(&self) -> f64 {
        self.config.delta
    }

    #[inline]
    pub fn is_dirichlet(&self, i: usize) -> bool {
        i < self.config.k
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(p) => Err(RcnError::NonFinite {
                i: p % self.grid.m(),
                j: p / self.grid.m(),
            }),
        }
    }

    /// Value at `(i, j)` for `i ∈ [-1, m]`, `j ∈ [-1, n+1]`; stored values for
    /// in-range indices and ghost values otherwise.
    pub fn ghost_value(&self, i: isize, j: isize) -> Result<f64> {
        let (m, n) = (self.grid.m() as isize, self.grid.n() as isize);
        if i < -1 || i > m || j < -1 || j > n + 1 {
            return Err(RcnError::IndexOutOfRange { i, j });
        }
        if (0..m).contains(&i) && (0..=n).contains(&j) {
            return Ok(self.get(i as usize, j as usize));
        }
        if self.ghosts == GhostMode::Zero {
            return Ok(0.0);
        }
        if j == n + 1 {
            return Ok(self.grid.roll(i, j, self.config.delta));
        }
        if j == -1 {
            let (iw, shift) = wrap(i, m);
            let v0 = self.get(iw, 0);
            let v1 = self.get(iw, 1);
            return Ok(self.reflect(iw, v0, v1) + shift);
        }
        let (iw, shift) = wrap(i, m);
        Ok(self.get(iw, j as usize) + shift)
    }

    #[inline]
    fn reflect(&self, i: usize, v0: f64, v1: f64) -> f64 {
        match self.reflection {
            Reflection::Mixed if self.is_dirichlet(i) => 2.0 * v0 - v1,
            _ => v1,
        }
    }

    /// Fills `buf` with the ghost-extended array of shape `(m+2) × (n+3)`,
    /// index `(i+1) + (j+1)(m+2)`.
    pub fn fill_extended(&self, buf: &mut Vec<f64>) {
        let (m, n) = (self.grid.m(), self.grid.n());
        let w = m + 2;
        buf.clear();
        buf.resize(w * (n + 3), 0.0);
        for j in 0..=n {
            let row = &self.values[j * m..(j + 1) * m];
            let dst = &mut buf[(j + 1) * w..(j + 2) * w];
            dst[1..=m].copy_from_slice(row);
            if self.ghosts == GhostMode::ShiftPeriodic {
                dst[0] = row[m - 1] - PI;
                dst[m + 1] = row[0] + PI;
            }
        }
        if self.ghosts == GhostMode::Zero {
            return;
        }
        for ie in 0..w {
            let i = ie as isize - 1;
            let (iw, shift) = wrap(i, m as isize);
            let v0 = self.values[iw];
            let v1 = self.values[m + iw];
            buf[ie] = self.reflect(iw, v0, v1) + shift;
            buf[(n + 2) * w + ie] = self.grid.roll(i, n as isize + 1, self.config.delta);
        }
    }

    /// Rewrites the `j = n` row from `δ`.
    pub fn set_delta(&mut self, delta: f64) {
        self.config.delta = delta;
        let (m, n) = (self.grid.m(), self.grid.n());
        for i in 0..m {
            self.values[n * m + i] = self.grid.roll(i as isize, n as isize, delta);
        }
    }

    /// Changes the Dirichlet node count without touching the values.
    pub fn set_dirichlet_count(&mut self, k: usize) -> Result<()> {
        if k > self.grid.m() {
            return invalid(format!("k = {k} exceeds m = {}", self.grid.m()));
        }
        self.config.k = k;
        Ok(())
    }

    /// Imposes the discrete boundary conditions: `θ_{i,0} = 0` for `i < k`,
    /// `θ_{i,0} = θ_{i,1}` for `i ≥ k` and the roll row at `j = n`.
    pub fn project_onto_bcs(&mut self) {
        let m = self.grid.m();
        for i in 0..m {
            self.values[i] = if self.is_dirichlet(i) { 0.0 } else { self.values[m + i] };
        }
        self.set_delta(self.config.delta);
    }

    /// True when every discrete boundary condition holds exactly.
    pub fn satisfies_bcs(&self) -> bool {
        let (m, n) = (self.grid.m(), self.grid.n());
        (0..m).all(|i| {
            let bottom = if self.is_dirichlet(i) {
                self.values[i] == 0.0
            } else {
                self.values[i] == self.values[m + i]
            };
            bottom && self.values[n * m + i] == self.grid.roll(i as isize, n as isize, self.config.delta)
        })
    }

    /// Number of free coordinates seen by the optimizer: rows `1..n` plus `δ`.
    pub fn free_len(&self) -> usize {
        self.grid.m() * (self.grid.n() - 1) + 1
    }

    /// Copies rows `1..n` and then `δ` into `out`.
    pub fn pack(&self, out: &mut [f64]) {
        let (m, n) = (self.grid.m(), self.grid.n());
        out[..m * (n - 1)].copy_from_slice(&self.values[m..n * m]);
        out[m * (n - 1)] = self.config.delta;
    }

    /// Inverse of [`pack`](Self::pack); re-imposes the boundary ties.
    pub fn unpack(&mut self, x: &[f64]) {
        let (m, n) = (self.grid.m(), self.grid.n());
        self.values[m..n * m].copy_from_slice(&x[..m * (n - 1)]);
        self.config.delta = x[m * (n - 1)];
        self.project_onto_bcs();
    }

    /// Sets the free coordinate at row `1 ≤ j < n`, keeping the Neumann tie.
    pub fn set_free(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j >= 1 && j < self.grid.n());
        self.set(i, j, v);
        if j == 1 && !self.is_dirichlet(i) {
            self.set(i, 0, v);
        }
    }
}

#[inline]
fn wrap(i: isize, m: isize) -> (usize, f64) {
    if i < 0 {
        ((i + m) as usize, -PI)
    } else if i >= m {
        ((i - m) as usize, PI)
    } else {
        (i as usize, 0.0)
    }
}

/// Read-only view of a ghost-extended array filled by
/// [`PhaseField::fill_extended`].
#[derive(Clone, Copy)]
pub(crate) struct Extended<'a> {
    pub data: &'a [f64],
    pub width: usize,
}

impl<'a> Extended<'a> {
    pub fn new(data: &'a [f64], grid: &StripGrid) -> Self {
        Self {
            data,
            width: grid.m() + 2,
        }
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[(i + 1) as usize + (j + 1) as usize * self.width]
    }
}

/// Standard 5-point Laplacian with spacings `η`, `ζ` at a stored node.
pub fn laplacian_stencil(field: &PhaseField, i: usize, j: usize) -> Result<f64> {
    let g = field.grid();
    if i >= g.m() || j > g.n() {
        return Err(RcnError::IndexOutOfRange {
            i: i as isize,
            j: j as isize,
        });
    }
    let (i, j) = (i as isize, j as isize);
    let c = field.ghost_value(i, j)?;
    let dxx = (field.ghost_value(i + 1, j)? - 2.0 * c + field.ghost_value(i - 1, j)?) / (g.eta() * g.eta());
    let dyy = (field.ghost_value(i, j + 1)? - 2.0 * c + field.ghost_value(i, j - 1)?) / (g.zeta() * g.zeta());
    Ok(dxx + dyy)
}
