//! Finite-difference reference solutions for MSE evaluation.
//!
//! `u_t = L·u_xx − N·u·u_x + F(t)` is advanced with Crank–Nicolson on the
//! diffusion term and second-order Adams–Bashforth on advection (central
//! differences); forcing is integrated exactly at the half step. Dirichlet
//! values are pinned to the initial profile at the walls.
//!
//! # Cache format (version 1, little-endian)
//!
//! | field        | type               |
//! |--------------|--------------------|
//! | magic        | `b"PINNREF\0"`     |
//! | version      | `u32`              |
//! | key          | `u32` length + UTF-8 hex SHA-256 of the descriptor |
//! | descriptor   | `u32` length + UTF-8 JSON `{problem, config}` |
//! | nt, nx       | `u32`, `u32`       |
//! | times        | `nt × f64`         |
//! | xs           | `nx × f64`         |
//! | values       | `nt·nx × f64`, row-major by time |

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diffkit::ValueEval;
use crate::error::{Error, Result};
use crate::netlib::ModelHandle;
use crate::pdeset::{Domain, PdeProblem};

pub const CACHE_MAGIC: &[u8; 8] = b"PINNREF\0";
pub const CACHE_VERSION: u32 = 1;
/// Side length of the uniform MSE evaluation grid.
pub const EVAL_GRID: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Spatial nodes including both walls; odd so the midpoint is a node.
    pub nx: usize,
    pub dt: f64,
    /// Steps between saved time levels.
    pub save_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nx: 513,
            dt: 1e-4,
            save_every: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.nx.is_multiple_of(2) || self.nx > 1 << 20 {
            return Err(Error::Config(format!("nx must be odd and at least 3, got {}", self.nx)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.save_every == 0 {
            return Err(Error::Config("save_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    /// Row-major `[time][x]`.
    pub values: Vec<f64>,
    pub problem: Option<PdeProblem>,
    pub config: SolverConfig,
}

/// Pieces of a PDE instance the solver needs.
pub struct SolverInput<'a> {
    pub l: f64,
    pub n: f64,
    pub domain: Domain,
    pub initial: &'a dyn Fn(f64) -> f64,
    pub forcing: &'a dyn Fn(f64) -> f64,
}

/// Solves one problem of the family.
pub fn solve(problem: &PdeProblem, config: &SolverConfig) -> Result<ReferenceSolution> {
    problem.validate()?;
    let ic = |x: f64| problem.initial_condition(x);
    let f = |t: f64| problem.forcing(t);
    let mut sol = solve_with(
        &SolverInput {
            l: problem.l,
            n: problem.n,
            domain: problem.domain,
            initial: &ic,
            forcing: &f,
        },
        config,
    )?;
    sol.problem = Some(*problem);
    Ok(sol)
}

/// Solves with an arbitrary initial profile and forcing; walls are pinned to
/// the initial profile.
pub fn solve_with(input: &SolverInput<'_>, config: &SolverConfig) -> Result<ReferenceSolution> {
    config.validate()?;
    input.domain.validate()?;
    if !(input.l > 0.0) {
        return Err(Error::Config(format!("L must be positive, got {}", input.l)));
    }
    let Domain { t_max, x_lo, x_hi } = input.domain;
    let nx = config.nx;
    let dt = config.dt;
    let steps = (t_max / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_max).abs() > 1e-9 * t_max.max(1.0) {
        return Err(Error::Config(format!(
            "T = {t_max} is not a whole number of steps dt = {dt}"
        )));
    }
    let dx = (x_hi - x_lo) / (nx - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|j| x_lo + j as f64 * dx).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| (input.initial)(x)).collect();
    let (left, right) = (u[0], u[nx - 1]);

    let m = nx - 2;
    let r = input.l * dt / (dx * dx);
    // constant tridiagonal (−r/2, 1 + r, −r/2); forward-elimination factors
    let off = -0.5 * r;
    let mut diag = vec![1.0 + r; m];
    for i in 1..m {
        diag[i] -= off * off / diag[i - 1];
    }

    let advection = |u: &[f64], out: &mut [f64]| {
        for i in 1..nx - 1 {
            out[i] = -input.n * u[i] * (u[i + 1] - u[i - 1]) / (2.0 * dx);
        }
    };

    let mut adv_prev = vec![0.0; nx];
    let mut adv_now = vec![0.0; nx];
    let mut rhs = vec![0.0; m];
    let mut times = vec![0.0];
    let mut values = u.clone();
    for step in 0..steps {
        let t = step as f64 * dt;
        if input.n != 0.0 {
            let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let speed = input.n.abs() * umax;
            if !umax.is_finite() || speed * dt > dx {
                return Err(Error::Stability {
                    t,
                    dt,
                    limit: if speed > 0.0 { dx / speed } else { 0.0 },
                });
            }
        }
        advection(&u, &mut adv_now);
        let f_half = (input.forcing)(t + 0.5 * dt);
        for i in 1..nx - 1 {
            let explicit = if step == 0 {
                adv_now[i]
            } else {
                1.5 * adv_now[i] - 0.5 * adv_prev[i]
            };
            rhs[i - 1] = (1.0 - r) * u[i] + 0.5 * r * (u[i - 1] + u[i + 1]) + dt * (explicit + f_half);
        }
        rhs[0] += 0.5 * r * left;
        rhs[m - 1] += 0.5 * r * right;
        // Thomas: forward sweep then back substitution
        for i in 1..m {
            rhs[i] -= off / diag[i - 1] * rhs[i - 1];
        }
        u[m] = rhs[m - 1] / diag[m - 1];
        for i in (0..m - 1).rev() {
            u[i + 1] = (rhs[i] - off * u[i + 2]) / diag[i];
        }
        u[0] = left;
        u[nx - 1] = right;
        std::mem::swap(&mut adv_prev, &mut adv_now);
        if (step + 1) % config.save_every == 0 || step + 1 == steps {
            times.push((step + 1) as f64 * dt);
            values.extend_from_slice(&u);
        }
    }
    Ok(ReferenceSolution {
        times,
        xs,
        values,
        problem: None,
        config: *config,
    })
}

impl ReferenceSolution {
    pub fn nt(&self) -> usize {
        self.times.len()
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn at(&self, it: usize, ix: usize) -> f64 {
        self.values[it * self.nx() + ix]
    }

    /// Saved profile at time index `it`.
    pub fn row(&self, it: usize) -> &[f64] {
        &self.values[it * self.nx()..(it + 1) * self.nx()]
    }

    /// Bilinear interpolation on the saved grid.
    pub fn sample(&self, t: f64, x: f64) -> Result<f64> {
        let (it, ft) = locate(&self.times, t)
            .ok_or_else(|| Error::Structural(format!("t = {t} outside the solution's time range")))?;
        let (ix, fx) = locate(&self.xs, x)
            .ok_or_else(|| Error::Structural(format!("x = {x} outside the solution's space range")))?;
        let v00 = self.at(it, ix);
        let v01 = self.at(it, ix + 1);
        let v10 = self.at(it + 1, ix);
        let v11 = self.at(it + 1, ix + 1);
        Ok((1.0 - ft) * ((1.0 - fx) * v00 + fx * v01) + ft * ((1.0 - fx) * v10 + fx * v11))
    }

    pub fn domain(&self) -> Domain {
        Domain {
            t_max: *self.times.last().expect("solution has a time grid"),
            x_lo: self.xs[0],
            x_hi: *self.xs.last().expect("solution has a space grid"),
        }
    }
}

/// Lower node index and fractional offset of `v` in a sorted grid; the last
/// node maps to the final interval with offset 1.
fn locate(grid: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = grid.len();
    if n < 2 || !(v >= grid[0] && v <= grid[n - 1]) {
        return None;
    }
    let i = match grid.binary_search_by(|g| g.partial_cmp(&v).expect("finite grid")) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    };
    let f = (v - grid[i]) / (grid[i + 1] - grid[i]);
    Some((i, f))
}

/// Fixed evaluation points with their interpolated reference values.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    pub points: Vec<(f64, f64)>,
    pub reference: Vec<f64>,
}

impl EvalGrid {
    /// `EVAL_GRID × EVAL_GRID` uniform grid over the solution's domain.
    pub fn new(solution: &ReferenceSolution) -> Self {
        let d = solution.domain();
        let k = EVAL_GRID - 1;
        let mut points = Vec::with_capacity(EVAL_GRID * EVAL_GRID);
        for i in 0..EVAL_GRID {
            let t = d.t_max * i as f64 / k as f64;
            for j in 0..EVAL_GRID {
                let x = d.x_lo + (d.x_hi - d.x_lo) * j as f64 / k as f64;
                points.push((t, x));
            }
        }
        let reference = points
            .iter()
            .map(|&(t, x)| solution.sample(t, x).expect("grid lies in the domain"))
            .collect();
        EvalGrid { points, reference }
    }

    pub fn mse_of(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let sum: f64 = self
            .points
            .iter()
            .zip(&self.reference)
            .map(|(&(t, x), r)| (f(t, x) - r).powi(2))
            .sum();
        sum / self.points.len() as f64
    }

    pub fn mse(&self, model: &ModelHandle) -> f64 {
        self.mse_of(|t, x| model.spec.forward(&mut ValueEval, model.params.values(), t, x))
    }
}

/// Mean squared error of `model` against `solution` over the evaluation grid.
pub fn mse(model: &ModelHandle, solution: &ReferenceSolution) -> f64 {
    EvalGrid::new(solution).mse(model)
}

#[derive(Serialize, Deserialize)]
struct Descriptor {
    problem: PdeProblem,
    config: SolverConfig,
}

fn descriptor_json(problem: &PdeProblem, config: &SolverConfig) -> String {
    serde_json::to_string(&Descriptor {
        problem: *problem,
        config: *config,
    })
    .expect("descriptor serialises")
}

/// Hex SHA-256 of the `(problem, config)` descriptor.
pub fn cache_key(problem: &PdeProblem, config: &SolverConfig) -> String {
    hex::encode(Sha256::digest(descriptor_json(problem, config).as_bytes()))
}

pub fn encode(solution: &ReferenceSolution) -> Result<Vec<u8>> {
    let problem = solution
        .problem
        .ok_or_else(|| Error::Unsupported("only family problems can be cached".into()))?;
    let (nt, nx) = (solution.nt(), solution.nx());
    if nt < 2 || nx < 2 || solution.values.len() != nt * nx {
        return Err(Error::Structural(format!(
            "cannot cache a {nt}×{nx} grid with {} values",
            solution.values.len()
        )));
    }
    let desc = descriptor_json(&problem, &solution.config);
    let key = cache_key(&problem, &solution.config);
    let mut out = Vec::with_capacity(64 + desc.len() + 8 * (solution.values.len() + solution.nt() + solution.nx()));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    for s in [&key, &desc] {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    }
    out.extend_from_slice(&(solution.nt() as u32).to_le_bytes());
    out.extend_from_slice(&(solution.nx() as u32).to_le_bytes());
    for v in solution.times.iter().chain(&solution.xs).chain(&solution.values) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Parse(format!(
                "cache record truncated: wanted {n} bytes, {} left",
                self.buf.len()
            )));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self) -> Result<&'a str> {
        let n = self.u32()? as usize;
        std::str::from_utf8(self.take(n)?).map_err(|e| Error::Parse(format!("cache string: {e}")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| Error::Parse("cache array length overflows".into()))?;
        let raw = self.take(bytes)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

/// Parses and validates a cache record.
pub fn decode(bytes: &[u8]) -> Result<ReferenceSolution> {
    let mut r = Reader { buf: bytes };
    if r.take(8)? != CACHE_MAGIC {
        return Err(Error::Parse("not a reference-solution cache record".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Parse(format!("unsupported cache version {version}")));
    }
    let key = r.string()?.to_string();
    let desc_text = r.string()?;
    let desc: Descriptor =
        serde_json::from_str(desc_text).map_err(|e| Error::Parse(format!("cache descriptor: {e}")))?;
    desc.config.validate()?;
    if desc_text != descriptor_json(&desc.problem, &desc.config) {
        return Err(Error::Parse("cache descriptor is not in canonical form".into()));
    }
    if key != cache_key(&desc.problem, &desc.config) {
        return Err(Error::Parse("cache key does not match its descriptor".into()));
    }
    let nt = r.u32()? as usize;
    let nx = r.u32()? as usize;
    if nt < 2 || nx < 2 {
        return Err(Error::Parse(format!("degenerate cached grid {nt}×{nx}")));
    }
    let cells = nt
        .checked_mul(nx)
        .ok_or_else(|| Error::Parse("cached grid size overflows".into()))?;
    let expected = cells
        .checked_add(nt + nx)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Parse("cached grid size overflows".into()))?;
    if r.buf.len() != expected {
        return Err(Error::Parse(format!(
            "cache payload is {} bytes, expected {expected}",
            r.buf.len()
        )));
    }
    let times = r.f64s(nt)?;
    let xs = r.f64s(nx)?;
    let values = r.f64s(cells)?;
    let increasing = |g: &[f64]| g.windows(2).all(|w| w[0] < w[1]) && g.iter().all(|v| v.is_finite());
    if !increasing(&times) || !increasing(&xs) {
        return Err(Error::Parse(
            "cached grids must be finite and strictly increasing".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("cached solution contains non-finite values".into()));
    }
    Ok(ReferenceSolution {
        times,
        xs,
        values,
        problem: Some(desc.problem),
        config: desc.config,
    })
}

pub fn cache_path(dir: &Path, problem: &PdeProblem, config: &SolverConfig) -> PathBuf {
    dir.join(format!("{}.ref", cache_key(problem, config)))
}

/// Loads the cached solution for `(problem, config)` or solves and stores it.
///
/// Writers go through a temporary file and an atomic rename, so concurrent
/// readers only ever see complete records.
pub fn load_or_solve(problem: &PdeProblem, config: &SolverConfig, dir: &Path) -> Result<ReferenceSolution> {
    let path = cache_path(dir, problem, config);
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok(sol) = decode(&bytes) {
            if sol.problem.as_ref() == Some(problem) && sol.config == *config {
                return Ok(sol);
            }
        }
    }
    let sol = solve(problem, config)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    std::io::Write::write_all(&mut tmp, &encode(&sol)?).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
    Ok(sol)
}
