//! Samples of the random monochromatic plane wave in its Bessel-Fourier form
//!
//! ```text
//! f(r, θ) = X0 J0(r) - √2 Σ_{n=1..N} J_n(r) (X_n cos nθ + Y_n sin nθ)
//! ```
//!
//! with i.i.d. standard Gaussian coefficients, truncated at an order `N`
//! chosen so the discarded variance is below a tolerance on the disk of
//! interest.
//!
//! Seeds: sample `i` of an ensemble with master seed `s` uses
//! [`sample_seed`]`(s, i)`, and [`draw`] seeds a ChaCha8 stream with it. The
//! stream yields `X0`, then `X1, Y1, X2, Y2, ...`, so a longer truncation
//! shares its leading coefficients with a shorter one.

use std::f64::consts::SQRT_2;
use std::io::{self, BufRead, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special_functions::{self, bessel_j_fill, check_domain, MAX_ARGUMENT, MAX_ORDER};

/// Default discarded-variance tolerance for truncating the expansion.
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-12;

/// Radial step of the scan in [`truncation_order`].
const TRUNCATION_SCAN_STEP: f64 = 0.1;

/// A point of the plane in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            x: radius * c,
            y: radius * s,
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// Smallest order `N >= ceil(r_max)` such that `2 Σ_{n>N} J_n(r)^2 <= eps`
/// for every `r` of a `0.1`-spaced grid on `[0, r_max]` (plus `r_max` itself).
pub fn truncation_order(r_max: f64, eps: f64) -> Result<usize> {
    if !(r_max > 0.0) {
        return Err(invalid(format!("r_max must be > 0, got {r_max}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    check_domain(r_max, 0)?;

    let mut row = vec![0.0; MAX_ORDER + 1];
    let steps = (r_max / TRUNCATION_SCAN_STEP).floor() as usize;
    let radii = (0..=steps)
        .map(|i| i as f64 * TRUNCATION_SCAN_STEP)
        .chain(std::iter::once(r_max));

    let mut order = (r_max.ceil() as usize).max(1);
    for r in radii {
        bessel_j_fill(r, &mut row)?;
        // discarded variance above n is the tail sum over orders > n
        let mut tail = 0.0;
        let mut needed = None;
        for n in (0..=MAX_ORDER).rev() {
            if tail > eps {
                needed = Some(n + 1);
                break;
            }
            tail += 2.0 * row[n] * row[n];
        }
        match needed {
            Some(n) if n <= MAX_ORDER => order = order.max(n),
            Some(_) => {
                return Err(Error::OutOfValidatedDomain {
                    x: r,
                    n_max: MAX_ORDER + 1,
                    max_x: MAX_ARGUMENT,
                    max_n: MAX_ORDER,
                })
            }
            None => {}
        }
    }
    Ok(order)
}

/// Coefficients `X0`, `(X_n, Y_n)_{n=1..N}` of one field sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveCoefficients {
    x0: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    seed: u64,
}

impl WaveCoefficients {
    pub fn new(x0: f64, xs: Vec<f64>, ys: Vec<f64>, seed: u64) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid(format!(
                "xs and ys must have equal length ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(invalid("truncation order must be >= 1"));
        }
        Ok(Self { x0, xs, ys, seed })
    }

    /// The radial field `x0 J0(r)`, all angular coefficients zero.
    pub fn single_mode(x0: f64, n_trunc: usize) -> Result<Self> {
        Self::new(x0, vec![0.0; n_trunc], vec![0.0; n_trunc], 0)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// `X_1 .. X_N`.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// `Y_1 .. Y_N`.
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn n_trunc(&self) -> usize {
        self.xs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Conditions the sample on `X0 = x0` by substitution.
    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// Coefficients of `-f`.
    pub fn negated(mut self) -> Self {
        self.x0 = -self.x0;
        self.xs.iter_mut().for_each(|v| *v = -*v);
        self.ys.iter_mut().for_each(|v| *v = -*v);
        self
    }

    /// Coefficients of `g(r, θ) = f(r, θ + phi)`.
    pub fn rotated(&self, phi: f64) -> Self {
        let (xs, ys) = self
            .xs
            .iter()
            .zip(&self.ys)
            .enumerate()
            .map(|(i, (&x, &y))| {
                let (s, c) = ((i + 1) as f64 * phi).sin_cos();
                (x * c + y * s, y * c - x * s)
            })
            .unzip();
        Self {
            x0: self.x0,
            xs,
            ys,
            seed: self.seed,
        }
    }

    /// `Σ_{n>=1} J_n (X_n cos nθ + Y_n sin nθ)` for a Bessel row at the point's radius.
    pub(crate) fn angular_sum(&self, row: &[f64], angle: f64) -> f64 {
        let (s1, c1) = angle.sin_cos();
        let (mut c, mut s) = (c1, s1);
        let mut acc = 0.0;
        for ((&x, &y), &j) in self.xs.iter().zip(&self.ys).zip(&row[1..]) {
            acc += j * (x * c + y * s);
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
        }
        acc
    }

    pub(crate) fn value_with_row(&self, row: &[f64], angle: f64) -> f64 {
        self.x0 * row[0] - SQRT_2 * self.angular_sum(row, angle)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` in the ensemble with seed `master`:
/// `splitmix64(splitmix64(master) ^ (index * 0x9E3779B97F4A7C15))`, a
/// bijection in `index` for every `master`.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Draws i.i.d. standard Gaussian coefficients from the ChaCha8 stream keyed by `seed`.
pub fn draw(seed: u64, n_trunc: usize) -> Result<WaveCoefficients> {
    if n_trunc < 1 {
        return Err(invalid("truncation order must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: f64 = StandardNormal.sample(&mut rng);
    let mut xs = Vec::with_capacity(n_trunc);
    let mut ys = Vec::with_capacity(n_trunc);
    for _ in 0..n_trunc {
        xs.push(StandardNormal.sample(&mut rng));
        ys.push(StandardNormal.sample(&mut rng));
    }
    Ok(WaveCoefficients { x0, xs, ys, seed })
}

/// Field value at polar coordinates `(radius, angle)` about the origin.
pub fn eval(coeffs: &WaveCoefficients, radius: f64, angle: f64) -> Result<f64> {
    let mut row = vec![0.0; coeffs.n_trunc() + 1];
    bessel_j_fill(radius, &mut row)?;
    Ok(coeffs.value_with_row(&row, angle))
}

/// Field value at a Cartesian point.
pub fn eval_at(coeffs: &WaveCoefficients, p: Point) -> Result<f64> {
    eval(coeffs, p.norm(), p.angle())
}

/// `E[f(x) f(y)]` for `|x - y| = d`.
pub fn covariance(d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(invalid(format!("distance must be >= 0, got {d}")));
    }
    special_functions::j0(d)
}

/// Node-centred square grid `[-half_extent, half_extent]^2` around `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    h: f64,
    half_extent: f64,
    center: Point,
}

impl GridSpec {
    pub fn new(h: f64, half_extent: f64, center: Point) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("grid step must be > 0, got {h}")));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(invalid(format!(
                "half_extent must be > 0, got {half_extent}"
            )));
        }
        if !(center.x.is_finite() && center.y.is_finite()) {
            return Err(invalid("grid center must be finite"));
        }
        if half_extent / h < 4.0 {
            return Err(invalid(format!(
                "degenerate grid: half_extent / h = {} < 4",
                half_extent / h
            )));
        }
        Ok(Self {
            h,
            half_extent,
            center,
        })
    }

    pub fn centered(h: f64, half_extent: f64) -> Result<Self> {
        Self::new(h, half_extent, Point::ORIGIN)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Nodes from the center to one edge, `floor(half_extent / h)`.
    pub fn half_nodes(&self) -> usize {
        // absorb representation error in ratios like 6.0 / 0.05
        (self.half_extent / self.h + 1e-9).floor() as usize
    }

    pub fn side(&self) -> usize {
        2 * self.half_nodes() + 1
    }

    /// Physical position of node `(row, col)`; rows run along `y`, columns along `x`.
    pub fn node(&self, row: usize, col: usize) -> Point {
        let p = self.half_nodes() as f64;
        Point {
            x: self.center.x + (col as f64 - p) * self.h,
            y: self.center.y + (row as f64 - p) * self.h,
        }
    }

    /// Largest distance from the origin of any node.
    pub fn max_radius(&self) -> f64 {
        self.center.norm() + self.half_nodes() as f64 * self.h * SQRT_2
    }
}

/// Field values on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRaster {
    grid: GridSpec,
    values: Vec<f64>,
    seed: u64,
    n_trunc: usize,
}

impl FieldRaster {
    pub fn from_values(
        grid: GridSpec,
        values: Vec<f64>,
        seed: u64,
        n_trunc: usize,
    ) -> Result<Self> {
        let side = grid.side();
        if values.len() != side * side {
            return Err(Error::Geometry(format!(
                "raster needs {} values for side {side}, got {}",
                side * side,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("raster values must be finite"));
        }
        Ok(Self {
            grid,
            values,
            seed,
            n_trunc,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn side(&self) -> usize {
        self.grid.side()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side() + col]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }
}

/// Evaluates the field at every node of `grid`.
///
/// For grids centred at the origin the eight nodes `(±a, ±b)`, `(±b, ±a)`
/// share one radius, so one Bessel row and one set of partial sums serve all
/// of them: with `c_n = X_n - i Y_n` and `z = e^{iθ}`, the node at angle
/// `kπ/2 ± θ` needs `Re Σ_j i^{kj} S_j` where `S_j` sums `c_n J_n z^{±n}` over
/// `n ≡ j (mod 4)`.
pub fn eval_raster(coeffs: &WaveCoefficients, grid: &GridSpec) -> Result<FieldRaster> {
    check_domain(grid.max_radius(), coeffs.n_trunc())?;
    let side = grid.side();
    let mut values = vec![0.0; side * side];
    if grid.center == Point::ORIGIN {
        fill_symmetric(coeffs, grid, &mut values);
    } else {
        let mut row = vec![0.0; coeffs.n_trunc() + 1];
        for r in 0..side {
            for c in 0..side {
                let p = grid.node(r, c);
                special_functions::fill_unchecked(p.norm(), &mut row);
                values[r * side + c] = coeffs.value_with_row(&row, p.angle());
            }
        }
    }
    FieldRaster::from_values(*grid, values, coeffs.seed, coeffs.n_trunc())
}

#[derive(Clone, Copy, Default)]
struct Complex {
    re: f64,
    im: f64,
}

/// `Re(i^q z)`.
fn re_rotated(z: Complex, q: usize) -> f64 {
    match q % 4 {
        0 => z.re,
        1 => -z.im,
        2 => -z.re,
        _ => z.im,
    }
}

fn fill_symmetric(coeffs: &WaveCoefficients, grid: &GridSpec, values: &mut [f64]) {
    let p = grid.half_nodes() as i64;
    let side = grid.side() as i64;
    let h = grid.h;
    let mut row = vec![0.0; coeffs.n_trunc() + 1];

    for a in 0..=p {
        for b in 0..=a {
            let (x, y) = (a as f64 * h, b as f64 * h);
            special_functions::fill_unchecked(x.hypot(y), &mut row);
            let (s1, c1) = y.atan2(x).sin_cos();

            let mut plus = [Complex::default(); 4];
            let mut minus = [Complex::default(); 4];
            let (mut c, mut s) = (c1, s1);
            for (n, ((&xn, &yn), &jn)) in
                coeffs.xs.iter().zip(&coeffs.ys).zip(&row[1..]).enumerate()
            {
                let (wr, wi) = (jn * c, jn * s);
                let slot = (n + 1) % 4;
                // (xn - i yn)(wr + i wi) and (xn - i yn)(wr - i wi)
                plus[slot].re += xn * wr + yn * wi;
                plus[slot].im += xn * wi - yn * wr;
                minus[slot].re += xn * wr - yn * wi;
                minus[slot].im += -xn * wi - yn * wr;
                (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            }

            let radial = coeffs.x0 * row[0];
            let images: [(i64, i64, usize, bool); 8] = [
                (a, b, 0, true),
                (a, -b, 0, false),
                (-a, b, 2, false),
                (-a, -b, 2, true),
                (b, a, 1, false),
                (-b, a, 1, true),
                (b, -a, 3, true),
                (-b, -a, 3, false),
            ];
            for (dx, dy, k, positive) in images {
                let sums = if positive { &plus } else { &minus };
                let angular: f64 = (0..4).map(|j| re_rotated(sums[j], k * j)).sum();
                let idx = (p + dy) * side + (p + dx);
                values[idx as usize] = radial - SQRT_2 * angular;
            }
        }
    }
}

/// Geometry sidecar written next to a binary raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterSidecar {
    pub h: f64,
    pub half_extent: f64,
    pub center: [f64; 2],
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub n_trunc: usize,
}

impl RasterSidecar {
    pub fn of(raster: &FieldRaster) -> Self {
        let g = raster.grid();
        Self {
            h: g.h,
            half_extent: g.half_extent,
            center: [g.center.x, g.center.y],
            rows: raster.side(),
            cols: raster.side(),
            seed: raster.seed,
            n_trunc: raster.n_trunc,
        }
    }
}

/// Writes the raster body as little-endian `f32`, row-major, no header.
pub fn write_raster_body<W: Write>(raster: &FieldRaster, mut out: W) -> io::Result<()> {
    let mut buf = Vec::with_capacity(raster.values.len() * 4);
    for &v in &raster.values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write_raster_files(
    raster: &FieldRaster,
    bin_path: &Path,
    sidecar_path: &Path,
) -> io::Result<()> {
    let bin = std::fs::File::create(bin_path)?;
    write_raster_body(raster, io::BufWriter::new(bin))?;
    let json =
        serde_json::to_string_pretty(&RasterSidecar::of(raster)).map_err(io::Error::other)?;
    std::fs::write(sidecar_path, json + "\n")
}

/// Reads a raster back from its body and sidecar; values carry `f32` precision.
pub fn read_raster_files(
    bin_path: &Path,
    sidecar_path: &Path,
) -> io::Result<(FieldRaster, RasterSidecar)> {
    let sidecar: RasterSidecar =
        serde_json::from_reader(io::BufReader::new(std::fs::File::open(sidecar_path)?))
            .map_err(io::Error::other)?;
    let mut body = Vec::new();
    std::fs::File::open(bin_path)?.read_to_end(&mut body)?;
    if body.len() != sidecar.rows * sidecar.cols * 4 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!(
                "body has {} bytes, sidecar implies {}",
                body.len(),
                sidecar.rows * sidecar.cols * 4
            ),
        ));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let grid = GridSpec::new(
        sidecar.h,
        sidecar.half_extent,
        Point::new(sidecar.center[0], sidecar.center[1]),
    )
    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    let raster = FieldRaster::from_values(grid, values, sidecar.seed, sidecar.n_trunc)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    Ok((raster, sidecar))
}

/// CSV with columns `row,col,x,y,value`.
pub fn write_raster_csv<W: Write>(raster: &FieldRaster, mut out: W) -> io::Result<()> {
    writeln!(out, "row,col,x,y,value")?;
    let side = raster.side();
    for r in 0..side {
        for c in 0..side {
            let p = raster.grid.node(r, c);
            writeln!(out, "{r},{c},{},{},{}", p.x, p.y, raster.get(r, c))?;
        }
    }
    out.flush()
}

/// Parses a CSV written by [`write_raster_csv`] back into `(row, col, value)` triples.
pub fn read_raster_csv<R: BufRead>(input: R) -> io::Result<Vec<(usize, usize, f64)>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(format!("line {}: expected 5 fields", i + 1)));
        }
        let parse_err = |e: &dyn std::fmt::Display| bad(format!("line {}: {e}", i + 1));
        out.push((
            fields[0].parse().map_err(|e| parse_err(&e))?,
            fields[1].parse().map_err(|e| parse_err(&e))?,
            fields[4].parse().map_err(|e| parse_err(&e))?,
        ));
    }
    Ok(out)
}
