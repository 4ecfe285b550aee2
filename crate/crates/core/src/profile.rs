//! Column-integrated images of the trapped gas in the local density
//! approximation.
//!
//! All maps live on a pixel grid in the x-y plane with the line of sight
//! along the trap z-axis. Internally positions are measured in Fermi radii
//! `R_i = sqrt(2 E_F / (m omega_i^2))`, so that the local reduced chemical
//! potential of a column at `(x, y)` is `beta_mu - (x~^2 + y~^2) / t`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gas::constants::HBAR;
use crate::gas::{GasScales, GasState, TrapGeometry};
use crate::quad::Integrator;
use crate::specfun::{fd_integral, fermi_dirac, FdOrder};

pub const MIN_GRID: usize = 8;
/// Columns whose local `beta_mu` lies below this are treated as unblocked.
const CLASSICAL_EDGE: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Pixel pitch, m.
    pub pixel_size: f64,
    /// Trap center in pixel coordinates `(column, row)`.
    pub center: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::centered(64, 64, 0.9e-6)
    }
}

impl GridSpec {
    pub fn centered(nx: usize, ny: usize, pixel_size: f64) -> Self {
        Self {
            nx,
            ny,
            pixel_size,
            center: (0.5 * (nx as f64 - 1.0), 0.5 * (ny as f64 - 1.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < MIN_GRID || self.ny < MIN_GRID {
            return domain(format!("grid must be at least {MIN_GRID}x{MIN_GRID}, got {}x{}", self.nx, self.ny));
        }
        if !(self.pixel_size.is_finite() && self.pixel_size > 0.0) {
            return domain(format!("pixel size must be positive, got {}", self.pixel_size));
        }
        if !(self.center.0.is_finite() && self.center.1.is_finite()) {
            return domain("grid center must be finite");
        }
        Ok(())
    }

    /// Physical offset of pixel `(i, j)` from the trap center, m.
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 - self.center.0) * self.pixel_size,
            (j as f64 - self.center.1) * self.pixel_size,
        )
    }
}

/// Row-major image: `values[j * nx + i]` is column `i` of row `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarMap2D {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub pixel_size: f64,
    pub origin: (f64, f64),
    pub units: String,
}

impl ScalarMap2D {
    pub fn new(values: Vec<f64>, grid: &GridSpec, units: impl Into<String>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.nx * grid.ny {
            return domain(format!("map has {} values for a {}x{} grid", values.len(), grid.nx, grid.ny));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite map value {v}")));
        }
        Ok(Self {
            values,
            nx: grid.nx,
            ny: grid.ny,
            pixel_size: grid.pixel_size,
            origin: grid.center,
            units: units.into(),
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { nx: self.nx, ny: self.ny, pixel_size: self.pixel_size, center: self.origin }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Comma-separated matrix, one image row per line.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format_sig(*v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Grid description written next to a CSV matrix.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "nx": self.nx,
            "ny": self.ny,
            "pixel_size_m": self.pixel_size,
            "origin_pixel": [self.origin.0, self.origin.1],
            "units": self.units,
            "layout": "row-major, row index = y",
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str, extra: serde_json::Value) -> Result<()> {
        let mut csv = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.write_csv(&mut csv)?;
        let mut meta = self.sidecar();
        if let (Some(m), serde_json::Value::Object(e)) = (meta.as_object_mut(), extra) {
            m.extend(e);
        }
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(())
    }
}

/// Nine significant digits in scientific notation.
pub(crate) fn format_sig(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.8e}")
    }
}

/// Thermal de Broglie wavelength and axial thermal length, both in m.
fn thermal_lengths(scales: &GasScales, state: &GasState, trap: &TrapGeometry) -> (f64, f64) {
    let kt = state.t_over_tf() * scales.fermi_energy;
    let lambda = (2.0 * PI * HBAR * HBAR / (scales.mass * kt)).sqrt();
    let ell_z = (2.0 * kt / (scales.mass * trap.omega_z().powi(2))).sqrt();
    (lambda, ell_z)
}

fn fermi_radii(scales: &GasScales, trap: &TrapGeometry) -> (f64, f64) {
    let r = |w: f64| (2.0 * scales.fermi_energy / (scales.mass * w * w)).sqrt();
    (r(trap.omega_x()), r(trap.omega_y()))
}

/// Peak 3D density of one spin component, m^-3.
pub fn peak_density(scales: &GasScales, state: &GasState, trap: &TrapGeometry) -> Result<f64> {
    let (lambda, _) = thermal_lengths(scales, state, trap);
    Ok(fd_integral(FdOrder::THREE_HALVES, state.beta_mu())? / lambda.powi(3))
}

/// Peak column density of one spin component along z, m^-2.
pub fn peak_column_density(scales: &GasScales, state: &GasState, trap: &TrapGeometry) -> Result<f64> {
    let (lambda, ell_z) = thermal_lengths(scales, state, trap);
    Ok(PI.sqrt() * ell_z * fd_integral(FdOrder::TWO, state.beta_mu())? / lambda.powi(3))
}

/// Squared reduced radius `x~^2 + y~^2` of every pixel.
fn reduced_radii(scales: &GasScales, trap: &TrapGeometry, grid: &GridSpec) -> Vec<f64> {
    let (rx, ry) = fermi_radii(scales, trap);
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.position(i, j);
            out.push((x / rx).powi(2) + (y / ry).powi(2));
        }
    }
    out
}

/// Evaluates `f` once per distinct value in `keys`, in parallel.
fn map_unique<F>(keys: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut unique: Vec<f64> = keys.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let values = unique.par_iter().map(|&k| f(k)).collect::<Result<Vec<_>>>()?;
    let table: HashMap<u64, f64> = unique.iter().map(|k| k.to_bits()).zip(values).collect();
    Ok(keys.iter().map(|k| table[&k.to_bits()]).collect())
}

/// Column density of one spin component, atoms/m^2, from the closed-form
/// `f_2` line-of-sight integral. Fails if the grid loses more than 1% of the
/// atoms.
pub fn column_density(
    scales: &GasScales,
    state: &GasState,
    trap: &TrapGeometry,
    grid: &GridSpec,
) -> Result<ScalarMap2D> {
    grid.validate()?;
    let (lambda, ell_z) = thermal_lengths(scales, state, trap);
    let prefactor = PI.sqrt() * ell_z / lambda.powi(3);
    let t = state.t_over_tf();
    let bm = state.beta_mu();
    let radii = reduced_radii(scales, trap, grid);
    let values = map_unique(&radii, |r2| Ok(prefactor * fd_integral(FdOrder::TWO, bm - r2 / t)?))?;
    let map = ScalarMap2D::new(values, grid, "atoms/m^2")?;

    let counted = map.sum() * grid.pixel_size.powi(2);
    let expected = scales.n_per_spin as f64;
    if (counted / expected - 1.0).abs() > 0.01 {
        return Err(Error::Resolution(format!(
            "grid holds {counted:.1} of {expected} atoms; enlarge or refine the grid"
        )));
    }
    Ok(map)
}

/// Line-of-sight integrated blocked and unblocked scattering maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringMaps {
    /// `int dz int d^3p n (1 - n')`, in column-density units.
    pub blocked: ScalarMap2D,
    /// Column density.
    pub unblocked: ScalarMap2D,
    /// Local suppression ratio `blocked / unblocked`.
    pub ratio: ScalarMap2D,
}

impl ScatteringMaps {
    /// Spatially integrated suppression.
    pub fn global_ratio(&self) -> f64 {
        self.blocked.sum() / self.unblocked.sum()
    }
}

/// Blocked column in reduced units at local reduced chemical potential
/// `alpha`, divided by the unblocked column `pi^2 t^2 f_2(alpha)`.
///
/// With `n(a) (1 - n(b)) = [n(a) - n(b)] / (1 - e^((a - b)/t))` the transverse
/// momenta and the line of sight integrate in closed form, leaving
/// `pi^(3/2) t^(3/2) int dp [f_{3/2}(alpha - p^2/t) - f_{3/2}(alpha - (p+k)^2/t)]
/// / (1 - e^(-(2pk + k^2)/t))`.
pub(crate) fn local_column_ratio(alpha: f64, t: f64, kappa: f64) -> Result<f64> {
    if alpha < CLASSICAL_EDGE {
        return Ok(1.0);
    }
    let g = |a: f64| fermi_dirac(1.5, a);
    let integrand = |p: f64| -> Result<f64> {
        let delta = (2.0 * p * kappa + kappa * kappa) / t;
        if delta.abs() < 1e-7 {
            let mid = 0.5 * (p * p + (p + kappa).powi(2)) / t;
            return fermi_dirac(0.5, alpha - mid);
        }
        let num = g(alpha - p * p / t)? - g(alpha - (p + kappa).powi(2) / t)?;
        Ok(num / -(-delta).exp_m1())
    };

    let reach = (t * (alpha.max(0.0) + 40.0)).sqrt();
    let mut breaks = vec![-0.5 * kappa];
    if alpha > 0.0 {
        let edge = (t * alpha).sqrt();
        breaks.extend([-edge, edge, -kappa - edge, -kappa + edge]);
    }
    let mut failure = None;
    let out = Integrator::new(1e-11, 1e-9).integrate(
        |p| match integrand(p) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        -reach - kappa,
        reach,
        &breaks,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let blocked = PI.powf(1.5) * t.powf(1.5) * out?.value;
    let unblocked = PI * PI * t * t * fd_integral(FdOrder::TWO, alpha)?;
    // quadrature noise can push the far tail a few 1e-11 past the bound
    Ok((blocked / unblocked).clamp(0.0, 1.0))
}

/// Blocked, unblocked and ratio maps for momentum transfer `k_over_kf`.
pub fn blocked_scattering_profile(
    scales: &GasScales,
    state: &GasState,
    trap: &TrapGeometry,
    k_over_kf: f64,
    grid: &GridSpec,
) -> Result<ScatteringMaps> {
    if !(k_over_kf.is_finite() && k_over_kf >= 0.0) {
        return domain(format!("momentum transfer must be non-negative, got {k_over_kf}"));
    }
    let unblocked = column_density(scales, state, trap, grid)?;
    let t = state.t_over_tf();
    let bm = state.beta_mu();
    let radii = reduced_radii(scales, trap, grid);
    let ratios = map_unique(&radii, |r2| local_column_ratio(bm - r2 / t, t, k_over_kf))?;
    let blocked: Vec<f64> = ratios.iter().zip(&unblocked.values).map(|(r, n)| r * n).collect();
    Ok(ScatteringMaps {
        blocked: ScalarMap2D::new(blocked, grid, "atoms/m^2 (blocked-weighted)")?,
        ratio: ScalarMap2D::new(ratios, grid, "dimensionless")?,
        unblocked,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    /// m
    pub bin_centers: Vec<f64>,
    pub means: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RadialProfile {
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "r_m,mean,count")?;
        for ((r, m), c) in self.bin_centers.iter().zip(&self.means).zip(&self.counts) {
            writeln!(w, "{},{},{c}", format_sig(*r), format_sig(*m))?;
        }
        Ok(())
    }
}

/// Azimuthal means over annuli of width `bin_width` (m) about `center`
/// (pixel coordinates). Empty annuli are dropped.
pub fn radial_average(map: &ScalarMap2D, center: (f64, f64), bin_width: f64) -> Result<RadialProfile> {
    let inside = |c: f64, n: usize| c >= 0.0 && c <= (n - 1) as f64;
    if !inside(center.0, map.nx) || !inside(center.1, map.ny) {
        return domain(format!("center {center:?} lies outside the {}x{} grid", map.nx, map.ny));
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return domain(format!("bin width must be positive, got {bin_width}"));
    }
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for j in 0..map.ny {
        for i in 0..map.nx {
            let dx = (i as f64 - center.0) * map.pixel_size;
            let dy = (j as f64 - center.1) * map.pixel_size;
            let bin = (dx.hypot(dy) / bin_width) as usize;
            if bin >= sums.len() {
                sums.resize(bin + 1, 0.0);
                counts.resize(bin + 1, 0);
            }
            sums[bin] += map.get(i, j);
            counts[bin] += 1;
        }
    }
    let mut profile = RadialProfile { bin_centers: vec![], means: vec![], counts: vec![] };
    for (b, (s, c)) in sums.into_iter().zip(counts).enumerate() {
        if c > 0 {
            profile.bin_centers.push((b as f64 + 0.5) * bin_width);
            profile.means.push(s / c as f64);
            profile.counts.push(c);
        }
    }
    Ok(profile)
}

/// Convolves with a normalized Gaussian of 1/e^2 full width `e2_width` (m),
/// i.e. standard deviation `e2_width / 4`. Edges are reflected, which keeps
/// the grid sum unchanged.
pub fn gaussian_blur(map: &ScalarMap2D, e2_width: f64) -> Result<ScalarMap2D> {
    if !(e2_width.is_finite() && e2_width >= 0.0) {
        return domain(format!("blur width must be non-negative, got {e2_width}"));
    }
    if e2_width == 0.0 {
        return Ok(map.clone());
    }
    let sigma = 0.25 * e2_width / map.pixel_size;
    let half = (4.0 * sigma).ceil() as usize;
    if 2 * half + 1 > map.nx.min(map.ny) {
        return domain(format!(
            "blur kernel of {} pixels is wider than the {}x{} grid",
            2 * half + 1,
            map.nx,
            map.ny
        ));
    }
    let mut kernel: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let d = k as f64 - half as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= norm);

    let reflect = |idx: isize, n: usize| -> usize {
        let n = n as isize;
        let r = if idx < 0 { -idx - 1 } else if idx >= n { 2 * n - idx - 1 } else { idx };
        r as usize
    };
    let (nx, ny) = (map.nx, map.ny);
    let mut rows = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            rows[j * nx + i] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * map.values[j * nx + reflect(i as isize + k as isize - half as isize, nx)])
                .sum();
        }
    }
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            out[j * nx + i] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * rows[reflect(j as isize + k as isize - half as isize, ny) * nx + i])
                .sum();
        }
    }
    ScalarMap2D::new(out, &map.grid(), map.units.clone())
}

/// Diameter (m) of the region where a radially decreasing map exceeds
/// `fraction` of its peak, read off along the x row through the center.
pub fn cloud_diameter(map: &ScalarMap2D, fraction: f64) -> f64 {
    let peak = map.max();
    let level = fraction * peak;
    let j = map.origin.1.round() as usize;
    let above = (0..map.nx).filter(|&i| map.get(i, j) > level).count();
    above as f64 * map.pixel_size
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::centered(n, n, 1.0)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::centered(4, 64, 1e-6).validate().is_err());
        assert!(GridSpec::centered(64, 64, 0.0).validate().is_err());
        assert_eq!(GridSpec::default().center, (31.5, 31.5));
        assert!(ScalarMap2D::new(vec![0.0; 10], &grid(8), "u").is_err());
    }

    #[test]
    fn blur_conserves_sum_and_width() {
        let g = GridSpec::centered(33, 33, 0.9e-6);
        let mut v = vec![0.0; 33 * 33];
        v[16 * 33 + 16] = 1.0;
        let delta = ScalarMap2D::new(v, &g, "u").unwrap();
        let b = gaussian_blur(&delta, 3e-6).unwrap();
        assert!((b.sum() - 1.0).abs() < 1e-12);
        let mut var = 0.0;
        for j in 0..33 {
            for i in 0..33 {
                var += b.get(i, j) * ((i as f64 - 16.0) * 0.9e-6).powi(2);
            }
        }
        assert!((4.0 * var.sqrt() - 3e-6).abs() < 0.45e-6);
        assert_eq!(gaussian_blur(&delta, 0.0).unwrap(), delta);
        assert!(gaussian_blur(&delta, 60e-6).is_err());
    }

    #[test]
    fn radial_average_uniform() {
        let m = ScalarMap2D::new(vec![2.5; 100], &grid(10), "u").unwrap();
        let p = radial_average(&m, (4.5, 4.5), 1.0).unwrap();
        assert!(p.means.iter().all(|v| (*v - 2.5).abs() < 1e-15));
        assert_eq!(p.counts.iter().sum::<usize>(), 100);
        assert!(radial_average(&m, (12.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn classical_column_ratio_is_one() {
        assert_eq!(local_column_ratio(-50.0, 0.3, 0.5).unwrap(), 1.0);
        let r = local_column_ratio(-12.0, 5.0, 0.45).unwrap();
        assert!((r - 1.0).abs() < 1e-4);
    }

    #[test]
    fn far_transfer_is_unblocked() {
        let r = local_column_ratio(5.0, 0.1, 5.0).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "{r}");
    }
}
