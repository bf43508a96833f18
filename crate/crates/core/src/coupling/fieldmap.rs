use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::{Error, Result};

const HEADER: &str = "FIELDMAP v1";
/// Slack, in grid cells, accepted when a position sits on the grid boundary.
const EDGE_SLACK: f64 = 1e-9;

/// Regular lattice; coordinate of index i on an axis is `origin + i·spacing` (nm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub shape: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl GridSpec {
    pub fn new(shape: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if shape.iter().any(|&n| n < 2) {
            return Err(Error::InvalidFieldMap(format!("need at least 2 points per axis, got {shape:?}")));
        }
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidFieldMap(format!("spacing must be positive, got {spacing:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidFieldMap("origin must be finite".into()));
        }
        Ok(GridSpec { shape, spacing, origin })
    }

    /// Grid with `n` points per axis centred on zero, so coordinates are
    /// exactly antisymmetric about the middle sample.
    pub fn centered(half_counts: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let shape = half_counts.map(|h| 2 * h + 1);
        let origin = [0, 1, 2].map(|a| -(half_counts[a] as f64) * spacing[a]);
        Self::new(shape, spacing, origin)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinate of sample `i` along `axis`. Centred grids use (i − c)·h,
    /// which keeps mirror points exactly opposite.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let c = (self.shape[axis] - 1) as f64 / 2.0;
        let centre = self.origin[axis] + c * self.spacing[axis];
        if centre == 0.0 {
            (i as f64 - c) * self.spacing[axis]
        } else {
            self.origin[axis] + i as f64 * self.spacing[axis]
        }
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Flat index of (ix, iy, iz), x-major.
    pub fn flat(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.shape[1] + iy) * self.shape[2] + iz
    }

    pub fn contains(&self, r: [f64; 3]) -> bool {
        (0..3).all(|a| self.locate(a, r[a]).is_some())
    }

    /// Lower cell index and fractional offset for linear interpolation.
    fn locate(&self, axis: usize, x: f64) -> Option<(usize, f64)> {
        let u = (x - self.origin[axis]) / self.spacing[axis];
        let last = (self.shape[axis] - 1) as f64;
        if !(u >= -EDGE_SLACK && u <= last + EDGE_SLACK) {
            return None;
        }
        let u = u.clamp(0.0, last);
        let i = (u.floor() as usize).min(self.shape[axis] - 2);
        Some((i, u - i as f64))
    }
}

/// Sampled densities.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSamples {
    /// Independent D·E and total-energy samples, flat x-major.
    Dense { de: Vec<f64>, total: Vec<f64> },
    /// Sum of separable terms f(i,j,k) = z[k]·Σₜ xₜ[i]·yₜ[j], used for both
    /// D·E and the total density. Keeps fine synthetic grids small.
    Layered { z: Vec<f64>, terms: Vec<(Vec<f64>, Vec<f64>)> },
}

fn lerp(v: &[f64], (i, w): (usize, f64)) -> f64 {
    v[i] * (1.0 - w) + v[i + 1] * w
}

/// Immutable field map with cached maximum of D·E and total-energy integral.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMap {
    grid: GridSpec,
    samples: FieldSamples,
    wavelength_nm: f64,
    max_de: f64,
    argmax: [usize; 3],
    /// ∫ total dV in (density unit)·nm³.
    total_integral: f64,
}

impl FieldMap {
    pub fn new(grid: GridSpec, samples: FieldSamples, wavelength_nm: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
            return Err(Error::InvalidFieldMap(format!("wavelength must be positive, got {wavelength_nm}")));
        }
        let bad = |v: &[f64]| v.iter().any(|x| !(*x >= 0.0 && x.is_finite()));
        let [nx, ny, nz] = grid.shape;
        let (max_de, argmax, total_integral) = match &samples {
            FieldSamples::Dense { de, total } => {
                if de.len() != grid.len() || total.len() != grid.len() {
                    return Err(Error::InvalidFieldMap(format!(
                        "expected {} samples, got {} D·E and {} total",
                        grid.len(),
                        de.len(),
                        total.len()
                    )));
                }
                if bad(de) || bad(total) {
                    return Err(Error::InvalidFieldMap("densities must be finite and non-negative".into()));
                }
                let (k, m) = de
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
                let argmax = [k / (ny * nz), (k / nz) % ny, k % nz];
                (m, argmax, total.iter().sum::<f64>() * grid.cell_volume())
            }
            FieldSamples::Layered { z, terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidFieldMap("layered map needs at least one term".into()));
                }
                if z.len() != nz || terms.iter().any(|(x, y)| x.len() != nx || y.len() != ny) {
                    return Err(Error::InvalidFieldMap("layered profile lengths do not match the grid".into()));
                }
                if bad(z) || terms.iter().any(|(x, y)| bad(x) || bad(y)) {
                    return Err(Error::InvalidFieldMap("profiles must be finite and non-negative".into()));
                }
                let (kz, zmax) = z
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
                let (mut best, mut bi, mut bj) = (f64::NEG_INFINITY, 0, 0);
                for i in 0..nx {
                    for j in 0..ny {
                        let s: f64 = terms.iter().map(|(x, y)| x[i] * y[j]).sum();
                        if s > best {
                            (best, bi, bj) = (s, i, j);
                        }
                    }
                }
                let zsum: f64 = z.iter().sum();
                let xy: f64 = terms
                    .iter()
                    .map(|(x, y)| x.iter().sum::<f64>() * y.iter().sum::<f64>())
                    .sum();
                (best * zmax, [bi, bj, kz], zsum * xy * grid.cell_volume())
            }
        };
        if !(total_integral > 0.0) {
            return Err(Error::InvalidFieldMap("total energy integral is zero".into()));
        }
        Ok(FieldMap {
            grid,
            samples,
            wavelength_nm,
            max_de,
            argmax,
            total_integral,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &FieldSamples {
        &self.samples
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }

    pub fn max_de(&self) -> f64 {
        self.max_de
    }

    /// Grid position of the (first) largest D·E sample.
    pub fn max_position(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.grid.coord(a, self.argmax[a]))
    }

    pub fn total_integral(&self) -> f64 {
        self.total_integral
    }

    /// (D·E, total) at grid index.
    pub fn sample(&self, ix: usize, iy: usize, iz: usize) -> (f64, f64) {
        match &self.samples {
            FieldSamples::Dense { de, total } => {
                let k = self.grid.flat(ix, iy, iz);
                (de[k], total[k])
            }
            FieldSamples::Layered { z, terms } => {
                let v = z[iz] * terms.iter().map(|(x, y)| x[ix] * y[iy]).sum::<f64>();
                (v, v)
            }
        }
    }

    /// Trilinear interpolation of D·E at `r` (nm).
    pub fn de_at(&self, r: [f64; 3]) -> Result<f64> {
        let outside = || Error::OutsideGrid { x: r[0], y: r[1], z: r[2] };
        let lx = self.grid.locate(0, r[0]).ok_or_else(outside)?;
        let ly = self.grid.locate(1, r[1]).ok_or_else(outside)?;
        let lz = self.grid.locate(2, r[2]).ok_or_else(outside)?;
        Ok(match &self.samples {
            FieldSamples::Layered { z, terms } => {
                lerp(z, lz) * terms.iter().map(|(x, y)| lerp(x, lx) * lerp(y, ly)).sum::<f64>()
            }
            FieldSamples::Dense { de, .. } => {
                let mut acc = 0.0;
                for (di, wx) in [(0, 1.0 - lx.1), (1, lx.1)] {
                    for (dj, wy) in [(0, 1.0 - ly.1), (1, ly.1)] {
                        for (dk, wz) in [(0, 1.0 - lz.1), (1, lz.1)] {
                            let w = wx * wy * wz;
                            if w != 0.0 {
                                acc += w * de[self.grid.flat(lx.0 + di, ly.0 + dj, lz.0 + dk)];
                            }
                        }
                    }
                }
                acc
            }
        })
    }

    /// Expands any representation into dense samples.
    pub fn to_dense(&self) -> FieldMap {
        let [nx, ny, nz] = self.grid.shape;
        let mut de = Vec::with_capacity(self.grid.len());
        let mut total = Vec::with_capacity(self.grid.len());
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let (a, b) = self.sample(i, j, k);
                    de.push(a);
                    total.push(b);
                }
            }
        }
        FieldMap::new(self.grid, FieldSamples::Dense { de, total }, self.wavelength_nm)
            .expect("expansion of a valid map is valid")
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        let g = &self.grid;
        writeln!(w, "{HEADER}")?;
        writeln!(
            w,
            "{} {} {} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            g.shape[0],
            g.shape[1],
            g.shape[2],
            g.spacing[0],
            g.spacing[1],
            g.spacing[2],
            g.origin[0],
            g.origin[1],
            g.origin[2],
            self.wavelength_nm
        )?;
        let mut line = String::new();
        for i in 0..g.shape[0] {
            for j in 0..g.shape[1] {
                for k in 0..g.shape[2] {
                    let (a, b) = self.sample(i, j, k);
                    line.clear();
                    let _ = writeln!(line, "{a:e} {b:e}");
                    w.write_all(line.as_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::fs::File::create(path)?)
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let perr = |line: usize, reason: String| Error::FieldMapParse { line, reason };
        let mut lines = BufReader::new(r).lines();
        let mut next = |n: usize| -> Result<Option<String>> { lines.next().transpose().map_err(|e| perr(n, e.to_string())) };

        match next(1)? {
            Some(l) if l.trim() == HEADER => {}
            Some(l) => return Err(perr(1, format!("expected `{HEADER}`, found `{}`", l.trim()))),
            None => return Err(perr(1, "empty file".into())),
        }
        let head = next(2)?.ok_or_else(|| perr(2, "missing grid header".into()))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() != 10 {
            return Err(perr(2, format!("expected 10 header fields, found {}", f.len())));
        }
        let count = |s: &str| s.parse::<usize>().map_err(|e| perr(2, format!("bad count `{s}`: {e}")));
        let real = |s: &str| s.parse::<f64>().map_err(|e| perr(2, format!("bad number `{s}`: {e}")));
        let shape = [count(f[0])?, count(f[1])?, count(f[2])?];
        let spacing = [real(f[3])?, real(f[4])?, real(f[5])?];
        let origin = [real(f[6])?, real(f[7])?, real(f[8])?];
        let lambda = real(f[9])?;
        let grid = GridSpec::new(shape, spacing, origin).map_err(|e| perr(2, e.to_string()))?;

        let n = grid.len();
        let mut de = Vec::with_capacity(n);
        let mut total = Vec::with_capacity(n);
        let mut line_no = 2;
        while let Some(l) = next(line_no + 1)? {
            line_no += 1;
            let t = l.trim();
            if t.is_empty() {
                continue;
            }
            if de.len() == n {
                return Err(perr(line_no, format!("more than the {n} data lines declared by the header")));
            }
            let mut it = t.split_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(perr(line_no, "expected two values".into())),
            };
            let parse = |s: &str| -> Result<f64> {
                let v = s.parse::<f64>().map_err(|e| perr(line_no, format!("bad number `{s}`: {e}")))?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(perr(line_no, format!("density must be finite and non-negative, got {v}")));
                }
                Ok(v)
            };
            de.push(parse(a)?);
            total.push(parse(b)?);
        }
        if de.len() != n {
            return Err(perr(
                line_no + 1,
                format!("header declares {n} data lines, found {}", de.len()),
            ));
        }
        FieldMap::new(grid, FieldSamples::Dense { de, total }, lambda)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::fs::File::open(path)?)
    }
}

/// Volume in nm³ tied to the map wavelength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeVolume {
    nm3: f64,
    wavelength_nm: f64,
}

impl ModeVolume {
    pub fn new(nm3: f64, wavelength_nm: f64) -> Self {
        ModeVolume { nm3, wavelength_nm }
    }

    pub fn nm3(&self) -> f64 {
        self.nm3
    }

    pub fn m3(&self) -> f64 {
        self.nm3 * 1e-27
    }

    /// In units of (λ/n)³.
    pub fn cubic_wavelengths(&self, refractive_index: f64) -> f64 {
        self.nm3 / (self.wavelength_nm / refractive_index).powi(3)
    }
}

/// ∫ total dV / max D·E, midpoint rule.
pub fn global_mode_volume(map: &FieldMap) -> Result<ModeVolume> {
    if !(map.max_de > 0.0) {
        let [x, y, z] = map.max_position();
        return Err(Error::UnboundedModeVolume { x, y, z });
    }
    Ok(ModeVolume::new(map.total_integral / map.max_de, map.wavelength_nm))
}

/// ∫ total dV / D·E(r), with D·E interpolated trilinearly.
pub fn local_mode_volume(map: &FieldMap, r: [f64; 3]) -> Result<ModeVolume> {
    let de = map.de_at(r)?;
    if !(de > 0.0) {
        return Err(Error::UnboundedModeVolume { x: r[0], y: r[1], z: r[2] });
    }
    Ok(ModeVolume::new(map.total_integral / de, map.wavelength_nm))
}
