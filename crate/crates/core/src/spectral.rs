//! Spectral weights, intensity synthesis, box-constrained weight
//! estimation, sensor profiles and input-pair alignment.

use crate::error::{invalid_argument, Error, Result};
use crate::raster::{upsample_bicubic, Raster};

/// Per-band spectral weights, each constrained to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return invalid_argument("weights must not be empty");
        }
        if !w.iter().all(|v| (0.0..=1.0).contains(v)) {
            return invalid_argument("weights must lie in [0, 1]");
        }
        Ok(Self(w))
    }

    /// Equal weights 1/K, the default initialization when provider
    /// weights are unknown.
    pub fn equal(bands: usize) -> Self {
        Self(vec![1.0 / bands as f64; bands.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-sensor MTF-at-Nyquist values and optional provider weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorProfile {
    pub name: String,
    pub mtf_pan: f64,
    pub mtf_ms: Vec<f64>,
    pub provider_weights: Option<Weights>,
}

impl SensorProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = |m: &f64| *m > 0.0 && *m <= 1.0;
        if !ok(&self.mtf_pan) || !self.mtf_ms.iter().all(ok) {
            return invalid_argument("MTF values must lie in (0, 1]");
        }
        if self.mtf_ms.is_empty() {
            return invalid_argument("profile needs at least one MS MTF value");
        }
        Ok(())
    }

    /// MTF value used for band `k` of a `bands`-band image. When the
    /// profile's list length does not match the image, every band falls
    /// back to the default value 0.3.
    pub fn mtf_for_band(&self, k: usize, bands: usize) -> f64 {
        if self.mtf_ms.len() == bands {
            self.mtf_ms[k]
        } else {
            0.3
        }
    }

    /// Initial weights: provider weights when available, equal otherwise.
    pub fn initial_weights(&self, bands: usize) -> Weights {
        match &self.provider_weights {
            Some(w) if w.len() == bands => w.clone(),
            _ => Weights::equal(bands),
        }
    }

    /// Parses a plain-text key-value profile:
    ///
    /// ```text
    /// name = MySensor
    /// mtf_pan = 0.12
    /// mtf_ms = 0.30, 0.30, 0.31, 0.29
    /// weights = 0.25 0.25 0.25 0.25   # optional
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut name = None;
        let mut mtf_pan = None;
        let mut mtf_ms: Option<Vec<f64>> = None;
        let mut weights: Option<Vec<f64>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let value = value.trim();
            match key.trim() {
                "name" => name = Some(value.to_string()),
                "mtf_pan" => mtf_pan = Some(parse_num(value, lineno)?),
                "mtf_ms" => mtf_ms = Some(parse_num_list(value, lineno)?),
                "weights" => weights = Some(parse_num_list(value, lineno)?),
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        let profile = SensorProfile {
            name: name.ok_or_else(|| Error::Parse("missing 'name'".into()))?,
            mtf_pan: mtf_pan.ok_or_else(|| Error::Parse("missing 'mtf_pan'".into()))?,
            mtf_ms: mtf_ms.ok_or_else(|| Error::Parse("missing 'mtf_ms'".into()))?,
            provider_weights: weights.map(Weights::new).transpose()?,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn from_config_file(path: &std::path::Path) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }
}

fn parse_num(s: &str, lineno: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", lineno + 1)))
}

fn parse_num_list(s: &str, lineno: usize) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_num(t, lineno))
        .collect()
}

/// MTF-at-Nyquist values and provider weights for the supported sensors.
pub fn builtin_profiles() -> Vec<SensorProfile> {
    let p = |name: &str, pan: f64, ms: &[f64], w: Option<&[f64]>| SensorProfile {
        name: name.to_string(),
        mtf_pan: pan,
        mtf_ms: ms.to_vec(),
        provider_weights: w.map(|w| Weights::new(w.to_vec()).unwrap()),
    };
    vec![
        p("QB", 0.15, &[0.34, 0.32, 0.30, 0.22], None),
        p("IKONOS", 0.17, &[0.26, 0.28, 0.29, 0.28], None),
        p(
            "GeoEye-1/WV-4",
            0.16,
            &[0.23, 0.23, 0.23, 0.23],
            Some(&[0.242, 0.1025, 0.3596, 0.103]),
        ),
        p(
            "WV-2",
            0.11,
            &[0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.27],
            Some(&[
                0.0074, 0.1106, 0.1787, 0.12076, 0.1987, 0.1363, 0.0959, 0.0002793,
            ]),
        ),
        p(
            "WV-3",
            0.14,
            &[0.325, 0.355, 0.36, 0.35, 0.365, 0.36, 0.335, 0.315],
            None,
        ),
        p("Default", 0.15, &[0.3; 8], None),
    ]
}

/// Case-insensitive lookup by profile name; slash-separated name parts
/// ("GeoEye-1/WV-4") match individually.
pub fn find_profile(name: &str) -> Option<SensorProfile> {
    let query = name.trim().to_ascii_lowercase();
    builtin_profiles().into_iter().find(|p| {
        let full = p.name.to_ascii_lowercase();
        full == query || full.split('/').any(|part| part == query)
    })
}

/// Weighted band sum: single-band intensity image (the Pan surrogate).
pub fn intensity(ms: &Raster, w: &Weights) -> Result<Raster> {
    if w.len() != ms.bands() {
        return invalid_argument(format!(
            "weight count {} does not match band count {}",
            w.len(),
            ms.bands()
        ));
    }
    let n = ms.pixels_per_band();
    let mut out = vec![0.0; n];
    for (k, &wk) in w.as_slice().iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        for (o, &s) in out.iter_mut().zip(ms.band(k)) {
            *o += wk * s;
        }
    }
    Raster::new(ms.width(), ms.height(), 1, ms.pixel_size(), out)
}

/// Result of a box-constrained weight fit.
#[derive(Debug, Clone)]
pub struct WeightEstimate {
    pub weights: Weights,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Set when degenerate (all-zero) bands forced a minimal-norm solve.
    pub rank_deficient: bool,
}

/// Estimates spectral weights from an MS/Pan pair on the same grid by
/// bounded-variable least squares over the box [0, 1]^K.
///
/// The problem is convex, so the solution does not depend on `w0`; the
/// initial weights only seed the active set.
pub fn estimate_weights(ms: &Raster, pan_lr: &Raster, w0: &Weights) -> Result<WeightEstimate> {
    if !ms.same_dims(pan_lr) || pan_lr.bands() != 1 {
        return invalid_argument("weight estimation needs a single-band pan on the MS grid");
    }
    if w0.len() != ms.bands() {
        return invalid_argument("initial weight count does not match band count");
    }
    let k = ms.bands();
    let n = ms.pixels_per_band();
    let pan = pan_lr.band(0);

    // normal equations: gram = S^T S, rhs = S^T p
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        let bi = ms.band(i);
        rhs[i] = bi.iter().zip(pan).map(|(&a, &b)| a * b).sum();
        for j in i..k {
            let bj = ms.band(j);
            let g = bi.iter().zip(bj).map(|(&a, &b)| a * b).sum();
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }

    let (w, rank_deficient) = solve_box_ls(&gram, &rhs, k, w0.as_slice());
    if rank_deficient {
        log::warn!("weight estimation: rank-deficient system, minimal-norm solution returned");
    }

    let pan_sq: f64 = pan.iter().map(|v| v * v).sum();
    let mut quad = pan_sq;
    for i in 0..k {
        quad -= 2.0 * w[i] * rhs[i];
        for j in 0..k {
            quad += w[i] * gram[i * k + j] * w[j];
        }
    }
    let residual = (quad.max(0.0) / n as f64).sqrt();
    Ok(WeightEstimate {
        weights: Weights::new(w)?,
        residual,
        rank_deficient,
    })
}

/// Weight estimation in the high-resolution domain: the same solver
/// applied to the upsampled MS image against the full-resolution Pan.
pub fn estimate_weights_highres(ms: &Raster, pan: &Raster, w0: &Weights) -> Result<WeightEstimate> {
    let scale = resolution_ratio(ms, pan)?;
    let s_hr = if scale > 1 {
        upsample_bicubic(ms, scale)?
    } else {
        ms.clone()
    };
    estimate_weights(&s_hr, pan, w0)
}

pub(crate) fn resolution_ratio(ms: &Raster, pan: &Raster) -> Result<usize> {
    if pan.bands() != 1 {
        return invalid_argument("pan image must be single-band");
    }
    if ms.width() == 0 || !pan.width().is_multiple_of(ms.width()) {
        return invalid_argument("pan width must be an integer multiple of MS width");
    }
    let scale = pan.width() / ms.width();
    if pan.height() != ms.height() * scale {
        return invalid_argument("pan/MS dimensions disagree on the resolution ratio");
    }
    Ok(scale)
}

/// Exhaustive integer-shift registration: upsamples MS, synthesizes the
/// intensity image and returns the shift of the intensity that minimizes
/// RMSE against Pan over `[-window, window]^2`. Ties break toward the
/// smallest |dx|+|dy|, then lexicographically on (dx, dy).
pub fn estimate_shift(ms: &Raster, pan: &Raster, w: &Weights, window: usize) -> Result<(i64, i64)> {
    let scale = resolution_ratio(ms, pan)?;
    let quarter = pan.width().min(pan.height()) / 4;
    if window > quarter {
        return invalid_argument(format!(
            "window {window} exceeds image quarter-extent {quarter}"
        ));
    }
    let s_hr = if scale > 1 {
        upsample_bicubic(ms, scale)?
    } else {
        ms.clone()
    };
    let ihr = intensity(&s_hr, w)?;
    let (w_px, h_px) = (pan.width(), pan.height());
    let win = window as i64;
    let pan_band = pan.band(0);
    let int_band = ihr.band(0);

    let mut best: Option<(f64, i64, i64, i64)> = None;
    for dy in -win..=win {
        for dx in -win..=win {
            // fixed interior region so every candidate compares the same pixels
            let mut acc = 0.0;
            let mut count = 0usize;
            for y in window..(h_px - window) {
                let sy = (y as i64 - dy) as usize;
                let row_p = &pan_band[y * w_px..(y + 1) * w_px];
                let row_i = &int_band[sy * w_px..(sy + 1) * w_px];
                for x in window..(w_px - window) {
                    let d = row_p[x] - row_i[(x as i64 - dx) as usize];
                    acc += d * d;
                    count += 1;
                }
            }
            let rmse = (acc / count as f64).sqrt();
            let key = (rmse, dx.abs() + dy.abs(), dx, dy);
            let better = match &best {
                None => true,
                Some(b) => (key.0, key.1, key.2, key.3) < (b.0, b.1, b.2, b.3),
            };
            if better {
                best = Some(key);
            }
        }
    }
    let (_, _, dx, dy) = best.expect("window loop always yields a candidate");
    Ok((dx, dy))
}

// --- box-constrained least squares -----------------------------------

/// Minimizes `1/2 w^T Q w - c^T w` over `[0, 1]^k` by a primal active-set
/// iteration; free-set subproblems are solved directly (Cholesky with an
/// eigenvalue pseudo-inverse fallback for rank-deficient systems).
fn solve_box_ls(gram: &[f64], rhs: &[f64], k: usize, w0: &[f64]) -> (Vec<f64>, bool) {
    #[derive(Clone, Copy, PartialEq)]
    enum Bound {
        Lower,
        Upper,
        Free,
    }

    let mut state = vec![Bound::Free; k];
    let mut w: Vec<f64> = w0.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut rank_deficient = false;

    // bands with no signal are pinned at zero (minimal-norm choice)
    for i in 0..k {
        if gram[i * k + i] == 0.0 {
            state[i] = Bound::Lower;
            w[i] = 0.0;
            rank_deficient = true;
        }
    }

    let scale = gram
        .iter()
        .chain(rhs.iter())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let grad_tol = 1e-11 * scale;

    for _ in 0..(40 * k.max(1)) {
        let free: Vec<usize> = (0..k).filter(|&i| state[i] == Bound::Free).collect();

        // solve the equality-constrained subproblem on the free set
        let mut z = w.clone();
        for (i, s) in state.iter().enumerate() {
            match s {
                Bound::Lower => z[i] = 0.0,
                Bound::Upper => z[i] = 1.0,
                Bound::Free => {}
            }
        }
        if !free.is_empty() {
            let m = free.len();
            let mut sub = vec![0.0; m * m];
            let mut b = vec![0.0; m];
            for (r, &i) in free.iter().enumerate() {
                let mut bi = rhs[i];
                for (j, s) in state.iter().enumerate() {
                    if *s == Bound::Upper {
                        bi -= gram[i * k + j];
                    }
                }
                b[r] = bi;
                for (c, &j) in free.iter().enumerate() {
                    sub[r * m + c] = gram[i * k + j];
                }
            }
            let (x, deficient) = sym_solve(&sub, &b, m);
            rank_deficient |= deficient;
            for (r, &i) in free.iter().enumerate() {
                z[i] = x[r];
            }
        }

        // walk from w toward z, stopping at the first bound crossing
        let mut alpha = 1.0;
        let mut blocker: Option<(usize, Bound)> = None;
        for &i in &free {
            let d = z[i] - w[i];
            if d < 0.0 && z[i] < 0.0 {
                let a = (0.0 - w[i]) / d;
                if a < alpha {
                    alpha = a;
                    blocker = Some((i, Bound::Lower));
                }
            } else if d > 0.0 && z[i] > 1.0 {
                let a = (1.0 - w[i]) / d;
                if a < alpha {
                    alpha = a;
                    blocker = Some((i, Bound::Upper));
                }
            }
        }

        if let Some((bi, bound)) = blocker {
            for &i in &free {
                w[i] = (w[i] + alpha * (z[i] - w[i])).clamp(0.0, 1.0);
            }
            state[bi] = bound;
            w[bi] = if bound == Bound::Lower { 0.0 } else { 1.0 };
            continue;
        }

        w = z;
        // KKT check: gradient must point into the box at active bounds
        let grad: Vec<f64> = (0..k)
            .map(|i| (0..k).map(|j| gram[i * k + j] * w[j]).sum::<f64>() - rhs[i])
            .collect();
        let mut worst: Option<(f64, usize)> = None;
        for i in 0..k {
            if gram[i * k + i] == 0.0 {
                continue; // stays pinned
            }
            let violation = match state[i] {
                Bound::Lower => -grad[i],
                Bound::Upper => grad[i],
                Bound::Free => continue,
            };
            if violation > grad_tol && worst.is_none_or(|(v, _)| violation > v) {
                worst = Some((violation, i));
            }
        }
        match worst {
            Some((_, i)) => state[i] = Bound::Free,
            None => return (w, rank_deficient),
        }
    }
    log::warn!("box-constrained solver hit the iteration limit");
    (w, rank_deficient)
}

/// Solves a symmetric positive semi-definite system; falls back to a
/// Jacobi-eigenvalue pseudo-inverse when Cholesky breaks down. Returns
/// the solution and whether the fallback was needed.
fn sym_solve(a: &[f64], b: &[f64], n: usize) -> (Vec<f64>, bool) {
    if let Some(x) = cholesky_solve(a, b, n) {
        (x, false)
    } else {
        (pinv_solve(a, b, n), true)
    }
}

fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(a[i * n + i]));
    let floor = (max_diag * 1e-12).max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if s <= floor {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * y[p];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for p in (i + 1)..n {
            s -= l[p * n + i] * x[p];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Minimal-norm solve through a Jacobi eigendecomposition.
fn pinv_solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let (vals, vecs) = jacobi_eigen(a, n);
    let max_val = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = max_val * 1e-12;
    let mut x = vec![0.0; n];
    for e in 0..n {
        if vals[e].abs() <= cut {
            continue;
        }
        let proj: f64 = (0..n).map(|i| vecs[i * n + e] * b[i]).sum();
        let coef = proj / vals[e];
        for i in 0..n {
            x[i] += coef * vecs[i * n + e];
        }
    }
    x
}

/// Cyclic Jacobi rotations for a small symmetric matrix. Returns
/// (eigenvalues, column eigenvectors).
fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (mip, miq) = (m[i * n + p], m[i * n + q]);
                    m[i * n + p] = c * mip - s * miq;
                    m[i * n + q] = s * mip + c * miq;
                }
                for j in 0..n {
                    let (mpj, mqj) = (m[p * n + j], m[q * n + j]);
                    m[p * n + j] = c * mpj - s * mqj;
                    m[q * n + j] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let (vip, viq) = (v[i * n + p], v[i * n + q]);
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[i * n + i]).collect();
    (vals, v)
}
