//! Haar sampling, powered eigenangles, and two-sample trace statistics.
//!
//! Samplers return free eigenvalue angles: the coset-forced eigenvalues at
//! plus or minus one are stripped by their known count, never by tolerance.
//! Every sample owns a seed-derived random stream indexed by (side, sample),
//! and chunk partial sums are folded in a fixed order, so reports are
//! bit-identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classical::{Component, ComponentKind, Decomposition};

/// Per-statistic z gate used by the verification sweeps.
pub const DEFAULT_GATE: f64 = 4.0;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct AngleSample {
    /// Angles in (-pi, pi].
    pub angles: Vec<f64>,
    /// Closed under negation, with pi its own partner.
    pub pair_symmetric: bool,
}

impl AngleSample {
    /// Largest mismatch between the angle multiset and its negation.
    pub fn symmetry_defect(&self) -> f64 {
        let mut a = self.angles.clone();
        let mut b: Vec<f64> = self.angles.iter().map(|&t| neg_angle(t)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Wrap to (-pi, pi]. In-range inputs pass through unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if -std::f64::consts::PI < x && x <= std::f64::consts::PI {
        return x;
    }
    let tau = std::f64::consts::TAU;
    let mut r = x.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r -= tau;
    }
    r
}

/// Negation on (-pi, pi]: pi maps to itself.
fn neg_angle(t: f64) -> f64 {
    if t == std::f64::consts::PI {
        t
    } else {
        -t
    }
}

/// Multiply every angle by p on the circle.
pub fn power_angles(sample: &AngleSample, p: u64) -> AngleSample {
    AngleSample {
        angles: sample
            .angles
            .iter()
            .map(|&t| wrap_angle(t * p as f64))
            .collect(),
        pair_symmetric: sample.pair_symmetric,
    }
}

fn complex_ginibre(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(n, n, |_, _| {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// QR of a complex Ginibre with the diagonal phases divided out.
fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex<f64>> {
    let qr = complex_ginibre(n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.norm();
        let phase = if m == 0.0 { Complex::new(1.0, 0.0) } else { d / m };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// QR of a real Ginibre with diagonal signs normalized, then the requested
/// determinant coset enforced by one column reflection.
fn haar_orthogonal(n: usize, det_sign: i8, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let det = q.determinant();
    if (det < 0.0) != (det_sign < 0) {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

/// Quaternionic partner: the column paired with v under the symplectic form.
fn partner(v: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut w = vec![Complex::new(0.0, 0.0); v.len()];
    for j in 0..v.len() / 2 {
        w[2 * j] = -v[2 * j + 1].conj();
        w[2 * j + 1] = v[2 * j].conj();
    }
    w
}

/// Gram-Schmidt over quaternionic column pairs: each drawn column is
/// orthonormalized and its partner appended, giving a Haar element of the
/// compact symplectic group (unitary with S^T J S = J).
fn haar_symplectic(two_n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex<f64>> {
    assert!(two_n % 2 == 0);
    let mut cols: Vec<Vec<Complex<f64>>> = Vec::with_capacity(two_n);
    for _ in 0..two_n / 2 {
        let mut v: Vec<Complex<f64>> = (0..two_n)
            .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for c in &cols {
            let ip: Complex<f64> = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(c) {
                *x -= ip * a;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        let w = partner(&v);
        cols.push(v);
        cols.push(w);
    }
    DMatrix::from_fn(two_n, two_n, |i, j| cols[j][i])
}

fn eigenangles(m: DMatrix<Complex<f64>>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let t = m.schur().unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)].arg()).collect()
}

fn complexify(m: DMatrix<f64>) -> DMatrix<Complex<f64>> {
    m.map(|x| Complex::new(x, 0.0))
}

/// Remove the coset-forced eigenvalues: the angle nearest 0 per forced +1,
/// the angle nearest the half turn per forced -1.
fn strip_forced(mut angles: Vec<f64>, forced: &[i8]) -> Vec<f64> {
    for &f in forced {
        assert!(!angles.is_empty());
        let idx = if f > 0 {
            let mut best = 0;
            for i in 1..angles.len() {
                if angles[i].abs() < angles[best].abs() {
                    best = i;
                }
            }
            best
        } else {
            let mut best = 0;
            for i in 1..angles.len() {
                if angles[i].abs() > angles[best].abs() {
                    best = i;
                }
            }
            best
        };
        angles.swap_remove(idx);
    }
    angles
}

/// One Haar draw, reduced to free angles.
pub fn sample_haar(c: &Component, rng: &mut ChaCha8Rng) -> AngleSample {
    let n = c.size as usize;
    if n == 0 {
        return AngleSample {
            angles: Vec::new(),
            pair_symmetric: true,
        };
    }
    match c.kind {
        ComponentKind::U => AngleSample {
            angles: eigenangles(haar_unitary(n, rng)),
            pair_symmetric: false,
        },
        ComponentKind::ReU => {
            let base = eigenangles(haar_unitary(n, rng));
            let mut angles = base.clone();
            angles.extend(base.iter().map(|&t| neg_angle(t)));
            AngleSample {
                angles,
                pair_symmetric: true,
            }
        }
        ComponentKind::Oplus | ComponentKind::Ominus => {
            let sign = if c.kind == ComponentKind::Oplus { 1 } else { -1 };
            let q = haar_orthogonal(n, sign, rng);
            let angles = strip_forced(eigenangles(complexify(q)), &c.forced_eigenvalues());
            AngleSample {
                angles,
                pair_symmetric: true,
            }
        }
        ComponentKind::Sp => AngleSample {
            angles: eigenangles(haar_symplectic(n, rng)),
            pair_symmetric: true,
        },
    }
}

/// Union of independent component draws.
pub fn sample_decomposition(d: &Decomposition, rng: &mut ChaCha8Rng) -> AngleSample {
    let mut angles = Vec::new();
    let mut pair_symmetric = true;
    for c in &d.components {
        let s = sample_haar(c, rng);
        pair_symmetric &= s.pair_symmetric;
        angles.extend(s.angles);
    }
    AngleSample {
        angles,
        pair_symmetric,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatLine {
    pub name: String,
    pub lhs: Moments,
    pub rhs: Moments,
    /// Welch z; absent when both variances degenerate.
    pub z: Option<f64>,
    /// Exact-match verdict for the degenerate case.
    pub exact: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub samples: u64,
    pub kmax: u32,
    pub seed: u64,
    pub lines: Vec<StatLine>,
}

impl StatReport {
    pub fn max_abs_z(&self) -> f64 {
        self.lines
            .iter()
            .filter_map(|l| l.z)
            .fold(0.0, |a, z| a.max(z.abs()))
    }

    pub fn passes(&self, gate: f64) -> bool {
        self.lines.iter().all(|l| match l.z {
            Some(z) => z.abs() < gate,
            None => l.exact == Some(true),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,lhs_mean,lhs_var,rhs_mean,rhs_var,samples,z,exact\n");
        for l in &self.lines {
            let z = l.z.map(|z| z.to_string()).unwrap_or_default();
            let exact = l.exact.map(|e| e.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                l.name, l.lhs.mean, l.lhs.var, l.rhs.mean, l.rhs.var, self.samples, z, exact
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub samples: usize,
    pub kmax: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 200_000,
            kmax: 6,
            seed: 1,
            workers: 4,
        }
    }
}

/// Per-sample statistics: Re Tr M^k and |Tr M^k|^2 for k = 1..=kmax.
fn stat_values(angles: &[f64], kmax: usize, out: &mut [f64]) {
    for k in 1..=kmax {
        let (mut re, mut im) = (0.0, 0.0);
        for &t in angles {
            let kt = k as f64 * t;
            re += kt.cos();
            im += kt.sin();
        }
        out[2 * (k - 1)] = re;
        out[2 * (k - 1) + 1] = re * re + im * im;
    }
}

/// Sum and sum-of-squares per statistic over all samples of one side.
/// Chunks are processed by any worker but folded in index order.
fn accumulate<F>(cfg: &McConfig, side: u64, nstats: usize, draw: F) -> Vec<(f64, f64)>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let template = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chunks = cfg.samples.div_ceil(CHUNK);
    let mut slots: Vec<Option<Vec<(f64, f64)>>> = vec![None; chunks];
    let next = AtomicUsize::new(0);
    let workers = cfg.workers.max(1);
    let (tx, rx) = mpsc::channel::<(usize, Vec<(f64, f64)>)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let template = template.clone();
            let next = &next;
            let draw = &draw;
            scope.spawn(move || {
                let mut vals = vec![0.0f64; nstats];
                loop {
                    let c = next.fetch_add(1, Ordering::Relaxed);
                    if c >= chunks {
                        break;
                    }
                    let lo = c * CHUNK;
                    let hi = ((c + 1) * CHUNK).min(cfg.samples);
                    let mut part = vec![(0.0f64, 0.0f64); nstats];
                    for i in lo..hi {
                        let mut rng = template.clone();
                        rng.set_stream((side << 32) | i as u64);
                        draw(&mut rng, &mut vals);
                        for (acc, &v) in part.iter_mut().zip(vals.iter()) {
                            acc.0 += v;
                            acc.1 += v * v;
                        }
                    }
                    tx.send((c, part)).expect("collector alive");
                }
            });
        }
        drop(tx);
        for (c, part) in rx {
            slots[c] = Some(part);
        }
    });
    let mut total = vec![(0.0f64, 0.0f64); nstats];
    for slot in slots {
        let part = slot.expect("chunk computed");
        for (acc, p) in total.iter_mut().zip(part) {
            acc.0 += p.0;
            acc.1 += p.1;
        }
    }
    total
}

fn moments(sums: &(f64, f64), n: usize) -> Moments {
    let nf = n as f64;
    let mean = sums.0 / nf;
    let var = ((sums.1 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Moments {
        mean,
        var,
        n: n as u64,
    }
}

/// Two-sample comparison of eig(M^p) for Haar M on the left against the
/// union of independent component draws on the right.
pub fn compare(lhs: &Component, p: u64, rhs: &Decomposition, cfg: &McConfig) -> StatReport {
    assert!(cfg.samples >= 1000, "need at least 1000 samples");
    assert!(cfg.kmax >= 1);
    let nstats = 2 * cfg.kmax;
    let lhs_sums = accumulate(cfg, 0, nstats, |rng, out| {
        let s = power_angles(&sample_haar(lhs, rng), p);
        stat_values(&s.angles, cfg.kmax, out);
    });
    let rhs_sums = accumulate(cfg, 1, nstats, |rng, out| {
        let s = sample_decomposition(rhs, rng);
        stat_values(&s.angles, cfg.kmax, out);
    });
    let mut lines = Vec::with_capacity(nstats);
    for k in 1..=cfg.kmax {
        for (j, name) in [
            (2 * (k - 1), format!("Re Tr M^{k}")),
            (2 * (k - 1) + 1, format!("|Tr M^{k}|^2")),
        ] {
            let l = moments(&lhs_sums[j], cfg.samples);
            let r = moments(&rhs_sums[j], cfg.samples);
            let denom = l.var / l.n as f64 + r.var / r.n as f64;
            let (z, exact) = if denom == 0.0 {
                (None, Some(l.mean == r.mean))
            } else {
                let z = (l.mean - r.mean) / denom.sqrt();
                assert!(z.is_finite());
                (Some(z), None)
            };
            lines.push(StatLine {
                name,
                lhs: l,
                rhs: r,
                z,
                exact,
            });
        }
    }
    StatReport {
        samples: cfg.samples as u64,
        kmax: cfg.kmax as u32,
        seed: cfg.seed,
        lines,
    }
}

/// Empirical moments of (Re Tr M^k, |Tr M^k|^2) for one component.
pub fn component_moments(c: &Component, k: usize, cfg: &McConfig) -> (Moments, Moments) {
    let sums = accumulate(cfg, 0, 2, |rng, out| {
        let s = sample_haar(c, rng);
        let (mut re, mut im) = (0.0, 0.0);
        for &t in &s.angles {
            let kt = k as f64 * t;
            re += kt.cos();
            im += kt.sin();
        }
        out[0] = re;
        out[1] = re * re + im * im;
    });
    (moments(&sums[0], cfg.samples), moments(&sums[1], cfg.samples))
}
