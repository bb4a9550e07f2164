//! Brute-force affective features on plain arrays: root normalization,
//! strike search, cycle choice and all 29 values, written without the
//! library's geometry helpers.

use gaitsense::Gait;

type P = [f64; 3];

const ROOT: usize = 0;
const SPINE: usize = 1;
const NECK: usize = 2;
const HEAD: usize = 3;
const LSHOULDER: usize = 4;
const RSHOULDER: usize = 5;
const LHAND: usize = 8;
const RHAND: usize = 9;
const LFOOT: usize = 14;
const RFOOT: usize = 15;

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: P) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cross(a: P, b: P) -> P {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: P, s: f64) -> P {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Kahan's angle formula: `2·atan2(‖û − v̂‖, ‖û + v̂‖)`.
fn angle(vertex: P, a: P, b: P) -> f64 {
    let u = sub(a, vertex);
    let v = sub(b, vertex);
    if norm(u) == 0.0 || norm(v) == 0.0 {
        return 0.0;
    }
    let (u, v) = (scale(u, 1.0 / norm(u)), scale(v, 1.0 / norm(v)));
    let d = sub(u, v);
    let s = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
    2.0 * norm(d).atan2(norm(s))
}

fn area(a: P, b: P, c: P) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

/// Root-relative joint positions per frame.
pub fn normalized_frames(g: &Gait) -> Vec<[P; 16]> {
    g.frames()
        .iter()
        .map(|p| {
            let c = p.coords();
            let mut out = [[0.0; 3]; 16];
            for j in 0..16 {
                for k in 0..3 {
                    out[j][k] = c[3 * j + k] - c[k];
                }
            }
            out
        })
        .collect()
}

pub fn strikes(frames: &[[P; 16]], fps: f64, foot: usize) -> Vec<usize> {
    let n = frames.len();
    if n < 3 {
        return vec![];
    }
    let mut speed = vec![0.0; n];
    for t in 1..n {
        let d = sub(frames[t][foot], frames[t - 1][foot]);
        speed[t] = (d[0] * d[0] + d[2] * d[2]).sqrt() * fps;
    }
    speed[0] = speed[1];
    let mut mean = 0.0;
    for t in 1..n {
        mean += speed[t];
    }
    mean /= (n - 1) as f64;

    let h = |t: usize| frames[t][foot][1];
    let mut out = vec![];
    let mut prev: Option<usize> = None;
    for t in 0..n {
        let lo = if t >= 2 { t - 2 } else { 0 };
        let hi = if t + 2 < n { t + 2 } else { n - 1 };
        let mut is_min = true;
        let mut rises = false;
        for s in lo..=hi {
            if h(s) < h(t) {
                is_min = false;
            }
            if s > t && h(s) > h(t) {
                rises = true;
            }
        }
        if is_min && rises && speed[t] <= 0.1 * mean {
            if prev.map_or(true, |p| t - p > 2) {
                out.push(t);
            }
            prev = Some(t);
        }
    }
    out
}

/// Inclusive frame window of the first same-foot strike pair, or the whole
/// clip.
pub fn cycle(frames: &[[P; 16]], fps: f64) -> (usize, usize) {
    let mut best: Option<(usize, usize)> = None;
    for foot in [LFOOT, RFOOT] {
        let mut s = strikes(frames, fps, foot);
        if s.len() > 2 && s[0] < 2 {
            s.remove(0);
        }
        if s.len() >= 2 {
            match best {
                Some((a, _)) if a <= s[0] => {}
                _ => best = Some((s[0], s[1])),
            }
        }
    }
    best.unwrap_or((0, frames.len() - 1))
}

fn posture_frame(f: &[P; 16]) -> [f64; 12] {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for j in f {
        for k in 0..3 {
            lo[k] = lo[k].min(j[k]);
            hi[k] = hi[k].max(j[k]);
        }
    }
    let up = [f[NECK][0], f[NECK][1] + 1.0, f[NECK][2]];
    [
        (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]),
        angle(f[NECK], f[LSHOULDER], f[RSHOULDER]),
        angle(f[RSHOULDER], f[NECK], f[LSHOULDER]),
        angle(f[LSHOULDER], f[NECK], f[RSHOULDER]),
        angle(f[NECK], up, f[SPINE]),
        angle(f[NECK], f[HEAD], f[SPINE]),
        norm(sub(f[RHAND], f[ROOT])),
        norm(sub(f[LHAND], f[ROOT])),
        norm(sub(f[RFOOT], f[ROOT])),
        norm(sub(f[LFOOT], f[ROOT])),
        area(f[RHAND], f[LHAND], f[NECK]),
        area(f[RFOOT], f[LFOOT], f[ROOT]),
    ]
}

/// Mean norm of the k-th backward difference over `[start + k, end]`.
fn mean_difference(frames: &[[P; 16]], j: usize, start: usize, end: usize, k: usize, fps: f64) -> f64 {
    let coeffs: &[f64] = match k {
        1 => &[1.0, -1.0],
        2 => &[1.0, -2.0, 1.0],
        _ => &[1.0, -3.0, 3.0, -1.0],
    };
    let mut sum = 0.0;
    for t in start + k..=end {
        let mut d = [0.0; 3];
        for (i, c) in coeffs.iter().enumerate() {
            for a in 0..3 {
                d[a] += c * frames[t - i][j][a];
            }
        }
        sum += norm(d) * fps.powi(k as i32);
    }
    sum / (end - start + 1 - k) as f64
}

/// All 29 features in library order.
pub fn features(g: &Gait) -> [f64; 29] {
    let frames = normalized_frames(g);
    let fps = g.frame_rate();
    let (start, end) = cycle(&frames, fps);
    let mut out = [0.0; 29];
    let joints = [RHAND, LHAND, HEAD, RFOOT, LFOOT];
    for k in 1..=3 {
        for (i, &j) in joints.iter().enumerate() {
            out[(k - 1) * 5 + i] = mean_difference(&frames, j, start, end, k, fps);
        }
    }
    out[15] = (end - start) as f64 / fps;

    let mut sum = [0.0; 12];
    let mut stride: f64 = 0.0;
    for t in start..=end {
        let p = posture_frame(&frames[t]);
        for i in 0..12 {
            sum[i] += p[i];
        }
        stride = stride.max(norm(sub(frames[t][LFOOT], frames[t][RFOOT])));
    }
    let n = (end - start + 1) as f64;
    for i in 0..10 {
        out[16 + i] = sum[i] / n;
    }
    out[26] = stride;
    out[27] = sum[10] / n;
    out[28] = sum[11] / n;
    out
}
