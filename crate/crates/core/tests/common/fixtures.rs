use gaitsense::synth::{synth_gait, SynthParams};
use gaitsense::{EmotionLabel, Gait, Pose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every coordinate starts uniform in [-1, 1] and then random-walks; τ and
/// fps vary.
pub fn random_walk_gait(rng: &mut impl Rng) -> Gait {
    let n = rng.random_range(6..60);
    let fps = [24.0, 30.0, 60.0, 120.0][rng.random_range(0..4)];
    let mut coords = [0.0; 48];
    for c in coords.iter_mut() {
        *c = rng.random_range(-1.0..1.0);
    }
    let frames = (0..n)
        .map(|_| {
            for c in coords.iter_mut() {
                *c += rng.random_range(-0.05..0.05);
            }
            Pose::new(coords).unwrap()
        })
        .collect();
    Gait::new("walk", fps, frames).unwrap()
}

/// Procedural walker with randomized parameters and noise.
pub fn random_walker(rng: &mut impl Rng) -> Gait {
    let emotion = EmotionLabel::ALL[rng.random_range(0..4)];
    let mut p = SynthParams::preset(emotion, rng.random());
    p.stride_scale *= rng.random_range(0.7..1.3);
    p.speed_scale *= rng.random_range(0.8..1.2);
    p.arm_swing_amp *= rng.random_range(0.5..1.5);
    p.noise_sigma = rng.random_range(0.0..0.002);
    synth_gait(&p).unwrap()
}

/// 50 walkers followed by 50 random-walk gaits.
pub fn oracle_gaits(seed: u64) -> Vec<Gait> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Gait> = (0..50).map(|_| random_walker(&mut rng)).collect();
    out.extend((0..50).map(|_| random_walk_gait(&mut rng)));
    out
}

/// 40 gaits whose class is encoded in a constant offset of every joint along
/// one axis per class; linearly separable in the raw coordinates.
pub fn separable_corpus(seed: u64) -> Vec<(Gait, EmotionLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..40)
        .map(|k| {
            let label = EmotionLabel::ALL[k % 4];
            let axis = label.index() % 3;
            let sign = if label.index() == 3 { -1.0 } else { 1.0 };
            let n = rng.random_range(20..40);
            let frames = (0..n)
                .map(|_| {
                    let mut c = [0.0; 48];
                    for (i, v) in c.iter_mut().enumerate() {
                        *v = rng.random_range(-0.1..0.1);
                        if i % 3 == axis && i >= 3 {
                            *v += sign * 0.5;
                        }
                    }
                    c[0] = 0.0;
                    c[1] = 0.0;
                    c[2] = 0.0;
                    Pose::new(c).unwrap()
                })
                .collect();
            (Gait::new(format!("sep_{k}"), 30.0, frames).unwrap(), label)
        })
        .collect()
}

pub struct RatingsFixture {
    pub csv: String,
    /// Expected label per gait, in file order.
    pub expected: Vec<(String, Option<EmotionLabel>)>,
}

/// 20 gaits rated by three participants. Means are hand-checkable; the
/// last two gaits are unlabeled (none above 3.5; two above 3.5).
pub fn ratings_fixture() -> RatingsFixture {
    use EmotionLabel::*;
    #[rustfmt::skip]
    let rows: [(&str, [[u8; 4]; 3], Option<EmotionLabel>); 20] = [
        // means: (4.33, 1.33, 1, 2)
        ("g00", [[5, 1, 1, 2], [4, 2, 1, 2], [4, 1, 1, 2]], Some(Happy)),
        ("g01", [[1, 5, 1, 1], [2, 4, 1, 1], [1, 4, 2, 1]], Some(Angry)),
        ("g02", [[1, 1, 5, 2], [1, 2, 4, 2], [2, 1, 5, 3]], Some(Sad)),
        ("g03", [[2, 2, 2, 4], [2, 1, 2, 4], [1, 2, 2, 5]], Some(Neutral)),
        // happy mean 3.67
        ("g04", [[4, 1, 1, 3], [3, 2, 2, 3], [4, 1, 1, 2]], Some(Happy)),
        ("g05", [[5, 3, 1, 1], [5, 2, 1, 1], [4, 2, 1, 1]], Some(Happy)),
        ("g06", [[2, 4, 1, 1], [2, 4, 2, 1], [3, 3, 1, 1]], Some(Angry)),
        ("g07", [[1, 1, 3, 3], [1, 1, 4, 3], [1, 1, 5, 3]], Some(Sad)),
        ("g08", [[3, 3, 3, 4], [3, 3, 3, 4], [3, 3, 3, 3]], Some(Neutral)),
        ("g09", [[5, 1, 1, 1], [5, 1, 1, 1], [5, 1, 1, 1]], Some(Happy)),
        ("g10", [[1, 5, 1, 1], [1, 5, 1, 1], [1, 5, 1, 1]], Some(Angry)),
        ("g11", [[1, 1, 5, 1], [1, 1, 5, 1], [1, 1, 5, 1]], Some(Sad)),
        ("g12", [[1, 1, 1, 5], [1, 1, 1, 5], [1, 1, 1, 5]], Some(Neutral)),
        ("g13", [[3, 5, 3, 3], [3, 4, 3, 3], [3, 3, 3, 3]], Some(Angry)),
        ("g14", [[2, 2, 4, 3], [2, 2, 4, 3], [3, 2, 3, 3]], Some(Sad)),
        ("g15", [[4, 1, 1, 1], [4, 1, 1, 1], [3, 1, 1, 1]], Some(Happy)),
        ("g16", [[1, 1, 1, 4], [2, 1, 1, 4], [1, 1, 1, 3]], Some(Neutral)),
        ("g17", [[4, 1, 1, 1], [3, 1, 1, 1], [4, 1, 1, 1]], Some(Happy)),
        // none above 3.5
        ("g18", [[3, 3, 3, 3], [3, 2, 3, 4], [4, 3, 3, 3]], None),
        // happy 4.0 and angry 4.0
        ("g19", [[4, 4, 1, 1], [4, 4, 1, 1], [4, 4, 1, 1]], None),
    ];
    let mut csv = String::from("gait_id,participant_id,gender,happy,angry,sad,neutral\n");
    for (id, responses, _) in &rows {
        for (p, r) in responses.iter().enumerate() {
            let gender = ["f", "m", ""][p];
            csv.push_str(&format!("{id},p{p},{gender},{},{},{},{}\n", r[0], r[1], r[2], r[3]));
        }
    }
    RatingsFixture {
        csv,
        expected: rows.iter().map(|(id, _, l)| (id.to_string(), *l)).collect(),
    }
}

/// Two classes split by `x₀ > 0.3` plus a distractor feature; every row is
/// distinct so a depth-1 split separates them.
pub fn axis_separable(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut a = rng.random_range(-1.0..1.0);
            if (a - 0.3f64).abs() < 0.05 {
                a += 0.1;
            }
            vec![a, rng.random_range(-5.0..5.0)]
        })
        .collect();
    let y = x.iter().map(|r| usize::from(r[0] > 0.3)).collect();
    (x, y)
}

/// Twenty points in three features, two classes from a noisy oblique rule.
pub fn toy_set(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let y = x
        .iter()
        .map(|r| {
            let s = r[0] + 0.5 * r[1] + rng.random_range(-0.3..0.3);
            usize::from(s > 0.0)
        })
        .collect();
    (x, y)
}
