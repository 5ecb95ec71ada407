//! Random-diagonal triangulation baseline and the per-mesh comparison report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::entropy::{conditional_entropy, static_entropy};
use crate::error::{Error, Result};
use crate::fixed::select_best_encoding;
use crate::mesh::QtMesh;
use crate::preprocess::{patch_holes, remove_valence_two};
use crate::traversal::{encode_clers, ClersSequence, Gate};

/// Seeds used when the caller gives none.
pub const DEFAULT_SEEDS: usize = 8;

/// Memory depths reported for both methods.
pub const REPORT_MEMORIES: [usize; 2] = [1, 3];

/// One diagonal flag per quad, in face order. `true` cuts from corner 1 to corner 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitChoice {
    pub seed: u64,
    pub flags: Vec<bool>,
}

impl SplitChoice {
    /// Draws one fair flag per quad. A diagonal that would repeat an
    /// existing edge or an earlier diagonal is flipped, since the result
    /// would not be manifold; only quads around valence-two vertices hit this.
    pub fn draw(mesh: &QtMesh, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut edges: FxHashSet<(usize, usize)> = mesh
            .faces()
            .flat_map(|f| (0..f.len()).map(move |k| key(f[k], f[(k + 1) % f.len()])))
            .collect();
        let mut flags = Vec::with_capacity(mesh.face_count());
        for f in mesh.faces().filter(|f| f.len() == 4) {
            let mut other = rng.random_bool(0.5);
            let diagonal = |other: bool| if other { key(f[1], f[3]) } else { key(f[0], f[2]) };
            if edges.contains(&diagonal(other)) {
                other = !other;
            }
            edges.insert(diagonal(other));
            flags.push(other);
        }
        SplitChoice { seed, flags }
    }
}

/// Triangulates every quad along the diagonal chosen by `choice`; triangles pass through.
///
/// Fails when a diagonal coincides with an edge that already exists, which
/// makes the result non-manifold (two quads sharing a valence-two vertex can do this).
/// Choices from [`SplitChoice::draw`] avoid that when the mesh allows it.
pub fn apply_split(mesh: &QtMesh, choice: &SplitChoice) -> Result<QtMesh> {
    let mut flags = choice.flags.iter();
    let mut faces: Vec<Vec<usize>> = Vec::with_capacity(2 * mesh.face_count());
    for f in mesh.faces() {
        if f.len() == 3 {
            faces.push(f.to_vec());
            continue;
        }
        let other = *flags
            .next()
            .ok_or_else(|| Error::Precondition("fewer split flags than quads".into()))?;
        if other {
            faces.push(vec![f[1], f[2], f[3]]);
            faces.push(vec![f[3], f[0], f[1]]);
        } else {
            faces.push(vec![f[0], f[1], f[2]]);
            faces.push(vec![f[2], f[3], f[0]]);
        }
    }
    if flags.next().is_some() {
        return Err(Error::Precondition("more split flags than quads".into()));
    }
    let out = QtMesh::new(mesh.vertex_count(), faces)?;
    match mesh.coords() {
        Some(c) => out.with_coords(c.to_vec()),
        None => Ok(out),
    }
}

/// Seeded uniform random triangulation of the quads of `mesh`.
pub fn random_split(mesh: &QtMesh, seed: u64) -> Result<QtMesh> {
    apply_split(mesh, &SplitChoice::draw(mesh, seed))
}

/// Letter-level conditional entropy in bits of a triangle sequence.
pub fn letter_entropy(seq: &ClersSequence, memory: usize) -> f64 {
    let letters: Vec<usize> = seq.labels().into_iter().map(|l| l.index()).collect();
    conditional_entropy(&letters, 5, memory)
}

/// Mean and spread of a per-seed measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedStats {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

impl SeedStats {
    fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        SeedStats {
            samples,
            mean,
            std_dev: var.sqrt(),
        }
    }
}

/// One row of the comparison report. All rates are bits per input vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub mesh: String,
    pub v: usize,
    pub q: usize,
    pub t: usize,
    pub holes: usize,
    /// Best-of-four fixed code with its id bits, after hole patching and
    /// valence-two removal. `None` when triangles remain.
    pub fixed_bpv: Option<f64>,
    /// Face-code entropy of the quad method at depths 1 and 3.
    pub entropy_bpv: [f64; 2],
    /// Letter entropy of the random-split triangle method at depths 1 and 3.
    pub split_bpv: [SeedStats; 2],
}

impl ComparisonRow {
    /// Relative saving of the fixed code over random-split entropy(1).
    pub fn fixed_saving(&self) -> Option<f64> {
        self.fixed_bpv.map(|f| 1.0 - f / self.split_bpv[0].mean)
    }

    /// Relative saving of quad entropy(3) over random-split entropy(3).
    pub fn entropy_saving(&self) -> f64 {
        1.0 - self.entropy_bpv[1] / self.split_bpv[1].mean
    }
}

/// Runs both methods on `mesh`, averaging the random split over `seeds`.
pub fn compare_methods(name: &str, mesh: &QtMesh, seeds: &[u64]) -> Result<ComparisonRow> {
    let counts = mesh.topo_counts();
    let v = mesh.vertex_count();
    let (patched, _) = patch_holes(mesh)?;
    let seq = encode_clers(&patched, Gate::Default)?.sequence;
    let entropy_bpv = REPORT_MEMORIES.map(|n| static_entropy(&seq, n, v).pair_bpv);

    let fixed_bpv = if patched.is_pure_quad() {
        match remove_valence_two(&patched) {
            Ok(red) => {
                let s = encode_clers(&red.mesh, Gate::Default)?.sequence;
                Some(select_best_encoding(&s)?.total_bits() as f64 / v as f64)
            }
            Err(Error::IrreducibleConfiguration(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let mut samples = [Vec::new(), Vec::new()];
    for &seed in seeds {
        let tri = random_split(&patched, seed)?;
        let s = encode_clers(&tri, Gate::Default)?.sequence;
        for (k, &n) in REPORT_MEMORIES.iter().enumerate() {
            samples[k].push(letter_entropy(&s, n) / v as f64);
        }
    }
    let [s1, s3] = samples;
    Ok(ComparisonRow {
        mesh: name.to_string(),
        v,
        q: counts.q,
        t: counts.t,
        holes: counts.holes,
        fixed_bpv,
        entropy_bpv,
        split_bpv: [SeedStats::from_samples(s1), SeedStats::from_samples(s3)],
    })
}

/// Seeds `0..count`.
pub fn default_seeds(count: usize) -> Vec<u64> {
    (0..count as u64).collect()
}

pub const CSV_HEADER: [&str; 10] = [
    "mesh",
    "V",
    "Q",
    "T",
    "holes",
    "fixed bpv",
    "entropy n=1 bpv",
    "entropy n=3 bpv",
    "random-split n=1",
    "random-split n=3",
];

fn fmt_rate(x: f64) -> String {
    format!("{x:.3}")
}

fn row_fields(r: &ComparisonRow) -> [String; 10] {
    [
        r.mesh.clone(),
        r.v.to_string(),
        r.q.to_string(),
        r.t.to_string(),
        r.holes.to_string(),
        r.fixed_bpv.map(fmt_rate).unwrap_or_default(),
        fmt_rate(r.entropy_bpv[0]),
        fmt_rate(r.entropy_bpv[1]),
        fmt_rate(r.split_bpv[0].mean),
        fmt_rate(r.split_bpv[1].mean),
    ]
}

/// CSV with [`CSV_HEADER`] columns. An empty fixed cell means the fixed code does not apply.
pub fn write_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Internal(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record(row_fields(r)).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

/// Aligned text table, with savings and seed spread appended.
pub fn format_table(rows: &[ComparisonRow]) -> String {
    let mut cells: Vec<Vec<String>> = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect()];
    cells[0].extend(["fixed saving".into(), "n=3 saving".into(), "split sd n=1/n=3".into()]);
    for r in rows {
        let mut line = row_fields(r).to_vec();
        if line[5].is_empty() {
            line[5] = "-".into();
        }
        line.push(r.fixed_saving().map(|s| format!("{:.0}%", 100.0 * s)).unwrap_or("-".into()));
        line.push(format!("{:.0}%", 100.0 * r.entropy_saving()));
        line.push(format!("{:.3}/{:.3}", r.split_bpv[0].std_dev, r.split_bpv[1].std_dev));
        cells.push(line);
    }
    let widths: Vec<usize> = (0..cells[0].len())
        .map(|c| cells.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &cells {
        let padded: Vec<String> = line.iter().zip(&widths).map(|(s, &w)| format!("{s:>w$}")).collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;
    use crate::traversal::{label_histogram, Label};

    #[test]
    fn cube_split_counts() {
        let t = random_split(&generate::cube(), 7).unwrap();
        assert_eq!(t.face_count(), 12);
        assert_eq!(t.vertex_count(), 8);
        assert_eq!(t.edge_count(), 18);
        assert!(t.is_pure_triangle());
    }

    #[test]
    fn split_is_reproducible() {
        let m = generate::grid(10, 10);
        assert_eq!(random_split(&m, 3).unwrap(), random_split(&m, 3).unwrap());
        assert_eq!(SplitChoice::draw(&m, 3), SplitChoice::draw(&m, 3));
    }

    #[test]
    fn seeds_flip_half_the_diagonals() {
        let m = generate::grid(25, 40);
        let a = SplitChoice::draw(&m, 1);
        let b = SplitChoice::draw(&m, 2);
        assert_eq!(a.flags.len(), 1000);
        let flips = a.flags.iter().zip(&b.flags).filter(|(x, y)| x != y).count();
        assert!((450..=550).contains(&flips), "{flips}");
    }

    #[test]
    fn split_sequences_obey_triangle_laws() {
        let m = generate::triquads_from_triangles(&generate::sphere_hull(200, 4)).unwrap();
        for seed in 0..4 {
            let t = random_split(&m, seed).unwrap();
            let s = encode_clers(&t, Gate::Default).unwrap().sequence;
            let h = label_histogram(&s, &t.topo_counts()).unwrap();
            assert_eq!(h.letter(Label::C), t.vertex_count() - 2);
            assert_eq!(h.letter(Label::S) + 1, h.letter(Label::E));
        }
    }

    #[test]
    fn shared_diagonal_is_rejected_and_drawn_around() {
        // a valence-two vertex makes the two quads' 1-3 diagonals coincide
        let m = generate::insert_valence_two(&generate::cube(), &[(0, false)]).unwrap();
        let quads = m.face_count();
        let mut flags = vec![false; quads];
        flags[0] = true;
        flags[quads - 1] = true;
        assert!(apply_split(&m, &SplitChoice { seed: 0, flags }).is_err());
        for seed in 0..32 {
            let t = random_split(&m, seed).unwrap();
            assert_eq!(t.face_count(), 2 * quads);
        }
    }

    #[test]
    fn grid_row_and_csv() {
        let row = compare_methods("grid", &generate::grid(20, 20), &default_seeds(3)).unwrap();
        assert_eq!((row.v, row.q, row.t, row.holes), (441, 400, 0, 1));
        assert!(row.entropy_bpv[1] <= row.entropy_bpv[0]);
        assert!(row.entropy_bpv[1] < row.split_bpv[1].mean);
        assert_eq!(row.split_bpv[0].samples.len(), 3);
        let csv = write_csv(std::slice::from_ref(&row)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 10);
        assert!(lines.next().unwrap().starts_with("grid,441,400,0,1,"));
        assert!(format_table(&[row]).lines().count() == 2);
    }
}
