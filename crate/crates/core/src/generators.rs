//! Deterministic reference samples: lattices, Fibonacci and Sturmian chains,
//! 2-D products and finite-alphabet perturbed lattices.
//!
//! Nothing here is random. "Perturbed" means a deterministic displacement
//! chosen from a finite alphabet by a coloring rule, which keeps the
//! difference set discrete; identical parameters always give bit-identical
//! samples.

use serde::{Deserialize, Serialize};

use crate::geom::{norm, BoxRegion, Point};
use crate::sample::PointSample;
use crate::{Error, Result};

/// Golden ratio, the long tile length of the Fibonacci chain.
pub const PHI: f64 = 1.618033988749894848204586834365638118;

/// Deterministic coloring of lattice points by alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplacementRule {
    /// Index = (sum of integer coordinates) mod alphabet size.
    Checkerboard,
    /// Index = coordinate along `axis` mod alphabet size.
    Stripes { axis: usize },
}

impl DisplacementRule {
    fn index(&self, z: &[i64], len: usize) -> usize {
        let v = match self {
            DisplacementRule::Checkerboard => z.iter().sum::<i64>(),
            DisplacementRule::Stripes { axis } => z[*axis],
        };
        v.rem_euclid(len as i64) as usize
    }
}

/// One-dimensional chain kinds usable as product factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChainSpec {
    Integers { count: usize },
    Fibonacci { depth: u32 },
    Sturmian { quotients: Vec<u64>, length: usize },
}

impl ChainSpec {
    pub fn build(&self) -> Result<PointSample> {
        match self {
            ChainSpec::Integers { count } => {
                if *count < 1 {
                    return Err(Error::InvalidGenerator("integer chain needs count >= 1".into()));
                }
                let points = (0..=*count).map(|i| Point(vec![i as f64])).collect();
                PointSample::new(
                    1,
                    BoxRegion::new(vec![0.0], vec![*count as f64])?,
                    points,
                    format!("integers-{count}"),
                )
            }
            ChainSpec::Fibonacci { depth } => fibonacci_chain(*depth, 0.0),
            ChainSpec::Sturmian { quotients, length } => sturmian_chain(quotients, *length),
        }
    }
}

/// Full generator parameter set, serializable for configs and reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneratorSpec {
    Lattice {
        basis: Vec<Vec<f64>>,
        window: BoxRegion,
    },
    FibonacciChain {
        depth: u32,
        #[serde(default)]
        origin: f64,
    },
    SturmianChain {
        quotients: Vec<u64>,
        length: usize,
    },
    ProductChain2d {
        x: ChainSpec,
        y: ChainSpec,
    },
    PerturbedLattice {
        alphabet: Vec<Vec<f64>>,
        rule: DisplacementRule,
        window: BoxRegion,
    },
}

pub fn generate(spec: &GeneratorSpec) -> Result<PointSample> {
    match spec {
        GeneratorSpec::Lattice { basis, window } => lattice(basis, window.clone()),
        GeneratorSpec::FibonacciChain { depth, origin } => fibonacci_chain(*depth, *origin),
        GeneratorSpec::SturmianChain { quotients, length } => sturmian_chain(quotients, *length),
        GeneratorSpec::ProductChain2d { x, y } => product_chain_2d(x, y),
        GeneratorSpec::PerturbedLattice {
            alphabet,
            rule,
            window,
        } => perturbed_lattice(alphabet, rule, window.clone()),
    }
}

/// All points of the lattice spanned by `basis` that fall in `window`.
pub fn lattice(basis: &[Vec<f64>], window: BoxRegion) -> Result<PointSample> {
    let dim = window.dim();
    if basis.len() != dim || basis.iter().any(|b| b.len() != dim) {
        return Err(Error::InvalidGenerator(format!(
            "basis must be {dim} vectors of dimension {dim}"
        )));
    }
    let inv = invert(basis).ok_or(Error::SingularBasis)?;
    // Coefficient bounds: map every window corner through the inverse basis.
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for corner_id in 0..(1usize << dim) {
        let corner: Vec<f64> = (0..dim)
            .map(|i| {
                if corner_id >> i & 1 == 1 {
                    window.max()[i]
                } else {
                    window.min()[i]
                }
            })
            .collect();
        let coeff = mat_vec(&inv, &corner);
        for i in 0..dim {
            lo[i] = lo[i].min(coeff[i]);
            hi[i] = hi[i].max(coeff[i]);
        }
    }
    let lo: Vec<i64> = lo.iter().map(|c| c.floor() as i64 - 1).collect();
    let hi: Vec<i64> = hi.iter().map(|c| c.ceil() as i64 + 1).collect();
    let mut points = Vec::new();
    let mut k: Vec<i64> = lo.clone();
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| k[j] as f64 * basis[j][i]).sum())
            .collect();
        if window.contains(&p, 0.0) {
            points.push(Point(p));
        }
        let mut axis = dim;
        for i in (0..dim).rev() {
            if k[i] < hi[i] {
                k[i] += 1;
                axis = i;
                break;
            }
        }
        if axis == dim {
            break;
        }
        for (i, c) in k.iter_mut().enumerate().skip(axis + 1) {
            *c = lo[i];
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidGenerator("no lattice points in window".into()));
    }
    points.sort_by(|a, b| crate::geom::lex_cmp(a.coords(), b.coords()));
    PointSample::new(dim, window, points, format!("lattice-{dim}d"))
}

/// Left endpoints (plus the final right endpoint) of the tiles of the
/// substitution a -> ab, b -> a applied `depth - 1` times to "a", with tile
/// lengths PHI for a and 1 for b. The window is the chain's span.
pub fn fibonacci_chain(depth: u32, origin: f64) -> Result<PointSample> {
    let word = fibonacci_word(depth)?;
    let mut points = Vec::with_capacity(word.len() + 1);
    let mut x = origin;
    points.push(Point(vec![x]));
    for &letter in &word {
        x += if letter == 0 { PHI } else { 1.0 };
        points.push(Point(vec![x]));
    }
    let window = BoxRegion::new(vec![origin], vec![x])?;
    PointSample::new(1, window, points, format!("fibonacci-d{depth}"))
}

/// The substitution word at `depth`: 0 = a (long tile), 1 = b (short tile).
/// Depth 1 is the single letter "a"; the word at depth k is the word at
/// depth k-1 followed by the word at depth k-2.
pub fn fibonacci_word(depth: u32) -> Result<Vec<u8>> {
    if depth < 1 {
        return Err(Error::InvalidGenerator("fibonacci depth must be >= 1".into()));
    }
    let mut prev: Vec<u8> = vec![0];
    if depth == 1 {
        return Ok(prev);
    }
    let mut cur: Vec<u8> = vec![0, 1];
    for _ in 2..depth {
        let next: Vec<u8> = cur.iter().chain(prev.iter()).copied().collect();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Value of the continued fraction [0; q1, q2, ...] with the given quotients
/// repeated cyclically.
pub fn continued_fraction_value(quotients: &[u64]) -> Result<f64> {
    if quotients.is_empty() {
        return Err(Error::InvalidGenerator("quotient list is empty".into()));
    }
    if quotients.iter().any(|&q| q < 1) {
        return Err(Error::InvalidGenerator("partial quotients must be >= 1".into()));
    }
    // Convergent recurrence for [a1; a2, ...]; the leading-zero fraction is
    // its reciprocal. Stops once the terms exceed f64's exact integer range,
    // by which point the value is accurate to ~1e-16.
    let (mut h0, mut h1) = (1.0f64, 0.0f64);
    let (mut k0, mut k1) = (0.0f64, 1.0f64);
    let mut i = 0usize;
    loop {
        let a = quotients[i % quotients.len()] as f64;
        let h = a * h0 + h1;
        let k = a * k0 + k1;
        h1 = h0;
        k1 = k0;
        h0 = h;
        k0 = k;
        i += 1;
        if h0 > 4.0e15 || i > 256 {
            return Ok(k0 / h0);
        }
    }
}

/// Chain with gaps 1 and 2 following the coding of the rotation by the
/// continued-fraction value of the quotients: the n-th gap is 2 when
/// floor((n+1)a) - floor(na) = 1 and 1 otherwise. With quotients all 1 the
/// gap-type sequence equals the Fibonacci substitution word.
pub fn sturmian_chain(quotients: &[u64], length: usize) -> Result<PointSample> {
    if length < 2 {
        return Err(Error::InvalidGenerator("sturmian chain needs length >= 2".into()));
    }
    let alpha = continued_fraction_value(quotients)?;
    let word = sturmian_word(alpha, length - 1);
    let mut points = Vec::with_capacity(length);
    let mut x = 0.0f64;
    points.push(Point(vec![x]));
    for &letter in &word {
        x += if letter == 1 { 2.0 } else { 1.0 };
        points.push(Point(vec![x]));
    }
    let window = BoxRegion::new(vec![0.0], vec![x])?;
    PointSample::new(1, window, points, format!("sturmian-l{length}"))
}

/// First `count` letters of the rotation coding, indexed from n = 1.
pub fn sturmian_word(alpha: f64, count: usize) -> Vec<u8> {
    (1..=count)
        .map(|n| {
            let a = ((n as f64 + 1.0) * alpha).floor();
            let b = (n as f64 * alpha).floor();
            (a - b) as u8
        })
        .collect()
}

/// Cartesian product of two 1-D chains.
pub fn product_chain_2d(x: &ChainSpec, y: &ChainSpec) -> Result<PointSample> {
    let sx = x.build()?;
    let sy = y.build()?;
    let mut points = Vec::with_capacity(sx.len() * sy.len());
    for px in sx.points() {
        for py in sy.points() {
            points.push(Point(vec![px.coords()[0], py.coords()[0]]));
        }
    }
    let window = BoxRegion::new(
        vec![sx.window().min()[0], sy.window().min()[0]],
        vec![sx.window().max()[0], sy.window().max()[0]],
    )?;
    PointSample::new(
        2,
        window,
        points,
        format!("product-{}-x-{}", sx.label(), sy.label()),
    )
}

/// Integer lattice points displaced by a finite alphabet under a coloring
/// rule. Displacement norms must stay below 0.25 so the result remains
/// uniformly discrete.
pub fn perturbed_lattice(
    alphabet: &[Vec<f64>],
    rule: &DisplacementRule,
    window: BoxRegion,
) -> Result<PointSample> {
    let dim = window.dim();
    if alphabet.is_empty() {
        return Err(Error::InvalidGenerator("displacement alphabet is empty".into()));
    }
    if alphabet.iter().any(|d| d.len() != dim) {
        return Err(Error::InvalidGenerator("displacement dimension mismatch".into()));
    }
    if let DisplacementRule::Stripes { axis } = rule {
        if *axis >= dim {
            return Err(Error::InvalidGenerator(format!("stripe axis {axis} out of range")));
        }
    }
    let max_norm = alphabet.iter().map(|d| norm(d)).fold(0.0f64, f64::max);
    if max_norm >= 0.25 {
        return Err(Error::InvalidGenerator(format!(
            "max displacement norm {max_norm} must be < 0.25"
        )));
    }
    let lo: Vec<i64> = window.min().iter().map(|c| c.floor() as i64 - 1).collect();
    let hi: Vec<i64> = window.max().iter().map(|c| c.ceil() as i64 + 1).collect();
    let mut points = Vec::new();
    let mut z = lo.clone();
    loop {
        let d = &alphabet[rule.index(&z, alphabet.len())];
        let p: Vec<f64> = (0..dim).map(|i| z[i] as f64 + d[i]).collect();
        if window.contains(&p, 0.0) {
            points.push(Point(p));
        }
        let mut axis = dim;
        for i in (0..dim).rev() {
            if z[i] < hi[i] {
                z[i] += 1;
                axis = i;
                break;
            }
        }
        if axis == dim {
            break;
        }
        for (i, c) in z.iter_mut().enumerate().skip(axis + 1) {
            *c = lo[i];
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidGenerator("no lattice points in window".into()));
    }
    points.sort_by(|a, b| crate::geom::lex_cmp(a.coords(), b.coords()));
    PointSample::new(dim, window, points, "perturbed-lattice".to_string())
}

fn invert(basis: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = basis.len();
    // Rows of `a` are basis vectors; Gauss-Jordan with partial pivoting.
    let mut a: Vec<Vec<f64>> = basis.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// coeff = inv * corner, where coefficients satisfy point = sum k_j basis_j.
/// `invert` returns the inverse of the matrix whose ROWS are the basis, so
/// coefficients come from the transpose application.
fn mat_vec(inv: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let n = inv.len();
    (0..n).map(|i| (0..n).map(|j| inv[j][i] * v[j]).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_lattice_point_count() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let s = lattice(&[vec![1.0, 0.0], vec![0.0, 1.0]], w).unwrap();
        assert_eq!(s.len(), 121);
    }

    #[test]
    fn doubled_lattice_point_count() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let s = lattice(&[vec![2.0, 0.0], vec![0.0, 2.0]], w).unwrap();
        assert_eq!(s.len(), 36);
    }

    #[test]
    fn sheared_lattice_packing_radius() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![4.0, 4.0]).unwrap();
        let s = lattice(&[vec![1.0, 0.0], vec![0.5, 1.0]], w).unwrap();
        assert!((s.packing_radius().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![4.0, 4.0]).unwrap();
        assert!(matches!(
            lattice(&[vec![1.0, 1.0], vec![2.0, 2.0]], w),
            Err(Error::SingularBasis)
        ));
    }

    #[test]
    fn fibonacci_word_depth_five() {
        // a -> ab -> aba -> abaab -> abaababa
        let w = fibonacci_word(5).unwrap();
        assert_eq!(w, vec![0, 1, 0, 0, 1, 0, 1, 0]);
        let s = fibonacci_chain(5, 0.0).unwrap();
        assert_eq!(s.len(), 9);
    }

    #[test]
    fn fibonacci_tile_counts_follow_fibonacci_numbers() {
        // F_1 = F_2 = 1; tiles at depth k = F_{k+1}.
        let mut f = vec![1usize, 1];
        for k in 2..14 {
            let next = f[k - 1] + f[k - 2];
            f.push(next);
        }
        for depth in 1..=13u32 {
            let w = fibonacci_word(depth).unwrap();
            assert_eq!(w.len(), f[depth as usize], "depth {depth}");
        }
    }

    #[test]
    fn fibonacci_letter_frequency_tends_to_inverse_phi() {
        let w = fibonacci_word(16).unwrap();
        let a_count = w.iter().filter(|&&l| l == 0).count();
        let freq = a_count as f64 / w.len() as f64;
        assert!((freq - 1.0 / PHI).abs() < 1e-3, "freq {freq}");
    }

    #[test]
    fn fibonacci_packing_radius_is_half() {
        let s = fibonacci_chain(10, 0.0).unwrap();
        assert!((s.packing_radius().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sturmian_all_ones_matches_fibonacci_word() {
        let alpha = continued_fraction_value(&[1]).unwrap();
        assert!((alpha - 1.0 / PHI).abs() < 1e-14);
        let sturmian = sturmian_word(alpha, 200);
        let fib = fibonacci_word(13).unwrap();
        let n = sturmian.len().min(fib.len());
        // 1 = long gap corresponds to letter a = 0.
        for i in 0..n {
            assert_eq!(sturmian[i] == 1, fib[i] == 0, "position {i}");
        }
    }

    #[test]
    fn sturmian_large_quotients_have_long_runs() {
        let s = sturmian_chain(&[1, 1000], 2000).unwrap();
        let gaps: Vec<f64> = s
            .points()
            .windows(2)
            .map(|w| w[1].coords()[0] - w[0].coords()[0])
            .collect();
        let mut longest = 0usize;
        let mut run = 0usize;
        let mut prev = f64::NAN;
        for g in gaps {
            if g == prev {
                run += 1;
            } else {
                run = 1;
                prev = g;
            }
            longest = longest.max(run);
        }
        assert!(longest >= 500, "longest identical-gap run {longest}");
    }

    #[test]
    fn sturmian_minimal_length() {
        let s = sturmian_chain(&[1], 2).unwrap();
        assert_eq!(s.len(), 2);
        assert!(matches!(
            sturmian_chain(&[], 10),
            Err(Error::InvalidGenerator(_))
        ));
    }

    #[test]
    fn product_counts_multiply() {
        let s = product_chain_2d(
            &ChainSpec::Fibonacci { depth: 8 },
            &ChainSpec::Fibonacci { depth: 8 },
        )
        .unwrap();
        let chain = fibonacci_chain(8, 0.0).unwrap();
        assert_eq!(s.len(), chain.len() * chain.len());

        let tiny = product_chain_2d(
            &ChainSpec::Fibonacci { depth: 1 },
            &ChainSpec::Fibonacci { depth: 1 },
        )
        .unwrap();
        assert_eq!(tiny.len(), 4);
    }

    #[test]
    fn integer_cross_fibonacci_periods_only_along_first_axis() {
        let s = product_chain_2d(
            &ChainSpec::Integers { count: 24 },
            &ChainSpec::Fibonacci { depth: 7 },
        )
        .unwrap();
        let report = s.detect_periods();
        assert!(report.is_periodic_within_window);
        for c in &report.periods {
            assert!(
                c.translation[1].abs() < 1e-9,
                "unexpected period {:?}",
                c.translation
            );
        }
    }

    #[test]
    fn zero_displacement_is_identity_on_lattice() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![8.0, 8.0]).unwrap();
        let s = perturbed_lattice(&[vec![0.0, 0.0]], &DisplacementRule::Checkerboard, w.clone())
            .unwrap();
        let plain = lattice(&[vec![1.0, 0.0], vec![0.0, 1.0]], w).unwrap();
        assert_eq!(s.len(), plain.len());
        assert!((s.packing_radius().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn checkerboard_displacement_packing_radius() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![20.0, 20.0]).unwrap();
        let s = perturbed_lattice(
            &[vec![0.0, 0.0], vec![0.2, 0.0]],
            &DisplacementRule::Checkerboard,
            w,
        )
        .unwrap();
        assert!((s.packing_radius().unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn oversized_displacement_rejected() {
        let w = BoxRegion::new(vec![0.0, 0.0], vec![8.0, 8.0]).unwrap();
        assert!(perturbed_lattice(
            &[vec![0.0, 0.0], vec![0.3, 0.0]],
            &DisplacementRule::Checkerboard,
            w
        )
        .is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = fibonacci_chain(12, 0.0).unwrap();
        let b = fibonacci_chain(12, 0.0).unwrap();
        assert_eq!(a.points(), b.points());
        let sa = sturmian_chain(&[1, 100], 500).unwrap();
        let sb = sturmian_chain(&[1, 100], 500).unwrap();
        assert_eq!(sa.points(), sb.points());
    }
}
