//! Monomial maps between regular parameter systems and their monoidal
//! transforms. Row `i` of the exponent matrix holds the exponents of `y_i` in
//! `x_1, ..., x_n`. The cone of `S` is the standard cone on `w_1, ..., w_n`; the
//! cone of `R` is spanned by the columns of the matrix. A transform of `R`
//! adds one column to another, a transform of `S` subtracts one row from
//! another.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{FactorOptions, Factorizer};
use crate::formal_real::{integer_combine, FormalReal, RealBasis, Sign};
use crate::lattice::matrix::{determinant, identity, IntMatrix};
use crate::lattice::{cone_coordinates, LatticeVector, TraceStep, UnimodularCone, ValuationVector};

/// Square nonnegative exponent matrix with determinant `±1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialMap {
    a: IntMatrix,
}

impl MonomialMap {
    pub fn new(a: IntMatrix) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidMonomialMap("empty matrix".into()));
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        if a.iter().flatten().any(Signed::is_negative) {
            return Err(Error::InvalidMonomialMap("negative exponent".into()));
        }
        let det = determinant(&a);
        if det.abs() != BigInt::one() {
            return Err(Error::SingularCone { det });
        }
        Ok(MonomialMap { a })
    }

    pub fn from_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    fn submatrix(&self, block: &Block) -> MonomialMap {
        let a = block
            .rows
            .iter()
            .map(|&i| block.cols.iter().map(|&j| self.a[i][j].clone()).collect())
            .collect();
        MonomialMap { a }
    }
}

fn check_valuation(n: usize, nu: &[FormalReal]) -> Result<Arc<RealBasis>> {
    if nu.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: nu.len() });
    }
    for (k, x) in nu.iter().enumerate() {
        if !x.same_basis(&nu[0]) {
            return Err(Error::MixedBasis);
        }
        if x.sign()? != Sign::Positive {
            return Err(Error::InvalidMonomialMap(format!("value of x_{} is not positive", k + 1)));
        }
    }
    Ok(nu[0].basis().clone())
}

/// The cone pair of a monomial map: `sigma` is the standard cone, `tau` is spanned
/// by the columns of the matrix, and `v` has `sigma`-coordinates `nu(y_i)`. The
/// `tau`-coordinates of `v` are checked to be exactly `nu(x)`.
pub fn to_cones(map: &MonomialMap, nu: &[FormalReal]) -> Result<(UnimodularCone, UnimodularCone, ValuationVector)> {
    let n = map.dim();
    let basis = check_valuation(n, nu)?;
    let sigma = UnimodularCone::identity(n);
    let tau = UnimodularCone::new(
        (0..n)
            .map(|j| LatticeVector::new(map.a.iter().map(|row| row[j].clone()).collect()))
            .collect(),
    )?;
    let nu_y = map
        .a
        .iter()
        .map(|row| integer_combine(&basis, row.iter().cloned().zip(nu.iter().cloned())))
        .collect::<Result<Vec<_>>>()?;
    let v = ValuationVector::new(nu_y)?;
    if cone_coordinates(&v, &tau)?.coords() != nu {
        return Err(Error::InvalidMonomialMap("tau-coordinates of v differ from the values of x".into()));
    }
    Ok((sigma, tau, v))
}

/// Rows and columns of one connected component of the support of the matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Connected components of the bipartite graph joining row `i` to column `j`
/// when `a_ij != 0`, ordered by their first row.
pub fn split_blocks(a: &IntMatrix) -> Vec<Block> {
    let n = a.len();
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_zero() {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, n + j));
                parent[ri] = rj;
            }
        }
    }
    let mut blocks: Vec<(usize, Block)> = Vec::new();
    for node in 0..2 * n {
        let root = find(&mut parent, node);
        let pos = match blocks.iter().position(|(r, _)| *r == root) {
            Some(p) => p,
            None => {
                blocks.push((root, Block { rows: vec![], cols: vec![] }));
                blocks.len() - 1
            }
        };
        if node < n {
            blocks[pos].1.rows.push(node);
        } else {
            blocks[pos].1.cols.push(node - n);
        }
    }
    let mut blocks: Vec<Block> = blocks.into_iter().map(|(_, b)| b).collect();
    blocks.sort_by_key(|b| b.rows.first().copied().unwrap_or(usize::MAX));
    blocks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    R,
    S,
}

impl Ring {
    fn var(self) -> char {
        match self {
            Ring::R => 'x',
            Ring::S => 'y',
        }
    }
}

/// Blow-up of `ring` at the parameters `center`, in the chart where the
/// `divisor` parameter divides the other one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidalTransform {
    pub ring: Ring,
    pub center: (usize, usize),
    pub divisor: usize,
}

impl MonoidalTransform {
    pub fn dividend(&self) -> usize {
        if self.divisor == self.center.0 {
            self.center.1
        } else {
            self.center.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScriptStep {
    Transform(MonoidalTransform),
    /// New parameter `k` is old parameter `perm[k]`.
    Relabel { ring: Ring, perm: Vec<usize> },
}

impl ScriptStep {
    pub fn ring(&self) -> Ring {
        match self {
            ScriptStep::Transform(t) => t.ring,
            ScriptStep::Relabel { ring, .. } => *ring,
        }
    }

    /// The matrix `E` with `A' = A E` for `R` and `A' = E A` for `S`.
    pub fn elementary_matrix(&self, n: usize) -> IntMatrix {
        let mut e = identity(n);
        match self {
            ScriptStep::Transform(t) => match t.ring {
                Ring::R => e[t.dividend()][t.divisor] = BigInt::one(),
                Ring::S => e[t.dividend()][t.divisor] = -BigInt::one(),
            },
            ScriptStep::Relabel { ring, perm } => {
                e = vec![vec![BigInt::zero(); n]; n];
                for (k, &p) in perm.iter().enumerate() {
                    match ring {
                        Ring::R => e[p][k] = BigInt::one(),
                        Ring::S => e[k][p] = BigInt::one(),
                    }
                }
            }
        }
        e
    }

    fn render(&self) -> String {
        match self {
            ScriptStep::Transform(t) => {
                let c = t.ring.var();
                format!(
                    "{:?}: blow up ({c}_{}, {c}_{}), chart {c}_{} | {c}_{}",
                    t.ring,
                    t.center.0 + 1,
                    t.center.1 + 1,
                    t.divisor + 1,
                    t.dividend() + 1
                )
            }
            ScriptStep::Relabel { ring, perm } => {
                let c = ring.var();
                let names: Vec<String> = perm.iter().map(|p| format!("{c}_{}", p + 1)).collect();
                format!("{ring:?}: relabel as ({})", names.join(", "))
            }
        }
    }
}

/// Transforms of `R` and of `S`, applied in that order, that bring the
/// exponent matrix to the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidalScript {
    pub n: usize,
    pub r_transforms: Vec<ScriptStep>,
    pub s_transforms: Vec<ScriptStep>,
}

impl MonoidalScript {
    pub fn transform_count(steps: &[ScriptStep]) -> usize {
        steps.iter().filter(|s| matches!(s, ScriptStep::Transform(_))).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for step in self.r_transforms.iter().chain(&self.s_transforms) {
            let _ = writeln!(out, "{}", step.render());
        }
        out
    }
}

fn translate(step: &TraceStep, ring: Ring, index: &[usize], n: usize) -> ScriptStep {
    match step {
        TraceStep::Star(rec) => ScriptStep::Transform(MonoidalTransform {
            ring,
            center: (index[rec.pair.0], index[rec.pair.1]),
            divisor: index[rec.replaced],
        }),
        TraceStep::Permute { perm } => {
            let mut full: Vec<usize> = (0..n).collect();
            for (k, &p) in perm.iter().enumerate() {
                full[index[k]] = index[p];
            }
            ScriptStep::Relabel { ring, perm: full }
        }
    }
}

/// Factors each block of the map with [`Factorizer::factor`] and reads the
/// `tau` steps as transforms of `R`, the `sigma` steps as transforms of `S`.
/// The replaced generator names the divisor. The script is checked with
/// [`verify_script`] before it is returned.
pub fn factor_monomial(map: &MonomialMap, nu: &[FormalReal], options: FactorOptions) -> Result<MonoidalScript> {
    let n = map.dim();
    check_valuation(n, nu)?;
    let mut script = MonoidalScript {
        n,
        r_transforms: vec![],
        s_transforms: vec![],
    };
    // Each block ends at its own identity, pairing row `rows[k]` with column `cols[k]`.
    let mut pairing: Vec<usize> = (0..n).collect();
    for block in split_blocks(&map.a) {
        if block.rows.len() != block.cols.len() {
            return Err(Error::InvalidMonomialMap("block is not square".into()));
        }
        for (&r, &c) in block.rows.iter().zip(&block.cols) {
            pairing[r] = c;
        }
        let sub = map.submatrix(&block);
        if sub.dim() == 1 {
            continue;
        }
        let sub_nu: Vec<FormalReal> = block.cols.iter().map(|&j| nu[j].clone()).collect();
        let (sigma, tau, v) = to_cones(&sub, &sub_nu)?;
        let trace = Factorizer::new(options).factor(&tau, &sigma, &v)?;
        script
            .r_transforms
            .extend(trace.tau_steps.iter().map(|s| translate(s, Ring::R, &block.cols, n)));
        script
            .s_transforms
            .extend(trace.sigma_steps.iter().map(|s| translate(s, Ring::S, &block.rows, n)));
    }
    if pairing.iter().enumerate().any(|(k, &p)| k != p) {
        script.r_transforms.push(ScriptStep::Relabel {
            ring: Ring::R,
            perm: pairing,
        });
    }
    let report = verify_script(map, nu, &script);
    if !report.ok {
        let v = report.violation.expect("failed report carries a violation");
        return Err(Error::NotIdentity(v.reason));
    }
    Ok(script)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptViolation {
    pub ring: Ring,
    /// Index into that ring's list; `None` for the final matrix.
    pub step: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptReport {
    pub ok: bool,
    pub r_transforms: usize,
    pub s_transforms: usize,
    pub violation: Option<ScriptViolation>,
}

struct Replay {
    a: IntMatrix,
    nu_x: Vec<FormalReal>,
    nu_y: Vec<FormalReal>,
}

impl Replay {
    fn apply(&mut self, step: &ScriptStep) -> std::result::Result<(), String> {
        let n = self.a.len();
        match step {
            ScriptStep::Transform(t) => {
                let (i, j) = t.center;
                if i >= n || j >= n || i == j {
                    return Err(format!("invalid center ({i}, {j})"));
                }
                if t.divisor != i && t.divisor != j {
                    return Err(format!("divisor {} is not in the center", t.divisor));
                }
                let (d, e) = (t.divisor, t.dividend());
                let values = match t.ring {
                    Ring::R => &mut self.nu_x,
                    Ring::S => &mut self.nu_y,
                };
                match values[e].compare(&values[d]) {
                    Ok(Sign::Positive) => {}
                    Ok(_) => return Err("valuation order violated".into()),
                    Err(err) => return Err(err.to_string()),
                }
                values[e] = values[e].try_sub(&values[d]).map_err(|err| err.to_string())?;
                match t.ring {
                    Ring::R => {
                        for row in self.a.iter_mut() {
                            row[d] = &row[d] + &row[e];
                        }
                    }
                    Ring::S => {
                        let sub = self.a[d].clone();
                        for (x, y) in self.a[e].iter_mut().zip(&sub) {
                            *x -= y;
                        }
                    }
                }
                if self.a.iter().flatten().any(Signed::is_negative) {
                    return Err("negative exponent".into());
                }
            }
            ScriptStep::Relabel { ring, perm } => {
                let mut seen = vec![false; n];
                if perm.len() != n || perm.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
                    return Err("invalid permutation".into());
                }
                match ring {
                    Ring::R => {
                        self.a = self.a.iter().map(|row| perm.iter().map(|&p| row[p].clone()).collect()).collect();
                        self.nu_x = perm.iter().map(|&p| self.nu_x[p].clone()).collect();
                    }
                    Ring::S => {
                        self.a = perm.iter().map(|&p| self.a[p].clone()).collect();
                        self.nu_y = perm.iter().map(|&p| self.nu_y[p].clone()).collect();
                    }
                }
            }
        }
        Ok(())
    }
}

/// Applies the transforms of `R` as column operations and then those of `S` as
/// row operations, checking each chart against the current values (the
/// dividend must have the larger value) and that exponents stay nonnegative.
/// The matrix must end at the identity. Never fails; problems are reported.
pub fn verify_script(map: &MonomialMap, nu: &[FormalReal], script: &MonoidalScript) -> ScriptReport {
    let mut report = ScriptReport {
        ok: false,
        r_transforms: MonoidalScript::transform_count(&script.r_transforms),
        s_transforms: MonoidalScript::transform_count(&script.s_transforms),
        violation: None,
    };
    let fail = |ring, step, reason: String| Some(ScriptViolation { ring, step, reason });
    let n = map.dim();
    let start = check_valuation(n, nu).and_then(|basis| {
        let nu_y = map
            .a
            .iter()
            .map(|row| integer_combine(&basis, row.iter().cloned().zip(nu.iter().cloned())))
            .collect::<Result<Vec<_>>>()?;
        Ok(nu_y)
    });
    let nu_y = match start {
        Ok(nu_y) => nu_y,
        Err(e) => {
            report.violation = fail(Ring::R, None, e.to_string());
            return report;
        }
    };
    if script.n != n {
        report.violation = fail(Ring::R, None, format!("script for dimension {} on a map of dimension {n}", script.n));
        return report;
    }
    let mut replay = Replay {
        a: map.a.clone(),
        nu_x: nu.to_vec(),
        nu_y,
    };
    for (ring, steps) in [(Ring::R, &script.r_transforms), (Ring::S, &script.s_transforms)] {
        for (k, step) in steps.iter().enumerate() {
            if step.ring() != ring {
                report.violation = fail(ring, Some(k), format!("step recorded for {:?}", step.ring()));
                return report;
            }
            if let Err(reason) = replay.apply(step) {
                report.violation = fail(ring, Some(k), reason);
                return report;
            }
        }
    }
    if replay.a != identity(n) {
        report.violation = fail(Ring::S, None, "final matrix is not the identity".into());
        return report;
    }
    report.ok = true;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix::mat_mul;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis() -> Arc<RealBasis> {
        RealBasis::default_sqrt(5)
    }

    fn fr(c: &[i64]) -> FormalReal {
        let mut c = c.to_vec();
        c.resize(basis().size(), 0);
        FormalReal::from_ints(&basis(), &c).unwrap()
    }

    fn sqrt2_sqrt3() -> Vec<FormalReal> {
        vec![fr(&[0, 1]), fr(&[0, 0, 1])]
    }

    #[test]
    fn identity_map() {
        let map = MonomialMap::from_rows(&[&[1, 0], &[0, 1]]).unwrap();
        let (sigma, tau, v) = to_cones(&map, &sqrt2_sqrt3()).unwrap();
        assert_eq!(sigma, tau);
        assert_eq!(v.ambient(), sqrt2_sqrt3().as_slice());
        let script = factor_monomial(&map, &sqrt2_sqrt3(), FactorOptions::default()).unwrap();
        assert!(script.r_transforms.is_empty() && script.s_transforms.is_empty());
        assert!(verify_script(&map, &sqrt2_sqrt3(), &script).ok);
    }

    #[test]
    fn unipotent_map_cones() {
        let map = MonomialMap::from_rows(&[&[1, 1], &[0, 1]]).unwrap();
        let (_, tau, v) = to_cones(&map, &sqrt2_sqrt3()).unwrap();
        assert_eq!(tau, UnimodularCone::from_rows(&[&[1, 0], &[1, 1]]).unwrap());
        assert_eq!(v.ambient(), &[fr(&[0, 1, 1]), fr(&[0, 0, 1])]);
        assert_eq!(cone_coordinates(&v, &tau).unwrap().coords(), sqrt2_sqrt3().as_slice());
    }

    #[test]
    fn singular_map() {
        assert!(matches!(
            MonomialMap::from_rows(&[&[2, 0], &[0, 1]]),
            Err(Error::SingularCone { .. })
        ));
    }

    #[test]
    fn blocks() {
        assert_eq!(split_blocks(&identity(3)).len(), 3);
        let one = split_blocks(&MonomialMap::from_rows(&[&[1, 1], &[0, 1]]).unwrap().a);
        assert_eq!(one, vec![Block { rows: vec![0, 1], cols: vec![0, 1] }]);
        let map = MonomialMap::from_rows(&[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        assert_eq!(
            split_blocks(&map.a),
            vec![
                Block { rows: vec![0, 1], cols: vec![0, 1] },
                Block { rows: vec![2], cols: vec![2] }
            ]
        );
    }

    #[test]
    fn unipotent_map_script() {
        let map = MonomialMap::from_rows(&[&[1, 1], &[0, 1]]).unwrap();
        let script = factor_monomial(&map, &sqrt2_sqrt3(), FactorOptions::default()).unwrap();
        assert_eq!(MonoidalScript::transform_count(&script.r_transforms), 0);
        assert_eq!(
            script.s_transforms,
            vec![ScriptStep::Transform(MonoidalTransform {
                ring: Ring::S,
                center: (0, 1),
                divisor: 1
            })]
        );
        assert_eq!(script.to_text(), "S: blow up (y_1, y_2), chart y_2 | y_1\n");
        let report = verify_script(&map, &sqrt2_sqrt3(), &script);
        assert!(report.ok, "{report:?}");

        let mut bad = script.clone();
        bad.s_transforms[0] = ScriptStep::Transform(MonoidalTransform {
            ring: Ring::S,
            center: (0, 1),
            divisor: 0,
        });
        let report = verify_script(&map, &sqrt2_sqrt3(), &bad);
        assert_eq!(report.violation.unwrap().reason, "valuation order violated");
    }

    #[test]
    fn empty_script_on_identity() {
        let map = MonomialMap::new(identity(3)).unwrap();
        let nu = vec![fr(&[0, 1]), fr(&[0, 0, 1]), fr(&[0, 0, 0, 1])];
        let script = MonoidalScript { n: 3, r_transforms: vec![], s_transforms: vec![] };
        assert!(verify_script(&map, &nu, &script).ok);
    }

    #[test]
    fn permutation_map_needs_relabel() {
        let map = MonomialMap::from_rows(&[&[0, 1], &[1, 0]]).unwrap();
        let script = factor_monomial(&map, &sqrt2_sqrt3(), FactorOptions::default()).unwrap();
        assert!(verify_script(&map, &sqrt2_sqrt3(), &script).ok);
        assert_eq!(MonoidalScript::transform_count(&script.r_transforms), 0);
        assert_eq!(MonoidalScript::transform_count(&script.s_transforms), 0);
    }

    fn random_map(rng: &mut ChaCha8Rng, n: usize) -> MonomialMap {
        let mut a = identity(n);
        for _ in 0..rng.gen_range(0..8) {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i != j {
                let src = a[j].clone();
                for (x, y) in a[i].iter_mut().zip(&src) {
                    *x += y;
                }
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            perm.swap(k, rng.gen_range(0..=k));
        }
        MonomialMap::new(perm.iter().map(|&p| a[p].clone()).collect()).unwrap()
    }

    fn random_nu(rng: &mut ChaCha8Rng, n: usize) -> Vec<FormalReal> {
        let b = RealBasis::default_sqrt(n + 1);
        (0..n)
            .map(|k| {
                let mut c = vec![BigRational::zero(); n + 1];
                c[0] = BigRational::from_integer(rng.gen_range(0..5).into());
                c[k + 1] = BigRational::from_integer(rng.gen_range(1..4).into());
                FormalReal::from_coeffs(&b, c).unwrap()
            })
            .collect()
    }

    #[test]
    fn random_maps_recompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(1..=3);
            let map = random_map(&mut rng, n);
            let nu = random_nu(&mut rng, n);
            let script = factor_monomial(&map, &nu, FactorOptions::default()).unwrap();
            assert!(verify_script(&map, &nu, &script).ok);
            // Elementary matrices recompose to the identity as well.
            let mut a = map.matrix().clone();
            for s in &script.r_transforms {
                a = mat_mul(&a, &s.elementary_matrix(n));
            }
            for s in &script.s_transforms {
                a = mat_mul(&s.elementary_matrix(n), &a);
            }
            assert_eq!(a, identity(n));
            let blocks = split_blocks(map.matrix());
            for step in script.r_transforms.iter().chain(&script.s_transforms) {
                if let ScriptStep::Transform(t) = step {
                    let idx = |b: &Block| if t.ring == Ring::R { b.cols.clone() } else { b.rows.clone() };
                    assert!(blocks.iter().any(|b| idx(b).contains(&t.center.0) && idx(b).contains(&t.center.1)));
                }
            }
        }
    }
}
