//! CPTP maps in Kraus form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    c64, random_haar_unitary, tensor, ComplexMatrix, DensityMatrix, HermitianMatrix, MatrixFile,
    UnitaryMatrix,
};
use crate::tolerance::tolerances;

/// Stinespring data `E(ρ) = Tr_2 U (ρ ⊗ |0><0|) U*` with environment dimension `env_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilation {
    pub unitary: UnitaryMatrix,
    pub env_dim: usize,
}

impl Dilation {
    /// The environment state `τ = |0><0|`.
    pub fn tau(&self) -> ComplexMatrix {
        let mut t = ComplexMatrix::zeros(self.env_dim, self.env_dim);
        t[(0, 0)] = c64(1.0, 0.0);
        t
    }
}

/// A completely positive trace preserving map `ρ ↦ Σ_j K_j ρ K_j*`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    dim_in: usize,
    dim_out: usize,
    dilation: Option<Dilation>,
}

impl KrausChannel {
    /// Validates shapes and `Σ K_j* K_j = I`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidParameter("a channel needs at least one Kraus operator".into())
        })?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            if (k.rows(), k.cols()) != (dim_out, dim_in) {
                return Err(Error::mismatch(
                    "Kraus operator shape",
                    format!("{dim_out}x{dim_in}"),
                    format!("{}x{}", k.rows(), k.cols()),
                ));
            }
            sum = &sum + &k.adjoint().matmul(k)?;
        }
        let defect = sum.distance(&ComplexMatrix::identity(dim_in));
        if defect > tolerances().kraus_completeness {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(Self {
            kraus,
            dim_in,
            dim_out,
            dilation: None,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim)]).expect("identity channel")
    }

    /// `ρ ↦ (1 - λ) ρ + λ I / dim`.
    pub fn depolarizing(dim: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing lambda must lie in [0, 1], got {lambda}"
            )));
        }
        let mut kraus = Vec::new();
        if lambda < 1.0 {
            kraus.push(ComplexMatrix::identity(dim).scale((1.0 - lambda).sqrt()));
        }
        if lambda > 0.0 {
            let w = (lambda / dim as f64).sqrt();
            for i in 0..dim {
                for j in 0..dim {
                    let mut e = ComplexMatrix::zeros(dim, dim);
                    e[(i, j)] = c64(w, 0.0);
                    kraus.push(e);
                }
            }
        }
        Self::new(kraus)
    }

    /// `ρ ↦ (1/M) Σ_j U_j ρ U_j*`.
    pub fn unitary_mixing(us: &[UnitaryMatrix]) -> Result<Self> {
        let first = us.first().ok_or_else(|| {
            Error::InvalidParameter("unitary mixing needs at least one unitary".into())
        })?;
        if let Some(u) = us.iter().find(|u| u.dim() != first.dim()) {
            return Err(Error::mismatch("unitary dimensions", first.dim(), u.dim()));
        }
        let w = 1.0 / (us.len() as f64).sqrt();
        Self::new(us.iter().map(|u| u.as_matrix().scale(w)).collect())
    }

    /// Partial trace on `C^n ⊗ C^m` over factor 1 or 2.
    pub fn partial_trace_channel(n: usize, m: usize, factor: u8) -> Result<Self> {
        let kraus = match factor {
            // I_n ⊗ <a|
            2 => (0..m)
                .map(|a| {
                    ComplexMatrix::from_fn(n, n * m, |i, c| {
                        if c == i * m + a {
                            c64(1.0, 0.0)
                        } else {
                            c64(0.0, 0.0)
                        }
                    })
                })
                .collect(),
            // <i| ⊗ I_m
            1 => (0..n)
                .map(|i| {
                    ComplexMatrix::from_fn(m, n * m, |a, c| {
                        if c == i * m + a {
                            c64(1.0, 0.0)
                        } else {
                            c64(0.0, 0.0)
                        }
                    })
                })
                .collect(),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "factor must be 1 or 2, got {factor}"
                )))
            }
        };
        Self::new(kraus)
    }

    /// Random channel from a Haar unitary on `C^dim ⊗ C^env_dim`:
    /// `K_j = (I ⊗ <j|) U (I ⊗ |0>)`. Keeps the dilation.
    pub fn random_cptp(dim: usize, env_dim: usize, seed: u64) -> Result<Self> {
        if env_dim == 0 || dim == 0 {
            return Err(Error::InvalidParameter(
                "dim and env_dim must be positive".into(),
            ));
        }
        let u = random_haar_unitary(dim * env_dim, seed)?;
        Self::from_dilation(
            Dilation {
                unitary: u,
                env_dim,
            },
            dim,
        )
    }

    pub fn from_dilation(dilation: Dilation, dim: usize) -> Result<Self> {
        let env = dilation.env_dim;
        if dilation.unitary.dim() != dim * env {
            return Err(Error::mismatch(
                "dilation unitary",
                dim * env,
                dilation.unitary.dim(),
            ));
        }
        let u = dilation.unitary.as_matrix();
        let kraus = (0..env)
            .map(|j| ComplexMatrix::from_fn(dim, dim, |a, i| u[(a * env + j, i * env)]))
            .collect();
        let mut ch = Self::new(kraus)?;
        ch.dilation = Some(dilation);
        Ok(ch)
    }

    /// Replaces the dilation metadata without checking it against the Kraus
    /// operators. Used to build negative controls.
    pub fn with_dilation(mut self, dilation: Dilation) -> Self {
        self.dilation = Some(dilation);
        self
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dilation(&self) -> Option<&Dilation> {
        self.dilation.as_ref()
    }

    /// `Σ_j K_j X K_j*` on an arbitrary square input.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::mismatch(
                "channel input",
                self.dim_in,
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.matmul(&x.matmul(&k.adjoint())?)?;
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.as_matrix())?;
        DensityMatrix::new_allow_singular(HermitianMatrix::symmetrize(&out)?)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &KrausChannel) -> Result<Self> {
        if first.dim_out != self.dim_in {
            return Err(Error::mismatch(
                "channel composition",
                self.dim_in,
                first.dim_out,
            ));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a.matmul(b)?);
            }
        }
        Self::new(kraus)
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.iter().map(MatrixFile::from_matrix).collect(),
        }
    }
}

/// JSON form `{"dim_in": n, "dim_out": m, "kraus": [matrix, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixFile>,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<KrausChannel> {
        let kraus = self
            .kraus
            .iter()
            .map(MatrixFile::to_matrix)
            .collect::<Result<Vec<_>>>()?;
        let ch = KrausChannel::new(kraus)?;
        if (ch.dim_in, ch.dim_out) != (self.dim_in, self.dim_out) {
            return Err(Error::mismatch(
                "channel file dimensions",
                format!("{}->{}", self.dim_in, self.dim_out),
                format!("{}->{}", ch.dim_in, ch.dim_out),
            ));
        }
        Ok(ch)
    }
}

/// Exact Haar average of `(I ⊗ u) Y (I ⊗ u*)` over unitaries `u` on the second
/// factor: each `m x m` block `B_kl` becomes `(Tr B_kl / m) I_m`.
pub fn haar_twirl_second_factor(y: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (n, m) = dims;
    if !y.is_square() || y.rows() != n * m {
        return Err(Error::mismatch(
            "twirl input",
            n * m,
            format!("{}x{}", y.rows(), y.cols()),
        ));
    }
    let mut out = ComplexMatrix::zeros(n * m, n * m);
    for k in 0..n {
        for l in 0..n {
            let tr: crate::matrix::C64 = (0..m).map(|a| y[(k * m + a, l * m + a)]).sum();
            let v = tr / m as f64;
            for a in 0..m {
                out[(k * m + a, l * m + a)] = v;
            }
        }
    }
    Ok(out)
}

/// Checks `twirl(U (ρ ⊗ τ) U*) = E(ρ) ⊗ I/env_dim` using the channel's dilation.
pub fn verify_uhlmann_identity(ch: &KrausChannel, rho: &DensityMatrix, tol: f64) -> Result<bool> {
    let dil = match ch.dilation() {
        Some(d) => d.clone(),
        None if ch.kraus.len() == 1
            && ch.kraus[0].distance(&ComplexMatrix::identity(ch.dim_in)) == 0.0 =>
        {
            Dilation {
                unitary: UnitaryMatrix::identity(ch.dim_in),
                env_dim: 1,
            }
        }
        None => return Err(Error::MissingDilation),
    };
    let env = dil.env_dim;
    let u = dil.unitary.as_matrix();
    let joint = u.matmul(&tensor(rho.as_matrix(), &dil.tau()).matmul(&u.adjoint())?)?;
    let lhs = haar_twirl_second_factor(&joint, (ch.dim_in, env))?;
    let rhs = tensor(
        &ch.apply_matrix(rho.as_matrix())?,
        &ComplexMatrix::identity(env).scale(1.0 / env as f64),
    );
    Ok(lhs.distance(&rhs) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ginibre, random_density, random_haar_unitary_with};
    use crate::rng::rng_from_seed;

    #[test]
    fn identity_and_depolarizing() {
        let rho = random_density(3, 3, 1).unwrap();
        let out = KrausChannel::identity(3).apply(&rho).unwrap();
        assert!(out.as_matrix().distance(rho.as_matrix()) < 1e-15);
        let d0 = KrausChannel::depolarizing(3, 0.0)
            .unwrap()
            .apply(&rho)
            .unwrap();
        assert!(d0.as_matrix().distance(rho.as_matrix()) < 1e-14);
        let d1 = KrausChannel::depolarizing(3, 1.0)
            .unwrap()
            .apply(&rho)
            .unwrap();
        assert!(
            d1.as_matrix()
                .distance(DensityMatrix::maximally_mixed(3).as_matrix())
                < 1e-14
        );
        let ch = KrausChannel::depolarizing(3, 0.3).unwrap();
        let expected = &rho.as_matrix().scale(0.7) + &ComplexMatrix::identity(3).scale(0.1);
        assert!(ch.apply(&rho).unwrap().as_matrix().distance(&expected) < 1e-14);
        assert!(KrausChannel::depolarizing(3, 1.5).is_err());
    }

    #[test]
    fn unital_fixed_point() {
        let mut rng = rng_from_seed(2);
        let us: Vec<_> = (0..3)
            .map(|_| random_haar_unitary_with(3, &mut rng))
            .collect();
        let ch = KrausChannel::unitary_mixing(&us).unwrap();
        let mm = DensityMatrix::maximally_mixed(3);
        assert!(ch.apply(&mm).unwrap().as_matrix().distance(mm.as_matrix()) < 1e-14);
        let single = KrausChannel::unitary_mixing(&us[..1]).unwrap();
        let rho = random_density(3, 3, 3).unwrap();
        let u = us[0].as_matrix();
        let direct = u
            .matmul(&rho.as_matrix().matmul(&u.adjoint()).unwrap())
            .unwrap();
        assert!(single.apply(&rho).unwrap().as_matrix().distance(&direct) < 1e-14);
    }

    #[test]
    fn random_channel_is_trace_preserving() {
        for (seed, env) in [(4u64, 1usize), (5, 2), (6, 4), (7, 9)] {
            let ch = KrausChannel::random_cptp(3, env, seed).unwrap();
            let rho = random_density(3, 3, seed + 100).unwrap();
            assert!((ch.apply(&rho).unwrap().trace() - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn dilation_oracle() {
        let ch = KrausChannel::random_cptp(2, 3, 8).unwrap();
        let rho = random_density(2, 2, 9).unwrap();
        let dil = ch.dilation().unwrap();
        let u = dil.unitary.as_matrix();
        let joint = u
            .matmul(
                &tensor(rho.as_matrix(), &dil.tau())
                    .matmul(&u.adjoint())
                    .unwrap(),
            )
            .unwrap();
        let reduced = joint.partial_trace(2, (2, 3)).unwrap();
        assert!(ch.apply(&rho).unwrap().as_matrix().distance(&reduced) < 1e-10);
    }

    #[test]
    fn env_one_is_unitary_conjugation() {
        let ch = KrausChannel::random_cptp(3, 1, 10).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let k = &ch.kraus()[0];
        assert!(
            k.matmul(&k.adjoint())
                .unwrap()
                .distance(&ComplexMatrix::identity(3))
                < 1e-10
        );
    }

    #[test]
    fn partial_trace_channel_matches() {
        let m = ginibre(6, 6, &mut rng_from_seed(11));
        for factor in [1u8, 2] {
            let ch = KrausChannel::partial_trace_channel(2, 3, factor).unwrap();
            let direct = m.partial_trace(factor, (2, 3)).unwrap();
            assert!(ch.apply_matrix(&m).unwrap().distance(&direct) < 1e-13);
        }
        let rho = random_density(2, 2, 12).unwrap();
        let tau = random_density(3, 3, 13).unwrap();
        let ch = KrausChannel::partial_trace_channel(2, 3, 2).unwrap();
        let back = ch
            .apply_matrix(&tensor(rho.as_matrix(), tau.as_matrix()))
            .unwrap();
        assert!(back.distance(rho.as_matrix()) < 1e-11);
    }

    #[test]
    fn twirl_closed_form() {
        let a = ginibre(2, 2, &mut rng_from_seed(14));
        let b = ginibre(3, 3, &mut rng_from_seed(15));
        let tw = haar_twirl_second_factor(&tensor(&a, &b), (2, 3)).unwrap();
        let expected = tensor(
            &a.scale_complex(b.trace() / 3.0),
            &ComplexMatrix::identity(3),
        );
        assert!(tw.distance(&expected) < 1e-13);
        let i = ComplexMatrix::identity(6);
        assert!(haar_twirl_second_factor(&i, (2, 3)).unwrap().distance(&i) < 1e-15);
        let y = ginibre(6, 6, &mut rng_from_seed(16));
        let once = haar_twirl_second_factor(&y, (2, 3)).unwrap();
        let twice = haar_twirl_second_factor(&once, (2, 3)).unwrap();
        assert!(once.distance(&twice) < 1e-12);
        assert!(haar_twirl_second_factor(&y, (2, 2)).is_err());
    }

    #[test]
    fn twirl_monte_carlo() {
        let y = ginibre(4, 4, &mut rng_from_seed(17));
        let mut rng = rng_from_seed(18);
        let mut acc = ComplexMatrix::zeros(4, 4);
        let n = 10_000;
        for _ in 0..n {
            let u = random_haar_unitary_with(2, &mut rng);
            let w = tensor(&ComplexMatrix::identity(2), u.as_matrix());
            acc = &acc + &w.matmul(&y.matmul(&w.adjoint()).unwrap()).unwrap();
        }
        let mc = acc.scale(1.0 / n as f64);
        assert!(
            mc.distance(&haar_twirl_second_factor(&y, (2, 2)).unwrap())
                < 0.02 * y.frobenius_norm().max(1.0)
        );
    }

    #[test]
    fn uhlmann_identity() {
        let rho = random_density(2, 2, 19).unwrap();
        assert!(verify_uhlmann_identity(&KrausChannel::identity(2), &rho, 1e-12).unwrap());
        let ch = KrausChannel::random_cptp(2, 2, 20).unwrap();
        assert!(verify_uhlmann_identity(&ch, &rho, 1e-9).unwrap());
        let other = random_haar_unitary(4, 21).unwrap();
        let corrupted = ch.clone().with_dilation(Dilation {
            unitary: other,
            env_dim: 2,
        });
        assert!(!verify_uhlmann_identity(&corrupted, &rho, 1e-9).unwrap());
        let plain = KrausChannel::depolarizing(2, 0.5).unwrap();
        assert!(matches!(
            verify_uhlmann_identity(&plain, &rho, 1e-9),
            Err(Error::MissingDilation)
        ));
    }

    #[test]
    fn file_round_trip() {
        let ch = KrausChannel::partial_trace_channel(2, 2, 2).unwrap();
        let json = serde_json::to_string(&ch.to_file()).unwrap();
        let back: ChannelFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_channel().unwrap().kraus(), ch.kraus());
        let bad = r#"{"dim_in":1,"dim_out":1,"kraus":[{"dim":1,"entries":[[0.5,0]]}]}"#;
        assert!(serde_json::from_str::<ChannelFile>(bad)
            .unwrap()
            .to_channel()
            .is_err());
    }

    #[test]
    fn composition_stays_cptp() {
        let a = KrausChannel::random_cptp(2, 2, 22).unwrap();
        let b = KrausChannel::depolarizing(2, 0.2).unwrap();
        let c = b.compose(&a).unwrap();
        let rho = random_density(2, 2, 23).unwrap();
        let two_step = b.apply(&a.apply(&rho).unwrap()).unwrap();
        assert!(
            c.apply(&rho)
                .unwrap()
                .as_matrix()
                .distance(two_step.as_matrix())
                < 1e-13
        );
    }
}
